#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "numkit.hpp"
#include "planar.hpp"
#include "quadratic.hpp"

namespace robroot {

// q t^3 + a t^2 + b t + c
struct CubicCoeffs {
    double q = 0.0, a = 0.0, b = 0.0, c = 0.0;
    bool normalized = false;
    bool sign_flipped = false;
    double p_max = 1.0;
    int k = -1;

    std::array<double, 4> vec() const { return {q, a, b, c}; }
    double eval(double t) const { return ((q * t + a) * t + b) * t + c; }
    double deriv(double t) const { return (3.0 * q * t + 2.0 * a) * t + b; }
};

inline CubicCoeffs make_cubic(double q, double a, double b, double c) { return {q, a, b, c}; }

struct CubicNormalized {
    CubicCoeffs coeffs;
    std::array<std::array<double, 4>, 4> jac{};  // d p / d p_orig, flip included
};

inline CubicNormalized normalize_cubic(const std::array<double, 4>& p_orig) {
    auto n = normalize_vec(p_orig);
    CubicNormalized out;
    out.jac = n.jac;
    out.coeffs = {n.p[0], n.p[1], n.p[2], n.p[3], true, false, n.k < 0 ? 1.0 : n.p_max, n.k};
    if (out.coeffs.q < 0) {
        out.coeffs.q = -out.coeffs.q;
        out.coeffs.a = -out.coeffs.a;
        out.coeffs.b = -out.coeffs.b;
        out.coeffs.c = -out.coeffs.c;
        out.coeffs.sign_flipped = true;
        for (auto& row : out.jac)
            for (double& x : row)
                x = -x;
    }
    return out;
}

// shifted t~ = q t + a/3 removes the quadratic term
struct ReducedCubicHat {
    double b_hat = 0.0, c_hat = 0.0;
};

// sign(c_tilde) classifies the roots
struct CanonicalCubicTilde {
    double b_tilde = 0.0, c_tilde = 0.0;
};

inline ReducedCubicHat to_hat(const CubicCoeffs& p) {
    const double q = p.q, a = p.a, b = p.b, c = p.c;
    return {-a * a / 3.0 + q * b, 2.0 * a * a * a / 27.0 - q * a * b / 3.0 + q * q * c};
}

inline CanonicalCubicTilde to_tilde(const ReducedCubicHat& h) {
    return {h.c_hat, h.b_hat * h.b_hat * h.b_hat / 27.0 + h.c_hat * h.c_hat / 4.0};
}

inline ReducedCubicHat hat_from_tilde(const CanonicalCubicTilde& t) {
    return {-3.0 * std::cbrt(t.b_tilde * t.b_tilde / 4.0 - t.c_tilde), t.b_tilde};
}

inline CanonicalCubicTilde to_tilde(const CubicCoeffs& p) { return to_tilde(to_hat(p)); }

enum class CubicPath { direct, reversed, degenerate };

struct CubicRootSet {
    std::array<PlanarRoot, 3> roots{};  // indexed plus, mid, minus
    int real_count = 3;
    bool q_is_zero = false;
    Sign sign_q = Sign::positive;  // sign of q, or its pseudo-sign
    int deflation_choice = 0;      // which iterative root became r1
    CubicPath path = CubicPath::direct;
    bool converged = true;
    double bracket_lo = 0.0, bracket_hi = 0.0;  // worst unresolved interval, if any

    PlanarRoot& get(Branch b) { return roots[static_cast<int>(b)]; }
    const PlanarRoot& get(Branch b) const { return roots[static_cast<int>(b)]; }
};

struct CubicSolverConfig {
    double tol = 1e-13;
    int max_iter = 200;
    double small_q = 0x1p-20;
    double merge_guard = 1e-14;
};

namespace detail {

struct IterResult {
    double x;
    bool converged;
    double lo, hi;
};

// safeguarded Newton on a bracket with f(lo), f(hi) of opposite sign
inline IterResult newton_bisect(const CubicCoeffs& p, double lo, double hi, double tol, int max_iter) {
    double flo = p.eval(lo);
    if (flo == 0.0)
        return {lo, true, lo, hi};
    double fhi = p.eval(hi);
    if (fhi == 0.0)
        return {hi, true, lo, hi};
    const double slo = sgn(flo);
    double x = 0.5 * (lo + hi);
    double dx_old = hi - lo, dx = dx_old;
    for (int it = 0; it < max_iter; ++it) {
        double fx = p.eval(x);
        double scale = std::fabs(p.q) * std::fabs(x * x * x) + std::fabs(p.a) * x * x
                     + std::fabs(p.b * x) + std::fabs(p.c);
        if (fx == 0.0 || std::fabs(fx) <= tol * scale)
            return {x, true, lo, hi};
        if (sgn(fx) == slo)
            lo = x;
        else
            hi = x;
        double w = std::max(std::fabs(lo), std::fabs(hi));
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * w || hi - lo <= std::numeric_limits<double>::denorm_min())
            return {x, true, lo, hi};
        double d = p.deriv(x);
        double xn = d != 0.0 ? x - fx / d : lo - 1.0;
        // reject steps that leave the bracket or fail to halve the previous-but-one step
        if (!(xn > lo && xn < hi) || std::fabs(2.0 * (xn - x)) > std::fabs(dx_old)) {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx_old = dx;
            dx = xn - x;
            x = xn;
        }
    }
    return {x, false, lo, hi};
}

// critical points of q t^3 + a t^2 + b t + c (q > 0), de-rationalized
inline int critical_points(double q, double a, double b, double& lo, double& hi) {
    double disc = a * a - 3.0 * q * b;
    if (disc < 0)
        return 0;
    double s = std::sqrt(disc);
    if (a > 0) {
        lo = (-a - s) / (3.0 * q);
        hi = -b / (a + s);
    } else {
        double den = -a + s;
        hi = den / (3.0 * q);
        lo = den != 0.0 ? b / den : 0.0;
    }
    if (lo > hi)
        std::swap(lo, hi);
    return disc == 0.0 ? 1 : 2;
}

struct RealRoots {
    std::vector<double> xs;
    bool converged = true;
    double lo = 0.0, hi = 0.0;
};

// real roots of a cubic with q >= small_q > 0 and |coefficients| <= 1
inline RealRoots interval_roots(const CubicCoeffs& p, const CubicSolverConfig& sc) {
    RealRoots out;
    double L = -3.0 / p.q, R = 3.0 / p.q;
    std::vector<double> pts{L};
    double c0 = 0, c1 = 0;
    int n = critical_points(p.q, p.a, p.b, c0, c1);
    // critical points outside the ordering are dropped
    if (n >= 1 && c0 > L && c0 < R)
        pts.push_back(c0);
    if (n == 2 && c1 > pts.back() && c1 < R)
        pts.push_back(c1);
    pts.push_back(R);
    for (std::size_t i = 1; i + 1 < pts.size(); ++i)
        if (p.eval(pts[i]) == 0.0)
            out.xs.push_back(pts[i]);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double f0 = p.eval(pts[i]), f1 = p.eval(pts[i + 1]);
        if (f0 == 0.0 || f1 == 0.0 || sgn(f0) == sgn(f1))
            continue;
        auto r = newton_bisect(p, pts[i], pts[i + 1], sc.tol, sc.max_iter);
        if (!r.converged) {
            out.converged = false;
            out.lo = r.lo;
            out.hi = r.hi;
        }
        out.xs.push_back(r.x);
    }
    return out;
}

// pick the root whose deflated quadratic q t^2 + B t + C has the largest discriminant
inline int best_deflation(const CubicCoeffs& p, const std::vector<double>& xs) {
    int best = 0;
    double best_disc = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = xs[i];
        double B = p.q * r + p.a;
        double C = B * r + p.b;
        double disc = B * B - 4.0 * p.q * C;
        if (disc > best_disc) {
            best_disc = disc;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace detail

// Three roots with labels in the shifted (t~) sense: for real roots plus is the
// largest sign(q)*t and minus the smallest; with one real root it is plus when
// b~ <= 0, otherwise minus, and the conjugate pair takes the two other labels
// (positive imaginary part, in the t~ sense, first).
inline CubicRootSet solve_cubic(const CubicCoeffs& in, const RobustDivConfig& cfg = {},
                                const CubicSolverConfig& sc = {}) {
    CubicRootSet rs;
    rs.q_is_zero = in.q == 0.0;
    rs.sign_q = in.q < 0 ? Sign::negative : Sign::positive;
    const double T = cfg.t_max;

    // internal copy: bounded by 1, q >= 0
    CubicCoeffs p = normalize_cubic(in.vec()).coeffs;

    double r1 = 0.0;
    QuadRoots rest;
    auto degenerate = [&] {
        rs.path = CubicPath::degenerate;
        QuadCoeffs qc{p.a, p.b, p.c};
        rest = solve(qc, cfg);
        if (p.a == 0.0 && p.b == 0.0 && p.c == 0.0)
            r1 = 0.0;  // triple root at 0
        else
            r1 = -sign_value(rest.sign_a) * T;
    };

    if (p.q >= sc.small_q) {
        rs.path = CubicPath::direct;
        auto rr = detail::interval_roots(p, sc);
        rs.converged = rr.converged;
        rs.bracket_lo = rr.lo;
        rs.bracket_hi = rr.hi;
        if (rr.xs.empty()) {
            // cannot happen for an odd degree with a sign change on [-3/q, 3/q]
            rs.converged = false;
            rr.xs.push_back(0.0);
        }
        int k = detail::best_deflation(p, rr.xs);
        rs.deflation_choice = k;
        r1 = rr.xs[k];
        double B = p.q * r1 + p.a;
        rest = solve(QuadCoeffs{p.q, B, B * r1 + p.b}, cfg);
    } else if (p.q != 0.0 && std::fabs(p.c) >= sc.small_q) {
        // reversed cubic in s = 1/t
        rs.path = CubicPath::reversed;
        CubicCoeffs rv{p.c, p.b, p.a, p.q};
        if (rv.q < 0)
            rv = {-rv.q, -rv.a, -rv.b, -rv.c};
        auto rr = detail::interval_roots(rv, sc);
        rs.converged = rr.converged;
        rs.bracket_lo = rr.lo;
        rs.bracket_hi = rr.hi;
        int k = rr.xs.empty() ? -1 : detail::best_deflation(rv, rr.xs);
        if (k < 0 || rr.xs[k] == 0.0) {
            degenerate();
        } else {
            rs.deflation_choice = k;
            double s1 = rr.xs[k];
            double B = rv.q * s1 + rv.a;
            rest = solve(QuadCoeffs{B * s1 + rv.b, B, rv.q}, cfg);
            r1 = robust_div(1.0, s1, T);
        }
    } else {
        degenerate();
    }

    std::array<PlanarRoot, 3> raw{};
    raw[0].tR = r1;
    raw[1] = rest.plus;
    raw[2] = rest.minus;
    for (auto& r : raw) {
        r.has_pseudo_sign = rs.q_is_zero;
        r.pseudo_sign = Sign::positive;
    }

    const double sq = sign_value(rs.sign_q);
    auto tilde = to_tilde(in);
    bool pair = raw[1].tI != 0.0;
    if (pair && !rs.q_is_zero) {
        // numerically merged pair: snap to the real axis
        bool tiny = std::fabs(raw[1].tI) <= 1e-6 * std::max(1.0, std::fabs(raw[1].tR));
        if (tiny && std::fabs(tilde.c_tilde) <= sc.merge_guard * std::max(1.0, tilde.b_tilde * tilde.b_tilde)) {
            raw[1].tI = raw[2].tI = 0.0;
            pair = false;
        }
    }

    if (!pair) {
        rs.real_count = 3;
        std::sort(raw.begin(), raw.end(), [&](const PlanarRoot& x, const PlanarRoot& y) { return sq * x.tR > sq * y.tR; });
        rs.roots = raw;
    } else {
        rs.real_count = 1;
        PlanarRoot lone = raw[0];
        // +Im in the t~ sense means sign(q) * tI > 0
        PlanarRoot up = sq * raw[1].tI > 0 ? raw[1] : raw[2];
        PlanarRoot down = sq * raw[1].tI > 0 ? raw[2] : raw[1];
        if (tilde.b_tilde <= 0.0)
            rs.roots = {lone, up, down};
        else
            rs.roots = {up, down, lone};
    }
    rs.roots[0].branch = Branch::plus;
    rs.roots[1].branch = Branch::mid;
    rs.roots[2].branch = Branch::minus;
    return rs;
}

// Roots of t~^3 + b^ t~ + c^ from the canonical parameters, labelled as above.
inline CubicRootSet roots_canonical(const CanonicalCubicTilde& t) {
    CubicRootSet rs;
    const double bt = t.b_tilde, ct = t.c_tilde;
    const double pi = std::numbers::pi;
    auto& P = rs.roots[0];
    auto& Mi = rs.roots[1];
    auto& Mn = rs.roots[2];
    if (bt == 0.0 && ct == 0.0) {
        rs.real_count = 3;
    } else if (ct < 0) {
        rs.real_count = 3;
        double R = std::pow(bt * bt / 4.0 - ct, 1.0 / 6.0);
        double th0 = std::atan2(std::sqrt(-ct), -bt / 2.0);
        P.tR = 2.0 * R * std::cos(th0 / 3.0);
        Mi.tR = 2.0 * R * std::cos((th0 - 2.0 * pi) / 3.0);
        Mn.tR = 2.0 * R * std::cos((th0 + 2.0 * pi) / 3.0);
    } else if (ct > 0) {
        rs.real_count = 1;
        double sc = std::sqrt(ct);
        double xs = std::cbrt(-bt / 2.0 + sc), xd = std::cbrt(-bt / 2.0 - sc);
        double re = -(xs + xd) / 2.0, im = std::sqrt(3.0) / 2.0 * (xs - xd);
        PlanarRoot lone, up, down;
        lone.tR = xs + xd;
        up.tR = down.tR = re;
        up.tI = std::fabs(im);
        down.tI = -std::fabs(im);
        if (bt <= 0.0)
            rs.roots = {lone, up, down};
        else
            rs.roots = {up, down, lone};
    } else {
        rs.real_count = 3;
        double m = std::cbrt(bt / 2.0);
        if (bt < 0) {
            Mn.tR = Mi.tR = m;
            P.tR = -2.0 * m;
        } else {
            P.tR = Mi.tR = m;
            Mn.tR = -2.0 * m;
        }
    }
    rs.roots[0].branch = Branch::plus;
    rs.roots[1].branch = Branch::mid;
    rs.roots[2].branch = Branch::minus;
    return rs;
}

enum class CubicFormula { real, complex_a_dominant, complex_axis, complex_general };

inline const char* formula_name(CubicFormula f) {
    switch (f) {
        case CubicFormula::real: return "real";
        case CubicFormula::complex_a_dominant: return "complex_a_dominant";
        case CubicFormula::complex_axis: return "complex_axis";
        case CubicFormula::complex_general: return "complex_general";
    }
    return "?";
}

struct CubicJacobian : RootJacobian<4> {
    CubicFormula formula = CubicFormula::real;
};

namespace detail {

// like factor_out, but an overflowed entry keeps only its sign
inline double factor_out_safe(std::array<double, 4>& v) {
    bool inf = false;
    for (double x : v)
        inf = inf || std::isinf(x);
    if (!inf) {
        for (double& x : v)
            if (std::isnan(x))
                x = 0.0;
        return factor_out(v);
    }
    for (double& x : v)
        x = std::isinf(x) ? sgn(x) : 0.0;
    return std::numeric_limits<double>::infinity();
}

}  // namespace detail

// d(tR, tI)/d(q, a, b, c) for a root returned by solve_cubic on the same coefficients.
inline CubicJacobian jacobian_cubic(const CubicCoeffs& p, const PlanarRoot& root, const RobustDivConfig& cfg = {}) {
    CubicJacobian J;
    const double q = p.q, a = p.a, b = p.b, tR = root.tR, tI = root.tI, M = cfg.M;
    const double sq = q < 0 ? -1.0 : 1.0;

    auto put = [&](int row, std::array<double, 4> v, double den) {
        double N = detail::factor_out_safe(v);
        J.factored_scale[row] = N;
        J.saturated[row] = scaled_row(J.rows[row], N, v, den, M);
    };

    if (tI == 0.0) {
        J.formula = CubicFormula::real;
        double want = root.branch == Branch::mid ? -sq : sq;
        double raw = (3.0 * q * tR + 2.0 * a) * tR + b;
        double den = clamp_signed(raw, want > 0 ? Sign::positive : Sign::negative);
        // a zero denominator counts as repaired too
        J.clamped[0] = !(want > 0 ? raw > 0 : raw < 0);
        std::array<double, 4> dir;
        double N = 1.0;
        if (std::fabs(tR) > 1.0) {
            double u = 1.0 / tR, s = sgn(tR), au = std::fabs(u);
            dir = {s, au, s * u * u, au * au * au};
            N = std::fabs(tR) * tR * tR;
        } else {
            dir = {tR * tR * tR, tR * tR, tR, 1.0};
        }
        J.factored_scale[0] = N;
        J.saturated[0] = scaled_row(J.rows[0], N, dir, den, M);
        return J;
    }

    const double g = 3.0 * q * tR + a;
    if (q == 0.0 || std::fabs(q) * (std::fabs(tR) + std::fabs(tI)) <= 1e-12 * std::fabs(a)) {
        // the cubic term is a perturbation of a quadratic with a != 0
        J.formula = CubicFormula::complex_a_dominant;
        put(0, {factored_diff_sq(tR, tI, 3.0, 1.0), 2.0 * tR, 1.0, 0.0}, 2.0 * a);
        put(1, {-tR * factored_diff_sq(tR, tI, 1.0, 3.0), -factored_diff_sq(tR, tI), -tR, -1.0}, 2.0 * a * tI);
        return J;
    }
    if (g == 0.0 || std::fabs(g) <= 1e-12 * std::fabs(q * tI)) {
        // on the axis 3 q tR + a = 0
        J.formula = CubicFormula::complex_axis;
        put(0, {-tR * factored_diff_sq(tR, tI, 1.0, 3.0), -factored_diff_sq(tR, tI), -tR, -1.0}, 2.0 * q * tI * tI);
        put(1, {-factored_diff_sq(tR, tI, 3.0, 1.0), -2.0 * tR, -1.0, 0.0}, 2.0 * q * tI);
        return J;
    }
    J.formula = CubicFormula::complex_general;
    double Dn = g * g + (q * tI) * (q * tI);
    double tR2 = tR * tR, tI2 = tI * tI;
    put(0, {(8.0 * q * tR + 3.0 * a) * tR2 - a * tI2, 5.0 * q * tR2 + q * tI2 + 2.0 * a * tR, 2.0 * q * tR + a, -q},
        2.0 * Dn);
    put(1,
        {-(g * tR * tR2 - (q * tI2 + 6.0 * q * tR2 + 3.0 * a * tR) * tI2), -(g * tR2 - (q * tR + a) * tI2),
         -(3.0 * q * tR2 + q * tI2 + a * tR), -g},
        2.0 * tI * Dn);
    return J;
}

}  // namespace robroot
