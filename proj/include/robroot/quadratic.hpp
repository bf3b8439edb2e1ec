#pragma once

#include <array>
#include <cmath>

#include "numkit.hpp"
#include "planar.hpp"

namespace robroot {

// a t^2 + b t + c
struct QuadCoeffs {
    double a = 0.0, b = 0.0, c = 0.0;
    bool normalized = false;
    double p_max = 1.0;
    int k = -1;

    std::array<double, 3> vec() const { return {a, b, c}; }
};

inline QuadCoeffs make_quad(double a, double b, double c) { return {a, b, c}; }

struct QuadNormalized {
    QuadCoeffs coeffs;
    std::array<std::array<double, 3>, 3> jac{};  // d p / d p_orig
};

inline QuadNormalized normalize(const std::array<double, 3>& p_orig) {
    auto n = normalize_vec(p_orig);
    QuadNormalized out;
    out.coeffs = {n.p[0], n.p[1], n.p[2], true, n.p_max, n.k};
    out.jac = n.jac;
    if (n.k < 0)
        out.coeffs.p_max = 1.0;
    return out;
}

struct QuadRoots {
    PlanarRoot plus, minus;
    Sign sign_a = Sign::positive;  // sign of a, or the pseudo-sign when a == 0

    const PlanarRoot& get(Branch b) const { return b == Branch::minus ? minus : plus; }
};

// c~ = -b^2/4 + a c; <= 0 real, >= 0 complex
inline double reduced(const QuadCoeffs& q) { return std::fma(q.a, q.c, -0.25 * q.b * q.b); }

inline QuadRoots solve(const QuadCoeffs& q, const RobustDivConfig& cfg = {}) {
    const double a = q.a, b = q.b, c = q.c, T = cfg.t_max;
    QuadRoots r;
    r.plus.branch = Branch::plus;
    r.minus.branch = Branch::minus;

    if (a == 0.0) {
        r.plus.has_pseudo_sign = r.minus.has_pseudo_sign = true;
        if (b == 0.0) {
            if (c == 0.0) {
                r.sign_a = Sign::positive;  // repeated root at 0
            } else {
                // the roots sit at +-infinity; pick a so that they are real
                r.sign_a = c > 0 ? Sign::negative : Sign::positive;
                double s = sign_value(r.sign_a);
                r.plus.tR = s * T;
                r.minus.tR = -s * T;
            }
        } else {
            // arbitrary, and only the unbounded root depends on it
            r.sign_a = Sign::positive;
            double finite = robust_div(-c, b, T) + 0.0;
            double unbounded = -sgn(b) * T;
            if (b > 0) {
                r.plus.tR = finite;
                r.minus.tR = unbounded;
            } else {
                r.plus.tR = unbounded;
                r.minus.tR = finite;
            }
        }
        r.plus.pseudo_sign = r.minus.pseudo_sign = r.sign_a;
        return r;
    }

    r.sign_a = a > 0 ? Sign::positive : Sign::negative;
    // same rounding as reduced() so the classification agrees
    double D = -4.0 * reduced(q);
    if (D < 0) {
        double tR = robust_div(-b, 2.0 * a, T) + 0.0;
        double tI = std::fabs(robust_div(std::sqrt(-D), 2.0 * a, T));
        r.plus.tR = r.minus.tR = tR;
        r.plus.tI = tI;
        r.minus.tI = -tI;
        return r;
    }
    // de-rationalized on the side where -b and sqrt(D) would cancel
    double sD = std::sqrt(D);
    r.plus.tR = (b <= 0 ? robust_div(-b + sD, 2.0 * a, T) : robust_div(2.0 * c, -b - sD, T)) + 0.0;
    r.minus.tR = (b >= 0 ? robust_div(-b - sD, 2.0 * a, T) : robust_div(2.0 * c, -b + sD, T)) + 0.0;
    return r;
}

using QuadJacobian = RootJacobian<3>;

inline QuadJacobian jacobian(const QuadCoeffs& q, const PlanarRoot& root, const RobustDivConfig& cfg = {}) {
    QuadJacobian J;
    const double a = q.a, b = q.b, tR = root.tR, tI = root.tI, M = cfg.M;

    if (tI == 0.0) {
        // plus always has 2a t + b = +sqrt(D), minus has -sqrt(D)
        Sign want = root.branch == Branch::minus ? Sign::negative : Sign::positive;
        double raw = 2.0 * a * tR + b;
        double den = clamp_signed(raw, want);
        J.clamped[0] = !(want == Sign::positive ? raw > 0 : raw < 0);
        std::array<double, 3> dir;
        double N = 1.0;
        if (std::fabs(tR) > 1.0) {
            double u = 1.0 / tR;
            dir = {1.0, u, u * u};
            N = tR * tR;
        } else {
            dir = {tR * tR, tR, 1.0};
        }
        J.factored_scale[0] = N;
        J.saturated[0] = scaled_row(J.rows[0], N, dir, den, M);
        return J;
    }

    // complex roots only exist for a != 0
    std::array<double, 3> d1 = {2.0 * tR, 1.0, 0.0};
    double N1 = factor_out(d1);
    J.factored_scale[0] = N1;
    J.saturated[0] = scaled_row(J.rows[0], N1, d1, 2.0 * a, M);

    double diff = factored_diff_sq(tR, tI);
    std::array<double, 3> d2 = {-diff, -tR, -1.0};
    double N2 = factor_out(d2);
    J.factored_scale[1] = N2;
    J.saturated[1] = scaled_row(J.rows[1], N2, d2, 2.0 * a * tI, M);
    return J;
}

}  // namespace robroot
