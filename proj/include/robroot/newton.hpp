#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "planar.hpp"
#include "quadratic.hpp"
#include "tape.hpp"

namespace robroot {

template <class T>
struct Lifted {
    T r, i;
};

// One complex Newton step for a t^2 + b t + c, written around the vertex
// v = -b/(2a) so that the lines tI = 0 and tR = v are reproduced exactly.
// eps is the Levenberg-Marquardt term added to s = |f'|^2.
template <class T>
Lifted<T> newton_update(const T& a, const T& b, const T& c, const Lifted<T>& t, double eps = 0.0) {
    if (value_of(a) == 0.0) {
        if (value_of(b) == 0.0)
            throw std::invalid_argument("newton: a == b == 0 has no isolated root");
        if (eps == 0.0)
            return {-c / b, t.i * 0.0};
        // t - conj(f') f / (|f'|^2 + eps) with f' = b
        T s = b * b + eps;
        T fr = b * t.r + c;
        T fi = b * t.i;
        return {t.r - b * fr / s, t.i - b * fi / s};
    }
    T v = -b / (2.0 * a);
    T alpha = 2.0 * a * (t.r - v);
    T beta = 2.0 * a * t.i;
    T ct = a * c - b * b / 4.0;
    T s = alpha * alpha + beta * beta;
    T den = s + eps;
    T four_a = 4.0 * a;
    T r = v + alpha / four_a * (2.0 - (s + 4.0 * ct) / den);
    T i = beta / four_a * (2.0 - (s - 4.0 * ct) / den);
    return {r, i};
}

struct NewtonState {
    double tR = 0.0, tI = 0.0;
    int iteration = 0;
    double s = 0.0;  // |f'(t)|^2
    double epsilon = 0.0;
};

inline double newton_s(const QuadCoeffs& p, double tR, double tI) {
    double x = 2.0 * p.a * tR + p.b, y = 2.0 * p.a * tI;
    return x * x + y * y;
}

inline NewtonState newton_step(const NewtonState& st, const QuadCoeffs& p, double epsilon) {
    auto t = newton_update<double>(p.a, p.b, p.c, {st.tR, st.tI}, epsilon);
    NewtonState out;
    out.tR = t.r;
    out.tI = t.i;
    out.iteration = st.iteration + 1;
    out.s = newton_s(p, t.r, t.i);
    out.epsilon = epsilon;
    return out;
}

// |a t^2 + b t + c| at a complex t
inline double residual_abs(const QuadCoeffs& p, double tR, double tI) {
    double re = p.a * (tR * tR - tI * tI) + p.b * tR + p.c;
    double im = (2.0 * p.a * tR + p.b) * tI;
    return std::hypot(re, im);
}

enum class BracketSide { real_left_of_vertex, real_right_of_vertex, imag_upper, imag_lower };

// A 1-D slice through the vertex on which the root is bracketed: the real axis
// (coordinate t) or the vertical line tR = -b/(2a) (coordinate tI).
struct BisectionBracket {
    double E_left = 0.0, E_right = 0.0;
    BracketSide side = BracketSide::real_right_of_vertex;
};

inline bool on_imag_axis(BracketSide s) { return s == BracketSide::imag_upper || s == BracketSide::imag_lower; }

// Half-line from the vertex, truncated at K times the distance to the root.
inline BisectionBracket safe_bracket(const QuadCoeffs& p, BracketSide side, double K) {
    if (p.a == 0.0)
        throw std::invalid_argument("safe_bracket: needs a != 0");
    double v = -p.b / (2.0 * p.a);
    double h = std::sqrt(std::fabs(4.0 * reduced(p))) / (2.0 * std::fabs(p.a));
    switch (side) {
        case BracketSide::real_right_of_vertex: return {v, v + K * h, side};
        case BracketSide::real_left_of_vertex: return {v - K * h, v, side};
        case BracketSide::imag_upper: return {0.0, K * h, side};
        case BracketSide::imag_lower: return {-K * h, 0.0, side};
    }
    return {};
}

namespace detail {

// f restricted to the slice, and its derivative along the slice
inline double slice_f(const QuadCoeffs& p, BracketSide side, double x) {
    if (!on_imag_axis(side))
        return (p.a * x + p.b) * x + p.c;
    return reduced(p) / p.a - p.a * x * x;
}

inline double slice_df(const QuadCoeffs& p, BracketSide side, double x) {
    if (!on_imag_axis(side))
        return 2.0 * p.a * x + p.b;
    return -2.0 * p.a * x;
}

inline void check_sign_change(const QuadCoeffs& p, const BisectionBracket& br) {
    double fl = detail::slice_f(p, br.side, br.E_left), fr = detail::slice_f(p, br.side, br.E_right);
    if (fl != 0.0 && fr != 0.0 && sgn(fl) == sgn(fr))
        throw std::invalid_argument("bracket has no sign change");
}

}  // namespace detail

struct NewtonOptions {
    int max_iter = 100;
    double tol = 1e-14;  // on |f|; 0 runs every iteration
    double epsilon = 0.0;
    std::optional<BisectionBracket> bracket;
};

struct NewtonResult {
    PlanarRoot root;
    int iterations = 0;
    bool converged = false;
    std::vector<NewtonState> history;  // includes the initial guess
};

inline NewtonResult newton_solve(const QuadCoeffs& p, double t0R, double t0I, const NewtonOptions& opt = {}) {
    NewtonResult res;
    NewtonState st;
    st.tR = t0R;
    st.tI = t0I;
    st.s = newton_s(p, t0R, t0I);
    st.epsilon = opt.epsilon;
    res.history.push_back(st);

    if (!opt.bracket) {
        for (int k = 0; k < opt.max_iter; ++k) {
            if (opt.tol > 0 && residual_abs(p, st.tR, st.tI) <= opt.tol) {
                res.converged = true;
                break;
            }
            st = newton_step(st, p, opt.epsilon);
            res.history.push_back(st);
        }
        if (!res.converged)
            res.converged = opt.tol > 0 && residual_abs(p, st.tR, st.tI) <= opt.tol;
        res.root.tR = st.tR;
        res.root.tI = st.tI;
        res.iterations = st.iteration;
        return res;
    }

    // hybrid: Newton along the slice, bisection whenever the step leaves the bracket
    const BisectionBracket& br = *opt.bracket;
    detail::check_sign_change(p, br);
    const bool imag = on_imag_axis(br.side);
    const double v = p.a != 0.0 ? -p.b / (2.0 * p.a) : 0.0;
    double lo = br.E_left, hi = br.E_right;
    double slo = sgn(detail::slice_f(p, br.side, lo));
    double x = imag ? t0I : t0R;
    if (!(x >= lo && x <= hi))
        x = 0.5 * (lo + hi);
    int k = 0;
    for (; k < opt.max_iter; ++k) {
        double fx = detail::slice_f(p, br.side, x);
        if (std::fabs(fx) <= opt.tol) {
            res.converged = true;
            break;
        }
        if (sgn(fx) == slo)
            lo = x;
        else
            hi = x;
        double d = detail::slice_df(p, br.side, x);
        double xn = d != 0.0 ? x - fx / d : lo;
        x = (xn > lo && xn < hi) ? xn : 0.5 * (lo + hi);
        NewtonState s2;
        s2.tR = imag ? v : x;
        s2.tI = imag ? x : 0.0;
        s2.iteration = k + 1;
        s2.s = newton_s(p, s2.tR, s2.tI);
        s2.epsilon = opt.epsilon;
        res.history.push_back(s2);
    }
    res.root.tR = imag ? v : x;
    res.root.tI = imag ? x : 0.0;
    res.iterations = k;
    if (!res.converged)
        res.converged = std::fabs(detail::slice_f(p, br.side, x)) <= opt.tol;
    return res;
}

// Newton iterations recorded on a tape with inputs (a, b, c, tR0, tI0).
// Stopping decisions are taken on values and become part of the control flow.
struct TapedNewton {
    Tape tape;
    Var a, b, c, tR0, tI0;
    Var tR, tI;
    int iterations = 0;
};

inline TapedNewton newton_taped(const QuadCoeffs& p, double t0R, double t0I, int n_iter, double epsilon = 0.0,
                                double tol = 0.0) {
    TapedNewton tn;
    Tape* T = &tn.tape;
    tn.a = {T, T->input(p.a)};
    tn.b = {T, T->input(p.b)};
    tn.c = {T, T->input(p.c)};
    tn.tR0 = {T, T->input(t0R)};
    tn.tI0 = {T, T->input(t0I)};
    Lifted<Var> t{tn.tR0, tn.tI0};
    for (int k = 0; k < n_iter; ++k) {
        if (tol > 0 && residual_abs(p, t.r.value(), t.i.value()) <= tol)
            break;
        t = newton_update<Var>(tn.a, tn.b, tn.c, t, epsilon);
        ++tn.iterations;
    }
    tn.tR = t.r;
    tn.tI = t.i;
    return tn;
}

// d(tR, tI)/d(a, b, c) by reverse accumulation over the recorded steps
inline std::array<std::array<double, 3>, 2> backprop_through_newton(const TapedNewton& tn) {
    std::array<std::array<double, 3>, 2> g{};
    auto gr = tn.tape.gradient(tn.tR.id);
    auto gi = tn.tape.gradient(tn.tI.id);
    for (int j = 0; j < 3; ++j) {
        g[0][j] = gr[j];
        g[1][j] = gi[j];
    }
    return g;
}

struct BisectionResult {
    std::vector<double> midpoints;
    double eta = 0.5;  // last midpoint = eta * E_left + (1 - eta) * E_right
    double root = 0.0;
};

inline BisectionResult bisect(const BisectionBracket& br, const QuadCoeffs& p, int n_steps) {
    detail::check_sign_change(p, br);
    BisectionResult res;
    double lo = br.E_left, hi = br.E_right;
    double slo = sgn(detail::slice_f(p, br.side, lo));
    double mid = 0.5 * (lo + hi);
    for (int k = 0; k < n_steps; ++k) {
        mid = 0.5 * (lo + hi);
        res.midpoints.push_back(mid);
        double fm = detail::slice_f(p, br.side, mid);
        if (fm == 0.0)
            break;
        if (sgn(fm) == slo)
            lo = mid;
        else
            hi = mid;
    }
    res.root = mid;
    res.eta = (br.E_right - mid) / (br.E_right - br.E_left);
    return res;
}

}  // namespace robroot
