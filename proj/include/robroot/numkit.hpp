#pragma once

#include <cmath>
#include <stdexcept>

namespace robroot {

// M bounds every derivative entry, t_max bounds every root.
// t_max*t_max must stay finite: with the default 1e150 it is 1e300.
struct RobustDivConfig {
    double M = 1000.0;
    double t_max = 1e150;

    bool valid() const {
        return M > 0 && t_max > 0 && std::isfinite(t_max * t_max);
    }
};

enum class Sign { positive, negative };

inline double sign_value(Sign s) { return s == Sign::positive ? 1.0 : -1.0; }
inline Sign flip(Sign s) { return s == Sign::positive ? Sign::negative : Sign::positive; }

// saturating n/d; |result| <= bound, signed zeros count as signs
inline double robust_div(double n, double d, double bound) {
    if (std::fabs(n) < std::fabs(d) * bound)
        return n / d;
    if (n == 0.0)
        return 0.0;
    bool neg = std::signbit(n) != std::signbit(d);
    return neg ? -bound : bound;
}

inline double robust_div(double n, double d, const RobustDivConfig& cfg) {
    return robust_div(n, d, cfg.M);
}

// Keep den when it already has the requested sign, otherwise replace it by
// +-floor. floor == 0 just repairs the sign (a signed zero).
inline double clamp_signed(double den, Sign s, double floor = 0.0) {
    if (floor < 0)
        throw std::invalid_argument("clamp_signed: negative floor");
    if (s == Sign::positive ? den > 0 : den < 0)
        return den;
    return std::copysign(floor, sign_value(s));
}

// wx*x^2 - wy*y^2 as a product of sum and difference
inline double factored_diff_sq(double x, double y, double wx = 1.0, double wy = 1.0) {
    double u = std::sqrt(wx) * x;
    double v = std::sqrt(wy) * y;
    return (u + v) * (u - v);
}

inline double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace robroot
