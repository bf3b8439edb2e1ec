#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "numkit.hpp"

namespace robroot {

enum class Branch { plus, mid, minus };

inline const char* branch_name(Branch b) {
    switch (b) {
        case Branch::plus: return "plus";
        case Branch::mid: return "mid";
        case Branch::minus: return "minus";
    }
    return "?";
}

inline bool parse_branch(const std::string& s, Branch& out) {
    if (s == "plus" || s == "+") { out = Branch::plus; return true; }
    if (s == "mid" || s == "M") { out = Branch::mid; return true; }
    if (s == "minus" || s == "-") { out = Branch::minus; return true; }
    return false;
}

// A root lifted to R^2.
struct PlanarRoot {
    double tR = 0.0;
    double tI = 0.0;
    Branch branch = Branch::plus;
    bool has_pseudo_sign = false;  // leading coefficient was exactly zero
    Sign pseudo_sign = Sign::positive;

    bool is_complex() const { return tI != 0.0; }
};

// d(tR, tI)/dp, one row per component
template <std::size_t N>
struct RootJacobian {
    std::array<std::array<double, N>, 2> rows{};
    std::array<bool, 2> clamped{false, false};     // a denominator had its sign repaired
    std::array<bool, 2> saturated{false, false};   // robust division hit +-M
    std::array<double, 2> factored_scale{1.0, 1.0};
};

// row = -(N/den) * dir, where N is the magnitude pulled out of the direction.
// Returns true if the division saturated.
template <std::size_t K>
inline bool scaled_row(std::array<double, K>& row, double N, const std::array<double, K>& dir,
                       double den, double bound) {
    double s = robust_div(N, den, bound);
    for (std::size_t i = 0; i < K; ++i)
        row[i] = -s * dir[i] + 0.0;
    return std::fabs(s) >= bound;
}

// split v into N * dir with max|dir| <= 1 whenever max|v| > 1
template <std::size_t K>
inline double factor_out(std::array<double, K>& v) {
    double N = 0.0;
    for (double x : v)
        N = std::max(N, std::fabs(x));
    if (N <= 1.0)
        return 1.0;
    for (double& x : v)
        x /= N;
    return N;
}

// Divide by the largest magnitude when it exceeds 1.
// Uses |p_max| so the signs (and therefore the branch labels) survive;
// jac = d p / d p_orig = (|P| I - sign(P) p_orig e_k^T) / P^2.
template <std::size_t K>
struct Normalization {
    std::array<double, K> p{};
    double p_max = 1.0;
    int k = -1;
    std::array<std::array<double, K>, K> jac{};
};

template <std::size_t K>
inline Normalization<K> normalize_vec(const std::array<double, K>& p_orig) {
    Normalization<K> out;
    out.p = p_orig;
    double big = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        out.jac[i][i] = 1.0;
        if (std::fabs(p_orig[i]) > big) {
            big = std::fabs(p_orig[i]);
            out.k = static_cast<int>(i);
        }
    }
    if (big <= 1.0) {
        out.k = -1;
        return out;
    }
    double P = p_orig[out.k];
    out.p_max = P;
    double P2 = P * P;
    for (std::size_t i = 0; i < K; ++i) {
        out.p[i] = p_orig[i] / big;
        for (std::size_t j = 0; j < K; ++j)
            out.jac[i][j] = ((i == j ? big : 0.0) - (static_cast<int>(j) == out.k ? sgn(P) * p_orig[i] : 0.0)) / P2;
    }
    out.p[out.k] = sgn(P);
    return out;
}

// g_orig = jac^T g
template <std::size_t K>
inline std::array<double, K> chain_to_orig(const Normalization<K>& n, const std::array<double, K>& g) {
    std::array<double, K> out{};
    for (std::size_t j = 0; j < K; ++j)
        for (std::size_t i = 0; i < K; ++i)
            out[j] += n.jac[i][j] * g[i];
    return out;
}

}  // namespace robroot
