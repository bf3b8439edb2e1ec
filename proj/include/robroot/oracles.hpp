#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

// Independent reference computations for the tests. Nothing in the library uses them.

namespace robroot::oracle {

using VecFn = std::function<std::vector<double>(const std::vector<double>&)>;

// central differences, J[i][j] = d f_i / d x_j
inline std::vector<std::vector<double>> fd_jacobian(const VecFn& f, const std::vector<double>& x, double step) {
    std::vector<std::vector<double>> J;
    std::vector<double> xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + step;
        xm[j] = x[j] - step;
        auto fp = f(xp), fm = f(xm);
        if (J.empty())
            J.assign(fp.size(), std::vector<double>(x.size(), 0.0));
        for (std::size_t i = 0; i < fp.size(); ++i)
            J[i][j] = (fp[i] - fm[i]) / (xp[j] - xm[j]);
        xp[j] = xm[j] = x[j];
    }
    return J;
}

struct OracleRoot {
    double x;
    bool sign_touch;  // |f| touches zero without crossing, or crosses with f' ~ 0
};

// Horner with coefficients from the highest degree down
inline double poly_eval(const std::vector<double>& p, double x) {
    double r = 0.0;
    for (double c : p)
        r = r * x + c;
    return r;
}

// Sign scan on a uniform grid over the Cauchy bound, then plain bisection.
inline std::vector<OracleRoot> brute_roots(std::vector<double> p, int samples = 100000) {
    while (!p.empty() && p.front() == 0.0)
        p.erase(p.begin());
    std::vector<OracleRoot> out;
    if (p.size() < 2)
        return out;
    double bound = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i)
        bound = std::max(bound, std::fabs(p[i] / p[0]));
    bound = 1.0 + bound;
    std::vector<double> dp;
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        dp.push_back(p[i] * static_cast<double>(p.size() - 1 - i));

    auto refine = [&](double lo, double hi) {
        double flo = poly_eval(p, lo);
        for (int k = 0; k < 200 && hi - lo > 0; ++k) {
            double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi)
                break;
            double fm = poly_eval(p, mid);
            if (fm == 0.0)
                return mid;
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    double h = 2.0 * bound / samples;
    double x0 = -bound, f0 = poly_eval(p, x0);
    for (int i = 1; i <= samples; ++i) {
        double x1 = -bound + i * h, f1 = poly_eval(p, x1);
        if (f0 == 0.0) {
            out.push_back({x0, false});
        } else if (f1 != 0.0 && (f0 < 0) != (f1 < 0)) {
            out.push_back({refine(x0, x1), false});
        }
        x0 = x1;
        f0 = f1;
    }
    // flag crossings where the derivative vanishes too (odd multiplicity > 1)
    for (auto& r : out) {
        double scale = 0.0;
        for (double c : dp)
            scale = std::max(scale, std::fabs(c));
        r.sign_touch = std::fabs(poly_eval(dp, r.x)) <= 1e-6 * std::max(1.0, scale);
    }
    return out;
}

}  // namespace robroot::oracle
