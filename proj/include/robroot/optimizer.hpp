#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubic.hpp"
#include "planar.hpp"
#include "quadratic.hpp"

namespace robroot {

// quad: p = (a, b, c); quad_hat: p = (b^, c^) with a = 1; cubic: p = (q, a, b, c)
enum class ProblemKind { quad, quad_hat, cubic };

inline std::size_t param_count(ProblemKind k) { return k == ProblemKind::quad_hat ? 2 : (k == ProblemKind::quad ? 3 : 4); }

enum class GradKind { analytic, clamped_ctilde, orthogonal_split, robust };

struct GradientMode {
    GradKind kind = GradKind::robust;
    double floor = 0.1;  // clamped_ctilde: |c~| is raised to at least this
    double cap = 1.0;    // orthogonal_split: bound on the parallel scalar
};

inline const char* grad_kind_name(GradKind k) {
    switch (k) {
        case GradKind::analytic: return "analytic";
        case GradKind::clamped_ctilde: return "clamped_ctilde";
        case GradKind::orthogonal_split: return "orthogonal_split";
        case GradKind::robust: return "robust";
    }
    return "?";
}

inline bool parse_grad_kind(const std::string& s, GradKind& k) {
    if (s == "analytic") k = GradKind::analytic;
    else if (s == "clamped_ctilde") k = GradKind::clamped_ctilde;
    else if (s == "orthogonal_split") k = GradKind::orthogonal_split;
    else if (s == "robust") k = GradKind::robust;
    else return false;
    return true;
}

struct Target {
    Branch branch = Branch::plus;
    double tR = 0.0;
    double tI = 0.0;
    bool free_imag = false;  // only the real part is targeted
    double weight = 1.0;
};

struct LossSpec {
    std::vector<Target> targets;
    std::vector<double> p_L;  // optional coefficient target
    double coeff_weight = 0.0;
    std::vector<double> p0;  // optional pull towards the initial guess
    double eta = 0.0;
    double real_gap_weight = 0.0;  // 1/2 w (Re t+ - Re t-)^2
};

// Roots, labels and Jacobians (w.r.t. the problem parameters) at one point.
struct Evaluation {
    std::vector<PlanarRoot> roots;  // plus, [mid,] minus
    std::vector<std::array<std::vector<double>, 2>> jac;  // per root, rows over the parameters
    std::vector<bool> clamped, saturated;
    int real_count = 0;
    double c_tilde = 0.0, b_tilde = 0.0, b_hat = 0.0, c_hat = 0.0;

    int index(Branch b) const {
        if (roots.size() == 2)
            return b == Branch::minus ? 1 : (b == Branch::plus ? 0 : -1);
        return static_cast<int>(b);
    }
};

struct Problem {
    ProblemKind kind = ProblemKind::quad;
    std::vector<bool> fixed;  // per parameter
    bool normalize = false;   // differentiate through the scaling by the largest coefficient
    RobustDivConfig rcfg{};
    CubicSolverConfig scfg{};
};

namespace detail {

inline RobustDivConfig unbounded(const RobustDivConfig& c) {
    RobustDivConfig u = c;
    u.M = std::numeric_limits<double>::infinity();
    return u;
}

// derivative of the root of t^2 + b t + c w.r.t. (b, c), written through c~
inline std::array<std::array<double, 2>, 2> hat_jacobian(double bh, double ct, Branch br, const GradientMode& m, double g) {
    std::array<std::array<double, 2>, 2> J{};
    double pm = br == Branch::minus ? -1.0 : 1.0;
    double c_eff = ct;
    if (m.kind == GradKind::clamped_ctilde) {
        double s = ct <= 0 ? -1.0 : 1.0;  // c~ == 0 counts as the real side
        c_eff = s * std::max(std::fabs(ct), m.floor);
    }
    if (ct <= 0) {
        double k = -1.0 / (pm * 2.0 * std::sqrt(-c_eff));
        if (m.kind == GradKind::orthogonal_split && g != 0.0) {
            // split along n = dc~/dp = [-b/2, 1] and its complement
            double w = bh * bh + 4.0;
            double par = g * (k + bh / w);
            if (std::fabs(par) > m.cap)
                par = std::copysign(m.cap, par);
            double scale = par / g;
            J[0] = {scale * (-bh / 2.0) - 2.0 / w, scale - bh / w};
            return J;
        }
        J[0] = {k * (-bh / 2.0) - 0.5, k};
    } else {
        double k = 1.0 / (pm * 2.0 * std::sqrt(c_eff));
        J[0] = {-0.5, 0.0};
        J[1] = {k * (-bh / 2.0), k};
    }
    return J;
}

}  // namespace detail

inline Evaluation evaluate(const Problem& pr, const std::vector<double>& p, const GradientMode& mode,
                           const std::vector<double>* residual_hint = nullptr) {
    Evaluation ev;
    const std::size_t n = param_count(pr.kind);
    if (p.size() != n)
        throw std::invalid_argument("evaluate: wrong parameter count");
    RobustDivConfig jc = mode.kind == GradKind::robust ? pr.rcfg : detail::unbounded(pr.rcfg);

    if (pr.kind == ProblemKind::cubic) {
        CubicCoeffs cc = make_cubic(p[0], p[1], p[2], p[3]);
        auto rs = solve_cubic(cc, pr.rcfg, pr.scfg);
        auto tl = to_tilde(cc);
        auto hat = to_hat(cc);
        ev.b_tilde = tl.b_tilde;
        ev.c_tilde = tl.c_tilde;
        ev.b_hat = hat.b_hat;
        ev.c_hat = hat.c_hat;
        ev.real_count = rs.real_count;
        // scaling keeps the signs, so the labels found above still apply
        std::optional<Normalization<4>> nz;
        CubicCoeffs jcoef = cc;
        if (pr.normalize) {
            nz = normalize_vec(cc.vec());
            jcoef = make_cubic(nz->p[0], nz->p[1], nz->p[2], nz->p[3]);
        }
        for (const auto& r : rs.roots) {
            ev.roots.push_back(r);
            auto J = jacobian_cubic(jcoef, r, jc);
            std::array<std::vector<double>, 2> rows;
            for (int i = 0; i < 2; ++i) {
                std::array<double, 4> row = J.rows[i];
                if (nz)
                    row = chain_to_orig(*nz, row);
                rows[i].assign(row.begin(), row.end());
            }
            ev.jac.push_back(rows);
            ev.clamped.push_back(J.clamped[0] || J.clamped[1]);
            ev.saturated.push_back(J.saturated[0] || J.saturated[1]);
        }
        return ev;
    }

    QuadCoeffs qc = pr.kind == ProblemKind::quad ? make_quad(p[0], p[1], p[2]) : make_quad(1.0, p[0], p[1]);
    auto rs = solve(qc, pr.rcfg);
    ev.c_tilde = reduced(qc);
    ev.real_count = rs.plus.is_complex() ? 0 : 2;
    std::optional<Normalization<3>> nz;
    QuadCoeffs jcoef = qc;
    if (pr.normalize && pr.kind == ProblemKind::quad) {
        nz = normalize_vec(qc.vec());
        jcoef = make_quad(nz->p[0], nz->p[1], nz->p[2]);
    }
    int idx = 0;
    for (const PlanarRoot* r : {&rs.plus, &rs.minus}) {
        ev.roots.push_back(*r);
        std::array<std::vector<double>, 2> rows;
        bool cl = false, sat = false;
        bool hat_mode = pr.kind == ProblemKind::quad_hat &&
                        (mode.kind == GradKind::clamped_ctilde || mode.kind == GradKind::orthogonal_split);
        if (hat_mode) {
            double g = residual_hint ? (*residual_hint)[idx] : 0.0;
            auto H = detail::hat_jacobian(qc.b, ev.c_tilde, r->branch, mode, g);
            rows[0] = {H[0][0], H[0][1]};
            rows[1] = {H[1][0], H[1][1]};
        } else {
            auto J = jacobian(jcoef, *r, jc);
            cl = J.clamped[0] || J.clamped[1];
            sat = J.saturated[0] || J.saturated[1];
            for (int i = 0; i < 2; ++i) {
                std::array<double, 3> row = J.rows[i];
                if (nz)
                    row = chain_to_orig(*nz, row);
                if (pr.kind == ProblemKind::quad)
                    rows[i].assign(row.begin(), row.end());
                else
                    rows[i] = {row[1], row[2]};
            }
        }
        ev.jac.push_back(rows);
        ev.clamped.push_back(cl);
        ev.saturated.push_back(sat);
        ++idx;
    }
    return ev;
}

struct LossResult {
    double L = 0.0;
    std::vector<double> grad;
    Evaluation ev;
};

// L and dL/dp with J^T (t - t_L) summed over the targets
inline LossResult loss_and_grad(const Problem& pr, const LossSpec& spec, const std::vector<double>& p,
                                const GradientMode& mode) {
    if (spec.targets.empty())
        throw std::invalid_argument("loss: no targets");
    const std::size_t n = param_count(pr.kind);
    LossResult out;
    out.grad.assign(n, 0.0);

    // the orthogonal split needs dL/dtR before the Jacobian is formed
    std::vector<double> hint;
    Evaluation ev = evaluate(pr, p, mode);
    if (mode.kind == GradKind::orthogonal_split && pr.kind == ProblemKind::quad_hat) {
        hint.assign(ev.roots.size(), 0.0);
        for (const auto& t : spec.targets) {
            int i = ev.index(t.branch);
            if (i >= 0)
                hint[i] += t.weight * (ev.roots[i].tR - t.tR);
        }
        ev = evaluate(pr, p, mode, &hint);
    }

    for (const auto& t : spec.targets) {
        int i = ev.index(t.branch);
        if (i < 0 || i >= static_cast<int>(ev.roots.size()))
            throw std::invalid_argument("loss: branch not present in the root set");
        const auto& r = ev.roots[i];
        double dR = r.tR - t.tR;
        double dI = t.free_imag ? 0.0 : r.tI - t.tI;
        out.L += 0.5 * t.weight * (dR * dR + dI * dI);
        for (std::size_t j = 0; j < n; ++j)
            out.grad[j] += t.weight * (ev.jac[i][0][j] * dR + ev.jac[i][1][j] * dI);
    }
    if (spec.real_gap_weight > 0) {
        int ip = ev.index(Branch::plus), im = ev.index(Branch::minus);
        double gap = ev.roots[ip].tR - ev.roots[im].tR;
        out.L += 0.5 * spec.real_gap_weight * gap * gap;
        for (std::size_t j = 0; j < n; ++j)
            out.grad[j] += spec.real_gap_weight * gap * (ev.jac[ip][0][j] - ev.jac[im][0][j]);
    }
    if (spec.coeff_weight > 0 && spec.p_L.size() == n) {
        for (std::size_t j = 0; j < n; ++j) {
            double d = p[j] - spec.p_L[j];
            out.L += 0.5 * spec.coeff_weight * d * d;
            out.grad[j] += spec.coeff_weight * d;
        }
    }
    if (spec.eta > 0 && spec.p0.size() == n) {
        for (std::size_t j = 0; j < n; ++j) {
            double d = p[j] - spec.p0[j];
            out.L += 0.5 * spec.eta * d * d;
            out.grad[j] += spec.eta * d;
        }
    }
    for (std::size_t j = 0; j < n && j < pr.fixed.size(); ++j)
        if (pr.fixed[j])
            out.grad[j] = 0.0;
    out.ev = std::move(ev);
    return out;
}

enum class Method { sgd, adam };

struct OptimizerConfig {
    Method method = Method::adam;
    double step = 0.1;
    double beta1 = 0.9, beta2 = 0.999;
    double adam_eps = 1e-8;
    int max_iters = 20000;
    GradientMode mode{};
    double loss_tol = 1e-10;
    bool stop_at_tol = true;
};

inline std::vector<double> step_sgd(const std::vector<double>& p, const std::vector<double>& g, double step) {
    std::vector<double> out = p;
    for (std::size_t i = 0; i < p.size(); ++i)
        out[i] -= step * g[i];
    return out;
}

struct AdamState {
    std::vector<double> m, v;
    int t = 0;
};

inline std::vector<double> step_adam(AdamState& st, const std::vector<double>& p, const std::vector<double>& g,
                                     const OptimizerConfig& cfg) {
    if (st.m.size() != p.size()) {
        st.m.assign(p.size(), 0.0);
        st.v.assign(p.size(), 0.0);
    }
    ++st.t;
    std::vector<double> out = p;
    double c1 = 1.0 - std::pow(cfg.beta1, st.t), c2 = 1.0 - std::pow(cfg.beta2, st.t);
    for (std::size_t i = 0; i < p.size(); ++i) {
        st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * g[i];
        st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        out[i] -= cfg.step * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + cfg.adam_eps);
    }
    return out;
}

// Keeps a target attached to the same root while labels move around.
struct BranchEvent {
    int iteration;
    std::string kind;  // merge, unmerge, lead_sign, lone_flip, role_switch
    Branch from, to;
};

struct BranchTracker {
    Branch tracked = Branch::plus;
    std::vector<BranchEvent> history;
};

namespace detail {

inline int lone_index(const Evaluation& e) {
    if (e.roots.size() != 3 || e.real_count != 1)
        return -1;
    for (int i = 0; i < 3; ++i)
        if (!e.roots[i].is_complex())
            return i;
    return -1;
}

}  // namespace detail

// prev/next evaluations at consecutive iterates; lead is the leading coefficient
inline void track_branch(BranchTracker& tr, const Evaluation& prev, const Evaluation& next, double prev_lead,
                         double next_lead, int iteration) {
    const bool cubic = next.roots.size() == 3;
    Branch old = tr.tracked;
    bool was_real = prev.real_count > 0 && !prev.roots[prev.index(old)].is_complex();
    auto sgn_lead = [](double x) { return x < 0 ? -1 : 1; };

    if (!cubic) {
        // labels of the quadratic never need to move
        if (sgn_lead(prev_lead) != sgn_lead(next_lead))
            tr.history.push_back({iteration, "lead_sign", old, old});
        bool now_real = next.real_count > 0;
        if (was_real != now_real)
            tr.history.push_back({iteration, now_real ? "unmerge" : "merge", old, old});
        return;
    }

    if (sgn_lead(prev_lead) != sgn_lead(next_lead)) {
        // the ordering flips with sign(q); follow the nearest root
        const PlanarRoot& r = prev.roots[prev.index(old)];
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i) {
            double d = std::hypot(next.roots[i].tR - r.tR, next.roots[i].tI - r.tI);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        tr.tracked = static_cast<Branch>(best);
        tr.history.push_back({iteration, "role_switch", old, tr.tracked});
        return;
    }

    int lp = detail::lone_index(prev), ln = detail::lone_index(next);
    if (lp >= 0 && ln >= 0 && lp != ln) {
        // b~ changed sign: lone -> lone, +Im -> +Im, -Im -> -Im for a small step. Taking the
        // nearest root also covers a pair that collides and re-pairs within one step.
        const PlanarRoot& r = prev.roots[prev.index(old)];
        int target = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i) {
            double d = std::hypot(next.roots[i].tR - r.tR, next.roots[i].tI - r.tI);
            if (d < bd) {
                bd = d;
                target = i;
            }
        }
        if (!r.is_complex() && next.roots[target].is_complex()) {
            // real root merged: the larger one of the colliding two takes +Im
            bool up = r.tR >= next.roots[target].tR;
            for (int i = 0; i < 3; ++i)
                if (i != ln && (next.roots[i].tI > 0) == up)
                    target = i;
        }
        tr.tracked = static_cast<Branch>(target);
        tr.history.push_back({iteration, "lone_flip", old, tr.tracked});
        return;
    }
    bool now_real = !next.roots[next.index(old)].is_complex();
    if (was_real != now_real)
        tr.history.push_back({iteration, now_real ? "unmerge" : "merge", old, old});
}

struct IterRecord {
    int iteration = 0;
    std::vector<double> p;
    double L = 0.0;
    std::vector<double> grad;
    Evaluation ev;
    Branch tracked = Branch::plus;
};

struct RunResult {
    std::vector<IterRecord> log;
    std::vector<double> p;
    double L = 0.0;
    int iterations = 0;
    bool converged = false;
    BranchTracker tracker;
    std::vector<double> loss_history;
};

inline double lead_coefficient(const Problem& pr, const std::vector<double>& p) {
    return pr.kind == ProblemKind::quad_hat ? 1.0 : p[0];
}

// Runs the optimizer. Targets follow their tracked root; only the first target
// is tracked when labels move (the others keep their label).
inline RunResult optimize(const Problem& pr, LossSpec spec, std::vector<double> p, const OptimizerConfig& cfg,
                          int record_every = 1) {
    RunResult res;
    AdamState adam;
    res.tracker.tracked = spec.targets.at(0).branch;
    std::optional<Evaluation> prev;
    double prev_lead = lead_coefficient(pr, p);
    for (int it = 0;; ++it) {
        auto lr = loss_and_grad(pr, spec, p, cfg.mode);
        if (prev) {
            track_branch(res.tracker, *prev, lr.ev, prev_lead, lead_coefficient(pr, p), it);
            if (res.tracker.tracked != spec.targets[0].branch) {
                spec.targets[0].branch = res.tracker.tracked;
                lr = loss_and_grad(pr, spec, p, cfg.mode);
            }
        }
        res.loss_history.push_back(lr.L);
        bool done = (cfg.stop_at_tol && lr.L <= cfg.loss_tol) || it >= cfg.max_iters;
        if (record_every > 0 && (it % record_every == 0 || done))
            res.log.push_back({it, p, lr.L, lr.grad, lr.ev, res.tracker.tracked});
        res.L = lr.L;
        res.iterations = it;
        if (lr.L <= cfg.loss_tol)
            res.converged = true;
        if (done)
            break;
        prev_lead = lead_coefficient(pr, p);
        prev = lr.ev;
        p = cfg.method == Method::sgd ? step_sgd(p, lr.grad, cfg.step) : step_adam(adam, p, lr.grad, cfg);
    }
    res.p = p;
    return res;
}

}  // namespace robroot
