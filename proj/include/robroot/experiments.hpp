#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubic.hpp"
#include "newton.hpp"
#include "optimizer.hpp"
#include "quadratic.hpp"
#include "tape.hpp"

namespace robroot {

// Flat key=value configuration; '#' starts a comment.
class Config {
public:
    static Config parse(std::istream& in) {
        Config c;
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            ++n;
            auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(n) + ": expected key=value");
            c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream f(path);
        if (!f)
            throw std::runtime_error("cannot open config " + path);
        return parse(f);
    }

    void set(const std::string& k, const std::string& v) {
        if (!kv_.count(k))
            order_.push_back(k);
        kv_[k] = v;
    }
    bool has(const std::string& k) const { return kv_.count(k) > 0; }

    std::string str(const std::string& k, const std::string& def = "") const {
        auto it = kv_.find(k);
        return it == kv_.end() ? def : it->second;
    }
    double num(const std::string& k, double def) const {
        auto it = kv_.find(k);
        return it == kv_.end() ? def : std::stod(it->second);
    }
    int integer(const std::string& k, int def) const {
        auto it = kv_.find(k);
        return it == kv_.end() ? def : std::stoi(it->second);
    }
    bool flag(const std::string& k, bool def) const {
        auto it = kv_.find(k);
        if (it == kv_.end())
            return def;
        return it->second == "true" || it->second == "1" || it->second == "yes";
    }
    // comma or whitespace separated
    std::vector<double> list(const std::string& k, std::vector<double> def = {}) const {
        auto it = kv_.find(k);
        if (it == kv_.end())
            return def;
        std::string s = it->second;
        for (char& ch : s)
            if (ch == ',')
                ch = ' ';
        std::istringstream is(s);
        std::vector<double> out;
        std::string tok;
        while (is >> tok)
            out.push_back(std::stod(tok));
        return out;
    }

    // later keys win
    void merge(const Config& o) {
        for (const auto& k : o.order_)
            set(k, o.kv_.at(k));
    }

    const std::vector<std::string>& keys() const { return order_; }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            return "";
        auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> kv_;
    std::vector<std::string> order_;
};

inline std::string fmt_e(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", x);
    return buf;
}

struct CsvTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;  // written as leading '# ' lines

    void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }

    std::string str() const {
        std::string s;
        for (const auto& c : comments)
            s += "# " + c + "\n";
        for (std::size_t i = 0; i < header.size(); ++i)
            s += (i ? "," : "") + header[i];
        s += "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                s += (i ? "," : "") + r[i];
            s += "\n";
        }
        return s;
    }

    int column(const std::string& h) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == h)
                return static_cast<int>(i);
        return -1;
    }
    double value(std::size_t row, const std::string& h) const { return std::stod(rows.at(row).at(column(h))); }
};

inline void write_csv(const CsvTable& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << t.str();
}

using ExperimentFn = std::function<std::vector<CsvTable>(const Config&)>;

struct Experiment {
    std::string id;
    std::string description;
    std::string defaults;  // key=value text, identical to the shipped config file
    ExperimentFn run;
};

namespace exp {

inline Problem problem_from(const Config& c) {
    Problem pr;
    std::string k = c.str("kind", "quad");
    if (k == "quad") pr.kind = ProblemKind::quad;
    else if (k == "quad_hat") pr.kind = ProblemKind::quad_hat;
    else if (k == "cubic") pr.kind = ProblemKind::cubic;
    else throw std::runtime_error("unknown kind " + k);
    pr.normalize = c.flag("normalize", false);
    pr.rcfg.M = c.num("M", 1000.0);
    pr.rcfg.t_max = c.num("t_max", 1e150);
    pr.scfg.tol = c.num("tol", 1e-13);
    auto fixed = c.list("fixed");
    for (double f : fixed)
        pr.fixed.push_back(f != 0.0);
    return pr;
}

inline OptimizerConfig optimizer_from(const Config& c) {
    OptimizerConfig oc;
    oc.method = c.str("method", "adam") == "sgd" ? Method::sgd : Method::adam;
    oc.step = c.num("step", 0.1);
    oc.beta1 = c.num("beta1", 0.9);
    oc.beta2 = c.num("beta2", 0.999);
    oc.adam_eps = c.num("adam_eps", 1e-8);
    oc.max_iters = c.integer("max_iters", 20000);
    oc.loss_tol = c.num("loss_tol", 1e-10);
    oc.stop_at_tol = c.flag("stop_at_tol", true);
    if (!parse_grad_kind(c.str("mode", "robust"), oc.mode.kind))
        throw std::runtime_error("unknown gradient mode " + c.str("mode"));
    oc.mode.floor = c.num("floor", 0.1);
    oc.mode.cap = c.num("cap", 1.0);
    return oc;
}

inline LossSpec loss_from(const Config& c) {
    LossSpec s;
    Target t;
    if (!parse_branch(c.str("branch", "plus"), t.branch))
        throw std::runtime_error("unknown branch " + c.str("branch"));
    auto tg = c.list("target", {0.5, 0.0});
    t.tR = tg.at(0);
    t.tI = tg.size() > 1 ? tg[1] : 0.0;
    t.free_imag = c.flag("free_imag", false);
    s.targets.push_back(t);
    s.real_gap_weight = c.num("real_gap_weight", 0.0);
    s.eta = c.num("eta", 0.0);
    if (s.eta > 0)
        s.p0 = c.list("p0");
    return s;
}

inline std::vector<std::string> config_comments(const Config& c) {
    std::vector<std::string> out;
    for (const auto& k : c.keys())
        out.push_back(k + "=" + c.str(k));
    return out;
}

inline std::vector<int> record_rows(const Config& c, int last) {
    int first = c.integer("record_first", 10);
    int every = c.integer("record_every", 100);
    std::vector<int> rows;
    for (int i = 0; i <= last; ++i)
        if (i < first || (every > 0 && i % every == 0) || i == last)
            rows.push_back(i);
    return rows;
}

// optimizer run with one row per recorded iteration
inline CsvTable optimization_table(const std::string& name, const Config& c) {
    Problem pr = problem_from(c);
    OptimizerConfig oc = optimizer_from(c);
    LossSpec spec = loss_from(c);
    auto p0 = c.list("p0");
    auto res = optimize(pr, spec, p0, oc, 1);

    CsvTable t;
    t.name = name;
    t.comments = config_comments(c);
    std::vector<std::string> pn;
    if (pr.kind == ProblemKind::quad) pn = {"a", "b", "c"};
    else if (pr.kind == ProblemKind::quad_hat) pn = {"b_hat", "c_hat"};
    else pn = {"q", "a", "b", "c"};
    t.header = {"iteration"};
    for (auto& s : pn) t.header.push_back(s);
    if (pr.kind == ProblemKind::cubic) {
        t.header.insert(t.header.end(), {"b_tilde", "c_tilde"});
        for (auto l : {"plus", "mid", "minus"}) {
            t.header.push_back(std::string("t_") + l + "_R");
            t.header.push_back(std::string("t_") + l + "_I");
        }
    } else {
        t.header.insert(t.header.end(), {"c_tilde", "t_plus_R", "t_plus_I", "t_minus_R", "t_minus_I"});
    }
    t.header.push_back("L");
    for (auto& s : pn) t.header.push_back("dL_d" + s);
    t.header.insert(t.header.end(), {"tracked", "clamped", "saturated"});

    int last = static_cast<int>(res.log.size()) - 1;
    for (int i : record_rows(c, last)) {
        const auto& r = res.log[i];
        std::vector<std::string> row{std::to_string(r.iteration)};
        for (double x : r.p) row.push_back(fmt_e(x));
        if (pr.kind == ProblemKind::cubic) {
            row.push_back(fmt_e(r.ev.b_tilde));
        }
        row.push_back(fmt_e(r.ev.c_tilde));
        for (const auto& rt : r.ev.roots) {
            row.push_back(fmt_e(rt.tR));
            row.push_back(fmt_e(rt.tI));
        }
        row.push_back(fmt_e(r.L));
        for (double g : r.grad) row.push_back(fmt_e(g));
        int ti = r.ev.index(r.tracked);
        row.push_back(branch_name(r.tracked));
        row.push_back(r.ev.clamped[ti] ? "1" : "0");
        row.push_back(r.ev.saturated[ti] ? "1" : "0");
        t.add(row);
    }
    return t;
}

// Newton iterates on the tape with a handle to every iterate
struct NewtonTrace {
    Tape tape;
    Var a, b, c;
    std::vector<Var> tR;
};

inline NewtonTrace trace_newton(const QuadCoeffs& p, double t0, int n) {
    NewtonTrace tr;
    Tape* T = &tr.tape;
    tr.a = {T, T->input(p.a)};
    tr.b = {T, T->input(p.b)};
    tr.c = {T, T->input(p.c)};
    Lifted<Var> t{{T, T->constant(t0)}, {T, T->constant(0.0)}};
    tr.tR.push_back(t.r);
    for (int k = 0; k < n; ++k) {
        t = newton_update<Var>(tr.a, tr.b, tr.c, t);
        tr.tR.push_back(t.r);
    }
    return tr;
}

inline std::vector<CsvTable> newton_grad(const Config& c) {
    auto iters = c.list("iterations", {7, 20, 50});
    auto cts = c.list("c_tilde");
    double t0 = c.num("t0", 2.0);
    CsvTable t;
    t.name = "newton-grad";
    t.comments = config_comments(c);
    t.header = {"iterations", "c_tilde", "t0", "t_n", "theory", "estimate", "backprop", "err_estimate", "err_backprop"};
    for (double n : iters) {
        for (double ct : cts) {
            // t~^2 + c~, derivative w.r.t. c~ of the right root
            auto tr = trace_newton(make_quad(1.0, 0.0, ct), t0, static_cast<int>(n));
            double tn = tr.tR.back().value();
            double theory = -1.0 / (2.0 * std::sqrt(-ct));
            double est = -1.0 / (2.0 * tn);
            double bp = tr.tape.gradient(tr.tR.back().id)[2];
            t.add({std::to_string(static_cast<int>(n)), fmt_e(ct), fmt_e(t0), fmt_e(tn), fmt_e(theory), fmt_e(est),
                   fmt_e(bp), fmt_e(std::fabs(est - theory) / std::fabs(theory)),
                   fmt_e(std::fabs(bp - theory) / std::fabs(theory))});
        }
    }
    return {t};
}

// smallest n with relative error <= rel, or -1
struct ThresholdRow {
    double eps;
    int root, estimate, backprop;
};

inline ThresholdRow threshold_for(double eps, double t0, int max_n, double rel) {
    auto tr = trace_newton(make_quad(1.0, -2.0, 1.0 - eps), t0, max_n);
    double root = 1.0 + std::sqrt(eps);
    double theory = -1.0 / (2.0 * std::sqrt(eps));
    ThresholdRow r{eps, -1, -1, -1};
    for (int n = 0; n <= max_n; ++n) {
        double tn = tr.tR[n].value();
        if (r.root < 0 && std::fabs(tn - root) <= rel * std::fabs(root))
            r.root = n;
        double est = -1.0 / (2.0 * tn - 2.0);
        if (r.estimate < 0 && std::fabs(est - theory) <= rel * std::fabs(theory))
            r.estimate = n;
        if (r.backprop < 0) {
            double bp = tr.tape.gradient(tr.tR[n].id)[2];
            if (std::fabs(bp - theory) <= rel * std::fabs(theory))
                r.backprop = n;
        }
    }
    return r;
}

inline std::vector<CsvTable> newton_threshold(const Config& c) {
    auto eps = c.list("eps", {1e-4, 1e-6, 1e-8, 1e-10, 1e-12});
    double t0 = c.num("t0", 2.0);
    int max_n = c.integer("max_iter", 200);
    double rel = c.num("rel", 0.01);
    CsvTable t;
    t.name = "newton-threshold";
    t.comments = config_comments(c);
    t.header = {"eps", "t0", "iters_root", "iters_estimate", "iters_backprop"};
    for (double e : eps) {
        auto r = threshold_for(e, t0, max_n, rel);
        t.add({fmt_e(e), fmt_e(t0), std::to_string(r.root), std::to_string(r.estimate), std::to_string(r.backprop)});
    }
    return {t};
}

inline std::vector<CsvTable> table_bnonzero(const Config& c, const std::string& name) {
    double bh = c.num("b_hat", -2.0);
    auto eps = c.list("eps");
    double t0 = c.num("t0", 10.5);
    int n = c.integer("iterations", 100);
    CsvTable t;
    t.name = name;
    t.comments = config_comments(c);
    t.header = {"eps", "root_plus", "t_n", "ratio_check", "estimate", "backprop", "t0", "iterations"};
    for (double e : eps) {
        QuadCoeffs p = make_quad(1.0, bh, 1.0 + e);
        auto tr = trace_newton(p, t0, n);
        double tn = tr.tR.back().value();
        double ct = reduced(p);
        double d = 2.0 * tn + bh;
        double bp = tr.tape.gradient(tr.tR.back().id)[1];
        t.add({fmt_e(e), fmt_e(solve(p).plus.tR), fmt_e(tn), fmt_e(0.5 + 2.0 * ct / (d * d)), fmt_e(-tn / d), fmt_e(bp),
               fmt_e(t0), std::to_string(n)});
    }
    return {t};
}

inline std::vector<CsvTable> table_bzero(const Config& c) {
    double bh = c.num("b_hat", 1e-4);
    auto cts = c.list("c_tilde");
    double t0 = c.num("t0", 10.5);
    int n = c.integer("iterations", 100);
    CsvTable t;
    t.name = "table-bzero-100";
    t.comments = config_comments(c);
    t.header = {"eps", "c_tilde", "root_plus", "t_n", "ratio_check", "estimate_dc", "backprop_dc",
                "gamma", "gamma_dc", "gamma_db", "estimate_db", "backprop_db", "t0", "iterations"};
    for (double ct : cts) {
        // c^ = c~ + b^2/4 hits the listed c~ exactly
        double e = ct + bh * bh / 4.0;
        QuadCoeffs p = make_quad(1.0, bh, e);
        auto tr = trace_newton(p, t0, n);
        double tn = tr.tR.back().value();
        double ctw = reduced(p);
        double d = 2.0 * tn + bh;
        auto g = tr.tape.gradient(tr.tR.back().id);
        double gamma = -4.0 * ctw / (bh * bh);
        double sg = std::sqrt(gamma);
        t.add({fmt_e(e), fmt_e(ctw), fmt_e(solve(p).plus.tR), fmt_e(tn), fmt_e(0.5 + 2.0 * ctw / (d * d)),
               fmt_e(-1.0 / d), fmt_e(g[2]), fmt_e(gamma), fmt_e(-1.0 / (std::fabs(bh) * sg)),
               fmt_e(-0.5 * (-1.0 / (sgn(bh) * sg) + 1.0)), fmt_e(-tn / d), fmt_e(g[1]), fmt_e(t0),
               std::to_string(n)});
    }
    return {t};
}

inline std::vector<CsvTable> sgd_jump(const Config& c) {
    Problem pr = problem_from(c);
    OptimizerConfig oc = optimizer_from(c);
    LossSpec spec = loss_from(c);
    auto res = optimize(pr, spec, c.list("p0"), oc, 1);
    CsvTable t;
    t.name = "table-sgd-jump";
    t.comments = config_comments(c);
    t.header = {"iteration", "b_hat", "c_hat", "c_tilde", "t_plus", "L", "dL_db_hat", "dL_dc_hat"};
    auto rows = c.list("rows", {0, 1, 2});
    rows.push_back(res.log.size() - 1.0);
    for (double ri : rows) {
        if (ri >= res.log.size())
            continue;
        const auto& r = res.log[static_cast<std::size_t>(ri)];
        t.add({std::to_string(r.iteration), fmt_e(r.p[0]), fmt_e(r.p[1]), fmt_e(r.ev.c_tilde), fmt_e(r.ev.roots[0].tR),
               fmt_e(r.L), fmt_e(r.grad[0]), fmt_e(r.grad[1])});
    }
    return {t};
}

// a first phase (the jump) followed by a recovery phase with other settings
inline std::vector<CsvTable> recovery(const Config& c, const std::string& name) {
    Problem pr = problem_from(c);
    OptimizerConfig first = optimizer_from(c);
    first.max_iters = 1;
    LossSpec spec = loss_from(c);
    auto r1 = optimize(pr, spec, c.list("p0"), first, 1);
    Config c2 = c;
    c2.set("method", c.str("recover_method", "sgd"));
    c2.set("step", c.str("recover_step", "1e8"));
    OptimizerConfig second = optimizer_from(c2);
    auto r2 = optimize(pr, spec, r1.p, second, 1);
    CsvTable t;
    t.name = name;
    t.comments = config_comments(c);
    t.header = {"iteration", "b_hat", "c_hat", "c_tilde", "t_plus", "L", "dL_db_hat", "dL_dc_hat"};
    auto put = [&](int it, const IterRecord& r) {
        t.add({std::to_string(it), fmt_e(r.p[0]), fmt_e(r.p[1]), fmt_e(r.ev.c_tilde), fmt_e(r.ev.roots[0].tR),
               fmt_e(r.L), fmt_e(r.grad[0]), fmt_e(r.grad[1])});
    };
    put(0, r1.log[0]);
    int last = static_cast<int>(r2.log.size()) - 1;
    for (int i : record_rows(c, last))
        put(i + 1, r2.log[i]);
    return {t};
}

// late-stage loss spikes of Adam after it has converged once
struct OscillationReport {
    int first_converged = -1;
    int spike_iteration = -1;
    double spike_loss = 0.0;
    double converged_loss = 0.0;
    double ratio = 0.0;
};

inline OscillationReport find_oscillation(const std::vector<double>& L, double conv_tol, double spike_factor) {
    OscillationReport r;
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (r.first_converged < 0) {
            if (L[i] <= conv_tol) {
                r.first_converged = static_cast<int>(i);
                r.converged_loss = L[i];
            }
            continue;
        }
        // running minimum since convergence; report the first jump by spike_factor
        r.converged_loss = std::min(r.converged_loss, L[i]);
        double ref = std::max(r.converged_loss, conv_tol);
        if (L[i] >= spike_factor * ref && L[i] > r.spike_loss) {
            if (r.spike_iteration < 0)
                r.spike_iteration = static_cast<int>(i);
            r.spike_loss = L[i];
            r.ratio = L[i] / ref;
        }
    }
    return r;
}

inline std::vector<CsvTable> adam_oscillation(const Config& c) {
    Problem pr = problem_from(c);
    OptimizerConfig oc = optimizer_from(c);
    oc.stop_at_tol = false;
    LossSpec spec = loss_from(c);
    auto res = optimize(pr, spec, c.list("p0"), oc, 1);
    CsvTable t;
    t.name = "adam-oscillation";
    t.comments = config_comments(c);
    t.header = {"iteration", "b_hat", "c_hat", "c_tilde", "t_plus_R", "t_plus_I", "L"};
    int every = c.integer("record_every", 10);
    for (std::size_t i = 0; i < res.log.size(); ++i) {
        if (every > 0 && i % every != 0 && i + 1 != res.log.size())
            continue;
        const auto& r = res.log[i];
        t.add({std::to_string(r.iteration), fmt_e(r.p[0]), fmt_e(r.p[1]), fmt_e(r.ev.c_tilde), fmt_e(r.ev.roots[0].tR),
               fmt_e(r.ev.roots[0].tI), fmt_e(r.L)});
    }
    auto rep = find_oscillation(res.loss_history, c.num("conv_tol", 1e-10), c.num("spike_factor", 10.0));
    CsvTable ev;
    ev.name = "adam-oscillation-events";
    ev.comments = config_comments(c);
    ev.header = {"first_converged", "spike_iteration", "converged_loss", "spike_loss", "ratio"};
    ev.add({std::to_string(rep.first_converged), std::to_string(rep.spike_iteration), fmt_e(rep.converged_loss),
            fmt_e(rep.spike_loss), fmt_e(rep.ratio)});
    return {t, ev};
}

inline std::string quad_opt(const std::string& p0) {
    return "kind=quad\np0=" + p0 +
           "\nbranch=plus\ntarget=0.5,0\nmethod=adam\nstep=0.1\nmode=robust\nM=1000\nt_max=1e150\n"
           "normalize=false\nmax_iters=20000\nrecord_first=10\nrecord_every=100\n";
}

inline std::string cubic_opt(const std::string& p0) {
    return "kind=cubic\np0=" + p0 +
           "\nbranch=plus\ntarget=0.5,0\nmethod=adam\nstep=0.1\nmode=robust\nM=1000\nt_max=1e150\n"
           "normalize=false\nmax_iters=20000\nrecord_first=10\nrecord_every=100\n";
}

inline Config from_text(const std::string& s) {
    std::istringstream is(s);
    return Config::parse(is);
}

}  // namespace exp

inline const std::vector<Experiment>& experiments() {
    using namespace exp;
    static const std::vector<Experiment> reg = [] {
        std::vector<Experiment> r;
        auto opt = [](const std::string& id) {
            return [id](const Config& c) { return std::vector<CsvTable>{optimization_table(id, c)}; };
        };
        r.push_back({"newton-grad", "backprop vs estimate vs theory for t^2 + c~ after 7/20/50 Newton steps",
                     "t0=2\niterations=7,20,50\n"
                     "c_tilde=-1,-1e-1,-1e-2,-1e-3,-1e-4,-1e-5,-1e-6,-1e-7,-1e-8,-1e-9,-1e-10,-1e-11,-1e-12\n",
                     newton_grad});
        r.push_back({"newton-threshold", "Newton iterations needed for 1% error in root and derivative",
                     "t0=2\neps=1e-4,1e-6,1e-8,1e-10,1e-12\nmax_iter=200\nrel=0.01\n", newton_threshold});
        r.push_back({"table-bnonzero-10", "b^=-2, c^=1+eps after 10 Newton steps",
                     "b_hat=-2\neps=-7.203e-9,-3.023e-9,-4.170e-10,-1.468e-11,-1.144e-12\nt0=10.5\niterations=10\n",
                     [](const Config& c) { return table_bnonzero(c, "table-bnonzero-10"); }});
        r.push_back({"table-bnonzero-100", "b^=-2, c^=1+eps after 100 Newton steps",
                     "b_hat=-2\neps=-7.203e-9,-3.023e-9,-4.170e-10,-1.468e-11,-1.144e-12\nt0=10.5\niterations=100\n",
                     [](const Config& c) { return table_bnonzero(c, "table-bnonzero-100"); }});
        r.push_back({"table-bzero-100", "b^=1e-4 near a double root after 100 Newton steps",
                     "b_hat=1e-4\nc_tilde=-1.979e-6,-9.585e-8,-2.409e-8,-2.126e-9,-4.970e-10,-1.836e-10,-1.367e-11\n"
                     "t0=10.5\niterations=100\n",
                     table_bzero});
        r.push_back({"table-sgd-jump", "SGD step from (-3, 9/4 - 1e-12) towards t+ = 0.5",
                     "kind=quad_hat\np0=-3,2.249999999999\nbranch=plus\ntarget=0.5,0\nmethod=sgd\nstep=0.1\n"
                     "mode=analytic\nmax_iters=100000\nrows=0,1,2\n",
                     sgd_jump});
        r.push_back({"sgd-recovery", "the jump followed by SGD with step 1e8",
                     "kind=quad_hat\np0=-3,2.249999999999\nbranch=plus\ntarget=0.5,0\nmethod=sgd\nstep=0.1\n"
                     "mode=analytic\nrecover_method=sgd\nrecover_step=1e8\nmax_iters=5000\nrecord_first=10\n"
                     "record_every=10\n",
                     [](const Config& c) { return recovery(c, "sgd-recovery"); }});
        r.push_back({"adam-recovery", "the jump followed by Adam with step 1e3",
                     "kind=quad_hat\np0=-3,2.249999999999\nbranch=plus\ntarget=0.5,0\nmethod=sgd\nstep=0.1\n"
                     "mode=analytic\nrecover_method=adam\nrecover_step=1e3\nmax_iters=5000\nrecord_first=10\n"
                     "record_every=10\n",
                     [](const Config& c) { return recovery(c, "adam-recovery"); }});
        r.push_back({"quad-bad-a", "Adam from [0, -5.1, 5]", quad_opt("0,-5.1,5"), opt("quad-bad-a")});
        r.push_back({"quad-bad-ab", "Adam from [0, 0, 5]", quad_opt("0,0,5"), opt("quad-bad-ab")});
        r.push_back({"quad-bad-abc", "Adam from [0, 0, 0]", quad_opt("0,0,0"), opt("quad-bad-abc")});
        r.push_back({"cubic-triple", "Adam from [1, 0, 0, 0]", cubic_opt("1,0,0,0"), opt("cubic-triple")});
        r.push_back({"cubic-bad-q", "Adam from [0, 1, 0, -1]", cubic_opt("0,1,0,-1"), opt("cubic-bad-q")});
        r.push_back({"cubic-bad-q-again", "Adam from [0, -1, 0, 1]", cubic_opt("0,-1,0,1"), opt("cubic-bad-q-again")});
        r.push_back({"cubic-bad-qa", "Adam from [0, 0, -7.1, 6]", cubic_opt("0,0,-7.1,6"), opt("cubic-bad-qa")});
        r.push_back({"cubic-bad-qa-again", "Adam from [0, 0, 7.1, 6]", cubic_opt("0,0,7.1,6"), opt("cubic-bad-qa-again")});
        r.push_back({"cubic-bad-qab", "Adam from [0, 0, 0, 6]", cubic_opt("0,0,0,6"), opt("cubic-bad-qab")});
        r.push_back({"cubic-bad-qab-again", "Adam from [0, 0, 0, -6]", cubic_opt("0,0,0,-6"), opt("cubic-bad-qab-again")});
        r.push_back({"cubic-bad-qabc", "Adam from [0, 0, 0, 0]", cubic_opt("0,0,0,0"), opt("cubic-bad-qabc")});
        r.push_back({"adam-oscillation", "long Adam run on the reduced quadratic; loss spikes after convergence",
                     "kind=quad_hat\np0=-5.1,5\nbranch=plus\ntarget=0.5,0\nmethod=adam\nstep=0.02\nmode=robust\n"
                     "M=1000\nmax_iters=20000\nconv_tol=1e-10\nspike_factor=10\nrecord_every=10\n",
                     adam_oscillation});
        return r;
    }();
    return reg;
}

inline const Experiment* find_experiment(const std::string& id) {
    for (const auto& e : experiments())
        if (e.id == id)
            return &e;
    return nullptr;
}

// built-in defaults overridden by the given config
inline std::vector<CsvTable> run_experiment(const Experiment& e, const Config* override_cfg = nullptr) {
    Config c = exp::from_text(e.defaults);
    if (override_cfg)
        c.merge(*override_cfg);
    return e.run(c);
}

}  // namespace robroot
