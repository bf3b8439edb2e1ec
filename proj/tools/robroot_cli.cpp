#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robroot/cubic.hpp"
#include "robroot/experiments.hpp"
#include "robroot/newton.hpp"
#include "robroot/optimizer.hpp"
#include "robroot/quadratic.hpp"

#ifndef ROBROOT_CONFIG_DIR
#define ROBROOT_CONFIG_DIR "configs"
#endif

using namespace robroot;

namespace {

struct Common {
    double M = 1000.0;
    double t_max = 1e150;
    double tol = 1e-13;
    int max_iter = 200;
    std::string mode = "robust";
    std::string out = ".";
    std::string branch = "plus";
    std::string config_dir = ROBROOT_CONFIG_DIR;
};

RobustDivConfig rcfg(const Common& c) {
    RobustDivConfig r;
    r.M = c.M;
    r.t_max = c.t_max;
    if (!r.valid())
        throw std::invalid_argument("need M > 0 and t_max > 0");
    return r;
}

void check_coeffs(const std::string& kind, const std::vector<double>& v) {
    std::size_t want = kind == "quad" ? 3 : 4;
    if (v.size() != want)
        throw std::invalid_argument(kind + " needs " + std::to_string(want) + " coefficients");
    for (double x : v)
        if (!std::isfinite(x))
            throw std::invalid_argument("coefficients must be finite");
}

std::string e(double x) { return fmt_e(x); }

void print_root(const char* label, const PlanarRoot& r, double res) {
    std::printf("%-6s %s %s", label, e(r.tR).c_str(), e(r.tI).c_str());
    if (r.has_pseudo_sign)
        std::printf("  pseudo_sign=%+g", sign_value(r.pseudo_sign));
    std::printf("  residual=%s\n", e(res).c_str());
}

int cmd_solve(const std::string& kind, const std::vector<double>& v, const Common& c) {
    check_coeffs(kind, v);
    if (kind == "quad") {
        auto p = make_quad(v[0], v[1], v[2]);
        auto r = solve(p, rcfg(c));
        std::printf("c_tilde=%s\n", e(reduced(p)).c_str());
        print_root("plus", r.plus, residual_abs(p, r.plus.tR, r.plus.tI));
        print_root("minus", r.minus, residual_abs(p, r.minus.tR, r.minus.tI));
        return 0;
    }
    CubicSolverConfig sc;
    sc.tol = c.tol;
    sc.max_iter = c.max_iter;
    auto p = make_cubic(v[0], v[1], v[2], v[3]);
    auto r = solve_cubic(p, rcfg(c), sc);
    auto t = to_tilde(p);
    std::printf("b_tilde=%s c_tilde=%s real_count=%d\n", e(t.b_tilde).c_str(), e(t.c_tilde).c_str(), r.real_count);
    for (Branch b : {Branch::plus, Branch::mid, Branch::minus}) {
        const auto& rt = r.get(b);
        // |p(t)| evaluated in complex arithmetic
        std::complex<double> z(rt.tR, rt.tI);
        double res = std::abs(((p.q * z + p.a) * z + p.b) * z + p.c);
        print_root(branch_name(b), rt, res);
    }
    return 0;
}

int cmd_grad(const std::string& kind, const std::vector<double>& v, const Common& c) {
    check_coeffs(kind, v);
    Branch br;
    if (!parse_branch(c.branch, br))
        throw std::invalid_argument("unknown branch " + c.branch);
    auto cfg = rcfg(c);
    auto show = [](const char* name, const auto& J, std::size_t n) {
        for (int r = 0; r < 2; ++r) {
            std::printf("%s d%s:", name, r == 0 ? "tR" : "tI");
            for (std::size_t j = 0; j < n; ++j)
                std::printf(" %s", e(J.rows[r][j]).c_str());
            std::printf("  clamped=%d saturated=%d\n", J.clamped[r] ? 1 : 0, J.saturated[r] ? 1 : 0);
        }
    };
    if (kind == "quad") {
        if (br == Branch::mid)
            throw std::invalid_argument("quadratics have no mid branch");
        auto p = make_quad(v[0], v[1], v[2]);
        auto r = solve(p, cfg);
        auto J = jacobian(p, r.get(br), cfg);
        std::printf("params: a b c\n");
        show(branch_name(br), J, 3);
        return 0;
    }
    auto p = make_cubic(v[0], v[1], v[2], v[3]);
    CubicSolverConfig sc;
    sc.tol = c.tol;
    sc.max_iter = c.max_iter;
    auto r = solve_cubic(p, cfg, sc);
    auto J = jacobian_cubic(p, r.get(br), cfg);
    std::printf("params: q a b c  formula=%s\n", formula_name(J.formula));
    show(branch_name(br), J, 4);
    return 0;
}

int cmd_newton(const std::vector<double>& v, double t0R, double t0I, double eps, const Common& c) {
    check_coeffs("quad", v);
    auto p = make_quad(v[0], v[1], v[2]);
    NewtonOptions o;
    o.max_iter = c.max_iter;
    o.tol = c.tol;
    o.epsilon = eps;
    auto r = newton_solve(p, t0R, t0I, o);
    std::printf("iteration,tR,tI,residual\n");
    for (const auto& s : r.history)
        std::printf("%d,%s,%s,%s\n", s.iteration, e(s.tR).c_str(), e(s.tI).c_str(),
                    e(residual_abs(p, s.tR, s.tI)).c_str());
    auto tn = newton_taped(p, t0R, t0I, r.iterations, eps);
    auto g = backprop_through_newton(tn);
    std::printf("# converged=%d backprop dtR/d(a,b,c) = %s %s %s\n", r.converged ? 1 : 0, e(g[0][0]).c_str(),
                e(g[0][1]).c_str(), e(g[0][2]).c_str());
    return r.converged ? 0 : 2;
}

std::filesystem::path out_path(const Common& c, const std::string& name) {
    std::filesystem::create_directories(c.out);
    return std::filesystem::path(c.out) / (name + ".csv");
}

// command-line flags override the file only when given
int cmd_optimize(const std::string& cfg_path, const Common& c, const CLI::App& cmd) {
    Config cfg = Config::load(cfg_path);
    if (cmd.get_option("--mode")->count())
        cfg.set("mode", c.mode);
    if (cmd.get_option("--max-iter")->count())
        cfg.set("max_iters", std::to_string(c.max_iter));
    if (cmd.get_option("--M")->count())
        cfg.set("M", fmt_e(c.M));
    if (cmd.get_option("--t-max")->count())
        cfg.set("t_max", fmt_e(c.t_max));
    auto t = exp::optimization_table(std::filesystem::path(cfg_path).stem().string(), cfg);
    auto path = out_path(c, t.name);
    write_csv(t, path.string());
    std::printf("%s (%zu rows)\n", path.string().c_str(), t.rows.size());
    return 0;
}

int list_ids() {
    for (const auto& ex : experiments())
        std::printf("%-22s %s\n", ex.id.c_str(), ex.description.c_str());
    return 0;
}

int cmd_reproduce(const std::string& id, const Common& c) {
    std::vector<const Experiment*> todo;
    if (id == "all") {
        for (const auto& ex : experiments())
            todo.push_back(&ex);
    } else if (auto* ex = find_experiment(id)) {
        todo.push_back(ex);
    } else {
        std::fprintf(stderr, "unknown experiment '%s'; registered ids:\n", id.c_str());
        for (const auto& ex : experiments())
            std::fprintf(stderr, "  %s\n", ex.id.c_str());
        return 1;
    }
    for (const auto* ex : todo) {
        // shipped config file if present, built-in defaults otherwise
        auto file = std::filesystem::path(c.config_dir) / (ex->id + ".cfg");
        std::vector<CsvTable> tables;
        if (std::filesystem::exists(file)) {
            Config cfg = Config::load(file.string());
            tables = run_experiment(*ex, &cfg);
        } else {
            tables = run_experiment(*ex);
        }
        for (const auto& t : tables) {
            auto path = out_path(c, t.name);
            write_csv(t, path.string());
            std::printf("%s (%zu rows)\n", path.string().c_str(), t.rows.size());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust quadratic/cubic roots, their derivatives, and the experiments"};
    app.require_subcommand(1);
    Common c;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--M", c.M, "bound used by the robust division");
        s->add_option("--t-max", c.t_max, "magnitude of unbounded roots");
        s->add_option("--tol", c.tol, "solver tolerance");
        s->add_option("--max-iter", c.max_iter, "iteration limit");
        s->add_option("--mode", c.mode, "gradient mode: analytic, clamped_ctilde, orthogonal_split, robust");
        s->add_option("--out", c.out, "output directory");
        s->add_option("--branch", c.branch, "plus, mid or minus");
        s->add_option("--config-dir", c.config_dir, "directory with <id>.cfg files");
    };

    std::string kind;
    std::vector<double> coeffs;
    auto* solve_cmd = app.add_subcommand("solve", "print all roots");
    solve_cmd->add_option("kind", kind)->required()->check(CLI::IsMember({"quad", "cubic"}));
    solve_cmd->add_option("coeffs", coeffs)->required();
    add_common(solve_cmd);

    auto* grad_cmd = app.add_subcommand("grad", "print the root Jacobian");
    grad_cmd->add_option("kind", kind)->required()->check(CLI::IsMember({"quad", "cubic"}));
    grad_cmd->add_option("coeffs", coeffs)->required();
    add_common(grad_cmd);

    double t0R = 2.0, t0I = 0.0, eps = 0.0;
    auto* newton_cmd = app.add_subcommand("newton", "Newton iterations on a quadratic");
    newton_cmd->add_option("coeffs", coeffs)->required()->expected(3);
    newton_cmd->add_option("--t0", t0R, "initial guess, real part");
    newton_cmd->add_option("--t0i", t0I, "initial guess, imaginary part");
    newton_cmd->add_option("--epsilon", eps, "damping term");
    add_common(newton_cmd);

    std::string cfg_path;
    auto* opt_cmd = app.add_subcommand("optimize", "run an optimizer from a config file");
    opt_cmd->add_option("config", cfg_path)->required()->check(CLI::ExistingFile);
    add_common(opt_cmd);

    std::string id;
    auto* rep_cmd = app.add_subcommand("reproduce", "write the CSV files of an experiment (or 'all')");
    rep_cmd->add_option("id", id)->required();
    add_common(rep_cmd);

    auto* list_cmd = app.add_subcommand("list-experiments", "print the registered experiment ids");

    CLI11_PARSE(app, argc, argv);

    try {
        GradKind gk;
        if (!parse_grad_kind(c.mode, gk))
            throw std::invalid_argument("unknown mode " + c.mode);
        if (*solve_cmd) return cmd_solve(kind, coeffs, c);
        if (*grad_cmd) return cmd_grad(kind, coeffs, c);
        if (*newton_cmd) {
            if (!newton_cmd->get_option("--tol")->count())
                c.tol = 1e-14;
            if (!newton_cmd->get_option("--max-iter")->count())
                c.max_iter = 100;
            return cmd_newton(coeffs, t0R, t0I, eps, c);
        }
        if (*opt_cmd)
            return cmd_optimize(cfg_path, c, *opt_cmd);
        if (*rep_cmd) return cmd_reproduce(id, c);
        if (*list_cmd) return list_ids();
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
