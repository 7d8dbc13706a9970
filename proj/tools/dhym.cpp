#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dhym/dhym.hpp"

namespace fs = std::filesystem;
using namespace dhym;

namespace {

struct Common {
    std::string config;
    std::string out;
    bool strict = false;
    std::optional<std::uint64_t> seed;
};

struct Loaded {
    ProblemConfig cfg;
    Problem problem;
    fs::path out_dir;
};

Loaded load(const Common& c) {
    if (c.config.empty()) fail(ErrorKind::config, "--config is required for this command");
    Loaded l;
    l.cfg = parse_config(c.config);
    if (c.strict) l.cfg.strict = true;
    if (c.seed) l.cfg.seed = *c.seed;
    l.problem = build_problem(l.cfg, fs::path(c.config).parent_path());
    l.out_dir = c.out.empty() ? fs::path(l.cfg.output_directory) : fs::path(c.out);
    std::error_code ec;
    fs::create_directories(l.out_dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory " + l.out_dir.string() + ": " + ec.message());
    return l;
}

std::string path_in(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

void require_compatible(const Problem& p) {
    const CompatibilityReport r = check_compatibility(p);
    if (r.ok()) return;
    std::ostringstream os;
    os << "incompatible data (" << r.violation_count << " violations)";
    for (const auto& v : r.violations) os << "\n  " << v;
    fail(ErrorKind::config, os.str());
}

std::string termination_name(Termination t) { return t == Termination::stationary ? "stationary" : "reached t_end"; }

std::string flow_summary(const FlowResult& r) {
    std::ostringstream os;
    os << "termination: " << termination_name(r.termination) << "\n";
    os << "steps: " << r.final_state.step_index << ", rejections: " << r.rejections << "\n";
    os << "t: " << format_g17(r.final_state.t) << "\n";
    if (!r.rows.empty()) {
        os << "final residual: " << format_g17(r.rows.back().residual) << "\n";
        os << "final J: " << format_g17(r.rows.back().J) << "\n";
    }
    os << "j monotonicity excess: " << format_g17(j_monotonicity_excess(r.rows)) << "\n";
    os << "bounds: theta [" << format_g17(r.bounds.theta_lo) << ", " << format_g17(r.bounds.theta_hi)
       << "], dtu " << format_g17(r.bounds.dtu_bound) << ", slack " << format_g17(r.bounds.slack) << "\n";
    os << monitor_text(r.monitor);
    return os.str();
}

int run_flow_cmd(const Common& c) {
    Loaded l = load(c);
    require_compatible(l.problem);
    FlowOptions opt;
    opt.tol_stationary = l.cfg.tol_stationary;
    opt.cadence = l.cfg.cadence;
    opt.s_samples = l.cfg.s_samples;
    opt.slack_C = l.cfg.slack_C;
    opt.strict = l.cfg.strict;
    long snap = 0;
    RowObserver observer;
    if (opt.cadence > 0.0)
        observer = [&](const DiagnosticsRow&, const FlowState& s) {
            char name[32];
            std::snprintf(name, sizeof name, "snap_%05ld.dhym", snap++);
            write_snapshot(s.u, path_in(l.out_dir, name));
        };
    try {
        const FlowResult r = run_flow(l.problem, opt, observer);
        write_diagnostics(r.rows, path_in(l.out_dir, "diagnostics.csv"));
        write_snapshot(r.final_state.u, path_in(l.out_dir, "final.dhym"));
        const std::string summary = flow_summary(r);
        write_file(path_in(l.out_dir, "monitor.txt"), summary);
        std::cout << summary;
        if (opt.strict && !r.monitor.all_passed()) {
            std::cerr << "error: invariant monitor failed in strict mode\n";
            return exit_code(ErrorKind::invariant);
        }
        return 0;
    } catch (const FlowAbort& e) {
        const FlowResult& r = e.partial();
        write_diagnostics(r.rows, path_in(l.out_dir, "diagnostics.csv"));
        write_snapshot(r.final_state.u, path_in(l.out_dir, "abort.dhym"));
        write_file(path_in(l.out_dir, "monitor.txt"), flow_summary(r));
        std::cerr << "state at abort written to " << path_in(l.out_dir, "abort.dhym") << "\n";
        throw;
    }
}

int solve_elliptic_cmd(const Common& c) {
    Loaded l = load(c);
    ScalarField u = l.problem.phi.sample(l.problem.grid, 0.0);
    apply_boundary(l.problem, u, 0.0);
    const NewtonResult r = newton_solve(u, l.problem.hat_theta);
    write_file(path_in(l.out_dir, "newton_trace.csv"), newton_trace_csv(r.trace));
    write_snapshot(r.state.u, path_in(l.out_dir, "solution.dhym"));
    std::cout << "converged: " << (r.converged ? "yes" : "no") << "\n"
              << "iterations: " << r.state.iteration << "\n"
              << "residual: " << format_g17(r.state.residual_sup) << "\n";
    return 0;
}

int check_subsolution_cmd(const Common& c) {
    Loaded l = load(c);
    const Problem& p = l.problem;
    const FieldSource& src = p.subsolution ? *p.subsolution : p.phi;
    std::ostringstream os;
    os << "field: " << (p.subsolution ? "subsolution" : "phi (no subsolution given)") << "\n";
    const std::vector<double> times = src.time_dependent() ? p.sample_times() : std::vector<double>{0.0};
    for (double t : times) {
        const ScalarField u = src.sample(p.grid, t);
        const HermitianField hess = complex_hessian(u);
        const SubsolutionReport er = elliptic_subsolution_check(hess, p.hat_theta);
        ScalarField dt(p.grid);
        for (std::size_t i : p.grid.nodes->interior) dt[i] = src.time_derivative_at(p.grid, i, t);
        const ParabolicMargin pm = parabolic_margin(hess, dt, p.hat_theta);
        os << "t=" << format_g17(t) << "\n";
        os << "  elliptic: " << (er.all_ok ? "subsolution" : "not a subsolution") << " (" << er.failures << " of "
           << hess.size() << " nodes fail, worst partial phase " << format_g17(er.worst_partial_phase)
           << ", hat_theta " << format_g17(p.hat_theta) << ")\n";
        os << "  parabolic: ";
        if (pm.vacuous)
            os << "vacuous (n = 1)";
        else
            os << "margin " << format_g17(pm.margin) << (pm.certified() ? " certified" : " not certified");
        os << ", epsilon " << format_g17(pm.epsilon) << "\n";
    }
    write_file(path_in(l.out_dir, "subsolution.txt"), os.str());
    std::cout << os.str();
    return 0;
}

int eval_functionals_cmd(const Common& c) {
    Loaded l = load(c);
    if (!l.cfg.target) fail(ErrorKind::config, "target: missing field (required by eval-functionals)");
    const Problem& p = l.problem;
    const ScalarField phi = p.phi.sample(p.grid, 0.0);
    const ScalarField psi = make_source(*l.cfg.target, p.grid, fs::path(c.config).parent_path()).sample(p.grid, 0.0);
    const CyEvaluator cy(phi, l.cfg.s_samples);
    const cplx value = cy(psi);
    const double diff = path_independence_check(phi, psi);
    const double rel = std::abs(value) > 0.0 ? diff / std::abs(value) : diff;
    json out{{"cy", {value.real(), value.imag()}},
             {"J", j_from_cy(value, p.hat_theta)},
             {"path_independence_abs", diff},
             {"path_independence_rel", rel},
             {"in_potential_space", cy.in_potential_space(psi)}};
    const std::string text = out.dump(2) + "\n";
    write_file(path_in(l.out_dir, "functionals.json"), text);
    if (!cy.in_potential_space(psi)) std::cerr << "warning: target is outside the potential space of phi\n";
    std::cout << text;
    return 0;
}

int verify_cmd(const Common& c) {
    std::uint64_t seed = 0;
    if (!c.config.empty()) seed = parse_config(c.config).seed;
    if (c.seed) seed = *c.seed;
    bool all = true;
    for (const auto& r : run_property_suite(seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.cases << " cases): " << r.detail << "\n";
        all = all && r.passed;
    }
    return all ? 0 : exit_code(ErrorKind::invariant);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dHYM flow solver and verification harness"};
    app.require_subcommand(1);
    Common common;
    auto add = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", common.config, "JSON configuration file");
        sub->add_flag("--strict", common.strict, "abort on any invariant monitor failure");
        sub->add_option("--out", common.out, "output directory (overrides the config)");
        sub->add_option("--seed", common.seed, "seed for randomized checks");
        return sub;
    };
    CLI::App* flow = add("run-flow", "integrate the parabolic flow");
    CLI::App* elliptic = add("solve-elliptic", "damped Newton solve of the elliptic equation");
    CLI::App* sub = add("check-subsolution", "report subsolution margins");
    CLI::App* functionals = add("eval-functionals", "CY and J functionals of phi and target");
    CLI::App* verify = add("verify", "randomized property suite");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        if (flow->parsed()) return run_flow_cmd(common);
        if (elliptic->parsed()) return solve_elliptic_cmd(common);
        if (sub->parsed()) return check_subsolution_cmd(common);
        if (functionals->parsed()) return eval_functionals_cmd(common);
        if (verify->parsed()) return verify_cmd(common);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
