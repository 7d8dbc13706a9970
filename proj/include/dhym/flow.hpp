#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dhym/compatibility.hpp"
#include "dhym/functionals.hpp"
#include "dhym/hessian.hpp"
#include "dhym/problem.hpp"
#include "dhym/spectral.hpp"

namespace dhym {

struct FlowOptions {
    double tol_stationary = 1e-6;
    double cadence = 0.0;  // 0: one diagnostics row per accepted step
    double cfl_safety = 0.8;
    double phase_guard = 1e-3;
    int max_rejections = 20;
    int s_samples = 33;
    double slack_C = 10.0;
    bool strict = false;
    long max_steps = 50'000'000;
};

struct FlowState {
    ScalarField u;
    double t = 0.0;
    double dt_last = 0.0;
    long step_index = 0;
};

struct DiagnosticsRow {
    double t = 0.0;
    double J = 0.0;
    double S = 0.0;
    double sup_dtu = 0.0;
    double theta_min = 0.0;
    double theta_max = 0.0;
    double lambda_min = 0.0;
    double residual = 0.0;
    bool comparison_ok = true;
    // Recorded for the monitors; not part of the CSV layout.
    long step = 0;
    double l1_phase = 0.0;
    double F_min = 0.0;
    double F_max = 0.0;
    double dtu_min = 0.0;
    double dtu_max = 0.0;
    double sub_gap_min = std::numeric_limits<double>::infinity();  // min(u − u̲)
    double u_max = -std::numeric_limits<double>::infinity();
};

/// Hessian, phase data and right-hand side of the flow at one state.
struct Evaluation {
    HermitianField hess;
    PhaseData phase;
    ScalarField rhs;  // zero on the boundary layer
};

inline Evaluation evaluate(const ScalarField& u, double hat_theta) {
    Evaluation ev{complex_hessian(u), {}, ScalarField(u.grid())};
    ev.phase = phase_data(ev.hess);
    require_phase_range(ev.phase, 0.0, std::numbers::pi);
    const double target = cot(hat_theta);
    const auto& interior = u.grid().nodes->interior;
    for (std::size_t k = 0; k < interior.size(); ++k) ev.rhs[interior[k]] = ev.phase.nodes[k].cot_theta - target;
    return ev;
}

/// cot Θ(Hess_ℂ u) − cot θ̂ on the interior.
inline ScalarField rhs(const ScalarField& u, double hat_theta) { return evaluate(u, hat_theta).rhs; }

/// Explicit step bound σ·h²/(4·max 𝓕).
inline double stable_dt(const PhaseData& phase, double h, double safety = 0.8) {
    double f_max = 0.0;
    for (const auto& p : phase.nodes) f_max = std::max(f_max, p.F_trace);
    if (!(f_max > 0.0)) fail(ErrorKind::numeric, "internal error: non-positive linearization trace");
    return safety * h * h / (4.0 * f_max);
}

inline void apply_boundary(const Problem& p, ScalarField& u, double t) {
    for (std::size_t i : p.grid.nodes->boundary) u[i] = p.psi.value_at(p.grid, i, t);
}

struct StepOutcome {
    FlowState state;
    Evaluation eval;
    int rejections = 0;
};

/// Forward Euler with phase-guarded step rejection: dt is halved until the new
/// state keeps every interior phase in (guard, π − guard).
inline StepOutcome euler_step(const Problem& p, const FlowState& s, const Evaluation& ev, double dt,
                              const FlowOptions& opt = {}) {
    const auto& interior = p.grid.nodes->interior;
    for (int attempt = 0; attempt <= opt.max_rejections; ++attempt) {
        ScalarField next = s.u;
        for (std::size_t i : interior) next[i] += dt * ev.rhs[i];
        if (p.psi.time_dependent()) apply_boundary(p, next, s.t + dt);
        try {
            Evaluation next_ev = evaluate(next, p.hat_theta);
            require_phase_range(next_ev.phase, opt.phase_guard, std::numbers::pi - opt.phase_guard);
            return {FlowState{std::move(next), s.t + dt, dt, s.step_index + 1}, std::move(next_ev), attempt};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::numeric) throw;
        }
        dt *= 0.5;
    }
    fail(ErrorKind::numeric, "stability collapse: " + std::to_string(opt.max_rejections) +
                                 " consecutive step rejections at t=" + std::to_string(s.t));
}

/// Bounds the a-priori estimates predict from the parabolic boundary data.
struct ParabolicBounds {
    double theta_lo = 0.0;
    double theta_hi = 0.0;
    double dtu_bound = 0.0;
    std::optional<double> sub_sup;  // sup of u̲ over the side
    double slack = 0.0;              // η_h = C·h²
    bool boundary_static = true;     // ψ independent of t
};

/// Phase range over the parabolic boundary: the bottom phases Θ(Hess φ), the
/// side phases Θ(Hess ψ), and the side phases arccot(cot θ̂ + ∂ₜψ) that the
/// equation forces where u = ψ.
inline ParabolicBounds parabolic_bounds(const Problem& p, const Evaluation& initial, double slack_C) {
    ParabolicBounds b;
    b.slack = slack_C * p.grid.h * p.grid.h;
    b.boundary_static = !p.psi.time_dependent();
    b.theta_lo = std::numeric_limits<double>::infinity();
    b.theta_hi = -std::numeric_limits<double>::infinity();
    for (const auto& node : initial.phase.nodes) {
        b.theta_lo = std::min(b.theta_lo, node.theta);
        b.theta_hi = std::max(b.theta_hi, node.theta);
    }
    for (std::size_t i : p.grid.nodes->interior) b.dtu_bound = std::max(b.dtu_bound, std::abs(initial.rhs[i]));
    const double cot_hat = cot(p.hat_theta);
    for (double t : p.sample_times()) {
        visit_side_phases(p, t, [&](std::size_t, double th) {
            b.theta_lo = std::min(b.theta_lo, th);
            b.theta_hi = std::max(b.theta_hi, th);
        });
        for (std::size_t i : p.grid.nodes->boundary) {
            const double dpsi = p.psi.time_derivative_at(p.grid, i, t);
            b.dtu_bound = std::max(b.dtu_bound, std::abs(dpsi));
            const double th = arccot(cot_hat + dpsi);
            b.theta_lo = std::min(b.theta_lo, th);
            b.theta_hi = std::max(b.theta_hi, th);
        }
        if (p.subsolution) {
            double sup = b.sub_sup.value_or(-std::numeric_limits<double>::infinity());
            for (std::size_t i : p.grid.nodes->boundary) sup = std::max(sup, p.subsolution->value_at(p.grid, i, t));
            b.sub_sup = sup;
        }
    }
    return b;
}

struct MonitorItem {
    std::string name;
    bool passed = true;
    double worst = -std::numeric_limits<double>::infinity();  // largest excess over the bound
    std::string detail;
};

struct MonitorReport {
    std::vector<MonitorItem> items;

    bool all_passed() const {
        return std::all_of(items.begin(), items.end(), [](const MonitorItem& i) { return i.passed; });
    }
    const MonitorItem* find(const std::string& name) const {
        for (const auto& i : items)
            if (i.name == name) return &i;
        return nullptr;
    }
};

namespace detail {
inline void track(MonitorItem& item, double excess, const DiagnosticsRow& row) {
    if (excess > item.worst) {
        item.worst = excess;
        if (excess > 0.0) item.detail = "violated by " + std::to_string(excess) + " at t=" + std::to_string(row.t);
    }
    if (excess > 0.0) item.passed = false;
}

inline void finish(MonitorItem& item) {
    if (item.passed) item.detail = std::isfinite(item.worst) ? "ok (margin " + std::to_string(-item.worst) + ")" : "ok";
}
}  // namespace detail

/// Pointwise-in-time monitors (i)-(iv) on a set of rows.
inline MonitorReport monitor_rows(const std::vector<DiagnosticsRow>& rows, const ParabolicBounds& b) {
    MonitorItem phase{"phase_range"}, dtu{"dtu_bound"}, comparison{"comparison"}, lambda{"lambda_min"};
    double th_min = std::numeric_limits<double>::infinity(), th_max = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        th_min = std::min(th_min, r.theta_min);
        th_max = std::max(th_max, r.theta_max);
    }
    const double delta1 = std::min(th_min, std::numbers::pi / 2.0 - th_max);
    const double eta = b.slack;
    for (const auto& r : rows) {
        detail::track(phase, std::max(b.theta_lo - eta - r.theta_min, r.theta_max - (b.theta_hi + eta)), r);
        detail::track(dtu, r.sup_dtu - (b.dtu_bound + eta), r);
        if (std::isfinite(r.sub_gap_min)) {
            double excess = -eta - r.sub_gap_min;
            if (b.sub_sup) excess = std::max(excess, r.u_max - (*b.sub_sup + eta));
            detail::track(comparison, excess, r);
        }
        detail::track(lambda, std::tan(delta1) - eta - r.lambda_min, r);
    }
    for (MonitorItem* i : {&phase, &dtu, &comparison, &lambda}) detail::finish(*i);
    if (!std::isfinite(comparison.worst)) comparison.detail = "skipped: no subsolution";
    return {{phase, dtu, comparison, lambda}};
}

/// Full report: (i)-(iv) plus the history checks (v) L¹ phase residual
/// decreasing over the final quarter and sup|∂ₜu| non-increasing for static
/// boundary data.
inline MonitorReport monitor_invariants(const std::vector<DiagnosticsRow>& rows, const ParabolicBounds& b) {
    MonitorReport rep = monitor_rows(rows, b);
    MonitorItem l1{"l1_phase_decay"};
    if (rows.size() >= 2) {
        const std::size_t start = std::min(rows.size() - 2, (3 * rows.size()) / 4);
        for (std::size_t k = start + 1; k < rows.size(); ++k) {
            const double tol = 1e-12 * (1.0 + rows[k - 1].l1_phase);
            detail::track(l1, rows[k].l1_phase - rows[k - 1].l1_phase - tol, rows[k]);
        }
    }
    detail::finish(l1);
    rep.items.push_back(l1);

    MonitorItem mono{"dtu_nonincreasing"};
    if (b.boundary_static)
        for (std::size_t k = 1; k < rows.size(); ++k)
            detail::track(mono, rows[k].sup_dtu - rows[k - 1].sup_dtu - b.slack, rows[k]);
    detail::finish(mono);
    if (!b.boundary_static) mono.detail = "skipped: time-dependent boundary";
    rep.items.push_back(mono);
    return rep;
}

/// Largest J increase between consecutive rows beyond slack·(1 + |J|); ≤ 0 when monotone.
inline double j_monotonicity_excess(const std::vector<DiagnosticsRow>& rows, double slack = 1e-10) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < rows.size(); ++k)
        worst = std::max(worst, rows[k].J - rows[k - 1].J - slack * (1.0 + std::abs(rows[k - 1].J)));
    return rows.size() < 2 ? 0.0 : worst;
}

inline std::vector<JSample> j_history(const std::vector<DiagnosticsRow>& rows) {
    std::vector<JSample> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back({r.t, r.J, r.S});
    return out;
}

/// Builds one diagnostics row for a state and its evaluation.
inline DiagnosticsRow diagnostics_row(const Problem& p, const FlowState& s, const Evaluation& ev,
                                      const CyEvaluator& cy, const std::optional<ScalarField>& sub, double slack) {
    DiagnosticsRow r;
    r.t = s.t;
    r.step = s.step_index;
    r.J = j_from_cy(cy(s.u), p.hat_theta);
    r.S = dissipation(ev.hess, ev.rhs, p.hat_theta);
    r.theta_min = r.lambda_min = r.F_min = r.dtu_min = std::numeric_limits<double>::infinity();
    r.theta_max = r.F_max = r.dtu_max = -std::numeric_limits<double>::infinity();
    const auto& interior = p.grid.nodes->interior;
    std::vector<double> l1(interior.size());
    for (std::size_t k = 0; k < interior.size(); ++k) {
        const NodePhase& np = ev.phase.nodes[k];
        const double v = ev.rhs[interior[k]];
        r.sup_dtu = std::max(r.sup_dtu, std::abs(v));
        r.dtu_min = std::min(r.dtu_min, v);
        r.dtu_max = std::max(r.dtu_max, v);
        r.theta_min = std::min(r.theta_min, np.theta);
        r.theta_max = std::max(r.theta_max, np.theta);
        r.lambda_min = std::min(r.lambda_min, np.lambda[np.lambda.n - 1]);
        r.F_min = std::min(r.F_min, np.F_trace);
        r.F_max = std::max(r.F_max, np.F_trace);
        l1[k] = std::abs(np.theta - p.hat_theta);
    }
    r.residual = r.sup_dtu;
    r.l1_phase = integrate_interior_values(p.grid, l1);
    if (sub) {
        for (std::size_t i : interior) {
            r.sub_gap_min = std::min(r.sub_gap_min, s.u[i] - (*sub)[i]);
            r.u_max = std::max(r.u_max, s.u[i]);
        }
        for (std::size_t i : p.grid.nodes->boundary) r.u_max = std::max(r.u_max, s.u[i]);
        r.comparison_ok = r.sub_gap_min >= -slack;
    }
    return r;
}

enum class Termination { reached_t_end, stationary };

struct FlowResult {
    FlowState final_state;
    std::vector<DiagnosticsRow> rows;
    std::vector<double> step_sizes;  // every accepted dt, in order
    ParabolicBounds bounds;
    MonitorReport monitor;
    Termination termination = Termination::reached_t_end;
    long rejections = 0;
};

/// Raised in strict mode when a monitor fails mid-run; carries the state for a dump.
class FlowAbort : public Error {
public:
    FlowAbort(const std::string& what, FlowResult partial)
        : Error(ErrorKind::invariant, what), partial_(std::move(partial)) {}
    const FlowResult& partial() const { return partial_; }

private:
    FlowResult partial_;
};

using RowObserver = std::function<void(const DiagnosticsRow&, const FlowState&)>;

/// Integrates the flow from φ until t_end or until sup|∂ₜu| < tol_stationary.
inline FlowResult run_flow(const Problem& p, const FlowOptions& opt = {}, const RowObserver& observer = {}) {
    FlowResult res;
    FlowState state{p.phi.sample(p.grid, 0.0), 0.0, 0.0, 0};
    apply_boundary(p, state.u, 0.0);
    Evaluation ev = evaluate(state.u, p.hat_theta);
    require_phase_range(ev.phase, opt.phase_guard, std::numbers::pi - opt.phase_guard);
    const CyEvaluator cy(state.u, opt.s_samples);
    res.bounds = parabolic_bounds(p, ev, opt.slack_C);

    const bool sub_static = p.subsolution && !p.subsolution->time_dependent();
    std::optional<ScalarField> sub_cache;
    if (sub_static) sub_cache = p.subsolution->sample(p.grid, 0.0);
    auto sub_at = [&](double t) -> std::optional<ScalarField> {
        if (!p.subsolution) return std::nullopt;
        if (sub_cache) return sub_cache;
        return p.subsolution->sample(p.grid, t);
    };

    auto emit = [&](const FlowState& s, const Evaluation& e) {
        res.rows.push_back(diagnostics_row(p, s, e, cy, sub_at(s.t), res.bounds.slack));
        if (observer) observer(res.rows.back(), s);
        if (opt.strict) {
            MonitorReport now = monitor_rows({res.rows.back()}, res.bounds);
            for (const auto& item : now.items)
                if (!item.passed) {
                    res.final_state = s;
                    res.monitor = monitor_invariants(res.rows, res.bounds);
                    throw FlowAbort("invariant monitor '" + item.name + "' failed: " + item.detail, res);
                }
        }
    };

    emit(state, ev);
    const double time_eps = 1e-12 * std::max(1.0, p.t_end);
    double next_output = opt.cadence > 0.0 ? opt.cadence : std::numeric_limits<double>::infinity();
    bool stationary = res.rows.back().sup_dtu < opt.tol_stationary;
    while (!stationary && state.t < p.t_end - time_eps) {
        if (state.step_index >= opt.max_steps) fail(ErrorKind::numeric, "step budget exhausted");
        double dt = stable_dt(ev.phase, p.grid.h, opt.cfl_safety);
        dt = std::min({dt, p.t_end - state.t, next_output - state.t});
        StepOutcome out = euler_step(p, state, ev, dt, opt);
        res.rejections += out.rejections;
        res.step_sizes.push_back(out.state.dt_last);
        state = std::move(out.state);
        ev = std::move(out.eval);
        double sup = 0.0;
        for (std::size_t i : p.grid.nodes->interior) sup = std::max(sup, std::abs(ev.rhs[i]));
        stationary = sup < opt.tol_stationary;
        const bool at_output = state.t >= next_output - time_eps;
        if (at_output) next_output += opt.cadence;
        const bool last = stationary || state.t >= p.t_end - time_eps;
        if (opt.cadence <= 0.0 || at_output || last) emit(state, ev);
    }
    res.termination = stationary ? Termination::stationary : Termination::reached_t_end;
    res.final_state = std::move(state);
    res.monitor = monitor_invariants(res.rows, res.bounds);
    return res;
}

}  // namespace dhym
