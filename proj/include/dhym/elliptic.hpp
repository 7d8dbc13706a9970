#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "dhym/flow.hpp"

namespace dhym {

/// cot Θ(Hess u) − cot θ̂; the same evaluation the flow uses as its right-hand side.
inline ScalarField residual(const ScalarField& u, double hat_theta) { return rhs(u, hat_theta); }

struct LinearSolveOptions {
    double relative_tolerance = 1e-10;
    long max_iterations = 100000;
};

struct LinearSolveResult {
    ScalarField correction;  // zero on the boundary layer
    long iterations = 0;
    double relative_residual = 0.0;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
    return pairwise_sum(prod);
}

/// δ ↦ tr(F(x)·Hess δ(x)) on interior unknowns with δ = 0 on the boundary.
class LinearizedOperator {
public:
    LinearizedOperator(const GridSpec& g, std::span<const CMat> F) : scratch_(g), F_(F.begin(), F.end()) {
        diag_.resize(F_.size());
        const double inv_h2 = 1.0 / (g.h * g.h);
        for (std::size_t k = 0; k < F_.size(); ++k) diag_[k] = -F_[k].trace().real() * inv_h2;
    }

    std::size_t size() const { return F_.size(); }
    std::span<const double> diagonal() const { return diag_; }

    void apply(std::span<const double> x, std::span<double> y) {
        const auto& interior = scratch_.grid().nodes->interior;
        for (std::size_t k = 0; k < interior.size(); ++k) scratch_[interior[k]] = x[k];
        parallel_for(interior.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k)
                y[k] = hermitian_pairing(F_[k], complex_hessian_at(scratch_, interior[k]));
        });
    }

private:
    ScalarField scratch_;  // boundary layer stays zero
    std::vector<CMat> F_;
    std::vector<double> diag_;
};

}  // namespace detail

/// Solves tr(F·Hess δ) = rhs on the interior, δ = 0 on the boundary, by
/// Jacobi-preconditioned BiCGSTAB. The operator is elliptic when F > 0 but is
/// not symmetric for variable F, hence the nonsymmetric Krylov method.
inline LinearSolveResult linear_solve(std::span<const CMat> F, const ScalarField& rhs_field,
                                      const LinearSolveOptions& opt = {}) {
    const GridSpec& g = rhs_field.grid();
    const auto& interior = g.nodes->interior;
    if (F.size() != interior.size()) fail(ErrorKind::config, "linear_solve: one F matrix per interior node required");
    detail::LinearizedOperator A(g, F);
    const std::size_t m = interior.size();
    const auto diag = A.diagonal();
    for (double d : diag)
        if (!(d < 0.0)) fail(ErrorKind::numeric, "linear_solve: linearization is not positive definite");

    std::vector<double> b(m), x(m, 0.0), r(m), rhat(m), p(m, 0.0), v(m, 0.0), s(m), t(m), ph(m), sh(m);
    for (std::size_t k = 0; k < m; ++k) b[k] = rhs_field[interior[k]];
    const double bnorm = std::sqrt(detail::dot(b, b));
    LinearSolveResult res{ScalarField(g), 0, 0.0};
    if (bnorm == 0.0) return res;

    r = b;
    rhat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    double rnorm = bnorm;
    long it = 0;
    for (; it < opt.max_iterations && rnorm > opt.relative_tolerance * bnorm; ++it) {
        const double rho_new = detail::dot(rhat, r);
        if (rho_new == 0.0 || omega == 0.0) {  // breakdown: restart from the current iterate
            A.apply(x, t);
            for (std::size_t k = 0; k < m; ++k) r[k] = b[k] - t[k];
            rhat = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
            continue;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t k = 0; k < m; ++k) p[k] = r[k] + beta * (p[k] - omega * v[k]);
        for (std::size_t k = 0; k < m; ++k) ph[k] = p[k] / diag[k];
        A.apply(ph, v);
        alpha = rho / detail::dot(rhat, v);
        for (std::size_t k = 0; k < m; ++k) s[k] = r[k] - alpha * v[k];
        if (std::sqrt(detail::dot(s, s)) <= opt.relative_tolerance * bnorm) {
            for (std::size_t k = 0; k < m; ++k) x[k] += alpha * ph[k];
            r = s;
            rnorm = std::sqrt(detail::dot(r, r));
            ++it;
            break;
        }
        for (std::size_t k = 0; k < m; ++k) sh[k] = s[k] / diag[k];
        A.apply(sh, t);
        const double tt = detail::dot(t, t);
        omega = tt > 0.0 ? detail::dot(t, s) / tt : 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            x[k] += alpha * ph[k] + omega * sh[k];
            r[k] = s[k] - omega * t[k];
        }
        rnorm = std::sqrt(detail::dot(r, r));
    }
    // Report the true residual, not the recursively updated one.
    A.apply(x, t);
    for (std::size_t k = 0; k < m; ++k) r[k] = b[k] - t[k];
    res.relative_residual = std::sqrt(detail::dot(r, r)) / bnorm;
    res.iterations = it;
    if (res.relative_residual > opt.relative_tolerance * 10.0 && it >= opt.max_iterations) {
        double dmin = -diag[0], dmax = -diag[0];
        for (double d : diag) {
            dmin = std::min(dmin, -d);
            dmax = std::max(dmax, -d);
        }
        fail(ErrorKind::numeric, "linear_solve did not converge in " + std::to_string(it) +
                                     " iterations (relative residual " + std::to_string(res.relative_residual) +
                                     ", diagonal range [" + std::to_string(dmin) + ", " + std::to_string(dmax) + "])");
    }
    for (std::size_t k = 0; k < m; ++k) res.correction[interior[k]] = x[k];
    return res;
}

inline LinearSolveResult linear_solve(const PhaseData& phase, const ScalarField& rhs_field,
                                      const LinearSolveOptions& opt = {}) {
    std::vector<CMat> F(phase.nodes.size());
    for (std::size_t k = 0; k < F.size(); ++k) F[k] = phase.nodes[k].F;
    return linear_solve(F, rhs_field, opt);
}

struct NewtonOptions {
    double tolerance = 1e-10;  // on sup|cot Θ − cot θ̂|
    int max_iterations = 100;
    double min_damping = 1e-6;
    double phase_guard = 1e-3;
    LinearSolveOptions linear;
};

struct NewtonState {
    ScalarField u;
    double residual_sup = 0.0;
    int iteration = 0;
    double damping = 1.0;
};

struct NewtonTraceRow {
    int iteration = 0;
    double residual_sup = 0.0;
    double damping = 1.0;
    long linear_iterations = 0;
    double linear_residual = 0.0;
};

struct NewtonResult {
    NewtonState state;
    std::vector<NewtonTraceRow> trace;
    bool converged = false;
};

namespace detail {
inline double sup_interior(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t i : f.grid().nodes->interior) s = std::max(s, std::abs(f[i]));
    return s;
}
}  // namespace detail

/// Damped Newton for cot Θ(Hess u) = cot θ̂ with u = initial on the boundary layer.
inline NewtonResult newton_solve(const ScalarField& initial, double hat_theta, const NewtonOptions& opt = {}) {
    NewtonResult res;
    NewtonState st{initial, 0.0, 0, 1.0};
    Evaluation ev = evaluate(st.u, hat_theta);
    st.residual_sup = detail::sup_interior(ev.rhs);
    res.trace.push_back({0, st.residual_sup, 1.0, 0, 0.0});
    while (st.residual_sup > opt.tolerance && st.iteration < opt.max_iterations) {
        const LinearSolveResult step = linear_solve(ev.phase, ev.rhs, opt.linear);
        double damping = 1.0;
        for (;;) {
            ScalarField trial = st.u;
            for (std::size_t i : trial.grid().nodes->interior) trial[i] -= damping * step.correction[i];
            bool accepted = false;
            try {
                Evaluation trial_ev = evaluate(trial, hat_theta);
                require_phase_range(trial_ev.phase, opt.phase_guard, std::numbers::pi - opt.phase_guard);
                const double sup = detail::sup_interior(trial_ev.rhs);
                if (sup < st.residual_sup) {
                    st.u = std::move(trial);
                    st.residual_sup = sup;
                    ev = std::move(trial_ev);
                    accepted = true;
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::numeric) throw;
            }
            if (accepted) break;
            damping *= 0.5;
            if (damping < opt.min_damping)
                fail(ErrorKind::numeric, "Newton stall at iteration " + std::to_string(st.iteration) +
                                             " (residual " + std::to_string(st.residual_sup) + ")");
        }
        ++st.iteration;
        st.damping = damping;
        res.trace.push_back({st.iteration, st.residual_sup, damping, step.iterations, step.relative_residual});
    }
    res.converged = st.residual_sup <= opt.tolerance;
    res.state = std::move(st);
    return res;
}

}  // namespace dhym
