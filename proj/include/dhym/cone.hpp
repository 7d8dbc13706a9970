#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dhym/spectral.hpp"

namespace dhym {

/// Membership in Γ (0 < Θ < π/2) or, with sigma, in Γ^σ (0 < Θ < σ).
inline bool in_gamma(const RVec& lambda, std::optional<double> sigma = std::nullopt) {
    const double th = theta(lambda);
    return th > 0.0 && th < sigma.value_or(std::numbers::pi / 2.0);
}

/// max_j Σ_{i≠j} arccot λ_i; zero for n = 1.
inline double max_partial_phase(const RVec& lambda) {
    if (lambda.n == 1) return 0.0;
    const double total = theta(lambda);
    double worst = 0.0;
    for (int j = 0; j < lambda.n; ++j) worst = std::max(worst, total - arccot(lambda[j]));
    return worst;
}

/// Pointwise subsolution criterion for the elliptic problem.
inline bool is_elliptic_subsolution(const RVec& lambda, double hat_theta) {
    return max_partial_phase(lambda) < hat_theta;
}

struct SubsolutionReport {
    std::vector<bool> node_ok;  // interior order
    bool all_ok = true;
    std::size_t failures = 0;
    double worst_partial_phase = 0.0;
};

inline SubsolutionReport elliptic_subsolution_check(const HermitianField& u, double hat_theta) {
    SubsolutionReport r;
    r.node_ok.resize(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        const RVec lam = hermitian_eigenvalues(u.at(k));
        const double partial = max_partial_phase(lam);
        r.worst_partial_phase = std::max(r.worst_partial_phase, partial);
        r.node_ok[k] = partial < hat_theta;
        if (!r.node_ok[k]) {
            r.all_ok = false;
            ++r.failures;
        }
    }
    return r;
}

/// Quantitative parabolic subsolution margin:
/// min over nodes and i of cot(Σ_{j≠i} arccot λ_j) − (∂ₜu + cot θ̂).
struct ParabolicMargin {
    double margin = 0.0;
    bool vacuous = false;  // n = 1: every partial sum is empty, cot(0⁺) = +∞
    double epsilon = 0.0;  // ½ min_i inf arccot λ_i
    bool certified() const { return vacuous || margin > 0.0; }
};

inline double partial_cot_margin(const RVec& lambda, double dt_u, double hat_theta, double& min_arccot) {
    const double total = theta(lambda);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < lambda.n; ++i) {
        const double ai = arccot(lambda[i]);
        min_arccot = std::min(min_arccot, ai);
        const double partial = total - ai;
        if (!(partial > 0.0 && partial < std::numbers::pi))
            fail(ErrorKind::numeric, "partial phase sum leaves (0, pi): branch violation");
        best = std::min(best, cot(partial) - (dt_u + cot(hat_theta)));
    }
    return best;
}

inline ParabolicMargin parabolic_margin(const HermitianField& u, const ScalarField& dt_u, double hat_theta) {
    ParabolicMargin r;
    double min_arccot = std::numeric_limits<double>::infinity();
    if (u.dim() == 1) {
        for (std::size_t k = 0; k < u.size(); ++k) min_arccot = std::min(min_arccot, arccot(u.at(k)(0, 0).real()));
        r.vacuous = true;
        r.margin = std::numeric_limits<double>::infinity();
        r.epsilon = 0.5 * min_arccot;
        return r;
    }
    const auto& interior = u.grid().nodes->interior;
    r.margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u.size(); ++k) {
        const RVec lam = hermitian_eigenvalues(u.at(k));
        r.margin = std::min(r.margin, partial_cot_margin(lam, dt_u[interior[k]], hat_theta, min_arccot));
    }
    r.epsilon = 0.5 * min_arccot;
    return r;
}

}  // namespace dhym
