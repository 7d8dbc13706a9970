#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dhym/hessian.hpp"
#include "dhym/problem.hpp"
#include "dhym/spectral.hpp"

namespace dhym {

struct CompatibilityReport {
    bool c1_ok = true;         // ψ(·,0) = φ on the closed box
    bool initial_ok = true;    // 0 < Θ(Hess φ) < π/2
    bool c2_ok = true;         // θ₀ < Θ(Hess ψ) < π/2 − θ₀ on the side
    double c1_defect = 0.0;
    double initial_theta_min = std::numeric_limits<double>::infinity();
    double initial_theta_max = -std::numeric_limits<double>::infinity();
    double side_theta_min = std::numeric_limits<double>::infinity();
    double side_theta_max = -std::numeric_limits<double>::infinity();
    std::vector<std::string> violations;  // first few offending nodes per check
    std::size_t violation_count = 0;

    bool ok() const { return c1_ok && initial_ok && c2_ok; }

    void note(const std::string& what) {
        ++violation_count;
        if (violations.size() < 32) violations.push_back(what);
    }
};

/// Phase of ψ(·, t) along the side: analytic stencils at boundary nodes, or
/// the outermost interior ring when ψ is only available as samples.
template <class Visit>
void visit_side_phases(const Problem& p, double t, Visit&& visit) {
    const GridSpec& g = p.grid;
    if (!p.psi.is_sampled()) {
        double x[2 * kMaxComplexDim];
        std::span<double> xs(x, g.axes());
        for (std::size_t i : g.nodes->boundary) {
            g.coordinates(i, xs);
            visit(i, theta(hermitian_eigenvalues(p.psi.hessian_at_point(xs, t, g.h))));
        }
        return;
    }
    const ScalarField psi = p.psi.sample(g, t);
    for (std::size_t i : g.nodes->interior) {
        bool ring = false;
        for (int a = 0; a < g.axes() && !ring; ++a) {
            int k = g.index_on_axis(i, a);
            ring = k == 1 || k == g.points[a] - 2;
        }
        if (ring) visit(i, theta(hermitian_eigenvalues(complex_hessian_at(psi, i))));
    }
}

inline CompatibilityReport check_compatibility(const Problem& p) {
    CompatibilityReport r;
    const GridSpec& g = p.grid;
    const ScalarField phi = p.phi.sample(g, 0.0);
    const ScalarField psi0 = p.psi.sample(g, 0.0);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double d = std::abs(psi0[i] - phi[i]);
        r.c1_defect = std::max(r.c1_defect, d);
        if (d > 1e-12) {
            r.c1_ok = false;
            r.note("C1: psi(.,0) != phi (diff " + std::to_string(d) + ") at " + g.describe_node(i));
        }
    }
    const auto& interior = g.nodes->interior;
    for (std::size_t i : interior) {
        const double th = theta(hermitian_eigenvalues(complex_hessian_at(phi, i)));
        r.initial_theta_min = std::min(r.initial_theta_min, th);
        r.initial_theta_max = std::max(r.initial_theta_max, th);
        if (!(th > 0.0 && th < std::numbers::pi / 2.0)) {
            r.initial_ok = false;
            r.note("initial phase " + std::to_string(th) + " outside (0, pi/2) at " + g.describe_node(i));
        }
    }
    for (double t : p.sample_times()) {
        visit_side_phases(p, t, [&](std::size_t i, double th) {
            r.side_theta_min = std::min(r.side_theta_min, th);
            r.side_theta_max = std::max(r.side_theta_max, th);
            if (!(th > p.theta0 && th < std::numbers::pi / 2.0 - p.theta0)) {
                r.c2_ok = false;
                r.note("C2: side phase " + std::to_string(th) + " outside (theta0, pi/2 - theta0) at t=" +
                       std::to_string(t) + ", " + g.describe_node(i));
            }
        });
    }
    return r;
}

}  // namespace dhym
