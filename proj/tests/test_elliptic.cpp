#include <gtest/gtest.h>

#include "support.hpp"

using namespace dhym;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<CMat> uniform_F(const GridSpec& g, const CMat& f) { return std::vector<CMat>(g.interior_count(), f); }

double sup_interior(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t i : f.grid().nodes->interior) s = std::max(s, std::abs(f[i]));
    return s;
}

}  // namespace

TEST(LinearSolve, TorsionMatchesDirectSolve) {
    const int points = 33;
    const GridSpec g = box_grid(1, points);
    ScalarField b(g, 0.0);
    for (std::size_t i : g.nodes->interior) b[i] = -1.0;
    LinearSolveOptions opt;
    opt.relative_tolerance = 1e-13;
    const LinearSolveResult r = linear_solve(uniform_F(g, CMat::identity(1)), b, opt);
    const std::vector<double> ref = poisson_reference(points, g.h, to_vector(b), std::vector<double>(g.node_count(), 0.0));
    double d = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        d = std::max(d, std::abs(ref[i] - r.correction[i]));
        peak = std::max(peak, r.correction[i]);
    }
    EXPECT_LE(d, 1e-10);
    // Δw = −4 on [−1, 1]²: continuum maximum ≈ 1.1787.
    EXPECT_NEAR(peak, 1.1787, 5e-3);
    for (std::size_t i : g.nodes->boundary) EXPECT_EQ(r.correction[i], 0.0);
}

TEST(LinearSolve, ZeroRightHandSide) {
    const GridSpec g = box_grid(1, 9);
    const LinearSolveResult r = linear_solve(uniform_F(g, CMat::identity(1)), ScalarField(g, 0.0));
    for (std::size_t i = 0; i < g.node_count(); ++i) EXPECT_EQ(r.correction[i], 0.0);
    EXPECT_EQ(r.iterations, 0);
}

TEST(LinearSolve, CoefficientScaling) {
    const GridSpec g = box_grid(2, 7);
    ScalarField b = expr("1 + x1*y2 + 0.5*x2", 2).sample(g, 0);
    for (std::size_t i : g.nodes->boundary) b[i] = 0.0;
    LinearSolveOptions opt;
    opt.relative_tolerance = 1e-13;
    const LinearSolveResult full = linear_solve(uniform_F(g, CMat::identity(2)), b, opt);
    const LinearSolveResult half = linear_solve(uniform_F(g, CMat::diagonal({0.5, 0.5})), b, opt);
    for (std::size_t i : g.nodes->interior) EXPECT_NEAR(half.correction[i], 2.0 * full.correction[i], 1e-10);
}

TEST(LinearSolve, NonSymmetricCoefficients) {
    const GridSpec g = box_grid(2, 7);
    CMat f(2);
    f(0, 0) = 0.7;
    f(1, 1) = 0.4;
    f(0, 1) = cplx(0.1, 0.15);
    f(1, 0) = std::conj(f(0, 1));
    ScalarField b = expr("x1 - y2 + 2", 2).sample(g, 0);
    for (std::size_t i : g.nodes->boundary) b[i] = 0.0;
    LinearSolveOptions opt;
    opt.relative_tolerance = 1e-12;
    const auto F = uniform_F(g, f);
    const LinearSolveResult r = linear_solve(F, b, opt);
    double worst = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k) {
        const std::size_t i = g.nodes->interior[k];
        worst = std::max(worst, std::abs(hermitian_pairing(f, complex_hessian_at(r.correction, i)) - b[i]));
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(LinearSolve, ReportsNonConvergence) {
    const GridSpec g = box_grid(1, 33);
    ScalarField b(g, 0.0);
    for (std::size_t i : g.nodes->interior) b[i] = 1.0;
    LinearSolveOptions opt;
    opt.max_iterations = 2;
    try {
        linear_solve(uniform_F(g, CMat::identity(1)), b, opt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numeric);
        EXPECT_NE(std::string(e.what()).find("did not converge"), std::string::npos);
    }
}

TEST(Newton, ExactSolutionNeedsNoIterations) {
    const GridSpec g = box_grid(2, 7);
    const NewtonResult r = newton_solve(quadratic_diag({kSqrt3, kSqrt3}).sample(g, 0), kPi / 3.0);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.state.iteration, 0);
    EXPECT_EQ(r.trace.size(), 1u);
}

TEST(Newton, OneDimensionalIsOneStepPoisson) {
    const int points = 33;
    const GridSpec g = box_grid(1, points);
    const ScalarField init = expr("x1^2 + y1^2 + exp(x1)*cos(y1) + " + bump(1, 0.3), 1).sample(g, 0);
    NewtonOptions opt;
    opt.tolerance = 1e-9;
    opt.linear.relative_tolerance = 1e-14;
    const NewtonResult r = newton_solve(init, kPi / 4.0, opt);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.state.iteration, 1);
    const std::vector<double> ref =
        poisson_reference(points, g.h, std::vector<double>(g.node_count(), 1.0), to_vector(init));
    double d = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) d = std::max(d, std::abs(ref[i] - r.state.u[i]));
    EXPECT_LE(d, 1e-10);
}

TEST(Newton, QuadraticConvergenceInTwoDimensions) {
    const GridSpec g = box_grid(2, 9);
    const ScalarField init = expr(scaled_norm(2, "1.7320508075688772") + "+" + bump(2, 0.4), 2).sample(g, 0);
    NewtonOptions opt;
    opt.tolerance = 1e-12;
    opt.linear.relative_tolerance = 1e-14;
    const NewtonResult r = newton_solve(init, kPi / 3.0, opt);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.state.iteration, 8);
    EXPECT_LE(sup_interior(residual(r.state.u, kPi / 3.0)), 1e-12);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        const double prev = r.trace[k - 1].residual_sup, now = r.trace[k].residual_sup;
        EXPECT_LT(now, prev);
        if (prev < 1e-2 && now > 1e-11) EXPECT_LE(now / (prev * prev), 50.0) << "iteration " << k;
    }
    for (std::size_t i : g.nodes->boundary) EXPECT_EQ(r.state.u[i], init[i]);
}

TEST(Newton, AgreesWithFlowLimit) {
    const GridSpec g = box_grid(2, 7);
    const FieldSource phi = expr(scaled_norm(2, "1.7320508075688772") + "+" + bump(2, 0.1), 2);
    const FieldSource q = quadratic_diag({kSqrt3, kSqrt3});
    FlowOptions fo;
    fo.tol_stationary = 1e-10;
    fo.cadence = 1.0;
    const FlowResult flow = run_flow(make_problem(g, kPi / 3.0, phi, q, {}, 1e6), fo);
    const NewtonResult nw = newton_solve(phi.sample(g, 0), kPi / 3.0);
    ASSERT_TRUE(nw.converged);
    EXPECT_LE(sup_diff(flow.final_state.u, nw.state.u), 1e-8);
}

TEST(Newton, IterationCapReportsNotConverged) {
    const GridSpec g = box_grid(2, 7);
    const ScalarField init = expr(scaled_norm(2, "1.7320508075688772") + "+" + bump(2, 0.4), 2).sample(g, 0);
    NewtonOptions opt;
    opt.max_iterations = 1;
    const NewtonResult r = newton_solve(init, kPi / 3.0, opt);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.trace.size(), 2u);
    EXPECT_GT(r.state.residual_sup, opt.tolerance);
}
