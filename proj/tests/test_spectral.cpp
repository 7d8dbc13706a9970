#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "support.hpp"

using namespace dhym;
using namespace testing_support;

namespace {

CMat example_2x2() {
    CMat u(2);
    u(0, 0) = 2.0;
    u(0, 1) = cplx(1.0, 1.0);
    u(1, 0) = cplx(1.0, -1.0);
    u(1, 1) = 3.0;
    return u;
}

Eigen::VectorXd eigen_oracle(const CMat& u) {
    Eigen::MatrixXcd m(u.n, u.n);
    for (int r = 0; r < u.n; ++r)
        for (int c = 0; c < u.n; ++c) m(r, c) = u(r, c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();  // ascending
}

}  // namespace

TEST(Spectral, EigenvalueExamples) {
    const RVec a = hermitian_eigenvalues(example_2x2());
    EXPECT_NEAR(a[0], 4.0, 1e-14);
    EXPECT_NEAR(a[1], 1.0, 1e-14);
    const RVec b = hermitian_eigenvalues(CMat::diagonal({kSqrt3, kSqrt3}));
    EXPECT_DOUBLE_EQ(b[0], kSqrt3);
    EXPECT_DOUBLE_EQ(b[1], kSqrt3);
    EXPECT_EQ(hermitian_eigenvalues(CMat::diagonal({0.0}))[0], 0.0);
}

TEST(Spectral, RejectsNonHermitian) {
    CMat u = example_2x2();
    u(1, 0) = cplx(1.0, 1.0);
    EXPECT_THROW(hermitian_eigenvalues(u), Error);
}

TEST(Spectral, EigenvaluesMatchIndependentSolver) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 1 + trial % 4;
        CMat u(n);
        for (int r = 0; r < n; ++r) {
            u(r, r) = U(rng);
            for (int c = r + 1; c < n; ++c) {
                u(r, c) = cplx(U(rng), U(rng));
                u(c, r) = std::conj(u(r, c));
            }
        }
        const RVec ours = hermitian_eigenvalues(u);
        const Eigen::VectorXd ref = eigen_oracle(u);
        for (int j = 0; j < n; ++j) {
            EXPECT_NEAR(ours[j], ref[n - 1 - j], 1e-12 * (1.0 + u.frobenius()));
            if (j > 0) EXPECT_GE(ours[j - 1], ours[j]);
        }
    }
}

TEST(Spectral, JacobiEigenvectorsReconstruct) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 3;
        CMat u(n);
        for (int r = 0; r < n; ++r) {
            u(r, r) = U(rng);
            for (int c = r + 1; c < n; ++c) {
                u(r, c) = cplx(U(rng), U(rng));
                u(c, r) = std::conj(u(r, c));
            }
        }
        const EigenDecomposition ed = jacobi_eigh(u);
        CMat rebuilt(n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                cplx s = 0.0;
                for (int j = 0; j < n; ++j) s += ed.vectors(r, j) * ed.values[j] * std::conj(ed.vectors(c, j));
                rebuilt(r, c) = s;
            }
        EXPECT_LE((rebuilt - u).frobenius(), 1e-12 * (1.0 + u.frobenius()));
        const CMat gram = ed.vectors.adjoint() * ed.vectors;
        EXPECT_LE((gram - CMat::identity(n)).frobenius(), 1e-13);
    }
}

TEST(Spectral, RepeatedEigenvalues) {
    const EigenDecomposition ed = jacobi_eigh(CMat::identity(3));
    for (int j = 0; j < 3; ++j) EXPECT_EQ(ed.values[j], 1.0);
    const Linearization lin = linearization(CMat::diagonal({2.0, 2.0, 2.0}));
    EXPECT_LE(hermitian_defect(lin.F), 1e-15);
    EXPECT_NEAR(lin.F(0, 1).real(), 0.0, 1e-15);
}

TEST(Spectral, ThetaExamples) {
    EXPECT_NEAR(theta(RVec{kSqrt3, kSqrt3}), std::numbers::pi / 3.0, 1e-15);
    EXPECT_NEAR(theta(RVec{0.0, 0.0, 0.0}), 1.5 * std::numbers::pi, 1e-15);
    EXPECT_NEAR(theta(RVec{4.0, 1.0}), std::atan(0.25) + std::numbers::pi / 4.0, 1e-15);
    EXPECT_NEAR(theta(RVec{4.0, 1.0}), 1.0303768265243125, 1e-12);
    // Branch (0, π): arccot of large negative values approaches π.
    EXPECT_GT(arccot(-1e8), 3.14159);
    EXPECT_LT(arccot(1e8), 1e-7);
}

TEST(Spectral, CotThetaDetExamples) {
    EXPECT_NEAR(cot_theta_det(CMat::diagonal({kSqrt3, kSqrt3})), 1.0 / kSqrt3, 1e-15);
    EXPECT_NEAR(cot_theta_det(example_2x2()), 0.6, 1e-15);
    EXPECT_NEAR(cot_theta_det(CMat::diagonal({1.0})), 1.0, 1e-15);
    // Θ = π exactly at λ = (0, 0) would need Im det = 0: U = diag(−1, 1) gives det(U + iI) = −2.
    EXPECT_THROW(cot_theta_det(CMat::diagonal({-1.0, 1.0})), Error);
}

TEST(Spectral, LinearizationExamples) {
    const Linearization a = linearization(CMat::diagonal({1.0, 1.0}));
    EXPECT_NEAR(a.F(0, 0).real(), 0.5, 1e-15);
    EXPECT_NEAR(a.F(1, 1).real(), 0.5, 1e-15);
    EXPECT_NEAR(a.trace, 1.0, 1e-15);

    const Linearization b = linearization(example_2x2());
    EXPECT_NEAR(b.trace, 0.76, 1e-14);
    // In the eigenbasis F is diag(0.08, 0.68): check via F v = w v for the eigenvectors.
    const EigenDecomposition ed = jacobi_eigh(example_2x2());
    const double expect[2] = {0.08, 0.68};
    for (int j = 0; j < 2; ++j) {
        cplx q = 0.0;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) q += std::conj(ed.vectors(r, j)) * b.F(r, c) * ed.vectors(c, j);
        EXPECT_NEAR(q.real(), expect[j], 1e-14);
        EXPECT_NEAR(q.imag(), 0.0, 1e-14);
    }

    const Linearization c = linearization(CMat::diagonal({0.0}));
    EXPECT_NEAR(c.F(0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(c.trace, 1.0, 1e-15);
}

TEST(Spectral, LinearizationPositiveDefiniteAndTrace) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + trial % 4;
        CMat u(n);
        for (int r = 0; r < n; ++r) {
            u(r, r) = U(rng);
            for (int c = r + 1; c < n; ++c) {
                u(r, c) = cplx(U(rng), U(rng));
                u(c, r) = std::conj(u(r, c));
            }
        }
        const double th = theta(hermitian_eigenvalues(u));
        if (!(th > 0.05 && th < std::numbers::pi - 0.05)) continue;
        const Linearization lin = linearization(u);
        EXPECT_NEAR(lin.trace, lin.F.trace().real(), 1e-12 * lin.trace);
        EXPECT_GT(eigen_oracle(lin.F)[0], 0.0);
    }
}

TEST(Spectral, LinearizationOutsideBranchFails) {
    // Θ(λ) for λ = (−10, −10, −10) is close to 3π, outside (0, π).
    EXPECT_THROW(linearization(CMat::diagonal({-10.0, -10.0, -10.0})), Error);
}

TEST(Spectral, PhaseDataExamples) {
    const GridSpec g1 = box_grid(1, 9);
    const PhaseData a = phase_data(complex_hessian(quadratic_diag({kSqrt3}).sample(g1, 0.0)));
    for (const auto& p : a.nodes) {
        EXPECT_NEAR(p.lambda[0], kSqrt3, 1e-12);
        EXPECT_NEAR(p.theta, std::numbers::pi / 6.0, 1e-12);
        EXPECT_NEAR(p.cot_theta, kSqrt3, 1e-12);
        EXPECT_NEAR(p.F(0, 0).real(), 1.0, 1e-12);
    }
    const GridSpec g2 = box_grid(2, 5);
    const PhaseData z = phase_data(complex_hessian(ScalarField(g2, 0.0)));
    for (const auto& p : z.nodes) EXPECT_NEAR(p.theta, std::numbers::pi, 1e-15);

    const GridSpec g = box_grid(2, 17, -2.0, 2.0);
    const ScalarField mixed = sample_function(g, [](std::span<const double> x) {
        return (x[0] * x[0] + x[1] * x[1]) * (x[2] * x[2] + x[3] * x[3]);
    });
    const std::size_t node = 12 * g.strides[0] + 8 * g.strides[1] + 12 * g.strides[2] + 8 * g.strides[3];
    const NodePhase np = node_phase(complex_hessian_at(mixed, node));
    // U = [[1,1],[1,1]] + O(h²): λ = (2, 0), Θ = arccot 2 + π/2.
    EXPECT_NEAR(np.lambda[0], 2.0, 0.1);
    EXPECT_NEAR(np.lambda[1], 0.0, 0.1);
    EXPECT_NEAR(np.theta, arccot(2.0) + std::numbers::pi / 2.0, 0.1);
    EXPECT_NEAR(arccot(2.0) + std::numbers::pi / 2.0, 2.0344439357957027, 1e-12);
}

TEST(Spectral, PhaseRangeErrorNamesNode) {
    const GridSpec g = box_grid(1, 5);
    const PhaseData pd = phase_data(complex_hessian(ScalarField(g, 0.0)));
    try {
        require_phase_range(pd, 0.1, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("at ("), std::string::npos) << e.what();
    }
}

TEST(Spectral, PropertySuitePasses) {
    for (const auto& r : run_property_suite(2024)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(Spectral, PropertySuiteDeterministic) {
    const auto a = check_derivative(77, 200), b = check_derivative(77, 200);
    EXPECT_EQ(a.worst, b.worst);
}
