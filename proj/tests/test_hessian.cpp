#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace dhym;
using namespace testing_support;

namespace {

ScalarField sample(const GridSpec& g, double (*f)(std::span<const double>)) { return sample_function(g, f); }

std::size_t node_at(const GridSpec& g, std::vector<int> idx) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) flat += idx[a] * g.strides[a];
    return flat;
}

}  // namespace

TEST(Hessian, FdSecondQuadraticExactness) {
    const GridSpec g = box_grid(1, 9);
    const std::size_t c = node_at(g, {3, 5});
    EXPECT_DOUBLE_EQ(fd_second(sample(g, [](std::span<const double> x) { return x[0] * x[0]; }), 0, 0, c), 2.0);
    EXPECT_DOUBLE_EQ(fd_second(sample(g, [](std::span<const double> x) { return x[0] * x[1]; }), 0, 1, c), 1.0);
    EXPECT_DOUBLE_EQ(fd_second(sample(g, [](std::span<const double> x) { return x[0]; }), 0, 0, c), 0.0);
}

TEST(Hessian, FdSecondRejectsBoundary) {
    const GridSpec g = box_grid(1, 9);
    EXPECT_THROW(fd_second(ScalarField(g), 0, 0, 0), Error);
}

TEST(Hessian, ModulusSquaredIsIdentity) {
    const GridSpec g = box_grid(1, 17);
    const HermitianField H = complex_hessian(sample(g, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }));
    for (std::size_t k = 0; k < H.size(); ++k) EXPECT_NEAR(std::abs(H.at(k)(0, 0) - 1.0), 0.0, 1e-12);
}

TEST(Hessian, PluriharmonicIsZero) {
    const GridSpec g = box_grid(1, 17);
    const HermitianField H = complex_hessian(sample(g, [](std::span<const double> x) { return x[0] * x[0] - x[1] * x[1]; }));
    for (std::size_t k = 0; k < H.size(); ++k) EXPECT_NEAR(std::abs(H.at(k)(0, 0)), 0.0, 1e-12);
}

TEST(Hessian, QuadraticExactnessWithComplexCoefficients) {
    const GridSpec g = box_grid(2, 7);
    QuadraticData q;
    q.A = CMat(2);
    q.A(0, 0) = 1.5;
    q.A(1, 1) = 0.75;
    q.A(0, 1) = cplx(0.3, -0.4);
    q.A(1, 0) = std::conj(q.A(0, 1));
    q.linear = {0.1, -0.2, 0.3, 0.4};
    const HermitianField H = complex_hessian(FieldSource::quadratic(q).sample(g, 0.0));
    for (std::size_t k = 0; k < H.size(); ++k) {
        const CMat U = H.at(k);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) EXPECT_LE(std::abs(U(r, c) - q.A(r, c)), 1e-12);
    }
}

TEST(Hessian, QuarticMixedTermIsExact) {
    // u = |z1|²|z2|², analytic U = [[|z2|², z̄1 z2], [z1 z̄2, |z1|²]]; at z = (1, 1) every entry is 1.
    // Each axis enters at most quadratically, so both stencils are exact here.
    auto f = [](std::span<const double> x) {
        return (x[0] * x[0] + x[1] * x[1]) * (x[2] * x[2] + x[3] * x[3]);
    };
    auto err = [&](int points) {
        const GridSpec g = box_grid(2, points, -2.0, 2.0);
        const ScalarField u = sample_function(g, f);
        const int one = (points - 1) * 3 / 4;  // x = 1
        const int zero = (points - 1) / 2;     // y = 0
        const CMat U = complex_hessian_at(u, node_at(g, {one, zero, one, zero}));
        double e = 0.0;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) e = std::max(e, std::abs(U(r, c) - 1.0));
        return e;
    };
    EXPECT_LE(err(9), 1e-12);
    EXPECT_LE(err(17), 1e-12);
}

TEST(Hessian, HermitianSymmetryExact) {
    const GridSpec g = box_grid(2, 9);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    ScalarField u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = U(rng);
    const HermitianField H = complex_hessian(u);
    for (std::size_t k = 0; k < H.size(); ++k) {
        const CMat m = H.at(k);
        EXPECT_LE(hermitian_defect(m), 1e-13 * (1.0 + m.frobenius()));
    }
}

TEST(Hessian, OrderOfAccuracy) {
    // u = exp(x1)cos(y1) is harmonic, so u_{11̄} = 0; u = exp(x1)sin(y1)x1 is not.
    auto max_err = [](int points, auto f, auto exact) {
        const GridSpec g = box_grid(1, points);
        const ScalarField u = sample_function(g, f);
        const HermitianField H = complex_hessian(u);
        double e = 0.0;
        double x[2];
        for (std::size_t k = 0; k < H.size(); ++k) {
            g.coordinates(g.nodes->interior[k], x);
            e = std::max(e, std::abs(H.at(k)(0, 0).real() - exact(x)));
        }
        return e;
    };
    auto f1 = [](std::span<const double> x) { return std::exp(x[0]) * std::cos(x[1]); };
    auto u1 = [](const double*) { return 0.0; };
    const double r1 = max_err(17, f1, u1) / max_err(33, f1, u1);
    EXPECT_GE(r1, 3.5);
    EXPECT_LE(r1, 4.5);

    // ¼Δ(x e^x sin y) = ¼(2 e^x sin y)
    auto f2 = [](std::span<const double> x) { return x[0] * std::exp(x[0]) * std::sin(x[1]); };
    auto u2 = [](const double* x) { return 0.5 * std::exp(x[0]) * std::sin(x[1]); };
    const double r2 = max_err(17, f2, u2) / max_err(33, f2, u2);
    EXPECT_GE(r2, 3.5);
    EXPECT_LE(r2, 4.5);
}

TEST(Hessian, ParallelMatchesSerial) {
    const GridSpec g = box_grid(2, 11);
    const ScalarField u = sample_function(g, [](std::span<const double> x) {
        return std::sin(x[0] * x[2]) + std::cos(x[1] - x[3]) + x[0] * x[0] * x[3];
    });
    set_worker_count(1);
    const HermitianField a = complex_hessian(u);
    set_worker_count(7);
    const HermitianField b = complex_hessian(u);
    set_worker_count(0);
    for (std::size_t k = 0; k < a.size(); ++k)
        for (int e = 0; e < 4; ++e) EXPECT_EQ(a.at(k).a[e], b.at(k).a[e]);
}
