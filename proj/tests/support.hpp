#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "dhym/dhym.hpp"

namespace testing_support {

using namespace dhym;

inline const double kSqrt3 = std::sqrt(3.0);

inline GridSpec box_grid(int n, int points, double lo = -1.0, double hi = 1.0) {
    return make_grid(n, std::vector<double>(2 * n, lo), std::vector<double>(2 * n, hi),
                     std::vector<int>(2 * n, points));
}

inline FieldSource quadratic_diag(std::vector<double> diag, double constant = 0.0) {
    QuadraticData q;
    q.A = CMat(static_cast<int>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) q.A(i, i) = diag[i];
    q.constant = constant;
    return FieldSource::quadratic(q);
}

inline FieldSource expr(const std::string& s, int n) { return FieldSource::expression(Expression::compile(s, n)); }

/// Σ_k (1 − x_k²)²(1 − y_k²)² style bump, product over all axes.
inline std::string bump(int n, double amplitude) {
    std::string s = std::to_string(amplitude);
    for (int k = 1; k <= n; ++k)
        for (const char* c : {"x", "y"}) s += "*(1-" + std::string(c) + std::to_string(k) + "^2)^2";
    return s;
}

inline std::string scaled_norm(int n, const std::string& a) {
    std::string s = a + "*(";
    for (int k = 1; k <= n; ++k) {
        if (k > 1) s += "+";
        s += "x" + std::to_string(k) + "^2+y" + std::to_string(k) + "^2";
    }
    return s + ")";
}

inline Problem make_problem(const GridSpec& g, double hat, FieldSource phi, FieldSource psi,
                            std::optional<FieldSource> sub = std::nullopt, double t_end = 1.0,
                            double theta0 = 0.05) {
    Problem p;
    p.grid = g;
    p.hat_theta = hat;
    p.theta0 = theta0;
    p.phi = std::move(phi);
    p.psi = std::move(psi);
    p.subsolution = std::move(sub);
    p.t_end = t_end;
    return p;
}

inline double sup_diff(const ScalarField& a, const ScalarField& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Reference stepper for n = 1, where the flow is the linear heat equation
/// ∂ₜu = ¼Δu − cot θ̂. Plain 5-point stencil on a row-major (x, y) array,
/// boundary values held fixed.
inline std::vector<double> heat_reference(std::vector<double> u, int points, double h, double cot_hat,
                                          const std::vector<double>& steps) {
    std::vector<double> next(u.size());
    const double inv = 1.0 / (h * h);
    for (double dt : steps) {
        next = u;
        for (int i = 1; i < points - 1; ++i)
            for (int j = 1; j < points - 1; ++j) {
                const int c = i * points + j;
                const double lap = u[c + points] + u[c - points] + u[c + 1] + u[c - 1] - 4.0 * u[c];
                next[c] = u[c] + dt * (0.25 * lap * inv - cot_hat);
            }
        u.swap(next);
    }
    return u;
}

/// Direct sparse solve of ¼Δ_h w = f on the interior of a square n = 1 grid
/// with w = boundary on the outer ring.
inline std::vector<double> poisson_reference(int points, double h, const std::vector<double>& f,
                                             const std::vector<double>& boundary) {
    const int m = points - 2;
    auto id = [&](int i, int j) { return (i - 1) * m + (j - 1); };
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(m * m);
    const double c = 0.25 / (h * h);
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
            const int r = id(i, j);
            double b = f[i * points + j];
            trip.emplace_back(r, r, -4.0 * c);
            const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
            for (const auto& q : nb) {
                if (q[0] == 0 || q[0] == points - 1 || q[1] == 0 || q[1] == points - 1)
                    b -= c * boundary[q[0] * points + q[1]];
                else
                    trip.emplace_back(r, id(q[0], q[1]), c);
            }
            rhs[r] = b;
        }
    Eigen::SparseMatrix<double> A(m * m, m * m);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    Eigen::VectorXd x = lu.solve(rhs);
    std::vector<double> w = boundary;
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) w[i * points + j] = x[id(i, j)];
    return w;
}

inline std::vector<double> to_vector(const ScalarField& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace testing_support
