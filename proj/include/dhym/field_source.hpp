#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dhym/expression.hpp"
#include "dhym/grid.hpp"
#include "dhym/matrix.hpp"

namespace dhym {

/// u = Σ A_jk z_j z̄_k + linear·x + constant, with A Hermitian.
struct QuadraticData {
    CMat A;
    std::vector<double> linear;  // 2n entries, may be empty
    double constant = 0.0;

    double operator()(std::span<const double> x) const {
        const int n = A.n;
        std::array<cplx, kMaxComplexDim> z{};
        for (int j = 0; j < n; ++j) z[j] = cplx(x[2 * j], x[2 * j + 1]);
        cplx s = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) s += A(j, k) * z[j] * std::conj(z[k]);
        double v = s.real() + constant;
        for (std::size_t a = 0; a < linear.size(); ++a) v += linear[a] * x[a];
        return v;
    }
};

/// A space-time function on the closed box: analytic (quadratic, expression)
/// or a sampled snapshot that is constant in time.
class FieldSource {
public:
    FieldSource() = default;
    static FieldSource quadratic(QuadraticData q) {
        FieldSource s;
        s.data_ = std::move(q);
        return s;
    }
    static FieldSource expression(Expression e) {
        FieldSource s;
        s.data_ = std::move(e);
        return s;
    }
    static FieldSource sampled(ScalarField f) {
        FieldSource s;
        s.data_ = std::move(f);
        return s;
    }

    bool is_sampled() const { return std::holds_alternative<ScalarField>(data_); }
    bool time_dependent() const {
        if (auto* e = std::get_if<Expression>(&data_)) return e->uses_time();
        return false;
    }

    double value(std::span<const double> x, double t) const {
        if (auto* q = std::get_if<QuadraticData>(&data_)) return (*q)(x);
        if (auto* e = std::get_if<Expression>(&data_)) return (*e)(x, t);
        fail(ErrorKind::config, "sampled field has no value off its grid");
    }

    double value_at(const GridSpec& g, std::size_t node, double t) const {
        if (auto* f = std::get_if<ScalarField>(&data_)) return (*f)[node];
        double x[2 * kMaxComplexDim];
        std::span<double> xs(x, g.axes());
        g.coordinates(node, xs);
        return value(xs, t);
    }

    ScalarField sample(const GridSpec& g, double t) const {
        if (auto* f = std::get_if<ScalarField>(&data_)) {
            if (!f->grid().same_as(g)) fail(ErrorKind::config, "sampled field does not match the problem grid");
            return *f;
        }
        return sample_function(g, [&](std::span<const double> x) { return value(x, t); });
    }

    /// ∂ₜ by central difference; zero for time-independent sources.
    double time_derivative_at(const GridSpec& g, std::size_t node, double t) const {
        if (!time_dependent()) return 0.0;
        const double dt = 1e-5 * std::max(1.0, std::abs(t));
        return (value_at(g, node, t + dt) - value_at(g, node, t - dt)) / (2.0 * dt);
    }

    /// Complex Hessian evaluated with the grid stencil directly on the analytic
    /// function, so boundary nodes are covered. Not available for sampled data.
    CMat hessian_at_point(std::span<const double> x, double t, double h) const {
        if (auto* q = std::get_if<QuadraticData>(&data_)) return q->A;
        const int axes = static_cast<int>(x.size());
        const int n = axes / 2;
        double buf[2 * kMaxComplexDim];
        std::span<double> y(buf, axes);
        auto at = [&](int a, int sa, int b, int sb) {
            for (int k = 0; k < axes; ++k) y[k] = x[k];
            if (a >= 0) y[a] += sa * h;
            if (b >= 0) y[b] += sb * h;
            return value(y, t);
        };
        auto d2 = [&](int a, int b) {
            if (a == b) return at(a, 1, -1, 0) - 2.0 * at(-1, 0, -1, 0) + at(a, -1, -1, 0);
            return 0.25 * (at(a, 1, b, 1) - at(a, 1, b, -1) - at(a, -1, b, 1) + at(a, -1, b, -1));
        };
        const double inv = 1.0 / (h * h);
        CMat m(n);
        for (int j = 0; j < n; ++j) {
            m(j, j) = 0.25 * inv * (d2(2 * j, 2 * j) + d2(2 * j + 1, 2 * j + 1));
            for (int k = j + 1; k < n; ++k) {
                cplx v(0.25 * inv * (d2(2 * j, 2 * k) + d2(2 * j + 1, 2 * k + 1)),
                       0.25 * inv * (d2(2 * j, 2 * k + 1) - d2(2 * j + 1, 2 * k)));
                m(j, k) = v;
                m(k, j) = std::conj(v);
            }
        }
        return m;
    }

    const std::variant<QuadraticData, Expression, ScalarField>& data() const { return data_; }

private:
    std::variant<QuadraticData, Expression, ScalarField> data_;
};

}  // namespace dhym
