#pragma once

#include <vector>

#include "dhym/grid.hpp"
#include "dhym/matrix.hpp"

namespace dhym {

/// Discrete complex Hessian: one Hermitian n x n matrix per interior node,
/// stored in interior-node order.
class HermitianField {
public:
    HermitianField() = default;
    explicit HermitianField(GridSpec grid)
        : grid_(std::move(grid)), data_(grid_.interior_count() * grid_.n * grid_.n) {}

    const GridSpec& grid() const { return grid_; }
    int dim() const { return grid_.n; }
    std::size_t size() const { return grid_.interior_count(); }

    CMat at(std::size_t k) const {
        CMat m(grid_.n);
        const std::size_t nn = static_cast<std::size_t>(grid_.n) * grid_.n;
        for (std::size_t e = 0; e < nn; ++e) m.a[e] = data_[k * nn + e];
        return m;
    }
    void set(std::size_t k, const CMat& m) {
        const std::size_t nn = static_cast<std::size_t>(grid_.n) * grid_.n;
        for (std::size_t e = 0; e < nn; ++e) data_[k * nn + e] = m.a[e];
    }

private:
    GridSpec grid_;
    std::vector<cplx> data_;
};

/// Central second difference along axes a, b at an interior node.
inline double fd_second(const ScalarField& f, int axis_a, int axis_b, std::size_t node) {
    const GridSpec& g = f.grid();
    if (g.nodes->tags[node] != NodeTag::interior)
        fail(ErrorKind::numeric, "fd_second requested at non-interior " + g.describe_node(node));
    const double h2 = g.h * g.h;
    const std::size_t sa = g.strides[axis_a];
    if (axis_a == axis_b) return (f[node + sa] - 2.0 * f[node] + f[node - sa]) / h2;
    const std::size_t sb = g.strides[axis_b];
    return (f[node + sa + sb] - f[node + sa - sb] - f[node - sa + sb] + f[node - sa - sb]) / (4.0 * h2);
}

namespace detail {
// Unchecked variant for the hot loop; node is known to be interior.
inline double second_diff(std::span<const double> f, const GridSpec& g, int a, int b, std::size_t node) {
    const std::size_t sa = g.strides[a];
    if (a == b) return (f[node + sa] - 2.0 * f[node] + f[node - sa]);
    const std::size_t sb = g.strides[b];
    return 0.25 * (f[node + sa + sb] - f[node + sa - sb] - f[node - sa + sb] + f[node - sa - sb]);
}
}  // namespace detail

/// Complex Hessian at one interior node:
/// u_{jk̄} = ¼[(∂x_j x_k + ∂y_j y_k) + i(∂x_j y_k − ∂y_j x_k)] u.
inline CMat complex_hessian_at(const ScalarField& u, std::size_t node) {
    const GridSpec& g = u.grid();
    const auto f = u.values();
    const double inv = 1.0 / (g.h * g.h);
    CMat m(g.n);
    for (int j = 0; j < g.n; ++j) {
        const int xj = 2 * j, yj = 2 * j + 1;
        double diag = detail::second_diff(f, g, xj, xj, node) + detail::second_diff(f, g, yj, yj, node);
        m(j, j) = 0.25 * inv * diag;
        for (int k = j + 1; k < g.n; ++k) {
            const int xk = 2 * k, yk = 2 * k + 1;
            double re = detail::second_diff(f, g, xj, xk, node) + detail::second_diff(f, g, yj, yk, node);
            double im = detail::second_diff(f, g, xj, yk, node) - detail::second_diff(f, g, yj, xk, node);
            cplx v(0.25 * inv * re, 0.25 * inv * im);
            m(j, k) = v;
            m(k, j) = std::conj(v);
        }
    }
    return m;
}

inline HermitianField complex_hessian(const ScalarField& u) {
    HermitianField out(u.grid());
    const auto& interior = u.grid().nodes->interior;
    parallel_for(interior.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) out.set(k, complex_hessian_at(u, interior[k]));
    });
    return out;
}

}  // namespace dhym
