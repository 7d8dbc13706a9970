#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dhym/error.hpp"
#include "dhym/parallel.hpp"

namespace dhym {

/// Largest complex dimension the small-matrix kernels are sized for.
inline constexpr int kMaxComplexDim = 4;

enum class NodeTag : unsigned char {
    interior,
    boundary_layer,
    ghost_excluded,  // never produced by the one-ring stencils used here
};

struct NodeClass {
    std::vector<NodeTag> tags;
    std::vector<std::size_t> interior;  // flat indices, ascending
    std::vector<std::size_t> boundary;  // flat indices, ascending
};

/// Uniform isotropic grid on a box in R^{2n}, axes ordered x1, y1, ..., xn, yn.
struct GridSpec {
    int n = 0;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<int> points;
    double h = 0.0;
    std::vector<std::size_t> strides;  // row-major: last axis fastest
    std::shared_ptr<const NodeClass> nodes;

    int axes() const { return 2 * n; }

    std::size_t node_count() const {
        std::size_t c = 1;
        for (int p : points) c *= static_cast<std::size_t>(p);
        return c;
    }

    std::size_t interior_count() const { return nodes->interior.size(); }

    int index_on_axis(std::size_t flat, int axis) const {
        return static_cast<int>((flat / strides[axis]) % static_cast<std::size_t>(points[axis]));
    }

    double coordinate(std::size_t flat, int axis) const { return lo[axis] + h * index_on_axis(flat, axis); }

    void coordinates(std::size_t flat, std::span<double> out) const {
        for (int a = 0; a < axes(); ++a) out[a] = coordinate(flat, a);
    }

    std::string describe_node(std::size_t flat) const {
        std::ostringstream os;
        os << "node " << flat << " at (";
        for (int a = 0; a < axes(); ++a) os << (a ? ", " : "") << coordinate(flat, a);
        os << ")";
        return os.str();
    }

    bool same_as(const GridSpec& other) const {
        return n == other.n && points == other.points && lo == other.lo && hi == other.hi;
    }
};

/// Outermost ring of every axis is boundary layer; the rest is interior.
inline NodeClass classify_nodes(const GridSpec& grid) {
    if (grid.nodes) return *grid.nodes;
    NodeClass nc;
    const std::size_t total = grid.node_count();
    nc.tags.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        bool interior = true;
        for (int a = 0; a < grid.axes() && interior; ++a) {
            int k = grid.index_on_axis(i, a);
            interior = k > 0 && k < grid.points[a] - 1;
        }
        nc.tags[i] = interior ? NodeTag::interior : NodeTag::boundary_layer;
        (interior ? nc.interior : nc.boundary).push_back(i);
    }
    return nc;
}

inline GridSpec make_grid(int n, std::vector<double> lo, std::vector<double> hi, std::vector<int> points) {
    if (n < 1 || n > kMaxComplexDim)
        fail(ErrorKind::config, "complex dimension n=" + std::to_string(n) + " outside [1, " +
                                    std::to_string(kMaxComplexDim) + "]");
    const std::size_t axes = static_cast<std::size_t>(2 * n);
    if (lo.size() != axes || hi.size() != axes || points.size() != axes)
        fail(ErrorKind::config, "grid needs " + std::to_string(axes) + " entries in lo, hi and points_per_axis");
    for (std::size_t a = 0; a < axes; ++a) {
        if (points[a] < 5)
            fail(ErrorKind::config, "too few points on axis " + std::to_string(a) + ": " + std::to_string(points[a]) +
                                        " (need at least 5)");
        if (!(hi[a] > lo[a]) || !std::isfinite(lo[a]) || !std::isfinite(hi[a]))
            fail(ErrorKind::config, "degenerate box on axis " + std::to_string(a));
    }
    GridSpec g;
    g.n = n;
    g.lo = std::move(lo);
    g.hi = std::move(hi);
    g.points = std::move(points);
    g.h = (g.hi[0] - g.lo[0]) / (g.points[0] - 1);
    for (std::size_t a = 1; a < axes; ++a) {
        double ha = (g.hi[a] - g.lo[a]) / (g.points[a] - 1);
        if (std::abs(ha - g.h) > 1e-12 * std::abs(g.h))
            fail(ErrorKind::config, "non-isotropic spacing: axis " + std::to_string(a) + " has h=" +
                                        std::to_string(ha) + " vs " + std::to_string(g.h));
    }
    g.strides.assign(axes, 1);
    for (int a = static_cast<int>(axes) - 2; a >= 0; --a) g.strides[a] = g.strides[a + 1] * g.points[a + 1];
    g.nodes = std::make_shared<const NodeClass>(classify_nodes(g));
    return g;
}

/// Real scalar function on every node of a grid.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridSpec grid, double fill = 0.0)
        : grid_(std::move(grid)), values_(grid_.node_count(), fill) {}
    ScalarField(GridSpec grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.node_count())
            fail(ErrorKind::config, "field has " + std::to_string(values_.size()) + " values, grid has " +
                                        std::to_string(grid_.node_count()) + " nodes");
    }

    const GridSpec& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::size_t size() const { return values_.size(); }

private:
    GridSpec grid_;
    std::vector<double> values_;
};

using CoordinateFunction = std::function<double(std::span<const double>)>;

inline ScalarField sample_function(const GridSpec& grid, const CoordinateFunction& f) {
    ScalarField out(grid);
    auto vals = out.values();
    parallel_for(grid.node_count(), [&](std::size_t b, std::size_t e) {
        double x[2 * kMaxComplexDim];
        std::span<double> xs(x, grid.axes());
        for (std::size_t i = b; i < e; ++i) {
            grid.coordinates(i, xs);
            vals[i] = f(xs);
        }
    });
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (!std::isfinite(vals[i])) fail(ErrorKind::numeric, "non-finite sample at " + grid.describe_node(i));
    return out;
}

/// Interior node sum of field*weight*h^{2n}, reduced pairwise in node order.
inline double integrate_interior(const ScalarField& field, const ScalarField& weight) {
    if (!field.grid().same_as(weight.grid())) fail(ErrorKind::config, "integrate_interior: grid mismatch");
    const GridSpec& g = field.grid();
    const auto& interior = g.nodes->interior;
    std::vector<double> terms(interior.size());
    for (std::size_t k = 0; k < interior.size(); ++k) terms[k] = field[interior[k]] * weight[interior[k]];
    return pairwise_sum(terms) * std::pow(g.h, g.axes());
}

/// Same quadrature for a per-interior-node integrand already laid out in interior order.
inline double integrate_interior_values(const GridSpec& g, std::span<const double> per_interior) {
    return pairwise_sum(per_interior) * std::pow(g.h, g.axes());
}

}  // namespace dhym
