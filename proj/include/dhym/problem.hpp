#pragma once

#include <optional>
#include <vector>

#include "dhym/field_source.hpp"
#include "dhym/grid.hpp"

namespace dhym {

/// Cauchy-Dirichlet data for the flow on a box: initial potential φ, boundary
/// data ψ(x, t) on the parabolic boundary, and an optional subsolution.
struct Problem {
    GridSpec grid;
    double hat_theta = 0.0;
    double theta0 = 0.0;
    FieldSource phi;
    FieldSource psi;
    std::optional<FieldSource> subsolution;
    double t_end = 1.0;

    bool time_dependent() const {
        return psi.time_dependent() || (subsolution && subsolution->time_dependent());
    }

    /// Times at which time-dependent data is sampled for report-only checks.
    std::vector<double> sample_times(int count = 17) const {
        if (!time_dependent() || t_end <= 0.0) return {0.0};
        std::vector<double> ts(count);
        for (int k = 0; k < count; ++k) ts[k] = t_end * k / (count - 1);
        return ts;
    }
};

}  // namespace dhym
