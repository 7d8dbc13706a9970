#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "dhym/hessian.hpp"
#include "dhym/spectral.hpp"

namespace dhym {

/// c_n = n!·2ⁿ: the top power of (U + iω₀) against Lebesgue measure.
inline double volume_constant(int n) {
    double c = 1.0;
    for (int k = 1; k <= n; ++k) c *= 2.0 * k;
    return c;
}

/// det(U + iI), the pointwise density of (Hess u + iω₀)ⁿ up to c_n.
inline cplx density(const CMat& u) {
    CMat m = u;
    for (int i = 0; i < m.n; ++i) m(i, i) += cplx(0.0, 1.0);
    if (m.n == 1) return m(0, 0);
    if (m.n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return determinant(m);
}

/// Reparametrizations v(s) = φ + g(s)(ψ − φ) of the segment from φ to ψ.
enum class PathShape {
    linear,      // g(s) = s
    smoothstep,  // g(s) = s²(3 − 2s)
};

namespace detail {
inline double path_g(PathShape p, double s) { return p == PathShape::linear ? s : s * s * (3.0 - 2.0 * s); }
inline double path_dg(PathShape p, double s) { return p == PathShape::linear ? 1.0 : 6.0 * s * (1.0 - s); }

inline std::vector<double> simpson_weights(int samples) {
    if (samples < 3 || samples % 2 == 0)
        fail(ErrorKind::config, "s_samples must be odd and at least 3, got " + std::to_string(samples));
    const double ds = 1.0 / (samples - 1);
    std::vector<double> w(samples);
    for (int k = 0; k < samples; ++k) w[k] = (k == 0 || k == samples - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    for (double& x : w) x *= ds / 3.0;
    return w;
}

/// Inverse Vandermonde matrix for the nodes t_j = j/n, j = 0..n, row-major.
/// Maps n + 1 samples of a degree-n polynomial to its monomial coefficients.
inline std::vector<double> inverse_vandermonde(int n) {
    const int m = n + 1;
    std::vector<double> a(m * m), inv(m * m, 0.0);
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) a[j * m + l] = std::pow(n == 0 ? 0.0 : double(j) / n, l);
    for (int j = 0; j < m; ++j) inv[j * m + j] = 1.0;
    for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r = c + 1; r < m; ++r)
            if (std::abs(a[r * m + c]) > std::abs(a[piv * m + c])) piv = r;
        for (int l = 0; l < m; ++l) {
            std::swap(a[c * m + l], a[piv * m + l]);
            std::swap(inv[c * m + l], inv[piv * m + l]);
        }
        const double d = a[c * m + c];
        for (int l = 0; l < m; ++l) {
            a[c * m + l] /= d;
            inv[c * m + l] /= d;
        }
        for (int r = 0; r < m; ++r) {
            if (r == c) continue;
            const double f = a[r * m + c];
            for (int l = 0; l < m; ++l) {
                a[r * m + l] -= f * a[c * m + l];
                inv[r * m + l] -= f * inv[c * m + l];
            }
        }
    }
    return inv;
}

inline cplx complex_pairwise(std::vector<double>& re, std::vector<double>& im) {
    return {pairwise_sum(re), pairwise_sum(im)};
}
}  // namespace detail

/// Calabi-Yau functional CY_φ(·) with a fixed reference potential. Caches the
/// reference Hessian so repeated evaluations along a flow cost one Hessian each.
class CyEvaluator {
public:
    CyEvaluator(ScalarField phi, int s_samples = 33)
        : phi_(std::move(phi)),
          hess_phi_(complex_hessian(phi_)),
          weights_(detail::simpson_weights(s_samples)),
          vinv_(detail::inverse_vandermonde(phi_.grid().n)) {
        const auto& interior = phi_.grid().nodes->interior;
        density_phi_.resize(interior.size());
        for (std::size_t k = 0; k < interior.size(); ++k) density_phi_[k] = density(hess_phi_.at(k));
    }

    const ScalarField& reference() const { return phi_; }

    /// True when ψ − φ vanishes on the boundary layer (to round-off), i.e. ψ
    /// lies in the potential space the functional is defined on.
    bool in_potential_space(const ScalarField& psi) const {
        for (std::size_t i : phi_.grid().nodes->boundary)
            if (std::abs(psi[i] - phi_[i]) > 1e-12 * (1.0 + std::abs(phi_[i]))) return false;
        return true;
    }

    cplx operator()(const ScalarField& psi, PathShape shape = PathShape::linear) const {
        const GridSpec& g = phi_.grid();
        if (!g.same_as(psi.grid())) fail(ErrorKind::config, "cy_functional: grid mismatch");
        ScalarField diff(g);
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = psi[i] - phi_[i];
        const HermitianField hess_diff = complex_hessian(diff);
        const auto& interior = g.nodes->interior;
        const std::size_t count = interior.size();
        const int samples = static_cast<int>(weights_.size());
        const double ds = 1.0 / (samples - 1);
        const int n = g.n;
        std::vector<double> re(count), im(count);
        std::atomic<bool> branch_ok{true};
        parallel_for(count, [&](std::size_t b, std::size_t e) {
            bool ok = true;
            for (std::size_t k = b; k < e; ++k) {
                const CMat hp = hess_phi_.at(k);
                const CMat hd = hess_diff.at(k);
                const cplx d0 = density_phi_[k];
                // det(U + iI) along the segment is a polynomial of degree n.
                cplx vals[kMaxComplexDim + 1], coef[kMaxComplexDim + 1];
                vals[0] = d0;
                for (int j = 1; j <= n; ++j) vals[j] = density(hp + (double(j) / n) * hd);
                for (int l = 0; l <= n; ++l) {
                    coef[l] = 0.0;
                    for (int j = 0; j <= n; ++j) coef[l] += vinv_[l * (n + 1) + j] * vals[j];
                }
                cplx path = 0.0;
                for (int q = 0; q < samples; ++q) {
                    const double s = q * ds;
                    const double x = detail::path_g(shape, s);
                    cplx d = coef[n];
                    for (int l = n - 1; l >= 0; --l) d = d * x + coef[l];
                    ok = ok && d.imag() > 0.0;
                    path += weights_[q] * detail::path_dg(shape, s) * (d - d0);
                }
                const double w = diff[interior[k]];
                const cplx total = w * path + psi[interior[k]] * d0;
                re[k] = total.real();
                im[k] = total.imag();
            }
            if (!ok) branch_ok.store(false);
        });
        if (!branch_ok.load()) fail(ErrorKind::numeric, "CY path leaves the phase branch (0, pi)");
        const double scale = volume_constant(g.n) * std::pow(g.h, g.axes());
        return detail::complex_pairwise(re, im) * scale;
    }

private:
    ScalarField phi_;
    HermitianField hess_phi_;
    std::vector<cplx> density_phi_;
    std::vector<double> weights_;
    std::vector<double> vinv_;
};

inline cplx cy_functional(const ScalarField& phi, const ScalarField& psi, int s_samples = 33,
                          PathShape shape = PathShape::linear) {
    return CyEvaluator(phi, s_samples)(psi, shape);
}

/// J = Im(e^{−iθ̂}·CY) = cos θ̂·Im CY − sin θ̂·Re CY.
inline double j_from_cy(cplx cy, double hat_theta) {
    return std::cos(hat_theta) * cy.imag() - std::sin(hat_theta) * cy.real();
}

inline double j_functional(const ScalarField& phi, const ScalarField& u, double hat_theta, int s_samples = 33) {
    return j_from_cy(cy_functional(phi, u, s_samples), hat_theta);
}

/// S = ∫ (∂ₜu)²·sin θ̂·Im det(U + iI)·c_n over the interior.
inline double dissipation(const HermitianField& hess, const ScalarField& dt_u, double hat_theta) {
    const GridSpec& g = hess.grid();
    const auto& interior = g.nodes->interior;
    std::vector<double> terms(interior.size());
    const double st = std::sin(hat_theta);
    for (std::size_t k = 0; k < interior.size(); ++k) {
        const double v = dt_u[interior[k]];
        terms[k] = v * v * st * density(hess.at(k)).imag();
    }
    return integrate_interior_values(g, terms) * volume_constant(g.n);
}

inline double dissipation(const ScalarField& u, const ScalarField& dt_u, double hat_theta) {
    return dissipation(complex_hessian(u), dt_u, hat_theta);
}

/// |CY along the linear path − CY along the smoothstep path| for the same endpoints.
inline double path_independence_check(const ScalarField& phi, const ScalarField& psi, int s_samples = 65) {
    CyEvaluator cy(phi, s_samples);
    return std::abs(cy(psi, PathShape::linear) - cy(psi, PathShape::smoothstep));
}

/// ∫ η·det(Hess ψ + iI)·c_n: the first variation of CY_φ at ψ in direction η.
inline cplx variation_density_integral(const ScalarField& psi, const ScalarField& eta) {
    const GridSpec& g = psi.grid();
    const HermitianField hess = complex_hessian(psi);
    const auto& interior = g.nodes->interior;
    std::vector<double> re(interior.size()), im(interior.size());
    for (std::size_t k = 0; k < interior.size(); ++k) {
        const cplx v = eta[interior[k]] * density(hess.at(k));
        re[k] = v.real();
        im[k] = v.imag();
    }
    return detail::complex_pairwise(re, im) * (volume_constant(g.n) * std::pow(g.h, g.axes()));
}

/// Relative mismatch between a central difference of CY_φ at ψ along η and the
/// variational formula. η must vanish on the boundary layer and ψ must agree
/// with φ there.
inline double variation_check(const ScalarField& phi, const ScalarField& psi, const ScalarField& eta,
                              double eps = 1e-4, int s_samples = 33) {
    for (std::size_t i : psi.grid().nodes->boundary)
        if (eta[i] != 0.0) fail(ErrorKind::config, "variation direction must vanish on the boundary layer");
    CyEvaluator cy(phi, s_samples);
    if (!cy.in_potential_space(psi)) fail(ErrorKind::config, "variation check needs psi = phi on the boundary layer");
    ScalarField plus = psi, minus = psi;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        plus[i] += eps * eta[i];
        minus[i] -= eps * eta[i];
    }
    const cplx fd = (cy(plus) - cy(minus)) / (2.0 * eps);
    const cplx exact = variation_density_integral(psi, eta);
    const double scale = std::abs(exact);
    if (scale == 0.0) return std::abs(fd);
    return std::abs(fd - exact) / scale;
}

struct JSample {
    double t = 0.0;
    double J = 0.0;
    double S = 0.0;
};

struct GradientFlowResidual {
    double max_relative = 0.0;
    std::size_t samples_used = 0;
};

/// Central-difference dJ/dt against −S at interior samples. Samples where S is
/// below floor_fraction·max S are skipped: there the J differences are at the
/// level of round-off in J itself.
inline GradientFlowResidual gradient_flow_check(const std::vector<JSample>& history, double floor_fraction = 1e-6) {
    GradientFlowResidual r;
    if (history.size() < 3) return r;
    double s_peak = 0.0;
    for (const auto& h : history) s_peak = std::max(s_peak, h.S);
    if (s_peak == 0.0) return r;
    for (std::size_t k = 1; k + 1 < history.size(); ++k) {
        const double span = history[k + 1].t - history[k - 1].t;
        if (span <= 0.0 || history[k].S < floor_fraction * s_peak) continue;
        const double djdt = (history[k + 1].J - history[k - 1].J) / span;
        r.max_relative = std::max(r.max_relative, std::abs(djdt + history[k].S) / history[k].S);
        ++r.samples_used;
    }
    return r;
}

}  // namespace dhym
