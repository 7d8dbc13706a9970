#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dhym/cone.hpp"
#include "dhym/functionals.hpp"
#include "dhym/spectral.hpp"

namespace dhym {

/// Outcome of one randomized property over `cases` samples; `worst` is the
/// largest observed value of the property's metric.
struct PropertyResult {
    std::string name;
    bool passed = true;
    long cases = 0;
    long failures = 0;
    double worst = 0.0;
    std::string detail;
};

namespace detail {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

inline CMat random_hermitian(Rng& rng, int n, double scale) {
    CMat u(n);
    for (int r = 0; r < n; ++r) {
        u(r, r) = uniform(rng, -scale, scale);
        for (int c = r + 1; c < n; ++c) {
            u(r, c) = cplx(uniform(rng, -scale, scale), uniform(rng, -scale, scale));
            u(c, r) = std::conj(u(r, c));
        }
    }
    return u;
}

/// Random Hermitian matrix with Θ inside (lo, hi), by rejection.
inline CMat random_phase_matrix(Rng& rng, int n, double scale, double lo, double hi) {
    for (;;) {
        CMat u = random_hermitian(rng, n, scale);
        const double th = theta(hermitian_eigenvalues(u));
        if (th > lo && th < hi) return u;
    }
}

/// λ with 0 < Θ(λ) < π/2, log-uniform entries.
inline RVec random_gamma_point(Rng& rng, int n) {
    for (;;) {
        RVec lam;
        lam.n = n;
        for (int i = 0; i < n; ++i) lam[i] = std::exp(uniform(rng, -1.0, 3.0));
        if (in_gamma(lam)) return lam;
    }
}

inline double cot_theta_of(const RVec& lam) { return cot(theta(lam)); }
inline double cot_theta_of(const CMat& u) { return cot(theta(hermitian_eigenvalues(u))); }

/// Tracks the largest metric; a case fails when metric > tol.
inline void record(PropertyResult& r, double metric, double tol, const std::string& where) {
    ++r.cases;
    r.worst = r.cases == 1 ? metric : std::max(r.worst, metric);
    if (!(metric <= tol)) {
        if (r.failures == 0) r.detail = where;
        ++r.failures;
        r.passed = false;
    }
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

}  // namespace detail

/// Eigenvalue route vs determinant route for cot Θ; `worst` is the largest
/// |difference| / (1 + |cot Θ|).
inline PropertyResult check_spectral_cross(std::uint64_t seed, long count = 10000, double tol = 1e-10) {
    detail::Rng rng(seed);
    PropertyResult r{"spectral_cross_check"};
    for (long k = 0; k < count; ++k) {
        const int n = 1 + static_cast<int>(k % 3);
        const CMat u = detail::random_phase_matrix(rng, n, 3.0, 0.1, std::numbers::pi - 0.1);
        const double eig = detail::cot_theta_of(u);
        const double det = cot_theta_det(u);
        const double rel = std::abs(eig - det) / (1.0 + std::abs(eig));
        detail::record(r, rel, tol, "case " + std::to_string(k) + ", n=" + std::to_string(n));
    }
    if (r.passed) r.detail = "max relative difference " + detail::fmt(r.worst);
    return r;
}

/// cot Θ(U + t vv*) ≥ cot Θ(U) − slack for t > 0.
inline PropertyResult check_monotonicity(std::uint64_t seed, long count = 10000, double slack = 1e-12) {
    detail::Rng rng(seed);
    PropertyResult r{"monotonicity"};
    for (long k = 0; k < count; ++k) {
        const int n = 1 + static_cast<int>(k % 3);
        const CMat u = detail::random_phase_matrix(rng, n, 3.0, 0.1, std::numbers::pi - 0.1);
        std::vector<cplx> v(n);
        for (auto& x : v) x = cplx(detail::uniform(rng, -1.0, 1.0), detail::uniform(rng, -1.0, 1.0));
        const double t = detail::uniform(rng, 0.05, 2.0);
        CMat w = u;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) w(a, b) += t * v[a] * std::conj(v[b]);
        const double drop = detail::cot_theta_of(u) - detail::cot_theta_of(w);
        detail::record(r, drop, slack, "case " + std::to_string(k));
    }
    if (r.passed) r.detail = "largest decrease " + detail::fmt(r.worst);
    return r;
}

/// Midpoint concavity of λ ↦ cot Θ(λ) on Γ.
inline PropertyResult check_concavity(std::uint64_t seed, long count = 10000, double slack = 1e-12) {
    detail::Rng rng(seed);
    PropertyResult r{"concavity"};
    for (long k = 0; k < count; ++k) {
        const int n = 1 + static_cast<int>(k % 3);
        const RVec a = detail::random_gamma_point(rng, n);
        const RVec b = detail::random_gamma_point(rng, n);
        RVec m;
        m.n = n;
        for (int i = 0; i < n; ++i) m[i] = 0.5 * (a[i] + b[i]);
        const double gap =
            0.5 * (detail::cot_theta_of(a) + detail::cot_theta_of(b)) - detail::cot_theta_of(m);
        detail::record(r, gap, slack, "pair " + std::to_string(k));
    }
    if (r.passed) r.detail = "largest midpoint excess " + detail::fmt(r.worst);
    return r;
}

/// Eigenvalues of the leading principal submatrix interlace those of A.
inline PropertyResult check_interlacing(std::uint64_t seed, long count = 1000, double tol = 1e-10) {
    detail::Rng rng(seed);
    PropertyResult r{"interlacing"};
    for (long k = 0; k < count; ++k) {
        const int n = 2 + static_cast<int>(k % 3);
        const CMat a = detail::random_hermitian(rng, n, 3.0);
        CMat sub(n - 1);
        for (int i = 0; i < n - 1; ++i)
            for (int j = 0; j < n - 1; ++j) sub(i, j) = a(i, j);
        RVec la = hermitian_eigenvalues(a), ls = hermitian_eigenvalues(sub);
        std::sort(la.v.begin(), la.v.begin() + n);
        std::sort(ls.v.begin(), ls.v.begin() + n - 1);
        double excess = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n - 1; ++j)
            excess = std::max({excess, la[j] - ls[j], ls[j] - la[j + 1]});
        detail::record(r, excess, tol, "case " + std::to_string(k) + ", n=" + std::to_string(n));
    }
    if (r.passed) r.detail = "largest interlacing excess " + detail::fmt(r.worst);
    return r;
}

/// ⟨F(U), V⟩ against the central difference of cot Θ at step eps, relative to
/// the pairing scale ‖F‖·‖V‖.
inline PropertyResult check_derivative(std::uint64_t seed, long count = 1000, double eps = 1e-5, double tol = 1e-6) {
    detail::Rng rng(seed);
    PropertyResult r{"derivative"};
    for (long k = 0; k < count; ++k) {
        const int n = 1 + static_cast<int>(k % 3);
        const CMat u = detail::random_phase_matrix(rng, n, 3.0, 0.1, std::numbers::pi - 0.1);
        const CMat v = detail::random_hermitian(rng, n, 1.0);
        const Linearization lin = linearization(u);
        const double exact = hermitian_pairing(lin.F, v);
        const double fd = (detail::cot_theta_of(u + eps * v) - detail::cot_theta_of(u - eps * v)) / (2.0 * eps);
        const double rel = std::abs(exact - fd) / (lin.F.frobenius() * v.frobenius());
        detail::record(r, rel, tol, "case " + std::to_string(k));
    }
    if (r.passed) r.detail = "max relative error " + detail::fmt(r.worst);
    return r;
}

/// Im(e^{−iθ̂}·D) = −sin θ̂·(cot Θ − cot θ̂)·Im D for D = det(U + iI).
inline PropertyResult check_density_identity(std::uint64_t seed, long count = 10000, double tol = 1e-12) {
    detail::Rng rng(seed);
    PropertyResult r{"density_identity"};
    for (long k = 0; k < count; ++k) {
        const int n = 1 + static_cast<int>(k % 3);
        const CMat u = detail::random_phase_matrix(rng, n, 3.0, 0.1, std::numbers::pi - 0.1);
        const double hat = detail::uniform(rng, 0.05, std::numbers::pi / 2.0 - 0.05);
        const cplx d = density(u);
        const double lhs = (std::exp(cplx(0.0, -hat)) * d).imag();
        const double rhs = -std::sin(hat) * (detail::cot_theta_of(u) - cot(hat)) * d.imag();
        const double rel = std::abs(lhs - rhs) / (1.0 + std::abs(d));
        detail::record(r, rel, tol, "case " + std::to_string(k));
    }
    if (r.passed) r.detail = "max relative defect " + detail::fmt(r.worst);
    return r;
}

/// Brute-force comparison (n = 2) of the level-set definition of a
/// subsolution with the pointwise partial-phase criterion. Along rays
/// λ̲ + s·d, d ≥ 0, roots of Θ = θ̂ are located for s ∈ [0, s_max]; the root
/// set counts as bounded when every root stays below `radius`. Samples within
/// `band` of the criterion's threshold are redrawn.
inline PropertyResult check_cone_equivalence(std::uint64_t seed, long count = 1000, double s_max = 1e3,
                                             double radius = 500.0, double band = 0.05) {
    detail::Rng rng(seed);
    PropertyResult r{"cone_equivalence"};
    std::vector<double> angles;
    for (double a = 1e-7; a < std::numbers::pi / 4.0; a *= 1.5) {
        angles.push_back(a);
        angles.push_back(std::numbers::pi / 2.0 - a);
    }
    angles.push_back(std::numbers::pi / 4.0);
    long criterion_true = 0;
    for (long k = 0; k < count; ++k) {
        RVec lam;
        double hat = 0.0;
        for (;;) {
            lam = detail::random_gamma_point(rng, 2);
            hat = detail::uniform(rng, 0.05, std::numbers::pi / 2.0 - 0.05);
            if (std::abs(max_partial_phase(lam) - hat) > band) break;
        }
        const bool criterion = is_elliptic_subsolution(lam, hat);
        criterion_true += criterion;
        double largest = 0.0;
        for (double a : angles) {
            const double d0 = std::cos(a), d1 = std::sin(a);
            auto phase = [&](double s) { return arccot(lam[0] + s * d0) + arccot(lam[1] + s * d1); };
            if (!(phase(0.0) >= hat && phase(s_max) < hat)) continue;
            double lo = 0.0, hi = s_max;
            for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (phase(mid) >= hat ? lo : hi) = mid;
            }
            largest = std::max(largest, 0.5 * (lo + hi));
        }
        const bool bounded = largest < radius;
        detail::record(r, bounded == criterion ? 0.0 : 1.0, 0.0,
                       "sample " + std::to_string(k) + ": criterion " + (criterion ? "holds" : "fails") +
                           " but largest root " + detail::fmt(largest));
    }
    r.worst = static_cast<double>(r.failures);
    if (r.passed)
        r.detail = std::to_string(criterion_true) + " subsolutions, " + std::to_string(count - criterion_true) +
                   " non-subsolutions classified consistently";
    return r;
}

/// The full randomized suite; each property draws from its own stream.
inline std::vector<PropertyResult> run_property_suite(std::uint64_t seed) {
    std::seed_seq seq{seed};
    std::vector<std::uint64_t> s(7);
    std::vector<std::uint32_t> raw(14);
    seq.generate(raw.begin(), raw.end());
    for (int i = 0; i < 7; ++i) s[i] = (std::uint64_t(raw[2 * i]) << 32) | raw[2 * i + 1];
    return {check_spectral_cross(s[0]),   check_monotonicity(s[1]),     check_concavity(s[2]),
            check_interlacing(s[3]),      check_derivative(s[4]),       check_density_identity(s[5]),
            check_cone_equivalence(s[6])};
}

}  // namespace dhym
