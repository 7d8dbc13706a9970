#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dhym/hessian.hpp"
#include "dhym/matrix.hpp"

namespace dhym {

/// arccot with range (0, π), continuous across 0.
inline double arccot(double t) { return std::numbers::pi / 2.0 - std::atan(t); }

inline double cot(double x) { return std::cos(x) / std::sin(x); }

struct EigenDecomposition {
    RVec values;   // descending
    CMat vectors;  // column j is the eigenvector of values[j]
};

namespace detail {

inline void require_hermitian(const CMat& u) {
    const double tol = 1e-10 * (1.0 + u.frobenius());
    if (hermitian_defect(u) > tol) fail(ErrorKind::numeric, "matrix is not Hermitian within tolerance");
}

inline void sort_descending(EigenDecomposition& ed) {
    const int n = ed.values.n;
    for (int i = 0; i < n; ++i) {
        int best = i;
        for (int j = i + 1; j < n; ++j)
            if (ed.values[j] > ed.values[best]) best = j;
        if (best == i) continue;
        std::swap(ed.values[i], ed.values[best]);
        for (int r = 0; r < n; ++r) std::swap(ed.vectors(r, i), ed.vectors(r, best));
    }
}

}  // namespace detail

/// Cyclic complex Jacobi. Each rotation first rotates the phase of a_pq away,
/// then applies the real symmetric Jacobi rotation.
inline EigenDecomposition jacobi_eigh(CMat a) {
    const int n = a.n;
    EigenDecomposition ed;
    ed.vectors = CMat::identity(n);
    const double scale = std::max(a.frobenius(), 1e-300);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (std::sqrt(2.0 * off) <= 1e-15 * scale) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double g = std::abs(a(p, q));
                if (g == 0.0) continue;
                const cplx e = a(p, q) / g;
                const double app = a(p, p).real(), aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * g);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J = D R with D = diag(1, conj(e)) on (p, q); A <- J* A J, V <- V J.
                const cplx jpp = c, jpq = s, jqp = -s * std::conj(e), jqq = c * std::conj(e);
                for (int k = 0; k < n; ++k) {  // columns: A <- A J
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * jpp + akq * jqp;
                    a(k, q) = akp * jpq + akq * jqq;
                    const cplx vkp = ed.vectors(k, p), vkq = ed.vectors(k, q);
                    ed.vectors(k, p) = vkp * jpp + vkq * jqp;
                    ed.vectors(k, q) = vkp * jpq + vkq * jqq;
                }
                for (int k = 0; k < n; ++k) {  // rows: A <- J* A
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
                    a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }
    ed.values.n = n;
    for (int i = 0; i < n; ++i) ed.values[i] = a(i, i).real();
    detail::sort_descending(ed);
    return ed;
}

/// Descending eigenvalues of a Hermitian matrix. n = 2 uses the trace/determinant
/// closed form; larger n uses Jacobi.
inline RVec hermitian_eigenvalues(const CMat& u) {
    detail::require_hermitian(u);
    RVec out;
    out.n = u.n;
    if (u.n == 1) {
        out[0] = u(0, 0).real();
        return out;
    }
    if (u.n == 2) {
        const double a = u(0, 0).real(), d = u(1, 1).real();
        const double half_gap = 0.5 * (a - d);
        const double r = std::hypot(half_gap, std::abs(u(0, 1)));
        const double mean = 0.5 * (a + d);
        out[0] = mean + r;
        out[1] = mean - r;
        return out;
    }
    return jacobi_eigh(u).values;
}

/// Θ(λ) = Σ arccot λ_i.
inline double theta(const RVec& lambda) {
    double s = 0.0;
    for (int i = 0; i < lambda.n; ++i) s += arccot(lambda[i]);
    return s;
}

/// cot Θ as Re det(U + iI) / Im det(U + iI).
inline double cot_theta_det(const CMat& u) {
    CMat m = u;
    for (int i = 0; i < m.n; ++i) m(i, i) += cplx(0.0, 1.0);
    const cplx det = determinant(m);
    if (std::abs(det.imag()) < 1e-14 * std::abs(det))
        fail(ErrorKind::numeric, "phase at branch: Im det(U + iI) vanishes");
    return det.real() / det.imag();
}

/// d cot Θ / d λ_j = (1 + cot²Θ) / (1 + λ_j²).
inline double cot_theta_slope(double cot_theta, double lambda) {
    return (1.0 + cot_theta * cot_theta) / (1.0 + lambda * lambda);
}

struct Linearization {
    CMat F;
    double trace = 0.0;
};

struct NodePhase {
    RVec lambda;
    double theta = 0.0;
    double cot_theta = 0.0;
    CMat F;
    double F_trace = 0.0;
};

/// Full phase calculus at one matrix: eigenvalues, Θ, cot Θ and F = ∂cotΘ/∂U.
inline NodePhase node_phase(const CMat& u) {
    NodePhase p;
    if (u.n == 1) {
        const double lam = u(0, 0).real();
        p.lambda = RVec{lam};
        p.theta = arccot(lam);
        p.cot_theta = cot(p.theta);
        p.F = CMat(1);
        p.F(0, 0) = cot_theta_slope(p.cot_theta, lam);
        p.F_trace = p.F(0, 0).real();
        return p;
    }
    const EigenDecomposition ed = jacobi_eigh(u);
    p.lambda = ed.values;
    p.theta = theta(p.lambda);
    p.cot_theta = cot(p.theta);
    const int n = u.n;
    RVec w;
    w.n = n;
    for (int j = 0; j < n; ++j) {
        w[j] = cot_theta_slope(p.cot_theta, p.lambda[j]);
        p.F_trace += w[j];
    }
    p.F = CMat(n);
    for (int r = 0; r < n; ++r)
        for (int c = r; c < n; ++c) {
            cplx s = 0.0;
            for (int j = 0; j < n; ++j) s += ed.vectors(r, j) * w[j] * std::conj(ed.vectors(c, j));
            p.F(r, c) = s;
            p.F(c, r) = std::conj(s);
        }
    for (int r = 0; r < n; ++r) p.F(r, r) = p.F(r, r).real();
    return p;
}

/// F = Q diag((1 + cot²Θ)/(1 + λ_j²)) Q*; requires Θ ∈ (0, π).
inline Linearization linearization(const CMat& u) {
    detail::require_hermitian(u);
    NodePhase p = node_phase(u);
    if (!(p.theta > 0.0 && p.theta < std::numbers::pi))
        fail(ErrorKind::numeric, "linearization requested outside the phase branch (0, pi)");
    return {p.F, p.F_trace};
}

/// Per-interior-node phase data of a Hessian field.
struct PhaseData {
    GridSpec grid;
    std::vector<NodePhase> nodes;  // interior order
};

inline PhaseData phase_data(const HermitianField& hess) {
    PhaseData pd{hess.grid(), std::vector<NodePhase>(hess.size())};
    parallel_for(hess.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) pd.nodes[k] = node_phase(hess.at(k));
    });
    return pd;
}

/// Throws with the offending node when any interior phase leaves (lo, hi).
inline void require_phase_range(const PhaseData& pd, double lo, double hi) {
    for (std::size_t k = 0; k < pd.nodes.size(); ++k) {
        const double th = pd.nodes[k].theta;
        if (!(th > lo && th < hi))
            fail(ErrorKind::numeric, "phase branch violated (theta=" + std::to_string(th) + ") at " +
                                         pd.grid.describe_node(pd.grid.nodes->interior[k]));
    }
}

}  // namespace dhym
