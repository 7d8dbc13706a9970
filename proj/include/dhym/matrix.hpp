#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>

#include "dhym/grid.hpp"

namespace dhym {

using cplx = std::complex<double>;

/// Dense n x n complex matrix with n <= kMaxComplexDim, stored inline.
struct CMat {
    int n = 0;
    std::array<cplx, kMaxComplexDim * kMaxComplexDim> a{};

    CMat() = default;
    explicit CMat(int dim) : n(dim) {}
    CMat(int dim, std::initializer_list<cplx> rows) : n(dim) {
        int k = 0;
        for (cplx v : rows) a[k++] = v;
    }

    static CMat identity(int dim) {
        CMat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
    static CMat diagonal(std::initializer_list<double> d) {
        CMat m(static_cast<int>(d.size()));
        int i = 0;
        for (double v : d) {
            m(i, i) = v;
            ++i;
        }
        return m;
    }

    cplx& operator()(int i, int j) { return a[i * n + j]; }
    const cplx& operator()(int i, int j) const { return a[i * n + j]; }

    CMat adjoint() const {
        CMat m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = std::conj((*this)(j, i));
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (int k = 0; k < n * n; ++k) s += std::norm(a[k]);
        return std::sqrt(s);
    }

    cplx trace() const {
        cplx t = 0.0;
        for (int i = 0; i < n; ++i) t += (*this)(i, i);
        return t;
    }

    friend CMat operator*(const CMat& x, const CMat& y) {
        CMat m(x.n);
        for (int i = 0; i < x.n; ++i)
            for (int k = 0; k < x.n; ++k) {
                cplx xik = x(i, k);
                for (int j = 0; j < x.n; ++j) m(i, j) += xik * y(k, j);
            }
        return m;
    }
    friend CMat operator+(CMat x, const CMat& y) {
        for (int k = 0; k < x.n * x.n; ++k) x.a[k] += y.a[k];
        return x;
    }
    friend CMat operator-(CMat x, const CMat& y) {
        for (int k = 0; k < x.n * x.n; ++k) x.a[k] -= y.a[k];
        return x;
    }
    friend CMat operator*(double s, CMat x) {
        for (int k = 0; k < x.n * x.n; ++k) x.a[k] *= s;
        return x;
    }
};

/// Fixed-capacity real vector (eigenvalues).
struct RVec {
    int n = 0;
    std::array<double, kMaxComplexDim> v{};

    RVec() = default;
    RVec(std::initializer_list<double> values) {
        for (double x : values) v[n++] = x;
    }
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
};

/// Largest deviation from Hermitian symmetry, max |U_ij - conj(U_ji)|.
inline double hermitian_defect(const CMat& u) {
    double d = 0.0;
    for (int i = 0; i < u.n; ++i)
        for (int j = i; j < u.n; ++j) d = std::max(d, std::abs(u(i, j) - std::conj(u(j, i))));
    return d;
}

/// Re tr(F V) for Hermitian F, V: the pairing sum_ij F_ij V_ji.
inline double hermitian_pairing(const CMat& f, const CMat& v) {
    double s = 0.0;
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j) s += (f(i, j) * v(j, i)).real();
    return s;
}

/// Determinant by Gaussian elimination with partial pivoting.
inline cplx determinant(CMat m) {
    cplx det = 1.0;
    const int n = m.n;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
        if (m(piv, c) == cplx(0.0)) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
            det = -det;
        }
        det *= m(c, c);
        for (int r = c + 1; r < n; ++r) {
            cplx f = m(r, c) / m(c, c);
            for (int j = c + 1; j < n; ++j) m(r, j) -= f * m(c, j);
        }
    }
    return det;
}

}  // namespace dhym
