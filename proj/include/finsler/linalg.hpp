#pragma once

// Small dense tensor containers over an arbitrary scalar (double or Jet) and
// the few solves the geometry needs. Gaussian elimination is hand-rolled so
// it can run on jets; double-only spectral queries go through Eigen.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "finsler/errors.hpp"

namespace finsler {

template <typename T>
struct VecT {
    std::vector<T> d;
    VecT() = default;
    explicit VecT(int n) : d(static_cast<std::size_t>(n)) {}
    VecT(int n, const T& v) : d(static_cast<std::size_t>(n), v) {}
    int size() const { return static_cast<int>(d.size()); }
    T& operator()(int i) { return d[static_cast<std::size_t>(i)]; }
    const T& operator()(int i) const { return d[static_cast<std::size_t>(i)]; }
};

template <typename T>
struct MatT {
    int n = 0, m = 0;
    std::vector<T> d;
    MatT() = default;
    MatT(int rows, int cols) : n(rows), m(cols), d(static_cast<std::size_t>(rows) * cols) {}
    MatT(int rows, int cols, const T& v)
        : n(rows), m(cols), d(static_cast<std::size_t>(rows) * cols, v) {}
    T& operator()(int i, int j) { return d[static_cast<std::size_t>(i) * m + j]; }
    const T& operator()(int i, int j) const { return d[static_cast<std::size_t>(i) * m + j]; }
};

template <typename T>
struct CubeT {
    int n = 0;
    std::vector<T> d;
    CubeT() = default;
    explicit CubeT(int dim) : n(dim), d(static_cast<std::size_t>(dim) * dim * dim) {}
    T& operator()(int i, int j, int k) {
        return d[(static_cast<std::size_t>(i) * n + j) * n + k];
    }
    const T& operator()(int i, int j, int k) const {
        return d[(static_cast<std::size_t>(i) * n + j) * n + k];
    }
};

template <typename T>
struct Rank4T {
    int n = 0;
    std::vector<T> d;
    Rank4T() = default;
    explicit Rank4T(int dim) : n(dim), d(static_cast<std::size_t>(dim) * dim * dim * dim) {}
    T& operator()(int i, int j, int k, int l) {
        return d[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
    }
    const T& operator()(int i, int j, int k, int l) const {
        return d[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
    }
};

using Vec = VecT<double>;
using Mat = MatT<double>;
using Cube = CubeT<double>;
using Rank4 = Rank4T<double>;

template <typename T>
VecT<T> operator+(const VecT<T>& a, const VecT<T>& b) {
    VecT<T> r(a.size());
    for (int i = 0; i < a.size(); ++i) r(i) = a(i) + b(i);
    return r;
}

template <typename T>
VecT<T> operator-(const VecT<T>& a, const VecT<T>& b) {
    VecT<T> r(a.size());
    for (int i = 0; i < a.size(); ++i) r(i) = a(i) - b(i);
    return r;
}

template <typename T, typename S>
VecT<T> scaled(const VecT<T>& a, const S& s) {
    VecT<T> r(a.size());
    for (int i = 0; i < a.size(); ++i) r(i) = a(i) * s;
    return r;
}

// matrix-vector action, row-major contraction on the second index
template <typename T>
VecT<T> mat_apply(const MatT<T>& M, const VecT<T>& v) {
    VecT<T> r(M.n);
    for (int i = 0; i < M.n; ++i) {
        T acc = M(i, 0) * v(0);
        for (int j = 1; j < M.m; ++j) acc = acc + M(i, j) * v(j);
        r(i) = acc;
    }
    return r;
}

template <typename T>
MatT<T> mat_mul(const MatT<T>& A, const MatT<T>& B) {
    MatT<T> r(A.n, B.m);
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < B.m; ++j) {
            T acc = A(i, 0) * B(0, j);
            for (int k = 1; k < A.m; ++k) acc = acc + A(i, k) * B(k, j);
            r(i, j) = acc;
        }
    return r;
}

namespace linalg_detail {
inline double lead_abs(double v) { return std::fabs(v); }
template <typename J>
auto lead_abs(const J& v) -> decltype(v.value()) { return std::fabs(v.value()); }
} // namespace linalg_detail

inline double recip_or_inv(double v) { return 1.0 / v; }
template <typename J>
J recip_or_inv(const J& v) { return recip(v); }

// In-place Gauss-Jordan inverse with partial pivoting on the leading
// (value) part, so jets pivot the same way their double shadows would.
template <typename T>
MatT<T> inverse(MatT<T> a) {
    const int n = a.n;
    if (a.m != n) throw ConfigError("inverse: matrix must be square");
    MatT<T> inv(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inv(i, j) = a(0, 0) * 0.0; // typed zero
    for (int i = 0; i < n; ++i) inv(i, i) = inv(i, i) + 1.0;

    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = linalg_detail::lead_abs(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            double cand = linalg_detail::lead_abs(a(r, col));
            if (cand > best) { best = cand; piv = r; }
        }
        if (!(best > 1e-300)) throw DomainError("inverse: matrix is numerically singular");
        if (piv != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        }
        T d = recip_or_inv(a(col, col));
        for (int j = 0; j < n; ++j) {
            a(col, j) = a(col, j) * d;
            inv(col, j) = inv(col, j) * d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            T f = a(r, col);
            for (int j = 0; j < n; ++j) {
                a(r, j) = a(r, j) - f * a(col, j);
                inv(r, j) = inv(r, j) - f * inv(col, j);
            }
        }
    }
    return inv;
}

// Smallest eigenvalue of a symmetric double matrix (positivity probe).
inline double min_eigenvalue_sym(const Mat& g) {
    Eigen::MatrixXd e(g.n, g.m);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.m; ++j) e(i, j) = g(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e);
    return solver.eigenvalues().minCoeff();
}

// Max |a_ij| over a double matrix; residual norms for the checks.
inline double max_abs(const Mat& a) {
    double r = 0.0;
    for (double v : a.d) r = std::fmax(r, std::fabs(v));
    return r;
}

inline double max_abs(const Vec& a) {
    double r = 0.0;
    for (double v : a.d) r = std::fmax(r, std::fabs(v));
    return r;
}

inline double max_abs(const Cube& a) {
    double r = 0.0;
    for (double v : a.d) r = std::fmax(r, std::fabs(v));
    return r;
}

inline double max_abs(const Rank4& a) {
    double r = 0.0;
    for (double v : a.d) r = std::fmax(r, std::fabs(v));
    return r;
}

} // namespace finsler
