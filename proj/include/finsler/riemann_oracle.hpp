#pragma once

// Independent oracle for the Riemannian reduction: Levi-Civita symbols and
// Riemann curvature computed from the metric's x-component functions by
// central finite differences. Shares no code with the jet tower, so
// agreement on a Riemannian metric certifies spray, N, Gamma and R there.

#include <functional>
#include <vector>

#include "finsler/linalg.hpp"

namespace finsler {

using MetricComponents = std::function<Mat(const std::vector<double>&)>;

namespace riemann_detail {

inline double step(double coord) { return 1e-4 * std::fmax(1.0, std::fabs(coord)); }

// d g_ij / d x^k by central differences
inline Cube dg_dx(const MetricComponents& g, const std::vector<double>& x) {
    const int m = static_cast<int>(x.size());
    Cube d(m); // d(k, i, j) = d_k g_ij
    std::vector<double> q = x;
    for (int k = 0; k < m; ++k) {
        double h = step(x[static_cast<std::size_t>(k)]);
        q[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + h;
        Mat gp = g(q);
        q[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] - h;
        Mat gm = g(q);
        q[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) d(k, i, j) = (gp(i, j) - gm(i, j)) / (2.0 * h);
    }
    return d;
}

} // namespace riemann_detail

// Levi-Civita symbols gamma^i_jk at x.
inline Cube lc_christoffels_fd(const MetricComponents& g, const std::vector<double>& x) {
    const int m = static_cast<int>(x.size());
    Mat g0 = g(x);
    Mat ginv = inverse(g0);
    Cube dg = riemann_detail::dg_dx(g, x);
    Cube gamma(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                double s = 0.0;
                for (int t = 0; t < m; ++t)
                    s += ginv(i, t) * (dg(j, t, k) + dg(k, t, j) - dg(t, j, k));
                gamma(i, j, k) = 0.5 * s;
            }
    return gamma;
}

// Riemann tensor R^i_{j kl} = d_k gamma^i_jl - d_l gamma^i_jk
//                             + gamma^i_km gamma^m_jl - gamma^i_lm gamma^m_jk.
inline Rank4 lc_riemann_fd(const MetricComponents& g, const std::vector<double>& x) {
    const int m = static_cast<int>(x.size());
    Cube gamma = lc_christoffels_fd(g, x);
    std::vector<Cube> dgamma;
    dgamma.reserve(static_cast<std::size_t>(m));
    std::vector<double> q = x;
    for (int k = 0; k < m; ++k) {
        double h = riemann_detail::step(x[static_cast<std::size_t>(k)]);
        q[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + h;
        Cube gp = lc_christoffels_fd(g, q);
        q[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] - h;
        Cube gm = lc_christoffels_fd(g, q);
        q[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
        Cube d(m);
        for (std::size_t t = 0; t < d.d.size(); ++t) d.d[t] = (gp.d[t] - gm.d[t]) / (2.0 * h);
        dgamma.push_back(std::move(d));
    }
    Rank4 R(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    double v = dgamma[static_cast<std::size_t>(k)](i, j, l) -
                               dgamma[static_cast<std::size_t>(l)](i, j, k);
                    for (int t = 0; t < m; ++t)
                        v += gamma(i, k, t) * gamma(t, j, l) - gamma(i, l, t) * gamma(t, j, k);
                    R(i, j, k, l) = v;
                }
    return R;
}

} // namespace finsler
