#pragma once

// Central finite differences for mixed partials of scalar functions on the
// slit tangent bundle. This is the independent oracle the automatic
// differentiation is validated against: it shares no code path with jets.
//
// A mixed partial d^alpha f is built by composing per-variable central
// stencils. Order-1 and order-2 stencils in each variable are exact to
// O(h^2); composition keeps that truncation order while roundoff grows like
// eps * |f| / prod(h_v^alpha_v), so the default steps widen with the
// derivative order in that variable.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/point.hpp"

namespace finsler {

using ScalarField = std::function<double(const BasePoint&)>;

namespace fd_detail {

// Per-variable step: scale a base step by the coordinate magnitude and widen
// it with the total derivative order |alpha|, since roundoff in the composed
// stencil grows like eps / prod(h_v^alpha_v) = eps / h^|alpha| when all axes
// share one step (optimum near eps^(1/(|alpha|+2))).
inline double step_for(double coord, int total_order) {
    static const double base[5] = {0.0, 1e-3, 1e-3, 2.5e-3, 5e-3};
    int a = total_order < 4 ? total_order : 4;
    return base[a] * std::fmax(1.0, std::fabs(coord));
}

// Central stencil coefficients for d^a/dt^a, a in [1,4], on offsets
// {-a, ..., +a} scaled by h. Each is the standard O(h^2) formula.
inline void stencil(int a, std::vector<double>& offs, std::vector<double>& w) {
    switch (a) {
        case 1: offs = {-1, 1};             w = {-0.5, 0.5}; break;
        case 2: offs = {-1, 0, 1};          w = {1.0, -2.0, 1.0}; break;
        case 3: offs = {-2, -1, 1, 2};      w = {-0.5, 1.0, -1.0, 0.5}; break;
        case 4: offs = {-2, -1, 0, 1, 2};   w = {1.0, -4.0, 6.0, -4.0, 1.0}; break;
        default: throw OrderError("finite differences support per-variable order <= 4");
    }
}

} // namespace fd_detail

// Mixed partial d^alpha f at p, alpha indexed as (x^1..x^m, y^1..y^m).
// Steps may be overridden per variable with `h_override` (0 = default).
inline double fd_partial(const ScalarField& f, const BasePoint& p, const std::vector<int>& alpha,
                         const std::vector<double>& h_override = {}) {
    const int m = p.dim();
    if (static_cast<int>(alpha.size()) != 2 * m)
        throw ConfigError("fd_partial: multi-index length must be 2*dim");

    int total = 0;
    for (int a : alpha) total += a;

    // collect active variables
    struct Axis { int var; int order; double h; };
    std::vector<Axis> axes;
    for (int v = 0; v < 2 * m; ++v) {
        int a = alpha[static_cast<std::size_t>(v)];
        if (a == 0) continue;
        double coord = v < m ? p.x[static_cast<std::size_t>(v)] : p.y[static_cast<std::size_t>(v - m)];
        double h = (static_cast<int>(h_override.size()) == 2 * m && h_override[static_cast<std::size_t>(v)] > 0.0)
                       ? h_override[static_cast<std::size_t>(v)]
                       : fd_detail::step_for(coord, total);
        axes.push_back({v, a, h});
    }
    if (axes.empty()) return f(p);

    // recursively expand the tensor-product stencil
    std::function<double(std::size_t, BasePoint&)> eval = [&](std::size_t k, BasePoint& q) -> double {
        if (k == axes.size()) return f(q);
        const Axis& ax = axes[k];
        std::vector<double> offs, w;
        fd_detail::stencil(ax.order, offs, w);
        double& coord = ax.var < m ? q.x[static_cast<std::size_t>(ax.var)]
                                   : q.y[static_cast<std::size_t>(ax.var - m)];
        const double saved = coord;
        double acc = 0.0;
        for (std::size_t i = 0; i < offs.size(); ++i) {
            coord = saved + offs[i] * ax.h;
            acc += w[i] * eval(k + 1, q);
        }
        coord = saved;
        double scale = 1.0;
        for (int j = 0; j < ax.order; ++j) scale *= ax.h;
        return acc / scale;
    };
    BasePoint q = p;
    return eval(0, q);
}

// Relative discrepancy used by all tolerance checks: |a - b| / max(1, |a|, |b|).
inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b)));
}

} // namespace finsler
