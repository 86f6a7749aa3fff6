#pragma once

// Points of the slit tangent bundle: a base position x together with a
// nonzero direction y. All geometry in this library is evaluated at such
// points; y = 0 is excluded by a hard guard.

#include <cmath>
#include <cstddef>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler {

inline constexpr double kSlitGuard = 1e-6; // minimum |y| accepted

struct BasePoint {
    std::vector<double> x;
    std::vector<double> y;

    BasePoint() = default;
    BasePoint(std::vector<double> x_, std::vector<double> y_)
        : x(std::move(x_)), y(std::move(y_)) {}

    int dim() const { return static_cast<int>(x.size()); }

    double y_norm() const {
        double s = 0.0;
        for (double v : y) s += v * v;
        return std::sqrt(s);
    }
};

// Throws DomainError unless p has matching dimensions and |y| >= kSlitGuard.
inline void validate_point(const BasePoint& p) {
    if (p.x.empty() || p.x.size() != p.y.size())
        throw DomainError("point has mismatched or empty x/y components");
    if (p.y_norm() < kSlitGuard)
        throw DomainError("direction too close to the zero section (|y| < 1e-6)");
}

} // namespace finsler
