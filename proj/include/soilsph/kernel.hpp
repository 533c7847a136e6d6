#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "soilsph/math2d.hpp"

namespace soilsph {

/**
 * Cubic-spline smoothing kernel in two dimensions.
 *
 * W(q) = alpha * (1 - 3/2 q^2 + 3/4 q^3)  for 0 <= q < 1
 *        alpha * 1/4 (2 - q)^3            for 1 <= q < 2
 *        0                                for q >= 2
 *
 * with q = r/h and alpha = 10 / (7 pi h^2). Support radius is 2h and the
 * spline is C1-continuous at q = 1 and q = 2.
 */
class CubicSplineKernel {
public:
    explicit CubicSplineKernel(double h) : h_(h) {
        if (!std::isfinite(h) || h <= 0.0)
            throw std::invalid_argument("smoothing length must be finite and positive");
        alpha_ = 10.0 / (7.0 * std::numbers::pi * h * h);
    }

    double h() const { return h_; }
    double normalization() const { return alpha_; }
    double support_radius() const { return 2.0 * h_; }

    /// Kernel value at separation distance r >= 0.
    double w(double r) const {
        const double q = r / h_;
        if (q >= 2.0) return 0.0;
        if (q < 1.0) return alpha_ * (1.0 + q * q * (-1.5 + 0.75 * q));
        const double u = 2.0 - q;
        return alpha_ * 0.25 * u * u * u;
    }

    /// Radial derivative dW/dr at separation distance r >= 0.
    double dw_dr(double r) const {
        const double q = r / h_;
        if (q >= 2.0) return 0.0;
        if (q < 1.0) return alpha_ / h_ * q * (-3.0 + 2.25 * q);
        const double u = 2.0 - q;
        return alpha_ / h_ * (-0.75 * u * u);
    }

    /// Gradient with respect to particle a, with r_ab = x_a - x_b.
    /// Defined as the zero vector for coincident particles.
    Vec2 grad_w(const Vec2& r_ab) const {
        const double r = r_ab.norm();
        if (r == 0.0 || r >= 2.0 * h_) return {};
        return (dw_dr(r) / r) * r_ab;
    }

private:
    double h_;
    double alpha_;
};

}  // namespace soilsph
