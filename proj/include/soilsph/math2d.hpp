#pragma once

#include <cmath>
#include <limits>

namespace soilsph {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }

    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

    constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    constexpr double norm2() const { return x * x + y * y; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

/// General (not necessarily symmetric) 2x2 matrix.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    constexpr Vec2 mul(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }
    constexpr double det() const { return a11 * a22 - a12 * a21; }
    constexpr double frobenius2() const {
        return a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22;
    }

    constexpr Mat2& operator+=(const Mat2& o) {
        a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
        return *this;
    }

    bool finite() const {
        return std::isfinite(a11) && std::isfinite(a12) &&
               std::isfinite(a21) && std::isfinite(a22);
    }
};

constexpr Mat2 inverse(const Mat2& m, double det) {
    const double inv = 1.0 / det;
    return {m.a22 * inv, -m.a12 * inv, -m.a21 * inv, m.a11 * inv};
}

/// Spectral condition number (ratio of singular values) of a 2x2 matrix.
/// Returns +inf for a singular matrix.
inline double condition_number(const Mat2& m) {
    const double f = m.frobenius2();
    const double d = std::abs(m.det());
    // Singular values: s1^2 + s2^2 = f, s1*s2 = d.
    const double disc = std::sqrt(std::max(0.0, f * f - 4.0 * d * d));
    const double smax2 = 0.5 * (f + disc);
    const double smin2 = 0.5 * (f - disc);
    if (smin2 <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(smax2 / smin2);
}

/// Symmetric plane-strain tensor: in-plane xx, yy, xy plus the out-of-plane
/// zz component, which carries no strain but evolves with volumetric stress.
struct Sym2 {
    double xx = 0.0;
    double yy = 0.0;
    double zz = 0.0;
    double xy = 0.0;

    /// Trace over all three diagonal components.
    constexpr double trace() const { return xx + yy + zz; }

    /// In-plane tensor-vector product (zz does not act on 2D vectors).
    constexpr Vec2 mul(const Vec2& v) const {
        return {xx * v.x + xy * v.y, xy * v.x + yy * v.y};
    }

    constexpr Sym2& operator+=(const Sym2& o) {
        xx += o.xx; yy += o.yy; zz += o.zz; xy += o.xy;
        return *this;
    }
    friend constexpr Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
    friend constexpr Sym2 operator-(const Sym2& a, const Sym2& b) {
        return {a.xx - b.xx, a.yy - b.yy, a.zz - b.zz, a.xy - b.xy};
    }
    friend constexpr Sym2 operator*(double s, const Sym2& a) {
        return {s * a.xx, s * a.yy, s * a.zz, s * a.xy};
    }
    friend constexpr bool operator==(const Sym2&, const Sym2&) = default;

    /// Second invariant of the deviator, J2 = s:s / 2.
    constexpr double j2() const {
        const double p = trace() / 3.0;
        const double dxx = xx - p, dyy = yy - p, dzz = zz - p;
        return 0.5 * (dxx * dxx + dyy * dyy + dzz * dzz) + xy * xy;
    }

    bool finite() const {
        return std::isfinite(xx) && std::isfinite(yy) &&
               std::isfinite(zz) && std::isfinite(xy);
    }
};

}  // namespace soilsph
