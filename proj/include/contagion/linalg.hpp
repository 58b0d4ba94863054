#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace contagion {

/// 2-vector with value semantics; the whole library works in dimension 2.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double operator[](int i) const { return i == 0 ? x : y; }
    double& operator[](int i) { return i == 0 ? x : y; }

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double c) const { return {x * c, y * c}; }
    Vec2 operator-() const { return {-x, -y}; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double max_abs() const { return std::max(std::abs(x), std::abs(y)); }
};

inline Vec2 operator*(double c, const Vec2& v) { return v * c; }

/// 2x2 matrix, row major.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    Vec2 operator*(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }
    Mat2 operator*(const Mat2& m) const {
        return {a11 * m.a11 + a12 * m.a21, a11 * m.a12 + a12 * m.a22,
                a21 * m.a11 + a22 * m.a21, a21 * m.a12 + a22 * m.a22};
    }
    Mat2 operator+(const Mat2& m) const {
        return {a11 + m.a11, a12 + m.a12, a21 + m.a21, a22 + m.a22};
    }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    double det() const { return a11 * a22 - a12 * a21; }

    /// Solve A z = b by the adjugate; fails loudly on (numerically) singular A.
    Vec2 solve(const Vec2& b) const {
        const double d = det();
        const double scale = std::max({std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22), 1e-300});
        if (std::abs(d) < 1e-14 * scale * scale)
            throw std::runtime_error("Mat2::solve: singular matrix");
        return {(a22 * b.x - a12 * b.y) / d, (-a21 * b.x + a11 * b.y) / d};
    }
};

/// Closed interval on the real line. Used for per-asset portfolio constraints,
/// which must contain 0.
struct Interval {
    double lo;
    double hi;

    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo <= hi)) throw std::invalid_argument("Interval: lo > hi");
    }
    bool contains(double v) const { return lo <= v && v <= hi; }
    double clamp(double v) const { return std::min(hi, std::max(lo, v)); }
};

/// Axis-aligned box, the 2-D constraint set.
struct Box {
    Interval x1;
    Interval x2;
    Vec2 clamp(const Vec2& v) const { return {x1.clamp(v.x), x2.clamp(v.y)}; }
    bool contains(const Vec2& v) const { return x1.contains(v.x) && x2.contains(v.y); }
};

}  // namespace contagion
