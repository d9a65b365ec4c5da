#pragma once

// 2x2 real matrices with the closed-form spectral norm used throughout.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cclab {

struct Vec2 {
    double x = 0.0, y = 0.0;
    double norm() const { return std::hypot(x, y); }
};

struct Mat2 {
    // row-major entries: [a b; c d]
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static Mat2 identity() { return Mat2{1, 0, 0, 1}; }
    static Mat2 diag(double u, double v) { return Mat2{u, 0, 0, v}; }
    static Mat2 rotation(double t) {
        return Mat2{std::cos(t), -std::sin(t), std::sin(t), std::cos(t)};
    }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }

    Mat2 inverse() const {
        double dt = det();
        if (std::abs(dt) < 1e-300)
            throw std::runtime_error("Mat2::inverse: singular matrix");
        return Mat2{d / dt, -b / dt, -c / dt, a / dt};
    }

    Vec2 apply(const Vec2& v) const { return Vec2{a * v.x + b * v.y, c * v.x + d * v.y}; }

    Mat2 operator*(const Mat2& o) const {
        return Mat2{a * o.a + b * o.c, a * o.b + b * o.d,
                    c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator-(const Mat2& o) const { return Mat2{a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2 operator+(const Mat2& o) const { return Mat2{a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 scaled(double s) const { return Mat2{a * s, b * s, c * s, d * s}; }

    // Largest singular value (spectral norm), closed form for 2x2.
    double norm() const {
        double f = a * a + b * b + c * c + d * d;          // ||M||_F^2
        double dt = det();
        double disc = f * f - 4.0 * dt * dt;
        if (disc < 0) disc = 0;
        return std::sqrt(0.5 * (f + std::sqrt(disc)));
    }
    // Smallest singular value: |det| / (largest singular value), which avoids
    // the catastrophic cancellation of f - sqrt(f^2 - 4 det^2) for
    // ill-conditioned matrices
    double conorm() const {
        double n = norm();
        return n > 0 ? std::abs(det()) / n : 0.0;
    }

    // Spectral radius of the matrix itself (for periodic-orbit exponents).
    double spectral_radius() const {
        double t = trace(), dt = det();
        double disc = t * t / 4.0 - dt;
        if (disc >= 0) {
            double r = std::sqrt(disc);
            return std::max(std::abs(t / 2.0 + r), std::abs(t / 2.0 - r));
        }
        return std::sqrt(dt); // complex pair, |eig| = sqrt(det)
    }
};

inline double mat_dist(const Mat2& m, const Mat2& n) { return (m - n).norm(); }

} // namespace cclab
