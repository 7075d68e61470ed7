#pragma once

// Fixed-size 2x2 / 3x3 helpers. Everything the pendulum needs is tiny and
// dense, so a full linear-algebra dependency is not worth pulling in.

#include <array>
#include <cmath>
#include <complex>
#include <optional>

namespace epend {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

struct Mat2 {
    std::array<double, 4> a{1.0, 0.0, 0.0, 1.0};  // row-major

    static constexpr Mat2 identity() { return {}; }
    static constexpr Mat2 zero() { return Mat2{{0.0, 0.0, 0.0, 0.0}}; }

    constexpr double operator()(int r, int c) const { return a[2 * r + c]; }
    constexpr double& operator()(int r, int c) { return a[2 * r + c]; }

    constexpr double trace() const { return a[0] + a[3]; }
    constexpr double det() const { return a[0] * a[3] - a[1] * a[2]; }

    friend constexpr Mat2 operator*(const Mat2& x, const Mat2& y)
    {
        return Mat2{{x.a[0] * y.a[0] + x.a[1] * y.a[2], x.a[0] * y.a[1] + x.a[1] * y.a[3],
                     x.a[2] * y.a[0] + x.a[3] * y.a[2], x.a[2] * y.a[1] + x.a[3] * y.a[3]}};
    }
    friend constexpr Vec2 operator*(const Mat2& m, const Vec2& v)
    {
        return {m.a[0] * v[0] + m.a[1] * v[1], m.a[2] * v[0] + m.a[3] * v[1]};
    }
    friend constexpr Mat2 operator+(const Mat2& x, const Mat2& y)
    {
        return Mat2{{x.a[0] + y.a[0], x.a[1] + y.a[1], x.a[2] + y.a[2], x.a[3] + y.a[3]}};
    }
    friend constexpr Mat2 operator-(const Mat2& x, const Mat2& y)
    {
        return Mat2{{x.a[0] - y.a[0], x.a[1] - y.a[1], x.a[2] - y.a[2], x.a[3] - y.a[3]}};
    }
};

inline double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }
inline double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/// Frobenius norm.
inline double norm(const Mat2& m)
{
    return std::sqrt(m.a[0] * m.a[0] + m.a[1] * m.a[1] + m.a[2] * m.a[2] + m.a[3] * m.a[3]);
}

/// Returns nullopt when the matrix is exactly singular.
inline std::optional<Mat2> inverse(const Mat2& m)
{
    const double d = m.det();
    if (d == 0.0 || !std::isfinite(d)) return std::nullopt;
    return Mat2{{m.a[3] / d, -m.a[1] / d, -m.a[2] / d, m.a[0] / d}};
}

/// Eigenvalues of a real 2x2 matrix, sorted by decreasing modulus.
inline std::array<std::complex<double>, 2> eigenvalues(const Mat2& m)
{
    const double tr = m.trace();
    const double det = m.det();
    const double half = 0.5 * tr;
    const double disc = half * half - det;
    std::complex<double> l1, l2;
    if (disc >= 0.0) {
        // Stable form of the quadratic formula.
        const double s = std::sqrt(disc);
        const double big = half >= 0.0 ? half + s : half - s;
        l1 = big;
        l2 = big != 0.0 ? det / big : 0.0;
    } else {
        const double s = std::sqrt(-disc);
        l1 = {half, s};
        l2 = {half, -s};
    }
    if (std::abs(l2) > std::abs(l1)) std::swap(l1, l2);
    return {l1, l2};
}

/// Unit eigenvector for a real eigenvalue.
inline Vec2 eigenvector(const Mat2& m, double lambda)
{
    const double a = m(0, 0) - lambda, b = m(0, 1);
    const double c = m(1, 0), d = m(1, 1) - lambda;
    Vec2 v = std::hypot(a, b) >= std::hypot(c, d) ? Vec2{-b, a} : Vec2{-d, c};
    const double n = norm(v);
    if (n == 0.0) return {1.0, 0.0};
    return {v[0] / n, v[1] / n};
}

/// Solves a 3x3 system by Gaussian elimination with partial pivoting.
inline std::optional<Vec3> solve3(std::array<std::array<double, 3>, 3> A, Vec3 b)
{
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (A[piv][col] == 0.0) return std::nullopt;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = A[r][col] / A[col][col];
            for (int c = col; c < 3; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec3 x{};
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    for (double xi : x)
        if (!std::isfinite(xi)) return std::nullopt;
    return x;
}

inline Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace epend
