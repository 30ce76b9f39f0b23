#pragma once

#include <array>
#include <cmath>

namespace penaflow {

/// Point or vector in up to three dimensions. Unused trailing components stay zero in 2-D.
using Vec = std::array<double, 3>;

/// Row-major 3x3 tensor; entry [i][j] is d(u_i)/d(x_j) for velocity gradients.
using Tensor = std::array<std::array<double, 3>, 3>;

inline constexpr Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline constexpr Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline constexpr Vec operator-(const Vec& a) { return {-a[0], -a[1], -a[2]}; }
inline constexpr Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline constexpr Vec operator*(const Vec& a, double s) { return s * a; }
inline constexpr Vec& operator+=(Vec& a, const Vec& b)
{
    a[0] += b[0];
    a[1] += b[1];
    a[2] += b[2];
    return a;
}
inline constexpr Vec& operator-=(Vec& a, const Vec& b)
{
    a[0] -= b[0];
    a[1] -= b[1];
    a[2] -= b[2];
    return a;
}

inline constexpr double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline constexpr Tensor zero_tensor() { return {}; }

inline constexpr double trace(const Tensor& t, int dim)
{
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += t[i][i];
    return s;
}

inline constexpr double contract(const Tensor& a, const Tensor& b)
{
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += a[i][j] * b[i][j];
    return s;
}

} // namespace penaflow
