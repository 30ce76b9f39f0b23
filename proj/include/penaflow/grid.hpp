#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "penaflow/error.hpp"
#include "penaflow/vec.hpp"

namespace penaflow {

/// Uniform cell-centred Cartesian grid on the reference box [-L, L]^dim.
struct Grid {
    int dim = 2;
    int n = 64;          ///< cells per axis
    double half_width = 1.0; ///< L

    Grid() = default;
    Grid(int dim_, int n_, double half_width_) : dim(dim_), n(n_), half_width(half_width_) { validate(); }

    void validate() const
    {
        if (dim != 2 && dim != 3) throw Error(ErrorCode::invalid_argument, "grid dim must be 2 or 3");
        if (n < 4) throw Error(ErrorCode::invalid_argument, "grid needs at least 4 cells per axis");
        if (!(half_width > 0.0)) throw Error(ErrorCode::invalid_argument, "box half-width must be positive");
    }

    [[nodiscard]] double spacing() const noexcept { return 2.0 * half_width / n; }
    [[nodiscard]] double cell_volume() const noexcept
    {
        const double h = spacing();
        return dim == 2 ? h * h : h * h * h;
    }
    [[nodiscard]] std::size_t cell_count() const noexcept
    {
        const auto m = static_cast<std::size_t>(n);
        return dim == 2 ? m * m : m * m * m;
    }
    [[nodiscard]] int nz() const noexcept { return dim == 2 ? 1 : n; }

    [[nodiscard]] std::size_t index(int i, int j, int k = 0) const noexcept
    {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
    }
    [[nodiscard]] std::array<int, 3> ijk(std::size_t c) const noexcept
    {
        const auto m = static_cast<std::size_t>(n);
        return {static_cast<int>(c % m), static_cast<int>((c / m) % m), static_cast<int>(c / (m * m))};
    }
    [[nodiscard]] double coord(int i) const noexcept { return -half_width + (i + 0.5) * spacing(); }
    [[nodiscard]] Vec center(std::size_t c) const noexcept
    {
        const auto [i, j, k] = ijk(c);
        return {coord(i), coord(j), dim == 3 ? coord(k) : 0.0};
    }
    /// Neighbour along `axis` at offset +-1, or -1 when it would leave the box.
    [[nodiscard]] long neighbor(std::size_t c, int axis, int offset) const noexcept
    {
        auto idx = ijk(c);
        idx[axis] += offset;
        if (idx[axis] < 0 || idx[axis] >= n) return -1;
        return static_cast<long>(index(idx[0], idx[1], idx[2]));
    }
    [[nodiscard]] bool contains(const Vec& x) const noexcept
    {
        for (int a = 0; a < dim; ++a)
            if (x[a] <= -half_width || x[a] >= half_width) return false;
        return true;
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Deterministic pairwise summation; the result is independent of thread count.
inline double pairwise_sum(std::span<const double> v)
{
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t mid = v.size() / 2;
    return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

} // namespace penaflow
