#pragma once

#include <array>
#include <vector>

#include "penaflow/grid.hpp"

namespace penaflow {

/// Cell-centred geometric multigrid for the scalar operator
///   (A u)_c = m_c u_c + sum_faces t_f (u_c - u_nb),   u = 0 beyond the box walls,
/// used as a symmetric preconditioner (one V-cycle with red-black Gauss-Seidel smoothing).
class ScalarMultigrid {
public:
    /// mass: m_c per cell; mu: viscosity per cell (face transmissibility mean(mu) h^(dim-2)).
    void setup(const Grid& g, const std::vector<double>& mass, const std::vector<double>& mu);

    /// z ~= A^{-1} r by one V-cycle from z = 0.
    void vcycle(const std::vector<double>& r, std::vector<double>& z) const;

    /// Apply the finest-level operator (for tests).
    void apply(const std::vector<double>& u, std::vector<double>& out) const;

    [[nodiscard]] int levels() const noexcept { return static_cast<int>(levels_.size()); }

private:
    struct Level {
        int n = 0;
        int dim = 2;
        std::vector<double> m;
        std::array<std::vector<double>, 3> tp; ///< face to the +axis neighbour (wall when at the boundary)
        std::array<std::vector<double>, 3> tw; ///< wall face on the -axis side (boundary cells only)
        std::vector<double> diag;
        mutable std::vector<double> u, r, tmp;
        [[nodiscard]] std::size_t cells() const noexcept
        {
            const auto k = static_cast<std::size_t>(n);
            return dim == 2 ? k * k : k * k * k;
        }
    };

    void smooth(const Level& L, int color) const;
    void residual(const Level& L) const;
    void cycle(std::size_t l) const;
    void finalize(Level& L) const;

    std::vector<Level> levels_;
};

} // namespace penaflow
