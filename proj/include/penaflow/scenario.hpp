#pragma once

#include <optional>
#include <string>
#include <vector>

#include "penaflow/constitutive.hpp"
#include "penaflow/grid.hpp"
#include "penaflow/levelset.hpp"
#include "penaflow/manufactured.hpp"
#include "penaflow/velocity_field.hpp"

namespace penaflow {

inline constexpr double kRhoFloor = 1e-12;

/// Conserved fields on the grid at one time level.
struct FlowState {
    Grid grid;
    std::vector<double> rho;
    std::array<std::vector<double>, 3> mom; ///< only the first grid.dim components are used
    double time = 0.0;

    FlowState() = default;
    explicit FlowState(const Grid& g);

    /// u = m / rho, zero in vacuum cells (rho <= rho_floor).
    [[nodiscard]] Vec velocity(std::size_t c) const noexcept
    {
        if (!(rho[c] > kRhoFloor)) return {};
        Vec u{};
        for (int a = 0; a < grid.dim; ++a) u[a] = mom[a][c] / rho[c];
        return u;
    }
    [[nodiscard]] Vec momentum(std::size_t c) const noexcept
    {
        Vec m{};
        for (int a = 0; a < grid.dim; ++a) m[a] = mom[a][c];
        return m;
    }
    void set_momentum(std::size_t c, const Vec& m) noexcept
    {
        for (int a = 0; a < grid.dim; ++a) mom[a][c] = m[a];
    }
};

struct DensityProfile {
    enum class Kind { uniform_in_domain, uniform, smooth_in_domain, manufactured };
    Kind kind = Kind::uniform_in_domain;
    double value = 1.0;
    double rise_width = 0.1; ///< smooth_in_domain: depth over which rho rises from 0 to value
};

struct VelocityProfile {
    enum class Kind { zero, uniform, follow_boundary, rotation, vortex, manufactured };
    Kind kind = Kind::zero;
    Vec vector{};
    Vec center{};
    double rate = 0.0;        ///< rotation rate or vortex strength
    double core_radius = 0.2; ///< vortex core
};

/// Complete problem description.
struct ScenarioConfig {
    std::string name = "custom";
    Grid grid{2, 64, 1.0};
    Shape shape = Shape::disk({0, 0, 0}, 0.5);
    double band_width_cells = 3.0;
    FluidParams fluid;
    RegularizationParams reg;
    DensityProfile density;
    VelocityProfile velocity;
    VelocityFieldSpec boundary_velocity;
    double end_time = 0.1;
    double cfl = 0.2;
    double fixed_dt = 0.0;      ///< > 0 overrides the adaptive step (checked against stability every step)
    int output_cadence = 10;    ///< steps between diagnostics rows / snapshots
    int reinit_interval = 10;
    AdvectionScheme levelset_scheme = AdvectionScheme::upwind1;
    bool confine_initial_density = true; ///< require rho_0 = 0 outside the initial domain
    std::optional<ManufacturedSolution> manufactured;
    double pressure_monitor_bands = 5.0; ///< local pressure monitor uses |d| > this * band width

    void validate() const;
};

LevelSetField initial_levelset(const ScenarioConfig& cfg);
FlowState initial_state(const ScenarioConfig& cfg, const LevelSetField& d0);

} // namespace penaflow
