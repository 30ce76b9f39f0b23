#include "penaflow/scenario.hpp"

#include <cmath>
#include <numbers>

namespace penaflow {

FlowState::FlowState(const Grid& g) : grid(g)
{
    const std::size_t n = g.cell_count();
    rho.assign(n, 0.0);
    for (auto& m : mom) m.assign(n, 0.0);
}

void ScenarioConfig::validate() const
{
    grid.validate();
    fluid.validate();
    reg.validate();
    if (!(end_time >= 0.0) || !std::isfinite(end_time)) throw Error(ErrorCode::schema_violation, "end_time must be finite and >= 0");
    const double cfl_max = 1.0 / (2.0 * grid.dim);
    if (!(cfl > 0.0) || cfl > cfl_max) throw Error(ErrorCode::schema_violation, "cfl must lie in (0, 1/(2 dim)]");
    if (fixed_dt < 0.0) throw Error(ErrorCode::schema_violation, "fixed_dt must be >= 0");
    if (output_cadence < 1) throw Error(ErrorCode::schema_violation, "output_cadence must be >= 1");
    if (reinit_interval < 1) throw Error(ErrorCode::schema_violation, "reinit_interval must be >= 1");
    if (!(band_width_cells >= 1.0)) throw Error(ErrorCode::schema_violation, "band_width_cells must be >= 1");
    if (!(pressure_monitor_bands >= 0.0)) throw Error(ErrorCode::schema_violation, "pressure_monitor_bands must be >= 0");
    if (confine_initial_density && (density.kind == DensityProfile::Kind::uniform || density.kind == DensityProfile::Kind::manufactured))
        throw Error(ErrorCode::schema_violation, "density profile is not supported in the initial domain; set confine_initial_density to false");
    if ((density.kind == DensityProfile::Kind::manufactured || velocity.kind == VelocityProfile::Kind::manufactured) && !manufactured)
        throw Error(ErrorCode::schema_violation, "manufactured profiles need a manufactured solution");
    if (manufactured && grid.dim != 2) throw Error(ErrorCode::schema_violation, "manufactured solution is two-dimensional");
    if (!(density.value > 0.0)) throw Error(ErrorCode::empty_state, "initial density must be positive somewhere");

    const double vsupport = support_radius(boundary_velocity);
    if (!boundary_velocity.is_zero() && !(vsupport < grid.half_width))
        throw Error(ErrorCode::shape_outside_box, "boundary velocity must vanish near the box boundary");

    const LevelSetField d0 = init_levelset(shape, grid, band_width_cells);
    if (boundary_velocity.is_zero() || end_time == 0.0) return;

    // The moving domain must stay at least one band inside the box over [0, T].
    const double margin = d0.band_width;
    const std::vector<Vec> pts = sample_interface(d0);
    constexpr int time_samples = 16;
    for (const Vec& x0 : pts)
        for (int s = 1; s <= time_samples; ++s) {
            const Vec x = flow_map(boundary_velocity, end_time * s / time_samples, x0);
            for (int a = 0; a < grid.dim; ++a)
                if (std::abs(x[a]) > grid.half_width - margin)
                    throw Error(ErrorCode::shape_outside_box, "moving domain leaves the box before end_time");
        }
}

LevelSetField initial_levelset(const ScenarioConfig& cfg)
{
    return init_levelset(cfg.shape, cfg.grid, cfg.band_width_cells);
}

namespace {

double initial_density(const ScenarioConfig& cfg, double dv, const Vec& x)
{
    const auto& p = cfg.density;
    switch (p.kind) {
    case DensityProfile::Kind::uniform: return p.value;
    case DensityProfile::Kind::uniform_in_domain: return dv < 0.0 ? p.value : 0.0;
    case DensityProfile::Kind::smooth_in_domain: {
        if (dv >= 0.0) return 0.0;
        const double r = -dv / p.rise_width;
        return r >= 1.0 ? p.value : p.value * 0.5 * (1.0 - std::cos(std::numbers::pi * r));
    }
    case DensityProfile::Kind::manufactured: return cfg.manufactured->density(0.0, x);
    }
    return 0.0;
}

Vec initial_velocity(const ScenarioConfig& cfg, const Vec& x)
{
    const auto& p = cfg.velocity;
    switch (p.kind) {
    case VelocityProfile::Kind::zero: return {};
    case VelocityProfile::Kind::uniform: return p.vector;
    case VelocityProfile::Kind::follow_boundary: return eval_velocity(cfg.boundary_velocity, 0.0, x);
    case VelocityProfile::Kind::rotation: return Vec{-(x[1] - p.center[1]), x[0] - p.center[0], 0.0} * p.rate;
    case VelocityProfile::Kind::vortex: {
        const Vec r = x - p.center;
        const double r2 = r[0] * r[0] + r[1] * r[1];
        return Vec{-r[1], r[0], 0.0} * (p.rate * std::exp(-r2 / (p.core_radius * p.core_radius)));
    }
    case VelocityProfile::Kind::manufactured: return cfg.manufactured->velocity(0.0, x);
    }
    return {};
}

} // namespace

FlowState initial_state(const ScenarioConfig& cfg, const LevelSetField& d0)
{
    FlowState s(cfg.grid);
    const std::size_t n = cfg.grid.cell_count();
    for (std::size_t c = 0; c < n; ++c) {
        const Vec x = cfg.grid.center(c);
        const double rho = initial_density(cfg, d0.values[c], x);
        s.rho[c] = rho;
        if (rho > kRhoFloor) s.set_momentum(c, initial_velocity(cfg, x) * rho);
    }
    if (!(pairwise_sum(s.rho) > 0.0)) throw Error(ErrorCode::empty_state, "initial mass is zero");
    return s;
}

} // namespace penaflow
