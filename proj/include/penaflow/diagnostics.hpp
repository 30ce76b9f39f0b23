#pragma once

#include "penaflow/scenario.hpp"
#include "penaflow/stencil.hpp"

namespace penaflow {

/// One diagnostics row. Cumulative entries are time integrals from t = 0.
struct DiagnosticsRecord {
    double time = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double dissipation_cum = 0.0;
    double penalty_cum = 0.0;  ///< integral of |(u - V) . n|^2 over the interface, without the 1/eps factor
    double solid_mass = 0.0;
    double h1_sq = 0.0;
    double max_rho = 0.0;
    double clipped_mass = 0.0; ///< cumulative mass added by the vacuum floor
    double local_pressure = 0.0;
};

/// Velocity reconstruction m / rho (zero in vacuum cells).
CellVectors cell_velocities(const FlowState& s);

double total_mass(const FlowState& s);
/// Sum of 1/2 rho |u|^2 + P(rho) + delta/(beta-1) rho^beta.
double total_energy(const FlowState& s, const FluidParams& fp, const RegularizationParams& rp);
/// The artificial-pressure part delta/(beta-1) sum rho^beta.
double artificial_energy(const FlowState& s, const RegularizationParams& rp);
double max_density(const FlowState& s);

/// dt * sum 1/2 mu_omega |F(grad u)|^2 (+ eta (div u)^2) on the viscous face stencil.
double dissipation_increment(const FlowState& s, const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp, double dt);
DissipationSplit dissipation_split(const FlowState& s, const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp, double dt);

/// Energy removed by one implicit penalty update of the normal mismatch e_pre -> e_post, per unit delta dt / eps.
inline double penalty_energy(double e_pre, double e_post) noexcept { return 0.5 * e_post * (e_post + e_pre); }

/// dt * sum |(u - V) . n|^2 delta_Gamma h^dim over band cells, V taken at the state time.
double penalty_increment(const FlowState& s, const LevelSetField& d, const VelocityFieldSpec& v, double dt);
/// Same functional evaluated across an implicit penalty update (before -> after), which is the
/// energy actually removed by the update times eps.
double penalty_increment(const FlowState& before, const FlowState& after, const LevelSetField& d, const VelocityFieldSpec& v, double dt);

/// Mass in cells with d > 0.
double solid_mass(const FlowState& s, const LevelSetField& d);
/// sum (|u|^2 + |grad u|^2) h^dim over cells with d < 0.
double h1_velocity_sq(const FlowState& s, const LevelSetField& d);
/// sum (p(rho) rho^nu + delta rho^(beta + nu)) h^dim over cells with |d| > bands * band width.
double local_pressure_integral(const FlowState& s, const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp,
                               double bands = 5.0, double nu = 1.0);
/// Delta-weighted RMS of (u - V) . n over the band.
double slip_rms(const FlowState& s, const LevelSetField& d, const VelocityFieldSpec& v);

} // namespace penaflow
