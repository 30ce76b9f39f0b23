#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "penaflow/diagnostics.hpp"
#include "penaflow/multigrid.hpp"
#include "penaflow/scenario.hpp"
#include "penaflow/stencil.hpp"

namespace penaflow {

/// Explicit rates of the conservative (convective, pressure, body force, manufactured source) part.
struct HyperbolicRates {
    std::vector<double> rho;
    CellVectors mom;
};

/// Rusanov fluxes with wave speed |u| + c_s, no-slip reflecting walls on the box faces.
void hyperbolic_rhs(const FlowState& s, const FluidParams& fp, const RegularizationParams& rp, double t,
                    const ManufacturedSolution* mms, HyperbolicRates& out);

/// -div F for the mass flux; sums to zero over the box.
std::vector<double> continuity_rhs(const FlowState& s, const FluidParams& fp, const RegularizationParams& rp);

/// Full explicit momentum rate: convective/pressure flux, viscous face stencil, body force, penalty and friction.
CellVectors momentum_rhs(const FlowState& s, const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp,
                         const VelocityFieldSpec& v, double t);

/// (1/eps) ((V - u) . n) n delta.
Vec penalty_force(const Vec& u, const Vec& v, const Vec& n, double delta, const RegularizationParams& rp);
/// -kappa ((u - V) - ((u - V) . n) n) delta.
Vec friction_force(const Vec& u, const Vec& v, const Vec& n, double delta, const FluidParams& fp);

/// cfl * h / max(|u| + c_s). Viscosity, friction and penalty are implicit and do not restrict dt.
double stable_dt(const FlowState& s, const FluidParams& fp, const RegularizationParams& rp, double cfl);

/// Per-step bookkeeping returned by Stepper::step.
struct StepReport {
    double dt = 0.0;
    DissipationSplit dissipation;   ///< dt * viscous dissipation of the post-viscous velocity
    double friction = 0.0;          ///< energy removed by the implicit friction update
    double penalty = 0.0;           ///< penalty functional increment (energy removed times eps)
    double clipped_mass = 0.0;
    double source_mass = 0.0;       ///< mass added by manufactured sources
    // work of the boundary velocity field, as it enters the driven energy balance
    double hyperbolic_work = 0.0;   ///< dt * (convective + pressure + body force rates) tested with V
    double viscous_work = 0.0;      ///< dt * a(u, V)
    double unsteady_work = 0.0;     ///< sum m^n . (V^{n+1} - V^n) h^dim
    int viscous_iterations = 0;
    bool reinitialized = false;
};

/// Owns the workspace and advances (state, level set) pairs for one configuration.
class Stepper {
public:
    explicit Stepper(ScenarioConfig cfg);

    [[nodiscard]] const ScenarioConfig& config() const noexcept { return cfg_; }

    /// Adaptive step including the boundary-velocity transport bound.
    [[nodiscard]] double stable_dt(const FlowState& s) const;

    /// SSP-RK2 conservative step, implicit viscous step, implicit penalty/friction, vacuum clipping,
    /// then level-set transport by the same dt.
    StepReport step(FlowState& s, LevelSetField& d, double dt);

    /// Velocity produced by the last implicit viscous step (defined in vacuum cells too).
    [[nodiscard]] const CellVectors& last_velocity() const noexcept { return u_prev_; }

    /// Boundary velocity sampled at cell centres at time t.
    [[nodiscard]] CellVectors boundary_velocity_cells(double t) const;

private:
    void viscous_solve(const FlowState& s, const ViscousOperator& op, CellVectors& u, StepReport& rep);

    ScenarioConfig cfg_;
    const ManufacturedSolution* mms_ = nullptr;
    long steps_ = 0;
    bool driven_ = false;
    HyperbolicRates r0_, r1_;
    FlowState stage_;
    CellVectors u_prev_, ustar_, res_, z_, p_, ap_;
    ScalarMultigrid mg_;
};

/// Convenience wrapper: one step on copies of the inputs, returning the new flow state.
FlowState step(const FlowState& s, const LevelSetField& d, const ScenarioConfig& cfg, double dt);

/// Per-step energy balance terms, cumulative from t = 0.
struct LedgerRow {
    double time = 0.0;
    double energy = 0.0;
    double dissipation_cum = 0.0;  ///< viscous + friction
    double penalty_cum = 0.0;      ///< without the 1/eps factor
    double work_cum = 0.0;         ///< viscous_work - unsteady_work - hyperbolic_work, summed
    double momentum_v = 0.0;       ///< sum m . V h^dim at this time
};

struct RunOptions {
    bool keep_snapshots = true;
    /// Called with each output snapshot (step 0, every cadence steps, and the final step).
    std::function<void(const FlowState&, const LevelSetField&)> on_snapshot;
    /// Called after every step with the viscous-step velocity field.
    std::function<void(const FlowState&, const LevelSetField&, const StepReport&, const CellVectors&)> on_step;
};

struct RunResult {
    std::vector<FlowState> snapshots;
    std::vector<LevelSetField> levelsets;
    std::vector<DiagnosticsRecord> records;
    std::vector<LedgerRow> ledger;
    DissipationSplit dissipation_cum;
    int steps = 0;
    double last_dt = 0.0;
    int max_viscous_iterations = 0;
};

RunResult run(const ScenarioConfig& cfg, const RunOptions& opt = {});

/// Largest dt admissible for the configuration's initial data (used to fix dt across a sweep).
double initial_stable_dt(const ScenarioConfig& cfg);

} // namespace penaflow
