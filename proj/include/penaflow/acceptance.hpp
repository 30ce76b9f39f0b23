#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "penaflow/harness.hpp"
#include "penaflow/io.hpp"

namespace penaflow {

/// Thresholds of the acceptance suite. Runtime limits are in seconds.
struct Tolerances {
    double rest_deviation = 1e-12;
    double mass_drift = 1e-11;
    double energy_slack = 1e-8;       ///< relative to E(0)
    double driven_slack_rate = 1e-6;  ///< relative to E(0), per unit time
    double slope_min = 0.8;
    double slope_max = 1.2;
    double ratio_spread = 10.0;       ///< max/min of penalty/eps across the sweep
    double solid_mass_ratio = 1e-2;
    double slip_factor = 10.0;
    double fluid_uniformity = 0.1;
    double residual_ratio = 1.5;
    double order_min = 0.8;
    double levelset_constant = 3.0;
    double normal_trace = 1e-6;
    double divergence_constant = 3.0;

    double runtime_rest = 10.0;
    double runtime_run = 120.0;
    double runtime_sweep = 600.0;
    double runtime_residuals = 300.0;
    double runtime_order = 180.0;
    double runtime_geometry = 60.0;

    /// End time of the epsilon sweep runs (translating disk).
    double epsilon_sweep_time = 2.3;
};

/// Reads {"schema_version": 1, "tolerances": {...}, "criteria": [...]}; omitted tolerances keep defaults.
struct VerifyRequest {
    Tolerances tolerances;
    std::vector<int> criteria; ///< empty means all
};
VerifyRequest parse_verify_request(const json& doc);
json to_json(const Tolerances& t);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    std::string detail;

    [[nodiscard]] std::string line() const;
};

inline constexpr int kCriterionCount = 12;

class AcceptanceSuite {
public:
    explicit AcceptanceSuite(Tolerances tol = {}, std::optional<std::filesystem::path> cache_dir = std::nullopt);

    /// Runs one criterion (1..12). Failures of the underlying runs are reported as a failed criterion.
    CriterionResult run(int id);

    [[nodiscard]] static std::string name(int id);

private:
    CriterionResult rest_state();
    CriterionResult mass_conservation();
    CriterionResult energy_inequality();
    CriterionResult driven_ledger();
    CriterionResult penalty_decay();
    CriterionResult density_confinement();
    CriterionResult slip_recovery();
    CriterionResult omega_limit();
    CriterionResult delta_limit();
    CriterionResult weak_residuals();
    CriterionResult manufactured_order();
    CriterionResult geometry_kernel();

    /// The epsilon sweep shared by criteria 5 to 7, computed once and cached on disk when configured.
    const SweepReport& epsilon_sweep(double& seconds);

    Tolerances tol_;
    std::optional<std::filesystem::path> cache_dir_;
    std::optional<SweepReport> eps_;
    double eps_seconds_ = 0.0;
};

} // namespace penaflow
