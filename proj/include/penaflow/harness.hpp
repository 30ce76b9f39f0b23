#pragma once

#include <map>
#include <string>
#include <vector>

#include "penaflow/solver.hpp"

namespace penaflow {

/// Named scenarios: rest_disk, translating_disk, rotating_ellipse, squeezing_box, decay_disk,
/// smooth_vortex and manufactured.
std::vector<ScenarioConfig> scenario_library();
ScenarioConfig scenario(const std::string& name);

struct SweepRun {
    double value = 0.0;
    std::map<std::string, double> metrics;
    std::vector<DiagnosticsRecord> records;
    int steps = 0;
};

struct SweepReport {
    std::string parameter;
    std::vector<double> values;
    std::vector<SweepRun> runs;
    std::string fitted_metric;          ///< metric used for the log-log fit
    double slope = 0.0;                 ///< NaN when fewer than two values
    double slope_residual = 0.0;        ///< RMS residual of the log-log fit
    std::map<std::string, bool> checks; ///< named acceptance rules
    std::string verdict;                ///< "pass", "fail" or "insufficient"
    double dt = 0.0;                    ///< fixed step shared by every run

    [[nodiscard]] std::vector<double> series(const std::string& metric) const;
};

/// Least-squares slope of log(y) against log(x); returns {slope, rms residual}.
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Called after each run of a sweep (for per-run CSV output).
using SweepRunHook = std::function<void(const std::string& parameter, const SweepRun&)>;

SweepReport sweep_epsilon(const ScenarioConfig& cfg, const std::vector<double>& values, const SweepRunHook& hook = {});
SweepReport sweep_omega(const ScenarioConfig& cfg, const std::vector<double>& values, const SweepRunHook& hook = {});
SweepReport sweep_delta(const ScenarioConfig& cfg, const std::vector<double>& values, const SweepRunHook& hook = {});
SweepReport sweep(const ScenarioConfig& cfg, const std::string& parameter, const std::vector<double>& values, const SweepRunHook& hook = {});

struct OrderReport {
    int n_coarse = 0, n_fine = 0;
    double rho_error_coarse = 0.0, rho_error_fine = 0.0;
    double mom_error_coarse = 0.0, mom_error_fine = 0.0;
    double rho_order = 0.0, mom_order = 0.0;
};

/// L1 errors against the manufactured solution at end_time on two grids and the observed orders.
OrderReport manufactured_order_test(const ScenarioConfig& cfg, int n_coarse = 64, int n_fine = 128);
/// L1 density and momentum errors of a single manufactured run (optionally with a fixed dt).
std::pair<double, double> manufactured_errors(const ScenarioConfig& cfg);

} // namespace penaflow
