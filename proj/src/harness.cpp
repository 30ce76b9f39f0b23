#include "penaflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace penaflow {

std::vector<ScenarioConfig> scenario_library()
{
    std::vector<ScenarioConfig> lib;

    {
        ScenarioConfig c;
        c.name = "rest_disk";
        c.grid = Grid(2, 64, 1.0);
        c.shape = Shape::disk({0, 0, 0}, 0.5);
        c.density = {DensityProfile::Kind::uniform, 1.0};
        c.confine_initial_density = false;
        c.end_time = 1.0;
        lib.push_back(c);
    }
    {
        ScenarioConfig c;
        c.name = "translating_disk";
        c.grid = Grid(2, 128, 1.0);
        c.shape = Shape::disk({-0.2, 0, 0}, 0.35);
        c.boundary_velocity = VelocityFieldSpec::translation({0.15, 0, 0}, 0.95, 0.2);
        c.velocity.kind = VelocityProfile::Kind::follow_boundary;
        c.end_time = 2.3;
        c.output_cadence = 20;
        lib.push_back(c);
    }
    {
        ScenarioConfig c;
        c.name = "rotating_ellipse";
        c.grid = Grid(2, 64, 1.0);
        c.shape = Shape::ellipse({0, 0, 0}, {0.45, 0.25, 0}, 0.0);
        c.boundary_velocity = VelocityFieldSpec::rotation({0, 0, 0}, 1.0, 0.9, 0.2);
        c.velocity.kind = VelocityProfile::Kind::follow_boundary;
        c.levelset_scheme = AdvectionScheme::weno5;
        c.end_time = 1.0;
        lib.push_back(c);
    }
    {
        ScenarioConfig c;
        c.name = "squeezing_box";
        c.grid = Grid(2, 64, 1.0);
        c.shape = Shape::box({-0.35, -0.35, 0}, {0.35, 0.35, 0});
        Tensor a{};
        a[0][0] = a[1][1] = -0.2;
        c.boundary_velocity = VelocityFieldSpec::strain(a, {0, 0, 0}, 0.8, 0.2);
        c.velocity.kind = VelocityProfile::Kind::follow_boundary;
        c.end_time = 0.5;
        lib.push_back(c);
    }
    {
        ScenarioConfig c;
        c.name = "decay_disk";
        c.grid = Grid(2, 128, 1.0);
        c.shape = Shape::disk({0, 0, 0}, 0.5);
        c.velocity = {VelocityProfile::Kind::vortex, {}, {0, 0, 0}, 2.0, 0.25};
        c.end_time = 0.5;
        c.output_cadence = 5;
        lib.push_back(c);
    }
    {
        ScenarioConfig c;
        c.name = "smooth_vortex";
        c.grid = Grid(2, 64, 1.0);
        c.shape = Shape::disk({0, 0, 0}, 0.6);
        c.density = {DensityProfile::Kind::uniform, 1.0};
        c.confine_initial_density = false;
        c.velocity = {VelocityProfile::Kind::vortex, {}, {0, 0, 0}, 1.0, 0.2};
        c.end_time = 0.1;
        c.output_cadence = 1;
        lib.push_back(c);
    }
    {
        ScenarioConfig c;
        c.name = "manufactured";
        c.grid = Grid(2, 64, 1.0);
        c.shape = Shape::disk({0, 0, 0}, 0.9);
        c.manufactured = ManufacturedSolution{};
        c.manufactured->support_radius = 0.75;
        c.density.kind = DensityProfile::Kind::manufactured;
        c.velocity.kind = VelocityProfile::Kind::manufactured;
        c.confine_initial_density = false;
        c.end_time = 0.25;
        c.output_cadence = 50;
        lib.push_back(c);
    }
    return lib;
}

ScenarioConfig scenario(const std::string& name)
{
    for (auto& c : scenario_library())
        if (c.name == name) return c;
    throw Error(ErrorCode::invalid_argument, "unknown scenario '" + name + "'");
}

std::vector<double> SweepReport::series(const std::string& metric) const
{
    std::vector<double> out;
    for (const auto& r : runs) {
        auto it = r.metrics.find(metric);
        out.push_back(it == r.metrics.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
    }
    return out;
}

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return {nan, nan};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return {nan, nan};
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return {nan, nan};
    const double slope = (n * sxy - sx * sy) / den;
    const double icept = (sy - slope * sx) / n;
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ly[i] - (icept + slope * lx[i]);
        r2 += e * e;
    }
    return {slope, std::sqrt(r2 / n)};
}

namespace {

void check_values(const std::vector<double>& values, double lower)
{
    if (values.empty()) throw Error(ErrorCode::invalid_argument, "sweep needs at least one value");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= lower)) throw Error(ErrorCode::invalid_argument, "sweep value below the admissible range");
        if (i > 0 && !(values[i] < values[i - 1])) throw Error(ErrorCode::invalid_argument, "sweep values must be strictly decreasing");
    }
}

bool nonincreasing(const std::vector<double>& v, double rel_slack = 0.0)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] * (1.0 + rel_slack) + 1e-300) return false;
    return true;
}

bool strictly_decreasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

struct RunCapture {
    FlowState final_state;
    LevelSetField final_levelset;
    RunResult result;
};

RunCapture run_capture(const ScenarioConfig& cfg, const RunOptions& base = {})
{
    RunCapture cap;
    RunOptions opt = base;
    opt.keep_snapshots = false;
    auto user = base.on_snapshot;
    opt.on_snapshot = [&](const FlowState& s, const LevelSetField& d) {
        cap.final_state = s;
        cap.final_levelset = d;
        if (user) user(s, d);
    };
    cap.result = run(cfg, opt);
    return cap;
}

// Common fixed step for all members of a sweep.
double common_dt(const std::vector<ScenarioConfig>& cfgs)
{
    double dt = std::numeric_limits<double>::infinity();
    for (const auto& c : cfgs) dt = std::min(dt, initial_stable_dt(c));
    return 0.8 * dt;
}

void finish(SweepReport& rep, const std::string& fitted)
{
    rep.fitted_metric = fitted;
    auto [slope, res] = loglog_fit(rep.values, rep.series(fitted));
    rep.slope = slope;
    rep.slope_residual = res;
    if (rep.values.size() < 3) {
        rep.verdict = "insufficient";
        return;
    }
    bool ok = true;
    for (const auto& [name, pass] : rep.checks) ok = ok && pass;
    rep.verdict = ok ? "pass" : "fail";
}

// Tangential test field about the (moving) disk centre, cut off smoothly at radius r1.
CellVectors swirl_test_field(const ScenarioConfig& cfg, double t)
{
    const Grid& g = cfg.grid;
    CellVectors v = make_cell_vectors(g);
    const Vec c = flow_map(cfg.boundary_velocity, t, cfg.shape.center);
    const double r1 = cfg.shape.kind == Shape::Kind::disk ? cfg.shape.radius + 0.3 : 0.7;
    for (std::size_t k = 0; k < g.cell_count(); ++k) {
        const Vec x = g.center(k) - c;
        const double r = std::hypot(x[0], x[1]);
        if (r >= r1) continue;
        const double q = 1.0 - (r / r1) * (r / r1);
        const double psi = q * q * q;
        v[0][k] = -x[1] * psi;
        v[1][k] = x[0] * psi;
    }
    return v;
}

} // namespace

SweepReport sweep_epsilon(const ScenarioConfig& cfg, const std::vector<double>& values, const SweepRunHook& hook)
{
    check_values(values, 1e-6);
    SweepReport rep;
    rep.parameter = "epsilon";
    rep.values = values;
    std::vector<ScenarioConfig> cfgs;
    for (double v : values) {
        ScenarioConfig c = cfg;
        c.reg.epsilon = v;
        cfgs.push_back(c);
    }
    rep.dt = common_dt(cfgs);
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        cfgs[i].fixed_dt = rep.dt;
        RunCapture cap;
        try {
            cap = run_capture(cfgs[i]);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " [epsilon = " + std::to_string(values[i]) + "]");
        }
        const DiagnosticsRecord& last = cap.result.records.back();
        SweepRun r;
        r.value = values[i];
        r.steps = cap.result.steps;
        r.records = cap.result.records;
        r.metrics["penalty"] = last.penalty_cum;
        r.metrics["penalty_over_eps"] = last.penalty_cum / values[i];
        r.metrics["solid_mass_ratio"] = last.solid_mass / last.mass;
        r.metrics["slip_rms"] = slip_rms(cap.final_state, cap.final_levelset, cfg.boundary_velocity);
        if (hook) hook(rep.parameter, r);
        rep.runs.push_back(std::move(r));
    }
    const auto ratio = rep.series("penalty_over_eps");
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    rep.checks["penalty_monotone"] = nonincreasing(rep.series("penalty"));
    rep.checks["solid_mass_monotone"] = nonincreasing(rep.series("solid_mass_ratio"));
    rep.checks["slip_monotone"] = nonincreasing(rep.series("slip_rms"));
    rep.checks["penalty_over_eps_bounded"] = *hi <= 10.0 * *lo;
    finish(rep, "penalty");
    rep.checks["slope_in_range"] = rep.slope >= 0.8 && rep.slope <= 1.2;
    if (rep.verdict != "insufficient") rep.verdict = rep.checks["slope_in_range"] && rep.verdict == "pass" ? "pass" : "fail";
    return rep;
}

SweepReport sweep_omega(const ScenarioConfig& cfg, const std::vector<double>& values, const SweepRunHook& hook)
{
    check_values(values, 1e-6);
    for (double v : values)
        if (v > 1.0) throw Error(ErrorCode::invalid_argument, "omega must not exceed 1");
    SweepReport rep;
    rep.parameter = "omega";
    rep.values = values;
    std::vector<ScenarioConfig> cfgs;
    for (double v : values) {
        ScenarioConfig c = cfg;
        c.reg.omega = v;
        cfgs.push_back(c);
    }
    rep.dt = common_dt(cfgs);
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        cfgs[i].fixed_dt = rep.dt;
        double work = 0.0;
        RunOptions opt;
        opt.on_step = [&](const FlowState& s, const LevelSetField& d, const StepReport& sr, const CellVectors& u) {
            const ViscousOperator op(s.grid, viscosity_cells(d, cfgs[i].fluid, cfgs[i].reg), cfgs[i].fluid.eta);
            work += sr.dt * op.form_split(u, swirl_test_field(cfgs[i], s.time), &d.values).solid;
        };
        RunCapture cap;
        try {
            cap = run_capture(cfgs[i], opt);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " [omega = " + std::to_string(values[i]) + "]");
        }
        SweepRun r;
        r.value = values[i];
        r.steps = cap.result.steps;
        r.records = cap.result.records;
        r.metrics["solid_dissipation"] = cap.result.dissipation_cum.solid;
        r.metrics["fluid_dissipation"] = cap.result.dissipation_cum.fluid;
        r.metrics["solid_stress_work"] = std::abs(work);
        if (hook) hook(rep.parameter, r);
        rep.runs.push_back(std::move(r));
    }
    const auto fluid = rep.series("fluid_dissipation");
    const auto [lo, hi] = std::minmax_element(fluid.begin(), fluid.end());
    rep.checks["solid_dissipation_decreasing"] = strictly_decreasing(rep.series("solid_dissipation"));
    rep.checks["solid_stress_work_decreasing"] = nonincreasing(rep.series("solid_stress_work"));
    rep.checks["fluid_dissipation_uniform"] = *hi - *lo <= 0.1 * *hi;
    finish(rep, "solid_dissipation");
    return rep;
}

SweepReport sweep_delta(const ScenarioConfig& cfg, const std::vector<double>& values, const SweepRunHook& hook)
{
    check_values(values, 0.0);
    SweepReport rep;
    rep.parameter = "delta";
    rep.values = values;
    std::vector<ScenarioConfig> cfgs;
    for (double v : values) {
        ScenarioConfig c = cfg;
        c.reg.delta = v;
        cfgs.push_back(c);
    }
    rep.dt = common_dt(cfgs);
    std::vector<double> prev_rho;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        cfgs[i].fixed_dt = rep.dt;
        RunCapture cap;
        try {
            cap = run_capture(cfgs[i]);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " [delta = " + std::to_string(values[i]) + "]");
        }
        const FlowState& s = cap.final_state;
        FluidParams fp = cfgs[i].fluid;
        const double art = artificial_energy(s, cfgs[i].reg);
        // kinetic + a rho^gamma/(gamma-1): the positive part of the physical energy
        std::vector<double> e(s.rho.size());
        for (std::size_t c = 0; c < e.size(); ++c) {
            const double rho = std::max(s.rho[c], 0.0);
            const Vec u = s.velocity(c);
            e[c] = 0.5 * rho * dot(u, u) + fp.a * std::pow(rho, fp.gamma) / (fp.gamma - 1.0);
        }
        const double phys = pairwise_sum(e) * s.grid.cell_volume();
        SweepRun r;
        r.value = values[i];
        r.steps = cap.result.steps;
        r.records = cap.result.records;
        r.metrics["delta_energy_share"] = art / (phys + art);
        if (!prev_rho.empty()) {
            std::vector<double> diff(s.rho.size());
            for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = std::abs(s.rho[c] - prev_rho[c]);
            r.metrics["l1_difference"] = pairwise_sum(diff) * s.grid.cell_volume();
        }
        prev_rho = s.rho;
        if (hook) hook(rep.parameter, r);
        rep.runs.push_back(std::move(r));
    }
    auto cauchy = rep.series("l1_difference");
    if (!cauchy.empty()) cauchy.erase(cauchy.begin());
    rep.checks["delta_share_decreasing"] = strictly_decreasing(rep.series("delta_energy_share"));
    rep.checks["cauchy_decreasing"] = strictly_decreasing(cauchy);
    finish(rep, "delta_energy_share");
    // a zero value cannot enter a log-log fit; fit only the positive part
    std::vector<double> xs, ys;
    const auto share = rep.series("delta_energy_share");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] > 0.0) {
            xs.push_back(values[i]);
            ys.push_back(share[i]);
        }
    std::tie(rep.slope, rep.slope_residual) = loglog_fit(xs, ys);
    return rep;
}

SweepReport sweep(const ScenarioConfig& cfg, const std::string& parameter, const std::vector<double>& values, const SweepRunHook& hook)
{
    if (parameter == "epsilon") return sweep_epsilon(cfg, values, hook);
    if (parameter == "omega") return sweep_omega(cfg, values, hook);
    if (parameter == "delta") return sweep_delta(cfg, values, hook);
    throw Error(ErrorCode::invalid_argument, "unknown sweep parameter '" + parameter + "'");
}

std::pair<double, double> manufactured_errors(const ScenarioConfig& cfg)
{
    if (!cfg.manufactured) throw Error(ErrorCode::invalid_argument, "configuration has no manufactured solution");
    const RunCapture cap = run_capture(cfg);
    const FlowState& s = cap.final_state;
    const ManufacturedSolution& m = *cfg.manufactured;
    std::vector<double> er(s.rho.size()), em(s.rho.size());
    for (std::size_t c = 0; c < er.size(); ++c) {
        const Vec x = s.grid.center(c);
        er[c] = std::abs(s.rho[c] - m.density(s.time, x));
        const Vec mm = m.momentum(s.time, x);
        em[c] = 0.0;
        for (int i = 0; i < s.grid.dim; ++i) em[c] += std::abs(s.mom[i][c] - mm[i]);
    }
    const double vol = s.grid.cell_volume();
    return {pairwise_sum(er) * vol, pairwise_sum(em) * vol};
}

OrderReport manufactured_order_test(const ScenarioConfig& cfg, int n_coarse, int n_fine)
{
    OrderReport rep;
    rep.n_coarse = n_coarse;
    rep.n_fine = n_fine;
    ScenarioConfig c = cfg;
    c.fixed_dt = 0.0;
    c.grid.n = n_coarse;
    std::tie(rep.rho_error_coarse, rep.mom_error_coarse) = manufactured_errors(c);
    c.grid.n = n_fine;
    std::tie(rep.rho_error_fine, rep.mom_error_fine) = manufactured_errors(c);
    const double ratio = std::log(static_cast<double>(n_fine) / n_coarse);
    auto order = [&](double a, double b) { return a > 0.0 && b > 0.0 ? std::log(a / b) / ratio : (a == 0.0 && b == 0.0 ? 0.0 : -1.0); };
    rep.rho_order = order(rep.rho_error_coarse, rep.rho_error_fine);
    rep.mom_order = order(rep.mom_error_coarse, rep.mom_error_fine);
    return rep;
}

} // namespace penaflow
