#include "penaflow/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "penaflow/residuals.hpp"

namespace penaflow {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string sci(double x) { return fmt("%.3g", x); }

struct TolField {
    const char* key;
    double Tolerances::*member;
};

const TolField kTolFields[] = {
    {"rest_deviation", &Tolerances::rest_deviation},
    {"mass_drift", &Tolerances::mass_drift},
    {"energy_slack", &Tolerances::energy_slack},
    {"driven_slack_rate", &Tolerances::driven_slack_rate},
    {"slope_min", &Tolerances::slope_min},
    {"slope_max", &Tolerances::slope_max},
    {"ratio_spread", &Tolerances::ratio_spread},
    {"solid_mass_ratio", &Tolerances::solid_mass_ratio},
    {"slip_factor", &Tolerances::slip_factor},
    {"fluid_uniformity", &Tolerances::fluid_uniformity},
    {"residual_ratio", &Tolerances::residual_ratio},
    {"order_min", &Tolerances::order_min},
    {"levelset_constant", &Tolerances::levelset_constant},
    {"normal_trace", &Tolerances::normal_trace},
    {"divergence_constant", &Tolerances::divergence_constant},
    {"runtime_rest", &Tolerances::runtime_rest},
    {"runtime_run", &Tolerances::runtime_run},
    {"runtime_sweep", &Tolerances::runtime_sweep},
    {"runtime_residuals", &Tolerances::runtime_residuals},
    {"runtime_order", &Tolerances::runtime_order},
    {"runtime_geometry", &Tolerances::runtime_geometry},
    {"epsilon_sweep_time", &Tolerances::epsilon_sweep_time},
};

bool nonincreasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] <= v[i - 1])) return false;
    return true;
}

// Worst value of E + D + Pen/eps - E0 relative to E0 over the ledger.
double undriven_excess(const RunResult& r, double epsilon)
{
    const double e0 = r.ledger.front().energy;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& l : r.ledger) worst = std::max(worst, (l.energy + l.dissipation_cum + l.penalty_cum / epsilon - e0) / std::abs(e0));
    return worst;
}

// Worst violation of the driven balance, relative to E0 and net of the per-unit-time slack.
double driven_excess(const RunResult& r, double epsilon, double slack_rate)
{
    const LedgerRow& first = r.ledger.front();
    const double e0 = std::abs(first.energy);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& l : r.ledger) {
        const double lhs = l.energy + l.dissipation_cum + l.penalty_cum / epsilon;
        const double rhs = first.energy + (l.momentum_v - first.momentum_v) + l.work_cum;
        worst = std::max(worst, (lhs - rhs) / e0 - slack_rate * l.time);
    }
    return worst;
}

CriterionResult start(int id)
{
    CriterionResult r;
    r.id = id;
    r.name = AcceptanceSuite::name(id);
    return r;
}

RunOptions without_snapshots()
{
    RunOptions o;
    o.keep_snapshots = false;
    return o;
}

CriterionResult finish(CriterionResult r, bool ok, double seconds, double limit)
{
    r.seconds = seconds;
    r.passed = ok && seconds < limit;
    r.detail += " runtime=" + fmt("%.1f", seconds) + "s (limit " + fmt("%.0f", limit) + "s)";
    return r;
}

} // namespace

json to_json(const Tolerances& t)
{
    json j = json::object();
    for (const auto& f : kTolFields) j[f.key] = t.*(f.member);
    return j;
}

VerifyRequest parse_verify_request(const json& doc)
{
    std::vector<ConfigIssue> issues;
    VerifyRequest req;
    if (!doc.is_object()) throw ConfigError(std::vector<ConfigIssue>{{"", "expected an object"}});
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& k = it.key();
        if (k == "schema_version") {
            if (!it.value().is_number_integer() || it.value().get<int>() != kSchemaVersion)
                issues.push_back({"/schema_version", "unsupported; expected " + std::to_string(kSchemaVersion)});
        } else if (k == "tolerances") {
            if (!it.value().is_object()) {
                issues.push_back({"/tolerances", "expected an object"});
                continue;
            }
            for (auto t = it.value().begin(); t != it.value().end(); ++t) {
                const auto f = std::find_if(std::begin(kTolFields), std::end(kTolFields), [&](const TolField& x) { return t.key() == x.key; });
                if (f == std::end(kTolFields)) issues.push_back({"/tolerances/" + t.key(), "unknown key"});
                else if (!t.value().is_number()) issues.push_back({"/tolerances/" + t.key(), "expected a number"});
                else req.tolerances.*(f->member) = t.value().get<double>();
            }
        } else if (k == "criteria") {
            if (!it.value().is_array()) {
                issues.push_back({"/criteria", "expected an array of criterion numbers"});
                continue;
            }
            for (const auto& c : it.value()) {
                if (!c.is_number_integer() || c.get<int>() < 1 || c.get<int>() > kCriterionCount) {
                    issues.push_back({"/criteria", "criterion numbers run from 1 to " + std::to_string(kCriterionCount)});
                    break;
                }
                req.criteria.push_back(c.get<int>());
            }
        } else {
            issues.push_back({"/" + k, "unknown key"});
        }
    }
    if (!doc.contains("schema_version")) issues.push_back({"/schema_version", "missing; expected " + std::to_string(kSchemaVersion)});
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return req;
}

std::string CriterionResult::line() const
{
    return "criterion " + std::to_string(id) + " [" + name + "] " + (passed ? "PASS" : "FAIL") + ": " + detail;
}

AcceptanceSuite::AcceptanceSuite(Tolerances tol, std::optional<std::filesystem::path> cache_dir)
    : tol_(tol), cache_dir_(std::move(cache_dir))
{
}

std::string AcceptanceSuite::name(int id)
{
    static const char* names[kCriterionCount] = {"well-balanced rest state", "mass conservation", "energy inequality",
                                                 "driven energy ledger",     "penalty decay",     "density confinement",
                                                 "slip recovery",            "omega limit",       "delta limit",
                                                 "weak residuals",           "manufactured order", "geometry kernel"};
    return id >= 1 && id <= kCriterionCount ? names[id - 1] : "unknown";
}

CriterionResult AcceptanceSuite::run(int id)
{
    const auto t0 = Clock::now();
    try {
        switch (id) {
        case 1: return rest_state();
        case 2: return mass_conservation();
        case 3: return energy_inequality();
        case 4: return driven_ledger();
        case 5: return penalty_decay();
        case 6: return density_confinement();
        case 7: return slip_recovery();
        case 8: return omega_limit();
        case 9: return delta_limit();
        case 10: return weak_residuals();
        case 11: return manufactured_order();
        case 12: return geometry_kernel();
        default: break;
        }
    } catch (const std::exception& e) {
        CriterionResult r = start(id);
        r.seconds = since(t0);
        r.detail = std::string("error: ") + e.what();
        return r;
    }
    CriterionResult r = start(id);
    r.detail = "no such criterion";
    return r;
}

CriterionResult AcceptanceSuite::rest_state()
{
    CriterionResult r = start(1);
    const auto t0 = Clock::now();
    const ScenarioConfig cfg = scenario("rest_disk");
    Stepper stepper(cfg);
    LevelSetField d = initial_levelset(cfg);
    FlowState s = initial_state(cfg, d);
    const FlowState s0 = s;
    double dev = 0.0, mom = 0.0;
    for (int k = 0; k < 100; ++k) {
        stepper.step(s, d, stepper.stable_dt(s));
        for (std::size_t c = 0; c < s.rho.size(); ++c) {
            dev = std::max(dev, std::abs(s.rho[c] - s0.rho[c]));
            for (int a = 0; a < s.grid.dim; ++a) mom = std::max(mom, std::abs(s.mom[a][c]));
        }
    }
    r.detail = "max|rho-rho0|=" + sci(dev) + " max|m|=" + sci(mom) + " (tol " + sci(tol_.rest_deviation) + ")";
    return finish(r, dev <= tol_.rest_deviation && mom <= tol_.rest_deviation, since(t0), tol_.runtime_rest);
}

CriterionResult AcceptanceSuite::mass_conservation()
{
    CriterionResult r = start(2);
    const auto t0 = Clock::now();
    const ScenarioConfig cfg = scenario("translating_disk");
    const RunResult res = penaflow::run(cfg, without_snapshots());
    const double m0 = res.records.front().mass;
    double worst = 0.0;
    for (const auto& rec : res.records) worst = std::max(worst, std::abs(rec.mass - m0 - rec.clipped_mass) / m0);
    const auto& last = res.records.back();
    r.detail = "steps=" + std::to_string(res.steps) + " drift=" + sci(worst) + " (tol " + sci(tol_.mass_drift) + ")" +
               " clipped=" + sci(last.clipped_mass) + " raw drift=" + sci((last.mass - m0) / m0);
    return finish(r, worst <= tol_.mass_drift, since(t0), tol_.runtime_run);
}

CriterionResult AcceptanceSuite::energy_inequality()
{
    CriterionResult r = start(3);
    const auto t0 = Clock::now();
    const ScenarioConfig cfg = scenario("decay_disk");
    const RunResult res = penaflow::run(cfg, without_snapshots());
    const double excess = undriven_excess(res, cfg.reg.epsilon);
    r.detail = "steps=" + std::to_string(res.steps) + " max (E+D+P/eps-E0)/E0=" + sci(excess) + " (tol " + sci(tol_.energy_slack) +
               ") E0=" + sci(res.ledger.front().energy) + " E(T)=" + sci(res.ledger.back().energy);
    return finish(r, excess <= tol_.energy_slack, since(t0), tol_.runtime_run);
}

CriterionResult AcceptanceSuite::driven_ledger()
{
    CriterionResult r = start(4);
    const auto t0 = Clock::now();
    const ScenarioConfig cfg = scenario("translating_disk");
    const RunResult res = penaflow::run(cfg, without_snapshots());
    const double excess = driven_excess(res, cfg.reg.epsilon, tol_.driven_slack_rate);
    r.detail = "steps=" + std::to_string(res.steps) + " worst balance excess/E0 net of " + sci(tol_.driven_slack_rate) +
               " per unit time=" + sci(excess);
    return finish(r, excess <= 0.0, since(t0), tol_.runtime_run);
}

const SweepReport& AcceptanceSuite::epsilon_sweep(double& seconds)
{
    if (eps_) {
        seconds = eps_seconds_;
        return *eps_;
    }
    ScenarioConfig cfg = scenario("translating_disk");
    cfg.end_time = tol_.epsilon_sweep_time;
    const std::vector<double> values{1e-1, 1e-2, 1e-3, 1e-4};
    const json fingerprint = {{"config", to_json(cfg)}, {"values", values}};
    std::filesystem::path cache;
    if (cache_dir_) {
        cache = *cache_dir_ / "epsilon_sweep.json";
        if (std::filesystem::exists(cache)) {
            try {
                const json j = read_json(cache);
                if (j.at("fingerprint") == fingerprint) {
                    eps_ = sweep_report_from_json(j.at("report"));
                    eps_seconds_ = j.at("seconds").get<double>();
                    seconds = eps_seconds_;
                    return *eps_;
                }
            } catch (const std::exception&) {
                // stale or unreadable cache: recompute
            }
        }
    }
    const auto t0 = Clock::now();
    eps_ = sweep_epsilon(cfg, values);
    eps_seconds_ = since(t0);
    if (cache_dir_) {
        std::filesystem::create_directories(*cache_dir_);
        write_json(cache, {{"fingerprint", fingerprint}, {"seconds", eps_seconds_}, {"report", to_json(*eps_)}});
    }
    seconds = eps_seconds_;
    return *eps_;
}

CriterionResult AcceptanceSuite::penalty_decay()
{
    CriterionResult r = start(5);
    double seconds = 0.0;
    const SweepReport& rep = epsilon_sweep(seconds);
    const auto ratio = rep.series("penalty_over_eps");
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    const bool slope_ok = rep.slope >= tol_.slope_min && rep.slope <= tol_.slope_max;
    const bool bounded = *hi <= tol_.ratio_spread * *lo;
    r.detail = "slope=" + fmt("%.3f", rep.slope) + " (range [" + fmt("%.2f", tol_.slope_min) + ", " + fmt("%.2f", tol_.slope_max) +
               "]) fit residual=" + sci(rep.slope_residual) + " penalty/eps in [" + sci(*lo) + ", " + sci(*hi) + "]";
    return finish(r, slope_ok && bounded, seconds, tol_.runtime_sweep);
}

CriterionResult AcceptanceSuite::density_confinement()
{
    CriterionResult r = start(6);
    double seconds = 0.0;
    const SweepReport& rep = epsilon_sweep(seconds);
    const auto solid = rep.series("solid_mass_ratio");
    const bool monotone = nonincreasing(solid);
    const bool small = solid.back() <= tol_.solid_mass_ratio;
    r.detail = "solid/total mass per eps:";
    for (double v : solid) r.detail += " " + sci(v);
    r.detail += std::string(monotone ? " monotone" : " not monotone") + "; at eps=" + sci(rep.values.back()) + ": " + sci(solid.back()) +
                " (tol " + sci(tol_.solid_mass_ratio) + ")";
    return finish(r, monotone && small, seconds, tol_.runtime_sweep);
}

CriterionResult AcceptanceSuite::slip_recovery()
{
    CriterionResult r = start(7);
    double seconds = 0.0;
    const SweepReport& rep = epsilon_sweep(seconds);
    const auto slip = rep.series("slip_rms");
    // extrapolate the fit over all but the smallest eps to the smallest eps
    const std::vector<double> xs(rep.values.begin(), rep.values.end() - 1);
    const std::vector<double> ys(slip.begin(), slip.end() - 1);
    const auto [slope, res] = loglog_fit(xs, ys);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    const double predicted = std::exp(my + slope * (std::log(rep.values.back()) - mx));
    const bool monotone = nonincreasing(slip);
    const bool close = slip.back() <= tol_.slip_factor * predicted;
    r.detail = "slip rms at eps=" + sci(rep.values.back()) + ": " + sci(slip.back()) + " predicted " + sci(predicted) + " (slope " +
               fmt("%.3f", slope) + ", factor " + sci(tol_.slip_factor) + ")" + (monotone ? " monotone" : " not monotone");
    return finish(r, monotone && close, seconds, tol_.runtime_sweep);
}

CriterionResult AcceptanceSuite::omega_limit()
{
    CriterionResult r = start(8);
    const auto t0 = Clock::now();
    ScenarioConfig cfg = scenario("decay_disk");
    cfg.grid.n = 64;
    const SweepReport rep = sweep_omega(cfg, {1.0, 0.1, 0.01, 0.001});
    const auto solid = rep.series("solid_dissipation");
    const auto fluid = rep.series("fluid_dissipation");
    const auto work = rep.series("solid_stress_work");
    const auto [lo, hi] = std::minmax_element(fluid.begin(), fluid.end());
    const bool decreasing = rep.checks.at("solid_dissipation_decreasing");
    const bool uniform = *hi - *lo <= tol_.fluid_uniformity * *hi;
    r.detail = "solid dissipation:";
    for (double v : solid) r.detail += " " + sci(v);
    r.detail += " solid stress work:";
    for (double v : work) r.detail += " " + sci(v);
    r.detail += " fluid spread=" + sci((*hi - *lo) / *hi) + " (tol " + sci(tol_.fluid_uniformity) + ")";
    return finish(r, decreasing && uniform, since(t0), tol_.runtime_sweep);
}

CriterionResult AcceptanceSuite::delta_limit()
{
    CriterionResult r = start(9);
    const auto t0 = Clock::now();
    ScenarioConfig cfg = scenario("decay_disk");
    cfg.grid.n = 64;
    const SweepReport rep = sweep_delta(cfg, {1e-2, 1e-3, 1e-4});
    const auto share = rep.series("delta_energy_share");
    const auto diff = rep.series("l1_difference");
    r.detail = "delta energy share:";
    for (double v : share) r.detail += " " + sci(v);
    r.detail += " L1 Cauchy differences:";
    for (std::size_t i = 1; i < diff.size(); ++i) r.detail += " " + sci(diff[i]);
    const bool ok = rep.checks.at("delta_share_decreasing") && rep.checks.at("cauchy_decreasing");
    return finish(r, ok, since(t0), tol_.runtime_sweep);
}

CriterionResult AcceptanceSuite::weak_residuals()
{
    CriterionResult r = start(10);
    const auto t0 = Clock::now();
    auto trajectory = [](int n) {
        ScenarioConfig cfg = scenario("smooth_vortex");
        cfg.grid.n = n;
        cfg.output_cadence = 1;
        const RunResult res = penaflow::run(cfg);
        return Trajectory{res.snapshots, res.levelsets, cfg.fluid, cfg.reg};
    };
    const Trajectory coarse = trajectory(64), fine = trajectory(128);
    double rho_max = 0.0;
    for (double v : coarse.states.front().rho) rho_max = std::max(rho_max, v);
    const RenormalizationSpec tk{Renormalization::truncation, 0.8 * rho_max};

    const std::vector<ScalarTest> scalars{{"bump_linear", {0.1, 0.05, 0.0}, 0.5, 1.0, {0.5, -0.3, 0.0}, 3.0},
                                          {"wide_bump", {0.0, 0.0, 0.0}, 0.9, 1.0, {}, 0.0},
                                          {"offset_bump", {-0.3, 0.2, 0.0}, 0.45, 0.5, {1.0, 1.0, 0.0}, 1.0}};
    const std::vector<VectorTest> vectors{
        swirl_test("swirl", {0.0, 0.0, 0.0}, 0.9),
        bump_vector_test("interior_bump", {0.1, 0.0, 0.0}, 0.35, {1.0, 0.5, 0.0}),
        admissible_vector_test(
            "extended_linear", [](double, const Vec& x) { return bump(norm(x) / 0.95) * Vec{1.0 + 2.0 * x[1], 0.3 - x[0] + x[1], 0.0}; },
            {0.0, 0.0, 0.0}, 0.95, 0.15)};

    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    auto check = [&](const std::string& label, double a, double b) {
        const double ratio = a / b;
        worst = std::min(worst, ratio);
        const bool pass = ratio >= tol_.residual_ratio;
        ok = ok && pass;
        r.detail += " " + label + "=" + fmt("%.2f", ratio);
    };
    r.detail = "refinement ratios:";
    for (const auto& s : scalars) {
        check("continuity/" + s.id, continuity_residual(coarse, s), continuity_residual(fine, s));
        check("renormalized/" + s.id, renormalized_residual(coarse, tk, s), renormalized_residual(fine, tk, s));
    }
    for (const auto& v : vectors) check("momentum/" + v.id, weak_momentum_residual(coarse, v), weak_momentum_residual(fine, v));
    r.detail += " (min " + fmt("%.2f", worst) + ", tol " + fmt("%.2f", tol_.residual_ratio) + ")";
    return finish(r, ok, since(t0), tol_.runtime_residuals);
}

CriterionResult AcceptanceSuite::manufactured_order()
{
    CriterionResult r = start(11);
    const auto t0 = Clock::now();
    const OrderReport rep = manufactured_order_test(scenario("manufactured"), 64, 128);
    r.detail = "L1 order rho=" + fmt("%.3f", rep.rho_order) + " m=" + fmt("%.3f", rep.mom_order) + " (min " + fmt("%.2f", tol_.order_min) +
               ") errors rho " + sci(rep.rho_error_coarse) + " -> " + sci(rep.rho_error_fine) + ", m " + sci(rep.mom_error_coarse) +
               " -> " + sci(rep.mom_error_fine);
    return finish(r, rep.rho_order >= tol_.order_min && rep.mom_order >= tol_.order_min, since(t0), tol_.runtime_order);
}

CriterionResult AcceptanceSuite::geometry_kernel()
{
    CriterionResult r = start(12);
    const auto t0 = Clock::now();
    // disk off the rotation centre, one full turn
    const Grid g(2, 128, 1.0);
    const Shape disk = Shape::disk({0.35, 0.0, 0.0}, 0.3);
    const VelocityFieldSpec rot = VelocityFieldSpec::rotation({0.0, 0.0, 0.0}, 1.0);
    const LevelSetField d0 = init_levelset(disk, g, 3.0);
    LevelSetField d = d0;
    const double period = 2.0 * std::numbers::pi;
    const double vmax = 0.65 + 0.1;
    const double dt_max = 0.5 * kGeometryCfl * g.spacing() / vmax;
    const int steps = static_cast<int>(std::ceil(period / dt_max));
    const double dt = period / steps;
    for (int k = 0; k < steps; ++k) {
        d = advect_levelset(d, rot, dt, AdvectionScheme::weno5);
        if ((k + 1) % 10 == 0) d = reinitialize(d).field;
    }
    double err = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c)
        if (std::abs(d0.values[c]) <= d0.band_width) err = std::max(err, std::abs(d.values[c] - d0.values[c]));
    const double c_levelset = err / g.spacing();

    // admissible builder on the static disk
    const Grid gs(2, 64, 1.0);
    const LevelSetField ds = init_levelset(Shape::disk({0.0, 0.0, 0.0}, 0.5), gs, 3.0);
    const AdmissibleTest w = make_admissible_test(ds, [](double, const Vec& x) { return Vec{1.0 + 2.0 * x[1], 0.3 - x[0] + x[1], 0.0}; });
    double trace = 0.0;
    for (const Vec& x : sample_interface(ds)) trace = std::max(trace, std::abs(dot(w(x), normal(ds, x))));
    const double c_div = w.max_band_divergence() / gs.spacing();

    r.detail = "level set after one turn: max band error=" + sci(err) + " = " + fmt("%.3f", c_levelset) + " h (C max " +
               fmt("%.1f", tol_.levelset_constant) + "); admissible field: max|w.n|=" + sci(trace) + " max|div w|=" + sci(c_div) + " h";
    const bool ok = c_levelset <= tol_.levelset_constant && trace <= tol_.normal_trace && c_div <= tol_.divergence_constant;
    return finish(r, ok, since(t0), tol_.runtime_geometry);
}

} // namespace penaflow
