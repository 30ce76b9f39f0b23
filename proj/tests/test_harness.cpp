#include <doctest.h>

#include <cmath>
#include <set>

#include "penaflow/diagnostics.hpp"
#include "penaflow/harness.hpp"

using namespace penaflow;

namespace {

ScenarioConfig tiny_decay(double end_time = 0.04)
{
    ScenarioConfig c = scenario("decay_disk");
    c.grid = Grid(2, 32, 1.0);
    c.end_time = end_time;
    return c;
}

} // namespace

TEST_CASE("scenario library")
{
    const auto lib = scenario_library();
    CHECK(lib.size() >= 4);
    std::set<std::string> names;
    for (const auto& c : lib) {
        CHECK_NOTHROW(c.validate());
        names.insert(c.name);
    }
    CHECK(names.size() == lib.size());
    for (const char* n : {"rest_disk", "translating_disk", "decay_disk", "smooth_vortex", "manufactured"}) CHECK(names.count(n) == 1);
    CHECK(scenario("rest_disk").name == "rest_disk");
    CHECK_THROWS_AS(scenario("no_such_scenario"), Error);
}

TEST_CASE("log-log fit")
{
    const std::vector<double> x{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 1.3));
    const auto [slope, res] = loglog_fit(x, y);
    CHECK(slope == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(res < 1e-12);
    CHECK(std::isnan(loglog_fit({1.0}, {2.0}).first));
}

TEST_CASE("epsilon sweep with a single value is insufficient")
{
    const auto rep = sweep_epsilon(tiny_decay(), {1e-2});
    CHECK(rep.runs.size() == 1);
    CHECK(std::isnan(rep.slope));
    CHECK(rep.verdict == "insufficient");
}

TEST_CASE("epsilon sweep metrics")
{
    ScenarioConfig cfg = scenario("translating_disk");
    cfg.grid = Grid(2, 48, 1.0);
    cfg.end_time = 0.2;
    const std::vector<double> eps{1e-1, 1e-2, 1e-3};
    int hooks = 0;
    const auto rep = sweep_epsilon(cfg, eps, [&](const std::string& p, const SweepRun&) {
        CHECK(p == "epsilon");
        ++hooks;
    });
    CHECK(hooks == 3);
    CHECK(rep.dt > 0.0);
    for (const auto& r : rep.runs) CHECK(r.steps == rep.runs.front().steps);
    const auto pen = rep.series("penalty");
    REQUIRE(pen.size() == 3);
    CHECK(pen[1] < pen[0]);
    CHECK(pen[2] < pen[1]);
    CHECK(rep.checks.at("penalty_monotone"));
    CHECK(rep.checks.at("slip_monotone"));
    CHECK(std::isfinite(rep.slope));
}

TEST_CASE("omega sweep")
{
    const auto cfg = tiny_decay();
    const auto rep = sweep_omega(cfg, {1.0, 0.1, 0.01});
    const auto solid = rep.series("solid_dissipation");
    REQUIRE(solid.size() == 3);
    CHECK(solid[1] < solid[0]);
    CHECK(solid[2] < solid[1]);
    CHECK(rep.checks.at("solid_dissipation_decreasing"));

    // omega = 1 reproduces the uniform-viscosity run
    ScenarioConfig uniform = cfg;
    uniform.reg.omega = 1.0;
    uniform.fixed_dt = rep.dt;
    const auto res = run(uniform, {false, {}, {}});
    CHECK(rep.runs.front().records.back().energy == doctest::Approx(res.records.back().energy).epsilon(1e-12));
}

TEST_CASE("delta sweep")
{
    const auto rep = sweep_delta(tiny_decay(), {1e-2, 1e-3, 1e-4});
    const auto share = rep.series("delta_energy_share");
    REQUIRE(share.size() == 3);
    CHECK(share[1] < share[0]);
    CHECK(share[2] < share[1]);

    ScenarioConfig physical = tiny_decay();
    physical.reg.delta = 0.0;
    const auto res = run(physical, {false, {}, {}});
    CHECK(res.steps > 0);
    CHECK(std::isfinite(res.records.back().energy));
}

TEST_CASE("manufactured solution")
{
    ScenarioConfig cfg = scenario("manufactured");
    cfg.grid = Grid(2, 32, 1.0);
    cfg.end_time = 0.1;

    ScenarioConfig trivial = cfg;
    trivial.manufactured->rho_amplitude = 0.0;
    trivial.manufactured->u_amplitude = 0.0;
    const auto [er0, em0] = manufactured_errors(trivial);
    CHECK(er0 < 1e-13);
    CHECK(em0 < 1e-13);

    // space error dominates: halving dt changes little
    cfg.fixed_dt = 0.5 * initial_stable_dt(cfg);
    const auto [er1, em1] = manufactured_errors(cfg);
    cfg.fixed_dt *= 0.5;
    const auto [er2, em2] = manufactured_errors(cfg);
    CHECK(std::abs(er2 - er1) <= 0.1 * er1);
    CHECK(std::abs(em2 - em1) <= 0.1 * em1);

    cfg.fixed_dt = 0.0;
    const auto rep = manufactured_order_test(cfg, 32, 64);
    MESSAGE("orders rho " << rep.rho_order << " mom " << rep.mom_order);
    CHECK(rep.rho_error_fine < rep.rho_error_coarse);
    CHECK(rep.rho_order >= 0.8);
}
