#include <doctest.h>

#include <cmath>
#include <numbers>

#include "penaflow/diagnostics.hpp"
#include "penaflow/harness.hpp"
#include "penaflow/residuals.hpp"

using namespace penaflow;

namespace {

struct Box {
    Grid grid{2, 64, 1.0};
    LevelSetField d = init_levelset(Shape::box({-0.5, -0.25, 0}, {0.5, 0.25, 0}), grid);
    double area = 0.5;

    FlowState state(double rho, const Vec& u) const
    {
        FlowState s(grid);
        for (std::size_t c = 0; c < grid.cell_count(); ++c)
            if (d.values[c] < 0.0) {
                s.rho[c] = rho;
                s.set_momentum(c, rho * u);
            }
        return s;
    }
};

FluidParams unit_law()
{
    FluidParams fp;
    fp.a = 1.0;
    fp.gamma = 2.0;
    return fp;
}

RegularizationParams no_delta()
{
    RegularizationParams rp;
    rp.delta = 0.0;
    return rp;
}

FlowState with_velocity(const LevelSetField& d, double rho, const std::function<Vec(const Vec&)>& u)
{
    FlowState s(d.grid);
    for (std::size_t c = 0; c < d.grid.cell_count(); ++c) {
        s.rho[c] = rho;
        s.set_momentum(c, rho * u(d.grid.center(c)));
    }
    return s;
}

Trajectory rest_trajectory(int steps = 6)
{
    ScenarioConfig cfg = scenario("rest_disk");
    cfg.grid = Grid(2, 32, 1.0);
    cfg.output_cadence = 1;
    cfg.fixed_dt = 0.5 * initial_stable_dt(cfg);
    cfg.end_time = steps * cfg.fixed_dt;
    const auto res = run(cfg);
    return {res.snapshots, res.levelsets, cfg.fluid, cfg.reg};
}

} // namespace

TEST_CASE("mass and energy")
{
    const Box b;
    const auto s = b.state(1.0, {});
    CHECK(total_mass(s) == doctest::Approx(b.area).epsilon(1e-12));
    CHECK(total_mass(b.state(2.0, {})) == doctest::Approx(2 * total_mass(s)).epsilon(1e-14));

    CHECK(total_energy(s, unit_law(), no_delta()) == doctest::Approx(0.0));
    CHECK(total_energy(b.state(1.0, {1, 0, 0}), unit_law(), no_delta()) == doctest::Approx(b.area / 2).epsilon(1e-12));
    CHECK(total_energy(b.state(2.0, {}), unit_law(), no_delta()) == doctest::Approx(2 * b.area).epsilon(1e-12));

    RegularizationParams rp;
    rp.delta = 0.1;
    rp.beta = 2.0;
    CHECK(artificial_energy(b.state(2.0, {}), rp) == doctest::Approx(0.1 * 4.0 * b.area).epsilon(1e-12));
    CHECK(max_density(b.state(2.5, {})) == 2.5);

    const auto u = cell_velocities(b.state(2.0, {0.3, -0.2, 0}));
    const auto inside = b.grid.index(32, 32);
    CHECK(u[0][inside] == doctest::Approx(0.3));
    CHECK(u[1][b.grid.index(0, 0)] == 0.0);
}

TEST_CASE("dissipation increment")
{
    const Grid g(2, 64, 1.0);
    const auto d = init_levelset(Shape::disk({}, 0.6), g);
    const auto fp = unit_law();
    RegularizationParams rp;
    rp.omega = 1.0;

    CHECK(dissipation_increment(with_velocity(d, 1.0, [](const Vec&) { return Vec{}; }), d, fp, rp, 0.1) == 0.0);

    const auto shear = with_velocity(d, 1.0, [](const Vec& x) { return Vec{std::sin(3 * x[1]), 0, 0}; });
    const double ds = dissipation_increment(shear, d, fp, rp, 0.1);
    CHECK(ds > 0.0);
    FluidParams twice = fp;
    twice.mu *= 2.0;
    CHECK(dissipation_increment(shear, d, twice, rp, 0.1) == doctest::Approx(2 * ds).epsilon(1e-12));

    // a rigid rotation is stress-free away from the no-slip walls; an expansion is not
    const auto rot = with_velocity(d, 1.0, [](const Vec& x) { return Vec{-x[1], x[0], 0}; });
    const auto expansion = with_velocity(d, 1.0, [](const Vec& x) { return Vec{x[0], x[1], 0}; });
    CHECK(dissipation_split(rot, d, fp, rp, 1.0).fluid < 1e-20);
    CHECK(dissipation_split(expansion, d, fp, rp, 1.0).fluid > 1e-3);

    const auto split = dissipation_split(shear, d, fp, rp, 0.1);
    CHECK(split.fluid + split.solid == doctest::Approx(split.total));
    CHECK(split.total == doctest::Approx(ds));
}

TEST_CASE("penalty increment and slip")
{
    const Grid g(2, 64, 1.0);
    const auto d = init_levelset(Shape::disk({}, 0.5), g);
    const auto v = VelocityFieldSpec::rotation({}, 1.0, 0.9, 0.05);
    const auto follow = with_velocity(d, 1.0, [&](const Vec& x) { return eval_velocity(v, 0.0, x); });
    CHECK(penalty_increment(follow, d, v, 0.1) == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(slip_rms(follow, d, v) < 1e-14);

    // purely tangential relative velocity: the rotation itself against V = 0
    const auto zero = VelocityFieldSpec::make_zero();
    CHECK(penalty_increment(follow, d, zero, 0.1) < 1e-6);

    const auto still = with_velocity(d, 1.0, [](const Vec&) { return Vec{}; });
    CHECK(penalty_increment(still, d, zero, 0.1) == 0.0);

    const auto radial = with_velocity(d, 1.0, [](const Vec& x) { return 0.2 * x; });
    const double p = penalty_increment(radial, d, zero, 0.5);
    // (0.2 r)^2 at r = 0.5 times the circumference times dt
    CHECK(p == doctest::Approx(0.01 * std::numbers::pi * 0.5).epsilon(0.05));
    CHECK(slip_rms(radial, d, zero) == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("solid mass, H1 norm and pressure monitor")
{
    const Box b;
    CHECK(solid_mass(b.state(1.0, {}), b.d) == 0.0);
    auto s = b.state(1.0, {});
    s.rho[b.grid.index(0, 0)] = 2.0;
    CHECK(solid_mass(s, b.d) == doctest::Approx(2.0 * b.grid.cell_volume()));

    CHECK(h1_velocity_sq(b.state(1.0, {}), b.d) == 0.0);
    const double h1 = h1_velocity_sq(b.state(1.0, {0.5, 0.5, 0}), b.d);
    CHECK(h1 >= 0.5 * b.area * (1 - 1e-12));
    const Grid g(2, 64, 1.0);
    const auto d = init_levelset(Shape::disk({}, 0.6), g);
    const auto u1 = with_velocity(d, 1.0, [](const Vec& x) { return Vec{std::sin(2 * x[1]), x[0] * x[0], 0}; });
    const auto u2 = with_velocity(d, 1.0, [](const Vec& x) { return 2.0 * Vec{std::sin(2 * x[1]), x[0] * x[0], 0}; });
    CHECK(h1_velocity_sq(u2, d) == doctest::Approx(4 * h1_velocity_sq(u1, d)).epsilon(1e-12));

    const auto fp = unit_law();
    const auto rp = no_delta();
    const double lp = local_pressure_integral(b.state(2.0, {}), b.d, fp, rp, 1.0, 1.0);
    CHECK(lp > 0.0);
    CHECK(lp <= 8.0 * b.area);
}

TEST_CASE("renormalized and continuity residuals")
{
    const auto traj = rest_trajectory();
    const ScalarTest zero{"zero", {}, 0.5, 0.0, {}, 0.0};
    CHECK(continuity_residual(traj, zero) == 0.0);
    CHECK(renormalized_residual(traj, {Renormalization::truncation, 0.5}, zero) == 0.0);

    const ScalarTest phi{"tilted", {0.1, -0.1, 0}, 0.5, 1.0, {0.3, -0.2, 0}, 2.0};
    const double plain = continuity_residual(traj, phi);
    CHECK(renormalized_residual(traj, {Renormalization::linear, 1.0}, phi) == doctest::Approx(plain).epsilon(1e-14));

    const ScalarTest steady{"steady", {0.1, -0.1, 0}, 0.5, 1.0, {0.3, -0.2, 0}, 0.0};
    for (auto kind : {Renormalization::linear, Renormalization::truncation, Renormalization::smooth_cutoff})
        CHECK(std::abs(renormalized_residual(traj, {kind, 0.7}, steady)) < 1e-12);

    CHECK(renormalize(3.0, {Renormalization::truncation, 1.0}).value == doctest::Approx(1.0));
    CHECK(renormalize(0.5, {Renormalization::linear, 1.0}).value == 0.5);
    const auto sc = renormalize(0.2, {Renormalization::smooth_cutoff, 1.0});
    CHECK(sc.value == doctest::Approx(std::tanh(0.2)));
    CHECK(sc.derivative == doctest::Approx(1.0 - std::tanh(0.2) * std::tanh(0.2)));

    const ScalarTest wide{"wide", {}, 1.2, 1.0, {}, 0.0};
    try {
        continuity_residual(traj, wide);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::test_not_compactly_supported);
    }
}

TEST_CASE("weak momentum residual")
{
    const auto traj = rest_trajectory();
    const auto zero = bump_vector_test("zero", {}, 0.3, {0, 0, 0});
    CHECK(weak_momentum_residual(traj, zero) == 0.0);

    // solenoidal test supported in the fluid: the uniform pressure does no work
    const auto swirl = swirl_test("swirl", {0.05, 0, 0}, 0.3);
    CHECK(std::abs(weak_momentum_residual(traj, swirl)) < 1e-10);

    // a test field crossing the interface with a normal component is rejected
    const auto crossing = bump_vector_test("crossing", {0.5, 0, 0}, 0.2, {1, 0, 0});
    try {
        weak_momentum_residual(traj, crossing);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::inadmissible_test);
    }
}

TEST_CASE("admissible test construction")
{
    const Grid g(2, 64, 1.0);
    const auto d = init_levelset(Shape::disk({}, 0.5), g);
    const double h = g.spacing();

    const auto rotational = make_admissible_test(d, [](double, const Vec& x) { return (1.0 / norm(x)) * Vec{-x[1], x[0], 0}; });
    double dev = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double th = 0.0314 * k, r = 0.5 + (k % 7 - 3) * 0.5 * h;
        const Vec x{r * std::cos(th), r * std::sin(th), 0};
        const Vec base = (1.0 / norm(x)) * Vec{-x[1], x[0], 0};
        dev = std::max(dev, norm(rotational(x) - base));
    }
    CHECK(dev <= 1e-10);

    const auto normal_base = make_admissible_test(d, [](double, const Vec& x) { return (1.0 / norm(x)) * x; });
    double trace_max = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Vec x{0.5 * std::cos(0.0628 * k), 0.5 * std::sin(0.0628 * k), 0};
        trace_max = std::max(trace_max, std::abs(dot(normal_base(x), x) / 0.5));
    }
    CHECK(trace_max <= 1e-6);

    const auto linear = make_admissible_test(d, [](double, const Vec& x) { return Vec{1.0 + 2 * x[1], 0.3 - x[0] + x[1], 0}; });
    CHECK(linear.max_band_divergence() <= 3.0 * h);

    auto thin = d;
    thin.band_width = 2 * h;
    try {
        make_admissible_test(thin, [](double, const Vec& x) { return x; });
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unresolved_band);
    }

    const auto wrapped = admissible_vector_test("ext", [](double, const Vec& x) { return bump(norm(x) / 0.9) * Vec{1.0 + 2 * x[1], 0.3 - x[0], 0}; }, {}, 0.9);
    CHECK(normal_trace(wrapped, d, 0.0) <= 1e-6);
}
