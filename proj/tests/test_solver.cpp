#include <doctest.h>

#include <cmath>
#include <random>

#include "penaflow/diagnostics.hpp"
#include "penaflow/harness.hpp"
#include "penaflow/multigrid.hpp"
#include "penaflow/solver.hpp"
#include "penaflow/stencil.hpp"

using namespace penaflow;

namespace {

ScenarioConfig small_rest(int n = 32)
{
    ScenarioConfig c = scenario("rest_disk");
    c.grid = Grid(2, n, 1.0);
    return c;
}

ScenarioConfig small_decay(int n = 32)
{
    ScenarioConfig c = scenario("decay_disk");
    c.grid = Grid(2, n, 1.0);
    c.end_time = 0.1;
    return c;
}

CellVectors random_field(const Grid& g, unsigned seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    CellVectors u = make_cell_vectors(g);
    for (int a = 0; a < g.dim; ++a)
        for (double& v : u[a]) v = dist(gen);
    return u;
}

double max_abs_diff(const CellVectors& a, const CellVectors& b, int dim)
{
    double m = 0.0;
    for (int k = 0; k < dim; ++k)
        for (std::size_t c = 0; c < a[k].size(); ++c) m = std::max(m, std::abs(a[k][c] - b[k][c]));
    return m;
}

} // namespace

TEST_CASE("rest state is preserved")
{
    const auto cfg = small_rest();
    Stepper st(cfg);
    auto d = initial_levelset(cfg);
    auto s = initial_state(cfg, d);
    const auto s0 = s;
    for (int k = 0; k < 100; ++k) st.step(s, d, st.stable_dt(s));
    double dev = 0.0;
    for (std::size_t c = 0; c < s.rho.size(); ++c) {
        dev = std::max(dev, std::abs(s.rho[c] - s0.rho[c]));
        dev = std::max(dev, std::abs(s.mom[0][c]) + std::abs(s.mom[1][c]));
    }
    CHECK(dev <= 1e-12);
}

TEST_CASE("co-moving rigid translation keeps zero normal slip")
{
    // the tapered edge of V launches a rarefaction; a large box keeps it away from the body
    ScenarioConfig cfg = small_rest(128);
    cfg.grid = Grid(2, 128, 4.0);
    cfg.shape = Shape::disk({0, 0, 0}, 0.4);
    cfg.boundary_velocity = VelocityFieldSpec::translation({0.2, 0, 0}, 3.8, 0.2);
    cfg.velocity.kind = VelocityProfile::Kind::follow_boundary;
    Stepper st(cfg);
    auto d = initial_levelset(cfg);
    auto s = initial_state(cfg, d);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        st.step(s, d, st.stable_dt(s));
        for (const auto& b : band_cells(d)) {
            const Vec u = s.velocity(b.cell);
            const Vec v = eval_velocity(cfg.boundary_velocity, s.time, s.grid.center(b.cell));
            worst = std::max(worst, std::abs(dot(u - v, b.normal)));
        }
    }
    MESSAGE("max |(u - V) . n| = " << worst);
    CHECK(worst <= 1e-8);
}

TEST_CASE("continuity fluxes telescope")
{
    const auto cfg = small_decay();
    const auto d = initial_levelset(cfg);
    auto s = initial_state(cfg, d);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (std::size_t c = 0; c < s.rho.size(); ++c) {
        s.rho[c] = 0.5 + dist(gen);
        s.mom[0][c] = dist(gen) - 0.5;
        s.mom[1][c] = dist(gen) - 0.5;
    }
    const auto r = continuity_rhs(s, cfg.fluid, cfg.reg);
    double sum = 0.0, scale = 0.0;
    for (double v : r) {
        sum += v;
        scale += std::abs(v);
    }
    CHECK(std::abs(sum) <= 1e-13 * scale);
}

TEST_CASE("mass and energy along an undriven run")
{
    const auto cfg = small_decay();
    double e_prev = -1.0, e0 = 0.0, worst_rise = -1.0;
    RunOptions opt;
    opt.keep_snapshots = false;
    opt.on_step = [&](const FlowState& s, const LevelSetField&, const StepReport&, const CellVectors&) {
        const double e = total_energy(s, cfg.fluid, cfg.reg);
        if (e_prev >= 0.0) worst_rise = std::max(worst_rise, e - e_prev);
        e_prev = e;
    };
    const auto res = run(cfg, opt);
    e0 = res.records.front().energy;
    CHECK(res.steps > 10);
    CHECK(worst_rise <= 1e-10 * e0);
    const double m0 = res.records.front().mass;
    for (const auto& r : res.records) CHECK(std::abs(r.mass - m0 - r.clipped_mass) <= 1e-11 * m0);
}

TEST_CASE("run to T = 0 and determinism")
{
    ScenarioConfig cfg = small_decay();
    cfg.end_time = 0.0;
    const auto res = run(cfg);
    REQUIRE(res.snapshots.size() == 1);
    const auto d = initial_levelset(cfg);
    const auto s0 = initial_state(cfg, d);
    CHECK(res.snapshots[0].rho == s0.rho);
    CHECK(res.snapshots[0].mom == s0.mom);

    cfg.end_time = 0.05;
    const auto a = run(cfg), b = run(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].energy == b.records[i].energy);
        CHECK(a.records[i].dissipation_cum == b.records[i].dissipation_cum);
        CHECK(a.records[i].penalty_cum == b.records[i].penalty_cum);
    }
    CHECK(a.snapshots.back().rho == b.snapshots.back().rho);
}

TEST_CASE("penalty and friction forces")
{
    RegularizationParams rp;
    rp.epsilon = 1e-2;
    FluidParams fp;
    fp.kappa = 2.0;
    const Vec n{0.6, 0.8, 0.0}, t{-0.8, 0.6, 0.0};
    const Vec u{1.0, -0.5, 0.0}, v{0.2, 0.1, 0.0};
    const Vec pf = penalty_force(u, v, n, 3.0, rp);
    CHECK(std::abs(dot(pf, t)) < 1e-14);
    CHECK(dot(pf, n) == doctest::Approx(3.0 / rp.epsilon * dot(v - u, n)));
    CHECK(norm(penalty_force(v + 0.7 * t, v, n, 3.0, rp)) < 1e-12);
    const Vec ff = friction_force(u, v, n, 3.0, fp);
    CHECK(std::abs(dot(ff, n)) < 1e-14);
    CHECK(dot(ff, t) == doctest::Approx(-2.0 * 3.0 * dot(u - v, t)));
}

TEST_CASE("implicit penalty removes the normal mismatch only")
{
    ScenarioConfig cfg = small_rest(48);
    cfg.reg.epsilon = 1e-14;
    cfg.fluid.mu = 1e-12;
    cfg.velocity = {VelocityProfile::Kind::uniform, {0.3, 0.1, 0.0}};
    Stepper st(cfg);
    auto d = initial_levelset(cfg);
    auto s = initial_state(cfg, d);
    const double dt = 1e-5;
    auto after = s;
    auto d1 = d;
    st.step(after, d1, dt);
    double worst = 0.0, tangential = 0.0;
    int counted = 0;
    for (const auto& b : band_cells(d)) {
        const Vec m0 = s.momentum(b.cell), m1 = after.momentum(b.cell);
        // at the band edge delta dt / eps is not yet large
        if (b.delta * dt / cfg.reg.epsilon > 1e9) {
            worst = std::max(worst, std::abs(dot(after.velocity(b.cell), b.normal)));
            ++counted;
        }
        const Vec t{-b.normal[1], b.normal[0], 0.0};
        tangential = std::max(tangential, std::abs(dot(m1 - m0, t)));
    }
    CHECK(counted > 100);
    CHECK(worst <= 1e-9);
    // the convective and pressure part changes the tangential momentum by O(dt) only
    CHECK(tangential <= 1e-4);
}

TEST_CASE("viscous operator")
{
    const Grid g(2, 24, 1.0);
    const auto d = init_levelset(Shape::disk({}, 0.5), g);
    FluidParams fp;
    fp.eta = 0.3;
    const auto mu = viscosity_cells(d, fp, RegularizationParams{});
    const ViscousOperator op(g, mu, fp.eta);
    const auto u = random_field(g, 1), v = random_field(g, 2);

    CellVectors a = make_cell_vectors(g), b = make_cell_vectors(g);
    op.apply(u, a);
    op.apply_matrix_free(u, b);
    CHECK(max_abs_diff(a, b, 2) <= 1e-12 * (1.0 + max_abs_diff(b, make_cell_vectors(g), 2)));

    CHECK(op.form(u, v) == doctest::Approx(op.form(v, u)).epsilon(1e-12));
    CHECK(op.form(u, u) > 0.0);
    double kuv = 0.0;
    for (int k = 0; k < 2; ++k)
        for (std::size_t c = 0; c < g.cell_count(); ++c) kuv += v[k][c] * a[k][c];
    CHECK(kuv == doctest::Approx(op.form(u, v)).epsilon(1e-10));

    const auto split = op.form_split(u, u, &d.values);
    CHECK(split.fluid + split.solid == doctest::Approx(split.total));

    const Grid g3(3, 8, 1.0);
    const ViscousOperator op3(g3, std::vector<double>(g3.cell_count(), 0.7), 0.1);
    const auto u3 = random_field(g3, 3);
    CellVectors a3 = make_cell_vectors(g3), b3 = make_cell_vectors(g3);
    op3.apply(u3, a3);
    op3.apply_matrix_free(u3, b3);
    CHECK(max_abs_diff(a3, b3, 3) <= 1e-11);
}

TEST_CASE("multigrid preconditioner")
{
    const Grid g(2, 32, 1.0);
    std::vector<double> mass(g.cell_count(), 1.0), mu(g.cell_count(), 0.05);
    ScalarMultigrid mg;
    mg.setup(g, mass, mu);
    CHECK(mg.levels() >= 3);

    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(g.cell_count()), y(g.cell_count()), ax, ay;
    for (std::size_t c = 0; c < x.size(); ++c) {
        x[c] = dist(gen);
        y[c] = dist(gen);
    }
    mg.apply(x, ax);
    mg.apply(y, ay);
    double xay = 0.0, yax = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
        xay += x[c] * ay[c];
        yax += y[c] * ax[c];
    }
    CHECK(xay == doctest::Approx(yax).epsilon(1e-12));

    // a V-cycle is a contraction on the error
    std::vector<double> z, az;
    mg.vcycle(ax, z);
    double err = 0.0, ref = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
        err += (z[c] - x[c]) * (z[c] - x[c]);
        ref += x[c] * x[c];
    }
    CHECK(std::sqrt(err / ref) < 0.5);
}

TEST_CASE("stable dt and setup validation")
{
    const auto cfg = small_decay();
    const auto d = initial_levelset(cfg);
    const auto s = initial_state(cfg, d);
    const double dt = stable_dt(s, cfg.fluid, cfg.reg, cfg.cfl);
    CHECK(dt > 0.0);
    CHECK(dt < cfg.grid.spacing());
    CHECK(initial_stable_dt(cfg) > 0.0);

    ScenarioConfig bad = small_rest();
    bad.confine_initial_density = true;
    CHECK_THROWS_AS(bad.validate(), Error);

    ScenarioConfig moving_out = small_rest();
    moving_out.density.kind = DensityProfile::Kind::uniform_in_domain;
    moving_out.confine_initial_density = true;
    moving_out.boundary_velocity = VelocityFieldSpec::translation({1, 0, 0});
    moving_out.end_time = 1.0;
    CHECK_THROWS_AS(moving_out.validate(), Error);
}
