#include <doctest.h>

#include <cmath>
#include <random>

#include "penaflow/constitutive.hpp"

using namespace penaflow;

namespace {

FluidParams power_law(double a, double gamma)
{
    FluidParams fp;
    fp.a = a;
    fp.gamma = gamma;
    return fp;
}

RegularizationParams no_delta()
{
    RegularizationParams rp;
    rp.delta = 0.0;
    return rp;
}

// rho * int_1^rho p(z)/z^2 dz by composite Simpson
double potential_quadrature(double rho, const FluidParams& fp)
{
    if (rho == 0.0) return 0.0;
    const int n = 2000;
    const double a = 1.0, b = rho, h = (b - a) / n;
    auto f = [&](double z) { return pressure(z, fp) / (z * z); };
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return rho * s * h / 3.0;
}

} // namespace

TEST_CASE("pressure law")
{
    const auto fp = power_law(1.0, 2.0);
    CHECK(pressure(0.0, fp) == 0.0);
    CHECK(pressure(2.0, fp) == doctest::Approx(4.0));
    CHECK(pressure(2.0, power_law(0.3, 1.7)) > pressure(1.0, power_law(0.3, 1.7)));
    CHECK_THROWS_AS(pressure(-1e-3, fp), Error);

    const auto fq = power_law(0.7, 1.6);
    for (double rho : {10.0, 100.0, 1000.0}) CHECK(std::abs(pressure(rho, fq) / std::pow(rho, 1.6) / 0.7 - 1.0) < 1e-6);

    const double h = 1e-6;
    CHECK(pressure_derivative(1.3, fq) == doctest::Approx((pressure(1.3 + h, fq) - pressure(1.3 - h, fq)) / (2 * h)).epsilon(1e-7));

    RegularizationParams rp;
    rp.delta = 0.01;
    rp.beta = 3.0;
    CHECK(total_pressure(2.0, fp, rp) == doctest::Approx(4.0 + 0.08));
}

TEST_CASE("pressure potential")
{
    const auto fp = power_law(1.0, 2.0);
    const auto rp = no_delta();
    CHECK(pressure_potential(1.0, fp, rp) == 0.0);
    CHECK(pressure_potential(2.0, fp, rp) == doctest::Approx(2.0));
    CHECK(potential_quadrature(2.0, fp) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(pressure_potential(0.0, fp, rp) == 0.0);
    CHECK(std::abs(potential_quadrature(1e-9, fp)) < 1e-8);
    CHECK_THROWS_AS(pressure_potential(-1.0, fp, rp), Error);

    // rho P'(rho) - P(rho) = p(rho), including the artificial channel with its own pressure
    RegularizationParams rd;
    rd.delta = 0.02;
    rd.beta = 2.5;
    const auto fq = power_law(0.8, 1.9);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> dist(0.05, 5.0);
    for (int i = 0; i < 100; ++i) {
        const double rho = dist(gen), e = 1e-5 * rho;
        const double dP = (pressure_potential(rho + e, fq, rd) - pressure_potential(rho - e, fq, rd)) / (2 * e);
        const double lhs = rho * dP - pressure_potential(rho, fq, rd);
        CHECK(std::abs(lhs - total_pressure(rho, fq, rd)) <= 1e-6 * total_pressure(rho, fq, rd));
    }
}

TEST_CASE("viscous stress")
{
    const FluidParams fp = power_law(1.0, 2.0);
    CHECK(contract(viscous_stress({}, 1.0, fp, 2), viscous_stress({}, 1.0, fp, 2)) == 0.0);

    Tensor shear{};
    shear[0][1] = 1.0;
    const Tensor s = viscous_stress(shear, 1.0, fp, 2);
    CHECK(s[0][0] == 0.0);
    CHECK(s[0][1] == 1.0);
    CHECK(s[1][0] == 1.0);
    CHECK(s[1][1] == 0.0);

    Tensor id{};
    id[0][0] = id[1][1] = 1.0;
    const Tensor si = viscous_stress(id, 1.0, fp, 2);
    CHECK(si[0][0] == doctest::Approx(2.0 / 3.0));
    CHECK(si[1][1] == doctest::Approx(2.0 / 3.0));
    CHECK(si[0][1] == 0.0);

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        Tensor g{}, g2{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                g[i][j] = dist(gen);
                g2[i][j] = dist(gen);
            }
        const Tensor s3 = viscous_stress(g, 1.7, fp, 3);
        CHECK(std::abs(trace(s3, 3)) < 1e-14);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(s3[i][j] == doctest::Approx(s3[j][i]));

        Tensor g2d = g;
        for (int i = 0; i < 3; ++i) g2d[2][i] = g2d[i][2] = 0.0;
        const Tensor s2 = viscous_stress(g2d, 1.7, fp, 2);
        CHECK(trace(s2, 2) == doctest::Approx((2.0 - 4.0 / 3.0) * 1.7 * trace(g2d, 2)));

        // linearity
        Tensor sum{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) sum[i][j] = g[i][j] + 2.0 * g2[i][j];
        const Tensor a = viscous_stress(g, 1.7, fp, 3), b = viscous_stress(g2, 1.7, fp, 3), c = viscous_stress(sum, 1.7, fp, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(c[i][j] == doctest::Approx(a[i][j] + 2.0 * b[i][j]));
    }

    FluidParams bulk = fp;
    bulk.eta = 0.5;
    const Tensor sb = viscous_stress(id, 0.0, bulk, 2);
    CHECK(sb[0][0] == doctest::Approx(1.0));
}

TEST_CASE("viscosity field")
{
    FluidParams fp;
    fp.mu = 0.02;
    RegularizationParams rp;
    rp.omega = 0.1;
    const auto d = init_levelset(Shape::disk({}, 0.5), Grid(2, 64, 1.0));
    const double w = d.band_width;

    CHECK(viscosity_field(d, fp, rp, {0.1, 0, 0}) == fp.mu);
    CHECK(viscosity_field(d, fp, rp, {0.5 + 2 * w, 0, 0}) == doctest::Approx(rp.omega * fp.mu));
    CHECK(viscosity_field(d, fp, rp, {0.5, 0, 0}) == doctest::Approx(fp.mu));

    RegularizationParams one = rp;
    one.omega = 1.0;
    for (double x : {0.0, 0.5, 0.52, 0.6, 0.95}) CHECK(viscosity_field(d, fp, one, {x, 0, 0}) == fp.mu);

    double prev = viscosity_from_levelset(-0.1, w, fp, rp);
    for (double dv = -0.1; dv < 0.2; dv += 1e-3) {
        const double m = viscosity_from_levelset(dv, w, fp, rp);
        CHECK(m <= prev + 1e-15);
        CHECK(m >= rp.omega * fp.mu - 1e-15);
        CHECK(m <= fp.mu);
        prev = m;
    }
    CHECK(viscosity_from_levelset(1e-9, w, fp, rp) == doctest::Approx(fp.mu));
    CHECK(viscosity_cutoff(0.0) == 1.0);
    CHECK(viscosity_cutoff(1.0) == doctest::Approx(0.0));
    CHECK(viscosity_cutoff(1.5) == 0.0);
}

TEST_CASE("truncation")
{
    CHECK(truncate(3.0, 2.0) == 2.0);
    CHECK(truncate(1.0, 2.0) == 1.0);
    std::mt19937_64 gen(11);
    std::exponential_distribution<double> dist(0.5);
    for (int i = 0; i < 200; ++i) CHECK(truncate(dist(gen), 1.5) <= 1.5);

    const auto lo = smoothed_truncation(0.5, 1.0);
    CHECK(lo.value == 0.5);
    CHECK(lo.derivative == 1.0);
    const auto hi = smoothed_truncation(3.0, 1.0);
    CHECK(hi.value == doctest::Approx(1.0));
    CHECK(hi.derivative == 0.0);
    // C^1 across the smoothing window
    double prev = smoothed_truncation(0.998, 1.0).derivative;
    for (double r = 0.998; r < 1.002; r += 1e-5) {
        const double dcur = smoothed_truncation(r, 1.0).derivative;
        CHECK(std::abs(dcur - prev) < 0.02);
        prev = dcur;
    }
}

TEST_CASE("parameter validation")
{
    FluidParams fp;
    fp.gamma = 1.2;
    CHECK_THROWS_AS(fp.validate(), Error);
    fp.gamma = 2.0;
    fp.mu = 0.0;
    CHECK_THROWS_AS(fp.validate(), Error);

    RegularizationParams rp;
    rp.epsilon = -1.0;
    CHECK_THROWS_AS(rp.validate(), Error);
    rp.epsilon = 1e-3;
    rp.beta = 1.5;
    CHECK_THROWS_AS(rp.validate(), Error);
    rp.beta = 2.0;
    rp.omega = 1.5;
    CHECK_THROWS_AS(rp.validate(), Error);
}
