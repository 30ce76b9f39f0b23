#include "penaflow/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace penaflow {

void FluidParams::validate() const
{
    if (!(gamma > 1.5)) throw Error(ErrorCode::schema_violation, "gamma must exceed 3/2");
    if (!(a > 0.0)) throw Error(ErrorCode::schema_violation, "pressure coefficient a must be positive");
    if (!(mu > 0.0)) throw Error(ErrorCode::schema_violation, "mu must be positive");
    if (!(eta >= 0.0)) throw Error(ErrorCode::schema_violation, "eta must be nonnegative");
    if (!(kappa >= 0.0)) throw Error(ErrorCode::schema_violation, "kappa must be nonnegative");
}

void RegularizationParams::validate() const
{
    if (!(epsilon > 0.0)) throw Error(ErrorCode::schema_violation, "epsilon must be positive");
    if (!(delta >= 0.0)) throw Error(ErrorCode::schema_violation, "delta must be nonnegative");
    if (!(beta >= 2.0)) throw Error(ErrorCode::schema_violation, "beta must be at least 2");
    if (!(omega > 0.0 && omega <= 1.0)) throw Error(ErrorCode::schema_violation, "omega must lie in (0, 1]");
    if (!(ramp_width >= 0.0)) throw Error(ErrorCode::schema_violation, "ramp_width must be nonnegative");
}

namespace {
void require_nonnegative(double rho)
{
    if (rho < 0.0 || std::isnan(rho)) throw Error(ErrorCode::negative_density, "density must be nonnegative");
}
} // namespace

double pressure(double rho, const FluidParams& fp)
{
    require_nonnegative(rho);
    return fp.a * std::pow(rho, fp.gamma);
}

double pressure_derivative(double rho, const FluidParams& fp)
{
    require_nonnegative(rho);
    return fp.a * fp.gamma * std::pow(rho, fp.gamma - 1.0);
}

double total_pressure(double rho, const FluidParams& fp, const RegularizationParams& rp)
{
    return pressure(rho, fp) + rp.delta * std::pow(rho, rp.beta);
}

double sound_speed(double rho, const FluidParams& fp, const RegularizationParams& rp)
{
    const double c2 = pressure_derivative(rho, fp) + rp.delta * rp.beta * std::pow(rho, rp.beta - 1.0);
    return std::sqrt(c2);
}

double pressure_potential(double rho, const FluidParams& fp, const RegularizationParams& rp)
{
    require_nonnegative(rho);
    const double p_part = fp.a * (std::pow(rho, fp.gamma) - rho) / (fp.gamma - 1.0);
    return p_part + rp.delta / (rp.beta - 1.0) * std::pow(rho, rp.beta);
}

Tensor deviatoric_form(const Tensor& g, int dim)
{
    Tensor f{};
    const double div = trace(g, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) f[i][j] = g[i][j] + g[j][i];
    for (int i = 0; i < dim; ++i) f[i][i] -= 2.0 / 3.0 * div;
    return f;
}

Tensor viscous_stress(const Tensor& grad_u, double mu_local, const FluidParams& fp, int dim)
{
    Tensor s = deviatoric_form(grad_u, dim);
    const double div = trace(grad_u, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s[i][j] *= mu_local;
    for (int i = 0; i < dim; ++i) s[i][i] += fp.eta * div;
    return s;
}

double viscosity_cutoff(double r) noexcept
{
    if (r <= 0.0) return 1.0;
    if (r >= 1.0) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * r));
}

double viscosity_from_levelset(double dv, double ramp_width, const FluidParams& fp, const RegularizationParams& rp)
{
    if (dv <= 0.0) return fp.mu;
    const double s = ramp_width > 0.0 ? viscosity_cutoff(dv / ramp_width) : 0.0;
    return fp.mu * (rp.omega + (1.0 - rp.omega) * s);
}

double viscosity_field(const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp, const Vec& x)
{
    const double ramp = rp.ramp_width > 0.0 ? rp.ramp_width : d.band_width;
    return viscosity_from_levelset(d.value_at(x), ramp, fp, rp);
}

double truncate(double rho, double k) { return std::min(rho, k); }

Renormalizer smoothed_truncation(double rho, double k)
{
    const double w = 1e-3 * k;
    if (rho <= k - w) return {rho, 1.0};
    if (rho >= k + w) return {k, 0.0};
    const double s = rho - (k - w);
    return {rho - s * s / (4.0 * w), 1.0 - s / (2.0 * w)};
}

} // namespace penaflow
