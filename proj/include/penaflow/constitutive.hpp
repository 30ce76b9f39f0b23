#pragma once

#include "penaflow/levelset.hpp"
#include "penaflow/vec.hpp"
#include "penaflow/velocity_field.hpp"

namespace penaflow {

/// Barotropic fluid with isentropic pressure p = a rho^gamma.
struct FluidParams {
    double gamma = 2.0;
    double a = 1.0;      ///< pressure coefficient
    double mu = 0.01;    ///< shear viscosity
    double eta = 0.0;    ///< bulk viscosity
    double kappa = 0.0;  ///< Navier friction coefficient
    VelocityFieldSpec body_force; ///< analytic body force density per unit mass f(t, x)

    void validate() const;
};

/// Regularisation parameters of the penalised problem.
struct RegularizationParams {
    double epsilon = 1e-3;  ///< boundary penalty
    double delta = 1e-3;    ///< artificial pressure weight
    double beta = 2.0;      ///< artificial pressure exponent
    double omega = 0.1;     ///< solid viscosity floor, mu_omega >= omega mu
    double ramp_width = 0.0; ///< width of the viscosity transition outside the interface; 0 means band width

    void validate() const;
};

double pressure(double rho, const FluidParams& fp);
/// dp/drho of the physical pressure.
double pressure_derivative(double rho, const FluidParams& fp);
/// p(rho) + delta rho^beta.
double total_pressure(double rho, const FluidParams& fp, const RegularizationParams& rp);
/// Sound speed including the artificial-pressure channel.
double sound_speed(double rho, const FluidParams& fp, const RegularizationParams& rp);

/// P(rho) + delta/(beta-1) rho^beta with P(rho) = a (rho^gamma - rho)/(gamma - 1).
double pressure_potential(double rho, const FluidParams& fp, const RegularizationParams& rp);

/// Newtonian stress mu (G + G^T - 2/3 tr G I) + eta tr G I. The 2/3 factor is used in every dimension.
Tensor viscous_stress(const Tensor& grad_u, double mu_local, const FluidParams& fp, int dim);

/// The deviatoric form G + G^T - 2/3 tr G I appearing in the dissipation.
Tensor deviatoric_form(const Tensor& grad_u, int dim);

/// s(r) = (1 + cos(pi r))/2 on [0, 1], 0 beyond.
double viscosity_cutoff(double r) noexcept;

/// mu_omega as a function of the level-set value.
double viscosity_from_levelset(double dv, double ramp_width, const FluidParams& fp, const RegularizationParams& rp);

/// mu_omega at a point: mu in the fluid, decaying to omega mu across the ramp outside the interface.
double viscosity_field(const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp, const Vec& x);

/// T_k(rho) = min(rho, k).
double truncate(double rho, double k);

/// C^1 version of T_k smoothed over [k - 1e-3 k, k + 1e-3 k]; returns {b, b'}.
struct Renormalizer {
    double value;
    double derivative;
};
Renormalizer smoothed_truncation(double rho, double k);

} // namespace penaflow
