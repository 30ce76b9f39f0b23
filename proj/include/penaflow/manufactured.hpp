#pragma once

#include "penaflow/constitutive.hpp"
#include "penaflow/vec.hpp"

namespace penaflow {

/// Smooth compactly supported manufactured solution on a fixed domain (2-D, V = 0):
///   rho* = 1 + A psi cos(pi t),  u* = B psi (1 + sin(pi t)/2, x cos(pi t)/(2 r0)),
///   psi = (1 - |x|^2/r0^2)^4 on |x| < r0.
/// Source terms were derived symbolically offline (sympy) and are evaluated in closed form.
struct ManufacturedSolution {
    double rho_amplitude = 0.2;
    double u_amplitude = 0.25;
    double support_radius = 0.5;

    [[nodiscard]] double density(double t, const Vec& x) const;
    [[nodiscard]] Vec velocity(double t, const Vec& x) const;
    [[nodiscard]] Vec momentum(double t, const Vec& x) const;

    struct Sources {
        double mass;
        Vec momentum;
    };
    [[nodiscard]] Sources sources(double t, const Vec& x, const FluidParams& fp, const RegularizationParams& rp) const;
};

} // namespace penaflow
