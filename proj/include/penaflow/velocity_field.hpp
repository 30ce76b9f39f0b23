#pragma once

#include <limits>
#include <vector>

#include "penaflow/vec.hpp"

namespace penaflow {

/// Prescribed boundary velocity V(t, x). Composite specs nest through `children`.
struct VelocityFieldSpec {
    enum class Kind { zero, rigid_translation, rigid_rotation, linear, time_ramped, superposition };

    Kind kind = Kind::zero;
    Vec vector{};            ///< translation velocity
    Vec center{};            ///< rotation / strain centre
    double angular_rate = 0; ///< rotation rate about the x3 axis
    Tensor matrix{};         ///< linear: V = matrix (x - center)
    double ramp_time = 0;    ///< time_ramped: smooth start over [0, ramp_time]
    std::vector<VelocityFieldSpec> children;

    /// V vanishes for |x| >= cutoff_radius; it is tapered smoothly over the last taper_width.
    double cutoff_radius = std::numeric_limits<double>::infinity();
    double taper_width = 0.0;

    static VelocityFieldSpec make_zero() { return {}; }
    static VelocityFieldSpec translation(const Vec& v, double cutoff = std::numeric_limits<double>::infinity(), double taper = 0.0);
    static VelocityFieldSpec rotation(const Vec& center, double rate, double cutoff = std::numeric_limits<double>::infinity(), double taper = 0.0);
    static VelocityFieldSpec strain(const Tensor& a, const Vec& center, double cutoff = std::numeric_limits<double>::infinity(), double taper = 0.0);
    static VelocityFieldSpec ramped(VelocityFieldSpec inner, double ramp_time);
    static VelocityFieldSpec sum(std::vector<VelocityFieldSpec> parts);

    [[nodiscard]] bool is_zero() const noexcept;
};

/// V(t, x); identically zero outside the cutoff ball.
Vec eval_velocity(const VelocityFieldSpec& spec, double t, const Vec& x);

/// Position X(t, x0) of the characteristic dX/dt = V(t, X) started at x0, by classical RK4.
Vec flow_map(const VelocityFieldSpec& spec, double t, const Vec& x0, double dt_geom = 1e-3);

/// Largest cutoff radius found in the spec tree (infinite when any part is unbounded).
double support_radius(const VelocityFieldSpec& spec);

} // namespace penaflow
