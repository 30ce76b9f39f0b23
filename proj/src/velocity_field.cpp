#include "penaflow/velocity_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace penaflow {

VelocityFieldSpec VelocityFieldSpec::translation(const Vec& v, double cutoff, double taper)
{
    VelocityFieldSpec s;
    s.kind = Kind::rigid_translation;
    s.vector = v;
    s.cutoff_radius = cutoff;
    s.taper_width = taper;
    return s;
}

VelocityFieldSpec VelocityFieldSpec::rotation(const Vec& center, double rate, double cutoff, double taper)
{
    VelocityFieldSpec s;
    s.kind = Kind::rigid_rotation;
    s.center = center;
    s.angular_rate = rate;
    s.cutoff_radius = cutoff;
    s.taper_width = taper;
    return s;
}

VelocityFieldSpec VelocityFieldSpec::strain(const Tensor& a, const Vec& center, double cutoff, double taper)
{
    VelocityFieldSpec s;
    s.kind = Kind::linear;
    s.matrix = a;
    s.center = center;
    s.cutoff_radius = cutoff;
    s.taper_width = taper;
    return s;
}

VelocityFieldSpec VelocityFieldSpec::ramped(VelocityFieldSpec inner, double ramp_time)
{
    VelocityFieldSpec s;
    s.kind = Kind::time_ramped;
    s.ramp_time = ramp_time;
    s.children.push_back(std::move(inner));
    return s;
}

VelocityFieldSpec VelocityFieldSpec::sum(std::vector<VelocityFieldSpec> parts)
{
    VelocityFieldSpec s;
    s.kind = Kind::superposition;
    s.children = std::move(parts);
    return s;
}

bool VelocityFieldSpec::is_zero() const noexcept
{
    switch (kind) {
    case Kind::zero: return true;
    case Kind::rigid_translation: return vector == Vec{};
    case Kind::rigid_rotation: return angular_rate == 0.0;
    case Kind::linear: return matrix == Tensor{};
    case Kind::time_ramped:
    case Kind::superposition:
        return std::all_of(children.begin(), children.end(), [](const auto& c) { return c.is_zero(); });
    }
    return false;
}

namespace {

double taper_factor(const VelocityFieldSpec& spec, const Vec& x)
{
    if (!std::isfinite(spec.cutoff_radius)) return 1.0;
    const double r = norm(x);
    if (r >= spec.cutoff_radius) return 0.0;
    const double inner = spec.cutoff_radius - spec.taper_width;
    if (r <= inner || spec.taper_width <= 0.0) return 1.0;
    const double s = (r - inner) / spec.taper_width;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * s));
}

} // namespace

Vec eval_velocity(const VelocityFieldSpec& spec, double t, const Vec& x)
{
    const double cut = taper_factor(spec, x);
    if (cut == 0.0) return {};

    Vec v{};
    switch (spec.kind) {
    case VelocityFieldSpec::Kind::zero: break;
    case VelocityFieldSpec::Kind::rigid_translation: v = spec.vector; break;
    case VelocityFieldSpec::Kind::rigid_rotation: {
        const Vec r = x - spec.center;
        v = {-spec.angular_rate * r[1], spec.angular_rate * r[0], 0.0};
        break;
    }
    case VelocityFieldSpec::Kind::linear: {
        const Vec r = x - spec.center;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) v[i] += spec.matrix[i][j] * r[j];
        break;
    }
    case VelocityFieldSpec::Kind::time_ramped: {
        double f = 1.0;
        if (spec.ramp_time > 0.0 && t < spec.ramp_time)
            f = t <= 0.0 ? 0.0 : 0.5 * (1.0 - std::cos(std::numbers::pi * t / spec.ramp_time));
        for (const auto& c : spec.children) v += f * eval_velocity(c, t, x);
        break;
    }
    case VelocityFieldSpec::Kind::superposition:
        for (const auto& c : spec.children) v += eval_velocity(c, t, x);
        break;
    }
    return cut * v;
}

Vec flow_map(const VelocityFieldSpec& spec, double t, const Vec& x0, double dt_geom)
{
    if (t <= 0.0) return x0;
    const int steps = std::max(1, static_cast<int>(std::ceil(t / dt_geom)));
    const double dt = t / steps;
    Vec x = x0;
    double s = 0.0;
    for (int n = 0; n < steps; ++n) {
        const Vec k1 = eval_velocity(spec, s, x);
        const Vec k2 = eval_velocity(spec, s + 0.5 * dt, x + 0.5 * dt * k1);
        const Vec k3 = eval_velocity(spec, s + 0.5 * dt, x + 0.5 * dt * k2);
        const Vec k4 = eval_velocity(spec, s + dt, x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += dt;
    }
    return x;
}

double support_radius(const VelocityFieldSpec& spec)
{
    double r = spec.cutoff_radius;
    if (spec.kind == VelocityFieldSpec::Kind::zero) return 0.0;
    if (spec.kind == VelocityFieldSpec::Kind::time_ramped || spec.kind == VelocityFieldSpec::Kind::superposition) {
        double inner = 0.0;
        for (const auto& c : spec.children) inner = std::max(inner, support_radius(c));
        r = std::min(r, inner);
    }
    return r;
}

} // namespace penaflow
