#pragma once

#include <functional>
#include <string>
#include <vector>

#include "penaflow/constitutive.hpp"
#include "penaflow/levelset.hpp"
#include "penaflow/scenario.hpp"

namespace penaflow {

/// Snapshots of a run at consecutive time levels (normally every step).
struct Trajectory {
    std::vector<FlowState> states;
    std::vector<LevelSetField> levelsets;
    FluidParams fluid;
    RegularizationParams reg;
};

/// exp(1 - 1/(1 - s^2)) for |s| < 1, 0 beyond. Smooth with compact support.
double bump(double s) noexcept;

/// phi(t, x) = poly(x - center) * bump(|x - center| / radius) * cos(omega t), poly of degree one.
struct ScalarTest {
    std::string id;
    Vec center{};
    double radius = 0.5;
    double c0 = 1.0;
    Vec linear{};
    double omega = 0.0;

    [[nodiscard]] double value(double t, const Vec& x) const;
    [[nodiscard]] Vec gradient(double t, const Vec& x) const;
};

using PointField = std::function<Vec(const Vec&)>;

/// Vector test field phi(t, .), possibly depending on the level set at time t.
struct VectorTest {
    std::string id;
    std::function<PointField(const LevelSetField& d, double t)> at;
    Vec support_center{};
    double support_radius = 0.0; ///< phi vanishes outside this ball
    bool time_dependent = false; ///< false: phi changes only through the level set
};

/// Constant vector times a bump: admissible when its support stays away from the interface.
VectorTest bump_vector_test(const std::string& id, const Vec& center, double radius, const Vec& direction);
/// psi(|x - c|) (-(x2 - c2), x1 - c1): solenoidal, tangent to every circle about c.
VectorTest swirl_test(const std::string& id, const Vec& center, double radius, double amplitude = 1.0);

/// Interface-adapted field built from a base field: tangential closest-point extension of base,
/// corrected along normals to be divergence free in the band, blended back to base outside it.
struct AdmissibleTest {
    LevelSetField levelset;
    std::function<Vec(double t, const Vec& x)> base;
    double inner_width = 0.0; ///< pure extension for |d| <= inner_width
    double outer_width = 0.0; ///< plain base for |d| >= outer_width
    double time = 0.0;

    [[nodiscard]] Vec operator()(const Vec& x) const;
    /// Fourth-order finite-difference divergence at x.
    [[nodiscard]] double divergence(const Vec& x) const;
    /// max |div| over cell centres in the pure-extension part of the band.
    [[nodiscard]] double max_band_divergence() const;

private:
    [[nodiscard]] Vec extension(const Vec& x) const;
    [[nodiscard]] Vec tangential(const Vec& x) const;
    [[nodiscard]] double divergence_of_tangential(const Vec& x) const;
    [[nodiscard]] double normal_divergence(const Vec& x) const;
};

AdmissibleTest make_admissible_test(const LevelSetField& d, std::function<Vec(double, const Vec&)> base, double t = 0.0);

/// Wraps make_admissible_test so it is rebuilt on the level set of every snapshot. A positive
/// band_width fixes the blend width in physical units, so the field is the same on every grid.
VectorTest admissible_vector_test(const std::string& id, std::function<Vec(double, const Vec&)> base,
                                  const Vec& support_center, double support_radius, double band_width = 0.0);

/// Largest |phi . n| over interface samples of d at time t.
double normal_trace(const VectorTest& phi, const LevelSetField& d, double t);

enum class Renormalization { linear, truncation, smooth_cutoff };

struct RenormalizationSpec {
    Renormalization kind = Renormalization::truncation;
    double k = 1.0;
};

/// {b(rho), b'(rho)}.
Renormalizer renormalize(double rho, const RenormalizationSpec& b);

double continuity_residual(const Trajectory& traj, const ScalarTest& phi);
double renormalized_residual(const Trajectory& traj, const RenormalizationSpec& b, const ScalarTest& phi);
/// Momentum identity on the fluid region; rejects fields with |phi . n| > 1e-6 on the interface.
double weak_momentum_residual(const Trajectory& traj, const VectorTest& phi);

} // namespace penaflow
