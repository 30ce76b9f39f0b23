#pragma once

#include <memory>
#include <vector>

#include "penaflow/grid.hpp"
#include "penaflow/velocity_field.hpp"

namespace penaflow {

/// Analytic description of the initial fluid domain. Signed distance is negative inside.
struct Shape {
    enum class Kind { disk, box, ellipse, set_union, set_intersection };

    Kind kind = Kind::disk;
    Vec center{};
    double radius = 0.5;
    Vec lo{}, hi{};          ///< box corners
    Vec semi_axes{};         ///< ellipse/ellipsoid semi-axes in its own frame
    double angle = 0.0;      ///< ellipse rotation about x3
    std::vector<Shape> children;

    static Shape disk(const Vec& c, double r);
    static Shape box(const Vec& lo, const Vec& hi);
    static Shape ellipse(const Vec& c, const Vec& semi_axes, double angle = 0.0);
    static Shape unite(std::vector<Shape> parts);
    static Shape intersect(std::vector<Shape> parts);
};

/// Signed distance to the shape boundary (exact for disk, box and ellipse; min/max for set operations).
double signed_distance(const Shape& shape, const Vec& x, int dim);

/// Largest |x| over the closure of the shape.
double shape_extent(const Shape& shape, int dim);

/// Cell-centred level set d(t, .): d < 0 in the fluid, d > 0 in the solid part of the box.
struct LevelSetField {
    Grid grid;
    std::vector<double> values;
    double time = 0.0;
    double band_width = 0.0;
    /// Present while d is still the exact distance of the initial shape (static geometry).
    std::shared_ptr<const Shape> exact;

    /// d at an arbitrary point; multilinear interpolation unless the exact shape is attached.
    [[nodiscard]] double value_at(const Vec& x) const;
    /// Central-difference gradient of the cell values (one-sided at the box faces).
    [[nodiscard]] Vec cell_gradient(std::size_t c) const;
};

enum class AdvectionScheme { upwind1, weno5 };

inline constexpr double kGeometryCfl = 0.5;
inline constexpr double kGradientTolerance = 0.1;
inline constexpr double kDegenerateGradient = 1e-8;

LevelSetField init_levelset(const Shape& shape, const Grid& grid, double band_width_cells = 3.0);

/// One transport step of d_t + V . grad d = 0 by the prescribed velocity.
LevelSetField advect_levelset(const LevelSetField& d, const VelocityFieldSpec& spec, double dt,
                              AdvectionScheme scheme = AdvectionScheme::upwind1);

struct ReinitResult {
    LevelSetField field;
    bool no_interface = false; ///< warning: d has one sign everywhere, returned unchanged
    bool skipped = false;      ///< d already satisfied the distance property in the band
};

ReinitResult reinitialize(const LevelSetField& d);

/// max | |grad d| - 1 | over band cells.
double gradient_defect(const LevelSetField& d);

Vec normal(const LevelSetField& d, const Vec& x);
Vec closest_point(const LevelSetField& d, const Vec& x);

enum class Phase { fluid, solid, band };

struct PhaseDelta {
    Phase phase;
    double delta;
};

/// Cosine-smoothed surface delta of half-width w evaluated at level-set value dv.
double smoothed_delta(double dv, double w) noexcept;

PhaseDelta phase_and_delta(const LevelSetField& d, const Vec& x);

/// Volume of {d < 0} with a linear sub-cell fraction across the zero level.
double fluid_volume(const LevelSetField& d);

/// Points on the zero level set, one per interface cell, projected to |d| < tol.
std::vector<Vec> sample_interface(const LevelSetField& d, double tol = 1e-12);

} // namespace penaflow
