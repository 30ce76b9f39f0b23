#include "penaflow/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace penaflow {

Shape Shape::disk(const Vec& c, double r)
{
    Shape s;
    s.kind = Kind::disk;
    s.center = c;
    s.radius = r;
    return s;
}

Shape Shape::box(const Vec& lo, const Vec& hi)
{
    Shape s;
    s.kind = Kind::box;
    s.lo = lo;
    s.hi = hi;
    return s;
}

Shape Shape::ellipse(const Vec& c, const Vec& semi_axes, double angle)
{
    Shape s;
    s.kind = Kind::ellipse;
    s.center = c;
    s.semi_axes = semi_axes;
    s.angle = angle;
    return s;
}

Shape Shape::unite(std::vector<Shape> parts)
{
    Shape s;
    s.kind = Kind::set_union;
    s.children = std::move(parts);
    return s;
}

Shape Shape::intersect(std::vector<Shape> parts)
{
    Shape s;
    s.kind = Kind::set_intersection;
    s.children = std::move(parts);
    return s;
}

namespace {

double box_distance(const Shape& s, const Vec& x, int dim)
{
    double outside2 = 0.0;
    double inside = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim; ++a) {
        const double c = 0.5 * (s.lo[a] + s.hi[a]);
        const double half = 0.5 * (s.hi[a] - s.lo[a]);
        const double q = std::abs(x[a] - c) - half;
        outside2 += std::max(q, 0.0) * std::max(q, 0.0);
        inside = std::max(inside, q);
    }
    return std::sqrt(outside2) + std::min(inside, 0.0);
}

// Distance from y (first orthant, ellipse frame) to the ellipse/ellipsoid with semi-axes e.
// Bisection on the Lagrange multiplier of the closest-point problem.
double ellipse_distance(Vec y, const Vec& e, int dim)
{
    double emax = 0.0;
    for (int a = 0; a < dim; ++a) emax = std::max(emax, e[a]);
    for (int a = 0; a < dim; ++a) y[a] = std::max(std::abs(y[a]), 1e-13 * emax);

    double level = 0.0;
    for (int a = 0; a < dim; ++a) level += (y[a] / e[a]) * (y[a] / e[a]);

    double emin2 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim; ++a) emin2 = std::min(emin2, e[a] * e[a]);

    auto f = [&](double t) {
        double s = -1.0;
        for (int a = 0; a < dim; ++a) {
            const double q = e[a] * y[a] / (t + e[a] * e[a]);
            s += q * q;
        }
        return s;
    };
    double lo = -emin2;
    double hi = emax * norm(y) + emax;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    double dist2 = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double xa = e[a] * e[a] * y[a] / (t + e[a] * e[a]);
        dist2 += (xa - y[a]) * (xa - y[a]);
    }
    const double d = std::sqrt(dist2);
    return level < 1.0 ? -d : d;
}

} // namespace

double signed_distance(const Shape& shape, const Vec& x, int dim)
{
    switch (shape.kind) {
    case Shape::Kind::disk: {
        Vec r = x - shape.center;
        if (dim == 2) r[2] = 0.0;
        return norm(r) - shape.radius;
    }
    case Shape::Kind::box: return box_distance(shape, x, dim);
    case Shape::Kind::ellipse: {
        const Vec r = x - shape.center;
        const double c = std::cos(shape.angle), s = std::sin(shape.angle);
        const Vec local{c * r[0] + s * r[1], -s * r[0] + c * r[1], dim == 3 ? r[2] : 0.0};
        return ellipse_distance(local, shape.semi_axes, dim);
    }
    case Shape::Kind::set_union: {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& c : shape.children) v = std::min(v, signed_distance(c, x, dim));
        return v;
    }
    case Shape::Kind::set_intersection: {
        double v = -std::numeric_limits<double>::infinity();
        for (const auto& c : shape.children) v = std::max(v, signed_distance(c, x, dim));
        return v;
    }
    }
    return 0.0;
}

double shape_extent(const Shape& shape, int dim)
{
    switch (shape.kind) {
    case Shape::Kind::disk: return norm(shape.center) + shape.radius;
    case Shape::Kind::box: {
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double m = std::max(std::abs(shape.lo[a]), std::abs(shape.hi[a]));
            r2 += m * m;
        }
        return std::sqrt(r2);
    }
    case Shape::Kind::ellipse: {
        double emax = 0.0;
        for (int a = 0; a < dim; ++a) emax = std::max(emax, shape.semi_axes[a]);
        return norm(shape.center) + emax;
    }
    case Shape::Kind::set_union: {
        double r = 0.0;
        for (const auto& c : shape.children) r = std::max(r, shape_extent(c, dim));
        return r;
    }
    case Shape::Kind::set_intersection: {
        double r = std::numeric_limits<double>::infinity();
        for (const auto& c : shape.children) r = std::min(r, shape_extent(c, dim));
        return r;
    }
    }
    return 0.0;
}

double LevelSetField::value_at(const Vec& x) const
{
    if (exact) return signed_distance(*exact, x, grid.dim);

    const double h = grid.spacing();
    std::array<int, 3> i0{0, 0, 0};
    std::array<double, 3> f{0, 0, 0};
    for (int a = 0; a < grid.dim; ++a) {
        const double s = (x[a] + grid.half_width) / h - 0.5;
        i0[a] = std::clamp(static_cast<int>(std::floor(s)), 0, grid.n - 2);
        f[a] = s - i0[a];
    }
    double v = 0.0;
    const int corners = grid.dim == 2 ? 4 : 8;
    for (int m = 0; m < corners; ++m) {
        double w = 1.0;
        std::array<int, 3> id{0, 0, 0};
        for (int a = 0; a < grid.dim; ++a) {
            const int bit = (m >> a) & 1;
            id[a] = i0[a] + bit;
            w *= bit ? f[a] : 1.0 - f[a];
        }
        v += w * values[grid.index(id[0], id[1], id[2])];
    }
    return v;
}

Vec LevelSetField::cell_gradient(std::size_t c) const
{
    const double h = grid.spacing();
    Vec g{};
    for (int a = 0; a < grid.dim; ++a) {
        const long m = grid.neighbor(c, a, -1);
        const long p = grid.neighbor(c, a, +1);
        if (m >= 0 && p >= 0)
            g[a] = (values[p] - values[m]) / (2.0 * h);
        else if (p >= 0)
            g[a] = (values[p] - values[c]) / h;
        else if (m >= 0)
            g[a] = (values[c] - values[m]) / h;
    }
    return g;
}

LevelSetField init_levelset(const Shape& shape, const Grid& grid, double band_width_cells)
{
    grid.validate();
    // sample the box faces: no face point may be inside the fluid
    const int samples = 64;
    for (int a = 0; a < grid.dim; ++a)
        for (double sgn : {-1.0, 1.0})
            for (int i = 0; i <= samples; ++i)
                for (int j = 0; j <= (grid.dim == 3 ? samples : 0); ++j) {
                    Vec p{};
                    p[a] = sgn * grid.half_width;
                    const int b = (a + 1) % grid.dim;
                    p[b] = -grid.half_width + 2.0 * grid.half_width * i / samples;
                    if (grid.dim == 3) p[(a + 2) % 3] = -grid.half_width + 2.0 * grid.half_width * j / samples;
                    if (signed_distance(shape, p, grid.dim) <= 0.0)
                        throw Error(ErrorCode::shape_outside_box, "initial domain touches the box boundary");
                }

    LevelSetField d;
    d.grid = grid;
    d.band_width = band_width_cells * grid.spacing();
    d.exact = std::make_shared<const Shape>(shape);
    d.values.resize(grid.cell_count());
    bool has_fluid = false;
    for (std::size_t c = 0; c < d.values.size(); ++c) {
        d.values[c] = signed_distance(shape, grid.center(c), grid.dim);
        has_fluid = has_fluid || d.values[c] < 0.0;
    }
    if (!has_fluid) throw Error(ErrorCode::shape_outside_box, "initial domain contains no grid cell");
    return d;
}

namespace {

// Ghost value beyond the box by linear extrapolation along `axis`.
double extrapolated(const LevelSetField& d, std::array<int, 3> id, int axis)
{
    const int n = d.grid.n;
    const int i = id[axis];
    auto at = [&](int k) {
        auto q = id;
        q[axis] = k;
        return d.values[d.grid.index(q[0], q[1], q[2])];
    };
    if (i < 0) return at(0) + i * (at(1) - at(0));
    if (i >= n) return at(n - 1) + (i - n + 1) * (at(n - 1) - at(n - 2));
    return at(i);
}

double weno5(double v1, double v2, double v3, double v4, double v5)
{
    const double eps = 1e-6;
    const double s1 = 13.0 / 12.0 * (v1 - 2 * v2 + v3) * (v1 - 2 * v2 + v3) + 0.25 * (v1 - 4 * v2 + 3 * v3) * (v1 - 4 * v2 + 3 * v3);
    const double s2 = 13.0 / 12.0 * (v2 - 2 * v3 + v4) * (v2 - 2 * v3 + v4) + 0.25 * (v2 - v4) * (v2 - v4);
    const double s3 = 13.0 / 12.0 * (v3 - 2 * v4 + v5) * (v3 - 2 * v4 + v5) + 0.25 * (3 * v3 - 4 * v4 + v5) * (3 * v3 - 4 * v4 + v5);
    const double a1 = 0.1 / ((eps + s1) * (eps + s1));
    const double a2 = 0.6 / ((eps + s2) * (eps + s2));
    const double a3 = 0.3 / ((eps + s3) * (eps + s3));
    const double sum = a1 + a2 + a3;
    return (a1 * (v1 / 3.0 - 7.0 / 6.0 * v2 + 11.0 / 6.0 * v3) + a2 * (-v2 / 6.0 + 5.0 / 6.0 * v3 + v4 / 3.0) +
            a3 * (v3 / 3.0 + 5.0 / 6.0 * v4 - v5 / 6.0)) /
           sum;
}

// -V . grad d with upwinded one-sided derivatives.
std::vector<double> transport_rate(const LevelSetField& d, const VelocityFieldSpec& spec, double t, AdvectionScheme scheme)
{
    const Grid& g = d.grid;
    const double h = g.spacing();
    std::vector<double> rate(d.values.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (long cl = 0; cl < static_cast<long>(d.values.size()); ++cl) {
        const auto c = static_cast<std::size_t>(cl);
        const Vec v = eval_velocity(spec, t, g.center(c));
        const auto id = g.ijk(c);
        double r = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            if (v[a] == 0.0) continue;
            auto val = [&](int off) {
                auto q = id;
                q[a] += off;
                return extrapolated(d, q, a);
            };
            double deriv;
            if (scheme == AdvectionScheme::upwind1) {
                deriv = v[a] > 0.0 ? (val(0) - val(-1)) / h : (val(1) - val(0)) / h;
            } else {
                std::array<double, 6> dd{};
                if (v[a] > 0.0) {
                    for (int k = 0; k < 5; ++k) dd[k] = (val(k - 2) - val(k - 3)) / h;
                    deriv = weno5(dd[0], dd[1], dd[2], dd[3], dd[4]);
                } else {
                    for (int k = 0; k < 5; ++k) dd[k] = (val(3 - k) - val(2 - k)) / h;
                    deriv = weno5(dd[0], dd[1], dd[2], dd[3], dd[4]);
                }
            }
            r -= v[a] * deriv;
        }
        rate[c] = r;
    }
    return rate;
}

} // namespace

LevelSetField advect_levelset(const LevelSetField& d, const VelocityFieldSpec& spec, double dt, AdvectionScheme scheme)
{
    LevelSetField out = d;
    out.time = d.time + dt;
    if (spec.is_zero() || dt == 0.0) return out;

    const Grid& g = d.grid;
    double vmax = 0.0;
    for (std::size_t c = 0; c < d.values.size(); ++c) {
        const Vec v = eval_velocity(spec, d.time, g.center(c));
        for (int a = 0; a < g.dim; ++a) vmax = std::max(vmax, std::abs(v[a]));
    }
    if (vmax * dt > kGeometryCfl * g.spacing() * (1.0 + 1e-12))
        throw Error(ErrorCode::cfl_violation, "level-set transport step exceeds the geometric CFL bound");

    out.exact.reset();
    const auto n = d.values.size();
    if (scheme == AdvectionScheme::upwind1) {
        const auto r = transport_rate(d, spec, d.time, scheme);
        for (std::size_t c = 0; c < n; ++c) out.values[c] = d.values[c] + dt * r[c];
        return out;
    }
    // SSP-RK3
    LevelSetField s1 = out, s2 = out;
    auto r0 = transport_rate(d, spec, d.time, scheme);
    for (std::size_t c = 0; c < n; ++c) s1.values[c] = d.values[c] + dt * r0[c];
    auto r1 = transport_rate(s1, spec, d.time + dt, scheme);
    for (std::size_t c = 0; c < n; ++c) s2.values[c] = 0.75 * d.values[c] + 0.25 * (s1.values[c] + dt * r1[c]);
    auto r2 = transport_rate(s2, spec, d.time + 0.5 * dt, scheme);
    for (std::size_t c = 0; c < n; ++c)
        out.values[c] = d.values[c] / 3.0 + 2.0 / 3.0 * (s2.values[c] + dt * r2[c]);
    return out;
}

double gradient_defect(const LevelSetField& d)
{
    double worst = 0.0;
    for (std::size_t c = 0; c < d.values.size(); ++c) {
        if (std::abs(d.values[c]) >= d.band_width) continue;
        worst = std::max(worst, std::abs(norm(d.cell_gradient(c)) - 1.0));
    }
    return worst;
}

namespace {

constexpr double kSkipDefect = 0.02;

double eikonal_update(std::array<double, 3> a, int dim, double h)
{
    std::sort(a.begin(), a.begin() + dim);
    double u = a[0] + h;
    for (int k = 1; k < dim; ++k) {
        if (u <= a[k]) break;
        double s = 0.0, s2 = 0.0;
        for (int j = 0; j <= k; ++j) {
            s += a[j];
            s2 += a[j] * a[j];
        }
        const int m = k + 1;
        const double disc = s * s - m * (s2 - h * h);
        u = (s + std::sqrt(std::max(disc, 0.0))) / m;
    }
    return u;
}

} // namespace

ReinitResult reinitialize(const LevelSetField& d)
{
    ReinitResult res{d, false, false};
    const Grid& g = d.grid;
    const double h = g.spacing();
    const auto n = d.values.size();
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<double> dist(n, inf);
    bool any_interface = false;
    for (std::size_t c = 0; c < n; ++c) {
        const double v = d.values[c];
        if (v == 0.0) {
            dist[c] = 0.0;
            any_interface = true;
            continue;
        }
        double inv2 = 0.0;
        bool crossing = false;
        for (int a = 0; a < g.dim; ++a) {
            double theta = inf;
            for (int off : {-1, 1}) {
                const long m = g.neighbor(c, a, off);
                if (m < 0) continue;
                const double w = d.values[m];
                if ((v < 0.0) != (w < 0.0)) theta = std::min(theta, v / (v - w));
            }
            if (theta < inf) {
                crossing = true;
                const double l = std::max(theta * h, 1e-14 * h);
                inv2 += 1.0 / (l * l);
            }
        }
        if (crossing) {
            dist[c] = 1.0 / std::sqrt(inv2);
            any_interface = true;
        }
    }
    if (!any_interface) {
        res.no_interface = true;
        return res;
    }
    if (gradient_defect(d) <= kSkipDefect) {
        res.skipped = true;
        return res;
    }

    std::vector<char> fixed(n, 0);
    for (std::size_t c = 0; c < n; ++c) fixed[c] = dist[c] < inf;

    const int nz = g.nz();
    const int orders = g.dim == 2 ? 4 : 8;
    for (int iter = 0; iter < 2; ++iter) {
        for (int o = 0; o < orders; ++o) {
            const int si = (o & 1) ? -1 : 1, sj = (o & 2) ? -1 : 1, sk = (o & 4) ? -1 : 1;
            for (int kk = 0; kk < nz; ++kk) {
                const int k = sk > 0 ? kk : nz - 1 - kk;
                for (int jj = 0; jj < g.n; ++jj) {
                    const int j = sj > 0 ? jj : g.n - 1 - jj;
                    for (int ii = 0; ii < g.n; ++ii) {
                        const int i = si > 0 ? ii : g.n - 1 - ii;
                        const std::size_t c = g.index(i, j, k);
                        if (fixed[c]) continue;
                        std::array<double, 3> a{inf, inf, inf};
                        for (int ax = 0; ax < g.dim; ++ax)
                            for (int off : {-1, 1}) {
                                const long m = g.neighbor(c, ax, off);
                                if (m >= 0) a[ax] = std::min(a[ax], dist[m]);
                            }
                        if (std::all_of(a.begin(), a.begin() + g.dim, [](double x) { return x == inf; })) continue;
                        dist[c] = std::min(dist[c], eikonal_update(a, g.dim, h));
                    }
                }
            }
        }
    }

    res.field.exact.reset();
    for (std::size_t c = 0; c < n; ++c) {
        const double mag = dist[c] < inf ? dist[c] : std::abs(d.values[c]);
        res.field.values[c] = d.values[c] < 0.0 ? -mag : mag;
    }
    return res;
}

Vec normal(const LevelSetField& d, const Vec& x)
{
    Vec g{};
    if (d.exact) {
        // fourth-order differences of the exact distance
        const double s = 1e-2 * d.grid.spacing();
        for (int a = 0; a < d.grid.dim; ++a) {
            Vec p1 = x, m1 = x, p2 = x, m2 = x;
            p1[a] += s;
            m1[a] -= s;
            p2[a] += 2.0 * s;
            m2[a] -= 2.0 * s;
            g[a] = (8.0 * (d.value_at(p1) - d.value_at(m1)) - (d.value_at(p2) - d.value_at(m2))) / (12.0 * s);
        }
    } else {
        const double s = d.grid.spacing();
        for (int a = 0; a < d.grid.dim; ++a) {
            Vec p = x, m = x;
            p[a] += s;
            m[a] -= s;
            g[a] = (d.value_at(p) - d.value_at(m)) / (2.0 * s);
        }
    }
    const double len = norm(g);
    if (len <= kDegenerateGradient) throw Error(ErrorCode::degenerate_gradient, "level-set gradient vanishes");
    return (1.0 / len) * g;
}

Vec closest_point(const LevelSetField& d, const Vec& x)
{
    const double dv = d.value_at(x);
    if (std::abs(dv) > d.band_width) throw Error(ErrorCode::outside_band, "point is outside the interface band");
    Vec b = x - dv * normal(d, x);
    for (int it = 0; it < 3; ++it) {
        const double r = d.value_at(b);
        if (std::abs(r) < 1e-13) break;
        b -= r * normal(d, b);
    }
    return b;
}

double smoothed_delta(double dv, double w) noexcept
{
    if (std::abs(dv) >= w) return 0.0;
    return (1.0 + std::cos(std::numbers::pi * dv / w)) / (2.0 * w);
}

PhaseDelta phase_and_delta(const LevelSetField& d, const Vec& x)
{
    const double dv = d.value_at(x);
    const double w = d.band_width;
    if (std::abs(dv) < w) return {Phase::band, smoothed_delta(dv, w)};
    return {dv < 0.0 ? Phase::fluid : Phase::solid, 0.0};
}

double fluid_volume(const LevelSetField& d)
{
    const double h = d.grid.spacing();
    std::vector<double> frac(d.values.size());
    for (std::size_t c = 0; c < d.values.size(); ++c) {
        const double slope = std::max(norm(d.cell_gradient(c)), 1e-12) * h;
        frac[c] = std::clamp(0.5 - d.values[c] / slope, 0.0, 1.0);
    }
    return pairwise_sum(frac) * d.grid.cell_volume();
}

std::vector<Vec> sample_interface(const LevelSetField& d, double tol)
{
    std::vector<Vec> pts;
    const Grid& g = d.grid;
    for (std::size_t c = 0; c < d.values.size(); ++c) {
        const double v = d.values[c];
        if (v >= 0.0) continue; // one sample per crossing, taken from the fluid side
        bool crossing = false;
        for (int a = 0; a < g.dim && !crossing; ++a)
            for (int off : {-1, 1}) {
                const long m = g.neighbor(c, a, off);
                if (m >= 0 && d.values[m] >= 0.0) crossing = true;
            }
        if (!crossing) continue;
        Vec p = g.center(c);
        for (int it = 0; it < 20; ++it) {
            const double r = d.value_at(p);
            if (std::abs(r) <= tol) break;
            p -= r * normal(d, p);
        }
        pts.push_back(p);
    }
    return pts;
}

} // namespace penaflow
