#include "penaflow/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "penaflow/error.hpp"
#include "penaflow/stencil.hpp"

namespace penaflow {

namespace {

void require_support(const Vec& c, double r, const Grid& g, const std::string& id)
{
    for (int a = 0; a < g.dim; ++a)
        if (std::abs(c[a]) + r > g.half_width)
            throw Error(ErrorCode::test_not_compactly_supported, "test '" + id + "' reaches the box boundary");
}

void require_trajectory(const Trajectory& traj)
{
    if (traj.states.size() < 2 || traj.levelsets.size() != traj.states.size())
        throw Error(ErrorCode::invalid_argument, "trajectory needs at least two snapshots with level sets");
}

CellVectors velocities(const FlowState& s)
{
    CellVectors u = make_cell_vectors(s.grid);
    for (std::size_t c = 0; c < s.grid.cell_count(); ++c) {
        const Vec v = s.velocity(c);
        for (int a = 0; a < 3; ++a) u[a][c] = v[a];
    }
    return u;
}

// fourth-order central difference weights at offsets -2h, -h, h, 2h
constexpr double kFd4[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
constexpr double kFd4Offsets[4] = {-2.0, -1.0, 1.0, 2.0};

template <class F>
double fd4_divergence(F&& field, const Vec& x, int dim, double step)
{
    double div = 0.0;
    for (int a = 0; a < dim; ++a)
        for (int k = 0; k < 4; ++k) {
            Vec p = x;
            p[a] += kFd4Offsets[k] * step;
            div += kFd4[k] * field(p)[a] / step;
        }
    return div;
}

} // namespace

double bump(double s) noexcept
{
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double ScalarTest::value(double t, const Vec& x) const
{
    const Vec y = x - center;
    const double b = bump(norm(y) / radius);
    if (b == 0.0) return 0.0;
    return (c0 + dot(linear, y)) * b * std::cos(omega * t);
}

Vec ScalarTest::gradient(double t, const Vec& x) const
{
    const Vec y = x - center;
    const double s = norm(y) / radius;
    const double b = bump(s);
    if (b == 0.0) return {};
    const double poly = c0 + dot(linear, y);
    // grad bump(|y|/R) = bump * (-2 / (R^2 (1 - s^2)^2)) y
    const double q = 1.0 - s * s;
    const double radial = -2.0 * b / (radius * radius * q * q);
    return std::cos(omega * t) * (b * linear + poly * radial * y);
}

VectorTest bump_vector_test(const std::string& id, const Vec& center, double radius, const Vec& direction)
{
    VectorTest t;
    t.id = id;
    t.support_center = center;
    t.support_radius = radius;
    t.at = [center, radius, direction](const LevelSetField&, double) -> PointField {
        return [=](const Vec& x) { return bump(norm(x - center) / radius) * direction; };
    };
    return t;
}

VectorTest swirl_test(const std::string& id, const Vec& center, double radius, double amplitude)
{
    VectorTest t;
    t.id = id;
    t.support_center = center;
    t.support_radius = radius;
    t.at = [center, radius, amplitude](const LevelSetField&, double) -> PointField {
        return [=](const Vec& x) {
            const Vec y = x - center;
            const double b = amplitude * bump(norm(y) / radius);
            return Vec{-b * y[1], b * y[0], 0.0};
        };
    };
    return t;
}

namespace {

double fd_step(const LevelSetField& d)
{
    return d.exact ? 0.05 * d.grid.spacing() : 0.5 * d.grid.spacing();
}

} // namespace

Vec AdmissibleTest::tangential(const Vec& x) const
{
    const Vec b = closest_point(levelset, x);
    const Vec n = normal(levelset, b);
    const Vec f = base(time, b);
    return f - dot(f, n) * n;
}

double AdmissibleTest::divergence_of_tangential(const Vec& x) const
{
    return fd4_divergence([this](const Vec& p) { return tangential(p); }, x, levelset.grid.dim, fd_step(levelset));
}

double AdmissibleTest::normal_divergence(const Vec& x) const
{
    return fd4_divergence([this](const Vec& p) { return normal(levelset, p); }, x, levelset.grid.dim, fd_step(levelset));
}

Vec AdmissibleTest::extension(const Vec& x) const
{
    const double s = levelset.value_at(x);
    const Vec b = closest_point(levelset, x);
    const Vec n = normal(levelset, b);
    const Vec h = tangential(x);
    // gamma' = -div h - (div n) gamma along the normal line through b, gamma = 0 on the interface
    double gamma = 0.0;
    if (s != 0.0) {
        constexpr int substeps = 4;
        const double ds = s / substeps;
        auto rate = [&](double sigma, double g) {
            const Vec p = b + sigma * n;
            return -divergence_of_tangential(p) - normal_divergence(p) * g;
        };
        double sigma = 0.0;
        for (int k = 0; k < substeps; ++k) {
            const double k1 = rate(sigma, gamma);
            const double k2 = rate(sigma + 0.5 * ds, gamma + 0.5 * ds * k1);
            const double k3 = rate(sigma + 0.5 * ds, gamma + 0.5 * ds * k2);
            const double k4 = rate(sigma + ds, gamma + ds * k3);
            gamma += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            sigma += ds;
        }
    }
    return h + gamma * n;
}

Vec AdmissibleTest::operator()(const Vec& x) const
{
    const double a = std::abs(levelset.value_at(x));
    if (a >= outer_width) return base(time, x);
    const Vec w = extension(x);
    if (a <= inner_width) return w;
    const double chi = 0.5 * (1.0 + std::cos(std::numbers::pi * (a - inner_width) / (outer_width - inner_width)));
    return chi * w + (1.0 - chi) * base(time, x);
}

double AdmissibleTest::divergence(const Vec& x) const
{
    return fd4_divergence([this](const Vec& p) { return (*this)(p); }, x, levelset.grid.dim, fd_step(levelset));
}

double AdmissibleTest::max_band_divergence() const
{
    const Grid& g = levelset.grid;
    // keep the difference stencil clear of the blend zone
    const double limit = inner_width - 2.0 * fd_step(levelset);
    double worst = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const Vec x = g.center(c);
        if (std::abs(levelset.values[c]) > limit) continue;
        worst = std::max(worst, std::abs(divergence(x)));
    }
    return worst;
}

AdmissibleTest make_admissible_test(const LevelSetField& d, std::function<Vec(double, const Vec&)> base, double t)
{
    const double h = d.grid.spacing();
    if (d.band_width < 3.0 * h * (1.0 - 1e-12))
        throw Error(ErrorCode::unresolved_band, "interface band is narrower than three cells");
    AdmissibleTest w;
    w.levelset = d;
    w.base = std::move(base);
    w.time = t;
    // leave room for the nested difference stencils so every evaluation stays inside the band
    w.outer_width = d.band_width - 5.0 * fd_step(d);
    w.inner_width = 0.5 * w.outer_width;
    return w;
}

VectorTest admissible_vector_test(const std::string& id, std::function<Vec(double, const Vec&)> base,
                                  const Vec& support_center, double support_radius, double band_width)
{
    VectorTest t;
    t.id = id;
    t.support_center = support_center;
    t.support_radius = support_radius;
    t.at = [base, band_width](const LevelSetField& d, double time) -> PointField {
        std::shared_ptr<const AdmissibleTest> w;
        if (band_width > 0.0) {
            LevelSetField wide = d;
            wide.band_width = std::max(band_width, d.band_width);
            w = std::make_shared<const AdmissibleTest>(make_admissible_test(wide, base, time));
        } else {
            w = std::make_shared<const AdmissibleTest>(make_admissible_test(d, base, time));
        }
        return [w](const Vec& x) { return (*w)(x); };
    };
    return t;
}

double normal_trace(const VectorTest& phi, const LevelSetField& d, double t)
{
    double worst = 0.0;
    const PointField f = phi.at(d, t);
    for (const Vec& x : sample_interface(d)) {
        const Vec n = normal(d, x);
        worst = std::max(worst, std::abs(dot(f(x), n)));
    }
    return worst;
}

Renormalizer renormalize(double rho, const RenormalizationSpec& b)
{
    switch (b.kind) {
    case Renormalization::linear: return {rho, 1.0};
    case Renormalization::truncation: return smoothed_truncation(rho, b.k);
    case Renormalization::smooth_cutoff: {
        const double th = std::tanh(rho / b.k);
        return {b.k * th, 1.0 - th * th};
    }
    }
    return {rho, 1.0};
}

double continuity_residual(const Trajectory& traj, const ScalarTest& phi)
{
    return renormalized_residual(traj, {Renormalization::linear, 1.0}, phi);
}

double renormalized_residual(const Trajectory& traj, const RenormalizationSpec& bspec, const ScalarTest& phi)
{
    require_trajectory(traj);
    const Grid& g = traj.states.front().grid;
    require_support(phi.center, phi.radius, g, phi.id);
    const std::size_t n = g.cell_count();
    const std::size_t ns = traj.states.size();
    const bool linear = bspec.kind == Renormalization::linear;

    // per snapshot: b(rho), b(rho) u and (b - b' rho) div u
    struct Fields {
        std::vector<double> b, defect;
        CellVectors bu;
    };
    std::vector<Tensor> grad;
    auto fields = [&](const FlowState& s) {
        Fields f{std::vector<double>(n), std::vector<double>(n, 0.0), make_cell_vectors(g)};
        const CellVectors u = velocities(s);
        if (!linear) central_gradients(g, u, grad);
        for (std::size_t c = 0; c < n; ++c) {
            const Renormalizer r = renormalize(s.rho[c], bspec);
            f.b[c] = r.value;
            for (int a = 0; a < g.dim; ++a) f.bu[a][c] = linear ? s.mom[a][c] : r.value * u[a][c];
            if (!linear) f.defect[c] = (r.value - r.derivative * s.rho[c]) * trace(grad[c], g.dim);
        }
        return f;
    };

    const double vol = g.cell_volume();
    std::vector<double> terms(n);
    double total = 0.0;
    Fields prev = fields(traj.states.front());
    {
        const FlowState& s0 = traj.states.front();
        const FlowState& s1 = traj.states.back();
        const Fields last = fields(s1);
        for (std::size_t c = 0; c < n; ++c) {
            const Vec x = g.center(c);
            terms[c] = last.b[c] * phi.value(s1.time, x) - prev.b[c] * phi.value(s0.time, x);
        }
        total += pairwise_sum(terms) * vol;
    }
    for (std::size_t k = 0; k + 1 < ns; ++k) {
        const double t0 = traj.states[k].time, t1 = traj.states[k + 1].time;
        const double dt = t1 - t0, tm = 0.5 * (t0 + t1);
        Fields next = fields(traj.states[k + 1]);
        for (std::size_t c = 0; c < n; ++c) {
            const Vec x = g.center(c);
            const Vec gp = phi.gradient(tm, x);
            double flux = 0.0;
            for (int a = 0; a < g.dim; ++a) flux += 0.5 * (prev.bu[a][c] + next.bu[a][c]) * gp[a];
            const double dphi = phi.value(t1, x) - phi.value(t0, x);
            terms[c] = 0.5 * (prev.b[c] + next.b[c]) * dphi +
                       dt * (flux + 0.5 * (prev.defect[c] + next.defect[c]) * phi.value(tm, x));
        }
        total -= pairwise_sum(terms) * vol;
        prev = std::move(next);
    }
    return std::abs(total);
}

double weak_momentum_residual(const Trajectory& traj, const VectorTest& phi)
{
    require_trajectory(traj);
    const Grid& g = traj.states.front().grid;
    require_support(phi.support_center, phi.support_radius, g, phi.id);
    const int dim = g.dim;
    const std::size_t n = g.cell_count();
    const std::size_t ns = traj.states.size();
    const double step = 0.05 * g.spacing();

    // test field and its gradient at the cell centres of each snapshot
    struct Sample {
        std::vector<Vec> value;
        std::vector<Tensor> grad;
    };
    auto sample = [&](const LevelSetField& d, double t) {
        const PointField f = phi.at(d, t);
        const double trace_err = normal_trace(phi, d, t);
        if (trace_err > 1e-6)
            throw Error(ErrorCode::inadmissible_test,
                        "test '" + phi.id + "' has normal trace " + std::to_string(trace_err) + " on the interface");
        Sample s{std::vector<Vec>(n), std::vector<Tensor>(n, zero_tensor())};
#pragma omp parallel for schedule(dynamic, 64)
        for (std::size_t c = 0; c < n; ++c) {
            const Vec x = g.center(c);
            if (norm(x - phi.support_center) >= phi.support_radius + 3.0 * step) {
                s.value[c] = {};
                continue;
            }
            s.value[c] = f(x);
            for (int b = 0; b < dim; ++b)
                for (int k = 0; k < 4; ++k) {
                    Vec p = x;
                    p[b] += kFd4Offsets[k] * step;
                    const Vec v = f(p);
                    for (int a = 0; a < dim; ++a) s.grad[c][a][b] += kFd4[k] * v[a] / step;
                }
        }
        return s;
    };
    // the test field only changes when the interface does; reuse samples across a static geometry
    auto same_geometry = [](const LevelSetField& a, const LevelSetField& b) {
        return a.values == b.values && a.exact == b.exact;
    };

    // per snapshot: momentum, flux tensor rho u(x)u + p I - S (fluid only) and rho f
    struct Fields {
        std::vector<Vec> m, force;
        std::vector<Tensor> flux;
    };
    std::vector<Tensor> grad;
    auto fields = [&](const FlowState& s, const LevelSetField& d) {
        Fields f{std::vector<Vec>(n), std::vector<Vec>(n), std::vector<Tensor>(n)};
        const CellVectors u = velocities(s);
        central_gradients(g, u, grad);
        const bool forced = traj.fluid.body_force.kind != VelocityFieldSpec::Kind::zero;
        for (std::size_t c = 0; c < n; ++c) {
            const Vec uc = s.velocity(c);
            f.m[c] = s.momentum(c);
            const double p = total_pressure(s.rho[c], traj.fluid, traj.reg);
            Tensor t = zero_tensor();
            for (int a = 0; a < dim; ++a) {
                for (int b = 0; b < dim; ++b) t[a][b] = s.rho[c] * uc[a] * uc[b];
                t[a][a] += p;
            }
            if (d.values[c] < 0.0) {
                const Tensor st = viscous_stress(grad[c], traj.fluid.mu, traj.fluid, dim);
                for (int a = 0; a < dim; ++a)
                    for (int b = 0; b < dim; ++b) t[a][b] -= st[a][b];
            }
            f.flux[c] = t;
            f.force[c] = forced ? s.rho[c] * eval_velocity(traj.fluid.body_force, s.time, g.center(c)) : Vec{};
        }
        return f;
    };

    const double vol = g.cell_volume();
    std::vector<double> terms(n);
    std::vector<Sample> samples;
    samples.reserve(ns);
    for (std::size_t k = 0; k < ns; ++k) {
        if (k > 0 && same_geometry(traj.levelsets[k], traj.levelsets[k - 1]) && !phi.time_dependent)
            samples.push_back(samples.back());
        else
            samples.push_back(sample(traj.levelsets[k], traj.states[k].time));
    }

    double total = 0.0;
    {
        const FlowState& s0 = traj.states.front();
        const FlowState& s1 = traj.states.back();
        for (std::size_t c = 0; c < n; ++c)
            terms[c] = dot(s1.momentum(c), samples.back().value[c]) - dot(s0.momentum(c), samples.front().value[c]);
        total += pairwise_sum(terms) * vol;
    }
    Fields prev = fields(traj.states.front(), traj.levelsets.front());
    for (std::size_t k = 0; k + 1 < ns; ++k) {
        const double dt = traj.states[k + 1].time - traj.states[k].time;
        Fields next = fields(traj.states[k + 1], traj.levelsets[k + 1]);
        const Sample& a0 = samples[k];
        const Sample& a1 = samples[k + 1];
        for (std::size_t c = 0; c < n; ++c) {
            const Vec dphi = a1.value[c] - a0.value[c];
            const Vec mm = 0.5 * (prev.m[c] + next.m[c]);
            const Vec phim = 0.5 * (a0.value[c] + a1.value[c]);
            double flux = 0.0;
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b)
                    flux += 0.5 * (prev.flux[c][a][b] + next.flux[c][a][b]) * 0.5 * (a0.grad[c][a][b] + a1.grad[c][a][b]);
            terms[c] = dot(mm, dphi) + dt * (flux + dot(0.5 * (prev.force[c] + next.force[c]), phim));
        }
        total -= pairwise_sum(terms) * vol;
        prev = std::move(next);
    }
    return std::abs(total);
}

} // namespace penaflow
