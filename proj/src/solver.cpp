#include "penaflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace penaflow {

namespace {

constexpr std::size_t kChunk = 4096;

// Fixed-chunk dot product over the first dim components; the result does not depend on the thread count.
double dot_cells(const CellVectors& a, const CellVectors& b, int dim)
{
    const std::size_t n = a[0].size();
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> part(chunks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < chunks; ++k) {
        const std::size_t lo = k * kChunk, hi = std::min(n, lo + kChunk);
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (std::size_t c = lo; c < hi; ++c) s += a[i][c] * b[i][c];
        part[k] = s;
    }
    return pairwise_sum(part);
}

double sum_cells(const std::vector<double>& v)
{
    const std::size_t n = v.size();
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> part(chunks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < chunks; ++k) {
        const std::size_t lo = k * kChunk, hi = std::min(n, lo + kChunk);
        part[k] = pairwise_sum(std::span<const double>(v.data() + lo, hi - lo));
    }
    return pairwise_sum(part);
}

struct Primitive {
    double rho;
    Vec u;
    double p;
    double speed;
};

Primitive primitive(const FlowState& s, std::size_t c, const FluidParams& fp, const RegularizationParams& rp)
{
    Primitive q;
    q.rho = std::max(s.rho[c], 0.0);
    q.u = s.velocity(c);
    q.p = total_pressure(q.rho, fp, rp);
    q.speed = norm(q.u) + sound_speed(q.rho, fp, rp);
    return q;
}

void ensure_size(HyperbolicRates& r, std::size_t n)
{
    r.rho.resize(n);
    for (auto& m : r.mom) m.resize(n);
}

} // namespace

void hyperbolic_rhs(const FlowState& s, const FluidParams& fp, const RegularizationParams& rp, double t,
                    const ManufacturedSolution* mms, HyperbolicRates& out)
{
    const Grid& g = s.grid;
    const int dim = g.dim;
    const std::size_t n = g.cell_count();
    const double h = g.spacing();
    ensure_size(out, n);

    std::vector<Primitive> q(n);
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) q[c] = primitive(s, c, fp, rp);

    // flux through the +axis face of every cell: [axis][component 0 = mass, 1.. = momentum]
    std::array<std::array<std::vector<double>, 4>, 3> flux;
    for (int a = 0; a < dim; ++a)
        for (auto& f : flux[a]) f.assign(n, 0.0);

#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
        const Primitive& L = q[c];
        for (int a = 0; a < dim; ++a) {
            const long r = g.neighbor(c, a, +1);
            if (r < 0) {
                // reflecting no-slip wall: ghost rho, -m
                for (int i = 0; i < dim; ++i)
                    flux[a][1 + i][c] = s.mom[i][c] * L.u[a] + (i == a ? L.p : 0.0) + L.speed * s.mom[i][c];
                continue;
            }
            const Primitive& R = q[r];
            const double sp = std::max(L.speed, R.speed);
            flux[a][0][c] = 0.5 * (s.mom[a][c] + s.mom[a][r]) - 0.5 * sp * (s.rho[r] - s.rho[c]);
            for (int i = 0; i < dim; ++i)
                flux[a][1 + i][c] = 0.5 * (s.mom[i][c] * L.u[a] + s.mom[i][r] * R.u[a]) + (i == a ? 0.5 * (L.p + R.p) : 0.0)
                                    - 0.5 * sp * (s.mom[i][r] - s.mom[i][c]);
        }
    }

    const double inv_h = 1.0 / h;
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
        double dr = 0.0;
        double dm[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) {
            const long l = g.neighbor(c, a, -1);
            dr -= flux[a][0][c];
            for (int i = 0; i < dim; ++i) dm[i] -= flux[a][1 + i][c];
            if (l >= 0) {
                dr += flux[a][0][l];
                for (int i = 0; i < dim; ++i) dm[i] += flux[a][1 + i][l];
            } else {
                const Primitive& P = q[c];
                for (int i = 0; i < dim; ++i)
                    dm[i] += s.mom[i][c] * P.u[a] + (i == a ? P.p : 0.0) - P.speed * s.mom[i][c];
            }
        }
        out.rho[c] = dr * inv_h;
        for (int i = 0; i < 3; ++i) out.mom[i][c] = i < dim ? dm[i] * inv_h : 0.0;
    }

    if (!fp.body_force.is_zero())
#pragma omp parallel for schedule(static)
        for (std::size_t c = 0; c < n; ++c) {
            const Vec f = eval_velocity(fp.body_force, t, g.center(c));
            for (int i = 0; i < dim; ++i) out.mom[i][c] += q[c].rho * f[i];
        }

    if (mms)
#pragma omp parallel for schedule(static)
        for (std::size_t c = 0; c < n; ++c) {
            const auto src = mms->sources(t, g.center(c), fp, rp);
            out.rho[c] += src.mass;
            for (int i = 0; i < dim; ++i) out.mom[i][c] += src.momentum[i];
        }
}

std::vector<double> continuity_rhs(const FlowState& s, const FluidParams& fp, const RegularizationParams& rp)
{
    HyperbolicRates r;
    hyperbolic_rhs(s, fp, rp, s.time, nullptr, r);
    for (double v : r.rho)
        if (!std::isfinite(v)) throw Error(ErrorCode::nan_detected, "non-finite mass rate");
    return r.rho;
}

Vec penalty_force(const Vec& u, const Vec& v, const Vec& n, double delta, const RegularizationParams& rp)
{
    return (dot(v - u, n) * delta / rp.epsilon) * n;
}

Vec friction_force(const Vec& u, const Vec& v, const Vec& n, double delta, const FluidParams& fp)
{
    const Vec w = u - v;
    return (-fp.kappa * delta) * (w - dot(w, n) * n);
}

CellVectors momentum_rhs(const FlowState& s, const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp,
                         const VelocityFieldSpec& v, double t)
{
    HyperbolicRates r;
    hyperbolic_rhs(s, fp, rp, t, nullptr, r);
    const ViscousOperator op(s.grid, viscosity_cells(d, fp, rp), fp.eta);
    CellVectors ku = make_cell_vectors(s.grid);
    op.apply(cell_velocities(s), ku);
    const double inv_vol = 1.0 / s.grid.cell_volume();
    const int dim = s.grid.dim;
    CellVectors out = std::move(r.mom);
    for (std::size_t c = 0; c < s.rho.size(); ++c)
        for (int i = 0; i < dim; ++i) out[i][c] -= ku[i][c] * inv_vol;
    for (const BandCell& b : band_cells(d)) {
        const Vec u = s.velocity(b.cell);
        const Vec vx = eval_velocity(v, t, s.grid.center(b.cell));
        const Vec f = penalty_force(u, vx, b.normal, b.delta, rp) + friction_force(u, vx, b.normal, b.delta, fp);
        for (int i = 0; i < dim; ++i) out[i][b.cell] += f[i];
    }
    for (int i = 0; i < dim; ++i)
        for (double x : out[i])
            if (!std::isfinite(x)) throw Error(ErrorCode::nan_detected, "non-finite momentum rate");
    return out;
}

double stable_dt(const FlowState& s, const FluidParams& fp, const RegularizationParams& rp, double cfl)
{
    double smax = 0.0;
    bool any = false;
    for (std::size_t c = 0; c < s.rho.size(); ++c) {
        const double rho = std::max(s.rho[c], 0.0);
        if (rho > kRhoFloor) any = true;
        smax = std::max(smax, norm(s.velocity(c)) + sound_speed(rho, fp, rp));
    }
    if (!any || !(smax > 0.0)) throw Error(ErrorCode::empty_state, "state has no mass");
    return cfl * s.grid.spacing() / smax;
}

Stepper::Stepper(ScenarioConfig cfg) : cfg_(std::move(cfg))
{
    cfg_.validate();
    if (cfg_.manufactured) mms_ = &*cfg_.manufactured;
    driven_ = !cfg_.boundary_velocity.is_zero();
    const Grid& g = cfg_.grid;
    stage_ = FlowState(g);
    for (CellVectors* v : {&u_prev_, &ustar_, &res_, &z_, &p_, &ap_}) *v = make_cell_vectors(g);
}

CellVectors Stepper::boundary_velocity_cells(double t) const
{
    const Grid& g = cfg_.grid;
    CellVectors v = make_cell_vectors(g);
    if (!driven_) return v;
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const Vec x = eval_velocity(cfg_.boundary_velocity, t, g.center(c));
        for (int i = 0; i < g.dim; ++i) v[i][c] = x[i];
    }
    return v;
}

double Stepper::stable_dt(const FlowState& s) const
{
    double dt = penaflow::stable_dt(s, cfg_.fluid, cfg_.reg, cfg_.cfl);
    if (driven_) {
        const CellVectors v = boundary_velocity_cells(s.time);
        double vmax = 0.0;
        for (int i = 0; i < s.grid.dim; ++i)
            for (double x : v[i]) vmax = std::max(vmax, std::abs(x));
        if (vmax > 0.0) dt = std::min(dt, cfg_.cfl * s.grid.spacing() / vmax);
    }
    return dt;
}

void Stepper::viscous_solve(const FlowState& s, const ViscousOperator& op, CellVectors& u, StepReport& rep)
{
    // (M/dt + K) u = (M/dt) u*,  M = rho h^dim, conjugate gradients preconditioned by a scalar multigrid cycle per component
    const Grid& g = s.grid;
    const int dim = g.dim;
    const std::size_t n = g.cell_count();
    const double mscale = g.cell_volume() / rep.dt;

    CellVectors& b = ustar_;
    double rho_max = 0.0;
    for (double r : s.rho) rho_max = std::max(rho_max, r);
    for (std::size_t c = 0; c < n; ++c) {
        const double m = std::max(s.rho[c], 0.0) * mscale;
        const Vec v = s.velocity(c);
        const bool resolved = s.rho[c] >= 1e-6 * rho_max;
        for (int i = 0; i < dim; ++i) {
            b[i][c] = m * v[i];
            u[i][c] = resolved ? v[i] : u_prev_[i][c];
        }
    }
    {
        std::vector<double> mass(n);
        for (std::size_t c = 0; c < n; ++c) mass[c] = std::max(s.rho[c], 0.0) * mscale;
        mg_.setup(g, mass, op.mu());
    }
    auto precondition = [&] {
        for (int i = 0; i < dim; ++i) mg_.vcycle(res_[i], z_[i]);
    };
    auto apply_a = [&](const CellVectors& x, CellVectors& y) {
        op.apply(x, y);
        for (std::size_t c = 0; c < n; ++c) {
            const double m = std::max(s.rho[c], 0.0) * mscale;
            for (int i = 0; i < dim; ++i) y[i][c] += m * x[i][c];
        }
    };

    const double bnorm = std::sqrt(dot_cells(b, b, dim));
    if (bnorm == 0.0) {
        for (int i = 0; i < dim; ++i) std::fill(u[i].begin(), u[i].end(), 0.0);
        rep.viscous_iterations = 0;
        return;
    }
    constexpr double tol = 1e-10;
    constexpr int max_iter = 5000;
    apply_a(u, ap_);
    for (int i = 0; i < dim; ++i)
        for (std::size_t c = 0; c < n; ++c) res_[i][c] = b[i][c] - ap_[i][c];
    precondition();
    for (int i = 0; i < dim; ++i) p_[i] = z_[i];
    double rz = dot_cells(res_, z_, dim);
    int it = 0;
    while (std::sqrt(dot_cells(res_, res_, dim)) > tol * bnorm) {
        if (++it > max_iter) throw Error(ErrorCode::nan_detected, "viscous solve did not converge");
        apply_a(p_, ap_);
        const double pap = dot_cells(p_, ap_, dim);
        if (!(pap > 0.0)) throw Error(ErrorCode::nan_detected, "viscous operator lost positivity");
        const double alpha = rz / pap;
        for (int i = 0; i < dim; ++i)
            for (std::size_t c = 0; c < n; ++c) {
                u[i][c] += alpha * p_[i][c];
                res_[i][c] -= alpha * ap_[i][c];
            }
        precondition();
        const double rz_new = dot_cells(res_, z_, dim);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < dim; ++i)
            for (std::size_t c = 0; c < n; ++c) p_[i][c] = z_[i][c] + beta * p_[i][c];
    }
    rep.viscous_iterations = it;
}

StepReport Stepper::step(FlowState& s, LevelSetField& d, double dt)
{
    const Grid& g = cfg_.grid;
    if (!(s.grid == g) || !(d.grid == g)) throw Error(ErrorCode::invalid_argument, "state does not match the configured grid");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
    const double limit = penaflow::stable_dt(s, cfg_.fluid, cfg_.reg, 1.0 / (2.0 * g.dim));
    if (dt > limit * (1.0 + 1e-12)) throw Error(ErrorCode::cfl_violation, "dt exceeds the acoustic stability bound");

    const int dim = g.dim;
    const std::size_t n = g.cell_count();
    const double vol = g.cell_volume();
    const double t0 = s.time, t1 = t0 + dt;
    StepReport rep;
    rep.dt = dt;

    CellVectors v0, v1;
    if (driven_) {
        v0 = boundary_velocity_cells(t0);
        v1 = boundary_velocity_cells(t1);
        std::vector<double> w(n, 0.0);
        for (std::size_t c = 0; c < n; ++c)
            for (int i = 0; i < dim; ++i) w[c] += s.mom[i][c] * (v1[i][c] - v0[i][c]);
        rep.unsteady_work = sum_cells(w) * vol;
    }
    auto tested = [&](const HyperbolicRates& r) {
        std::vector<double> w(n, 0.0);
        for (std::size_t c = 0; c < n; ++c)
            for (int i = 0; i < dim; ++i) w[c] += r.mom[i][c] * v1[i][c];
        return sum_cells(w) * vol;
    };

    // 1. SSP-RK2 on the conservative part
    hyperbolic_rhs(s, cfg_.fluid, cfg_.reg, t0, mms_, r0_);
    stage_.time = t1;
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
        stage_.rho[c] = s.rho[c] + dt * r0_.rho[c];
        for (int i = 0; i < dim; ++i) stage_.mom[i][c] = s.mom[i][c] + dt * r0_.mom[i][c];
    }
    hyperbolic_rhs(stage_, cfg_.fluid, cfg_.reg, t1, mms_, r1_);
    if (driven_) rep.hyperbolic_work = 0.5 * dt * (tested(r0_) + tested(r1_));
    if (mms_) rep.source_mass = 0.5 * dt * (sum_cells(r0_.rho) + sum_cells(r1_.rho)) * vol;
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
        s.rho[c] = 0.5 * (s.rho[c] + stage_.rho[c] + dt * r1_.rho[c]);
        for (int i = 0; i < dim; ++i) s.mom[i][c] = 0.5 * (s.mom[i][c] + stage_.mom[i][c] + dt * r1_.mom[i][c]);
    }

    // 2. implicit viscous step with mu_omega from the current level set
    const ViscousOperator op(g, viscosity_cells(d, cfg_.fluid, cfg_.reg), cfg_.fluid.eta);
    CellVectors u = make_cell_vectors(g);
    viscous_solve(s, op, u, rep);
    for (int i = 0; i < dim; ++i) u_prev_[i] = u[i];
    for (std::size_t c = 0; c < n; ++c)
        for (int i = 0; i < dim; ++i) s.mom[i][c] = s.rho[c] > kRhoFloor ? s.rho[c] * u[i][c] : 0.0;
    rep.dissipation = op.dissipation(u, &d.values);
    rep.dissipation.total *= dt;
    rep.dissipation.fluid *= dt;
    rep.dissipation.solid *= dt;
    if (driven_) rep.viscous_work = dt * op.form(u, v1);

    // 3. implicit penalty on the normal component, implicit friction on the tangential one
    {
        std::vector<double> pen, fric;
        const double kappa = cfg_.fluid.kappa;
        for (const BandCell& b : band_cells(d)) {
            const std::size_t c = b.cell;
            const double rho = s.rho[c];
            if (!(rho > kRhoFloor)) continue;
            Vec uc{}, vc{};
            for (int i = 0; i < dim; ++i) {
                uc[i] = s.mom[i][c] / rho;
                vc[i] = driven_ ? v1[i][c] : 0.0;
            }
            const Vec& nn = b.normal;
            const double e0 = dot(uc - vc, nn);
            const double k = dt * b.delta / cfg_.reg.epsilon;
            const double e1 = rho * e0 / (rho + k);
            const Vec t0v = (uc - vc) - e0 * nn;
            const double kf = dt * kappa * b.delta;
            const Vec t1v = (rho / (rho + kf)) * t0v;
            const Vec unew = vc + e1 * nn + t1v;
            for (int i = 0; i < dim; ++i) s.mom[i][c] = rho * unew[i];
            pen.push_back(b.delta * penalty_energy(e0, e1));
            if (kf > 0.0) fric.push_back(kf * 0.5 * dot(t1v, t1v + t0v));
        }
        rep.penalty = dt * pairwise_sum(pen) * vol;
        rep.friction = pairwise_sum(fric) * vol;
    }

    // 4. vacuum floor
    {
        std::vector<double> clipped;
        for (std::size_t c = 0; c < n; ++c) {
            if (s.rho[c] < 0.0) {
                clipped.push_back(kRhoFloor - s.rho[c]);
                s.rho[c] = kRhoFloor;
                for (int i = 0; i < dim; ++i) s.mom[i][c] = 0.0;
            }
        }
        rep.clipped_mass = pairwise_sum(clipped) * vol;
    }
    for (std::size_t c = 0; c < n; ++c) {
        bool ok = std::isfinite(s.rho[c]);
        for (int i = 0; i < dim; ++i) ok = ok && std::isfinite(s.mom[i][c]);
        if (!ok) throw Error(ErrorCode::nan_detected, "non-finite value in cell " + std::to_string(c));
    }
    s.time = t1;

    // 5. geometry
    d = advect_levelset(d, cfg_.boundary_velocity, dt, cfg_.levelset_scheme);
    d.time = t1;
    ++steps_;
    if (driven_ && steps_ % cfg_.reinit_interval == 0) {
        ReinitResult rr = reinitialize(d);
        rep.reinitialized = !rr.skipped && !rr.no_interface;
        d = std::move(rr.field);
    }
    return rep;
}

FlowState step(const FlowState& s, const LevelSetField& d, const ScenarioConfig& cfg, double dt)
{
    Stepper st(cfg);
    FlowState out = s;
    LevelSetField dd = d;
    st.step(out, dd, dt);
    return out;
}

double initial_stable_dt(const ScenarioConfig& cfg)
{
    Stepper st(cfg);
    const LevelSetField d0 = initial_levelset(cfg);
    return st.stable_dt(initial_state(cfg, d0));
}

namespace {

DiagnosticsRecord make_record(const FlowState& s, const LevelSetField& d, const ScenarioConfig& cfg, const LedgerRow& l, double clipped)
{
    DiagnosticsRecord r;
    r.time = s.time;
    r.mass = total_mass(s);
    r.energy = l.energy;
    r.dissipation_cum = l.dissipation_cum;
    r.penalty_cum = l.penalty_cum;
    r.solid_mass = solid_mass(s, d);
    r.h1_sq = h1_velocity_sq(s, d);
    r.max_rho = max_density(s);
    r.clipped_mass = clipped;
    r.local_pressure = local_pressure_integral(s, d, cfg.fluid, cfg.reg, cfg.pressure_monitor_bands);
    return r;
}

double momentum_against(const FlowState& s, const CellVectors& v)
{
    std::vector<double> w(s.rho.size(), 0.0);
    for (std::size_t c = 0; c < w.size(); ++c)
        for (int i = 0; i < s.grid.dim; ++i) w[c] += s.mom[i][c] * v[i][c];
    return pairwise_sum(w) * s.grid.cell_volume();
}

} // namespace

RunResult run(const ScenarioConfig& cfg, const RunOptions& opt)
{
    Stepper st(cfg);
    LevelSetField d = initial_levelset(cfg);
    FlowState s = initial_state(cfg, d);

    RunResult out;
    LedgerRow row;
    row.time = 0.0;
    row.energy = total_energy(s, cfg.fluid, cfg.reg);
    if (!cfg.boundary_velocity.is_zero()) row.momentum_v = momentum_against(s, st.boundary_velocity_cells(0.0));
    out.ledger.push_back(row);
    double clipped = 0.0;

    auto emit = [&] {
        out.records.push_back(make_record(s, d, cfg, row, clipped));
        if (opt.keep_snapshots) {
            out.snapshots.push_back(s);
            out.levelsets.push_back(d);
        }
        if (opt.on_snapshot) opt.on_snapshot(s, d);
    };
    emit();

    const double T = cfg.end_time;
    int k = 0;
    while (s.time < T * (1.0 - 1e-14)) {
        double dt = cfg.fixed_dt > 0.0 ? cfg.fixed_dt : st.stable_dt(s);
        bool last = false;
        if (s.time + dt >= T * (1.0 - 1e-12)) {
            dt = T - s.time;
            last = true;
        }
        StepReport rep;
        try {
            rep = st.step(s, d, dt);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " (step " + std::to_string(k + 1) + ", t = " + std::to_string(s.time) + ")");
        }
        if (last) s.time = d.time = T;
        ++k;
        if (opt.on_step) opt.on_step(s, d, rep, st.last_velocity());
        out.last_dt = dt;
        out.max_viscous_iterations = std::max(out.max_viscous_iterations, rep.viscous_iterations);
        out.dissipation_cum.total += rep.dissipation.total;
        out.dissipation_cum.fluid += rep.dissipation.fluid;
        out.dissipation_cum.solid += rep.dissipation.solid;
        clipped += rep.clipped_mass;
        row.time = s.time;
        row.energy = total_energy(s, cfg.fluid, cfg.reg);
        row.dissipation_cum += rep.dissipation.total + rep.friction;
        row.penalty_cum += rep.penalty;
        row.work_cum += rep.viscous_work - rep.unsteady_work - rep.hyperbolic_work;
        if (!cfg.boundary_velocity.is_zero()) row.momentum_v = momentum_against(s, st.boundary_velocity_cells(s.time));
        out.ledger.push_back(row);
        if (k % cfg.output_cadence == 0 || last) emit();
    }
    out.steps = k;
    return out;
}

} // namespace penaflow
