#include "penaflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace penaflow {

CellVectors cell_velocities(const FlowState& s)
{
    CellVectors u = make_cell_vectors(s.grid);
    for (std::size_t c = 0; c < s.rho.size(); ++c) {
        const Vec v = s.velocity(c);
        for (int a = 0; a < s.grid.dim; ++a) u[a][c] = v[a];
    }
    return u;
}

double total_mass(const FlowState& s)
{
    return pairwise_sum(s.rho) * s.grid.cell_volume();
}

double total_energy(const FlowState& s, const FluidParams& fp, const RegularizationParams& rp)
{
    std::vector<double> e(s.rho.size());
    for (std::size_t c = 0; c < e.size(); ++c) {
        const double rho = std::max(s.rho[c], 0.0);
        const Vec u = s.velocity(c);
        e[c] = 0.5 * rho * dot(u, u) + pressure_potential(rho, fp, rp);
    }
    return pairwise_sum(e) * s.grid.cell_volume();
}

double artificial_energy(const FlowState& s, const RegularizationParams& rp)
{
    std::vector<double> e(s.rho.size());
    for (std::size_t c = 0; c < e.size(); ++c) e[c] = std::pow(std::max(s.rho[c], 0.0), rp.beta);
    return rp.delta / (rp.beta - 1.0) * pairwise_sum(e) * s.grid.cell_volume();
}

double max_density(const FlowState& s)
{
    return s.rho.empty() ? 0.0 : *std::max_element(s.rho.begin(), s.rho.end());
}

DissipationSplit dissipation_split(const FlowState& s, const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp, double dt)
{
    const ViscousOperator op(s.grid, viscosity_cells(d, fp, rp), fp.eta);
    DissipationSplit r = op.dissipation(cell_velocities(s), &d.values);
    r.total *= dt;
    r.fluid *= dt;
    r.solid *= dt;
    return r;
}

double dissipation_increment(const FlowState& s, const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp, double dt)
{
    return dissipation_split(s, d, fp, rp, dt).total;
}

double penalty_increment(const FlowState& s, const LevelSetField& d, const VelocityFieldSpec& v, double dt)
{
    std::vector<double> terms;
    for (const BandCell& b : band_cells(d)) {
        const Vec x = s.grid.center(b.cell);
        const double e = dot(s.velocity(b.cell) - eval_velocity(v, s.time, x), b.normal);
        terms.push_back(b.delta * e * e);
    }
    return dt * pairwise_sum(terms) * s.grid.cell_volume();
}

double penalty_increment(const FlowState& before, const FlowState& after, const LevelSetField& d, const VelocityFieldSpec& v, double dt)
{
    std::vector<double> terms;
    for (const BandCell& b : band_cells(d)) {
        const Vec vx = eval_velocity(v, after.time, after.grid.center(b.cell));
        const double e0 = dot(before.velocity(b.cell) - vx, b.normal);
        const double e1 = dot(after.velocity(b.cell) - vx, b.normal);
        terms.push_back(b.delta * penalty_energy(e0, e1));
    }
    return dt * pairwise_sum(terms) * after.grid.cell_volume();
}

double solid_mass(const FlowState& s, const LevelSetField& d)
{
    std::vector<double> m(s.rho.size(), 0.0);
    for (std::size_t c = 0; c < m.size(); ++c)
        if (d.values[c] > 0.0) m[c] = s.rho[c];
    return pairwise_sum(m) * s.grid.cell_volume();
}

double h1_velocity_sq(const FlowState& s, const LevelSetField& d)
{
    const CellVectors u = cell_velocities(s);
    std::vector<Tensor> g;
    central_gradients(s.grid, u, g);
    std::vector<double> t(s.rho.size(), 0.0);
    const int dim = s.grid.dim;
    for (std::size_t c = 0; c < t.size(); ++c) {
        if (!(d.values[c] < 0.0)) continue;
        double v = 0.0;
        for (int i = 0; i < dim; ++i) {
            v += u[i][c] * u[i][c];
            for (int b = 0; b < dim; ++b) v += g[c][i][b] * g[c][i][b];
        }
        t[c] = v;
    }
    return pairwise_sum(t) * s.grid.cell_volume();
}

double local_pressure_integral(const FlowState& s, const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp,
                               double bands, double nu)
{
    const double cut = bands * d.band_width;
    std::vector<double> t(s.rho.size(), 0.0);
    for (std::size_t c = 0; c < t.size(); ++c) {
        if (std::abs(d.values[c]) <= cut) continue;
        const double rho = std::max(s.rho[c], 0.0);
        t[c] = pressure(rho, fp) * std::pow(rho, nu) + rp.delta * std::pow(rho, rp.beta + nu);
    }
    return pairwise_sum(t) * s.grid.cell_volume();
}

double slip_rms(const FlowState& s, const LevelSetField& d, const VelocityFieldSpec& v)
{
    std::vector<double> num, den;
    for (const BandCell& b : band_cells(d)) {
        const double e = dot(s.velocity(b.cell) - eval_velocity(v, s.time, s.grid.center(b.cell)), b.normal);
        num.push_back(b.delta * e * e);
        den.push_back(b.delta);
    }
    const double w = pairwise_sum(den);
    return w > 0.0 ? std::sqrt(pairwise_sum(num) / w) : 0.0;
}

} // namespace penaflow
