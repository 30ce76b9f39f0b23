#include "penaflow/stencil.hpp"

#include <cmath>

namespace penaflow {

CellVectors make_cell_vectors(const Grid& g)
{
    CellVectors v;
    for (auto& comp : v) comp.assign(g.cell_count(), 0.0);
    return v;
}

std::vector<double> viscosity_cells(const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp)
{
    const double ramp = rp.ramp_width > 0.0 ? rp.ramp_width : d.band_width;
    std::vector<double> mu(d.values.size());
    for (std::size_t c = 0; c < mu.size(); ++c) mu[c] = viscosity_from_levelset(d.values[c], ramp, fp, rp);
    return mu;
}

std::vector<BandCell> band_cells(const LevelSetField& d)
{
    std::vector<BandCell> out;
    const Grid& g = d.grid;
    for (std::size_t c = 0; c < d.values.size(); ++c) {
        const double delta = smoothed_delta(d.values[c], d.band_width);
        if (delta <= 0.0) continue;
        Vec grad = d.exact ? Vec{} : d.cell_gradient(c);
        if (d.exact) {
            try {
                grad = normal(d, g.center(c));
            } catch (const Error&) {
                continue;
            }
        }
        const double len = norm(grad);
        if (len <= kDegenerateGradient) continue;
        out.push_back({c, (1.0 / len) * grad, delta});
    }
    return out;
}

ViscousOperator::ViscousOperator(const Grid& g, std::vector<double> mu_cells, double eta)
    : grid_(g), mu_(std::move(mu_cells)), eta_(eta), h_(g.spacing())
{
    if (mu_.size() != g.cell_count()) throw Error(ErrorCode::invalid_argument, "viscosity field does not match the grid");
    w_inner_ = g.cell_volume() / g.dim;
    w_wall_ = 0.5 * w_inner_;
}

void central_gradients(const Grid& g, const CellVectors& u, std::vector<Tensor>& dg)
{
    const std::size_t n = g.cell_count();
    const int dim = g.dim;
    dg.resize(n);
    const double inv = 1.0 / (2.0 * g.spacing());
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
        Tensor t{};
        for (int b = 0; b < dim; ++b) {
            const long p = g.neighbor(c, b, +1);
            const long m = g.neighbor(c, b, -1);
            for (int i = 0; i < dim; ++i) {
                const double up = p >= 0 ? u[i][p] : -u[i][c];
                const double um = m >= 0 ? u[i][m] : -u[i][c];
                t[i][b] = (up - um) * inv;
            }
        }
        dg[c] = t;
    }
}

Tensor ViscousOperator::interior_gradient(const CellVectors& u, const std::vector<Tensor>& dg, std::size_t l, std::size_t r, int axis) const
{
    Tensor g{};
    const int dim = grid_.dim;
    for (int i = 0; i < dim; ++i)
        for (int b = 0; b < dim; ++b)
            g[i][b] = b == axis ? (u[i][r] - u[i][l]) / h_ : 0.5 * (dg[l][i][b] + dg[r][i][b]);
    return g;
}

Tensor ViscousOperator::wall_gradient(const CellVectors& u, std::size_t c, int axis, double sign) const
{
    Tensor g{};
    for (int i = 0; i < grid_.dim; ++i) g[i][axis] = sign * 2.0 * u[i][c] / h_;
    return g;
}

namespace {

Tensor stress(const Tensor& g, double mu, double eta, int dim)
{
    Tensor s = deviatoric_form(g, dim);
    const double tr = trace(g, dim);
    for (int i = 0; i < dim; ++i) {
        for (int b = 0; b < dim; ++b) s[i][b] *= mu;
        s[i][i] += eta * tr;
    }
    return s;
}

} // namespace

void ViscousOperator::apply_matrix_free(const CellVectors& u, CellVectors& out) const
{
    const std::size_t n = grid_.cell_count();
    const int dim = grid_.dim;
    auto& dg = scratch_grad_;
    auto& sig_plus = scratch_plus_;
    auto& sig_wall = scratch_wall_;
    auto& tau = scratch_tau_;
    cell_gradients(u, dg);
    for (int a = 0; a < dim; ++a) {
        sig_plus[a].resize(n);
        sig_wall[a].resize(n);
    }
    tau.resize(n);
    for (int i = 0; i < 3; ++i) out[i].assign(n, 0.0);

#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
        const auto id = grid_.ijk(c);
        for (int a = 0; a < dim; ++a) {
            const long r = grid_.neighbor(c, a, +1);
            if (r >= 0) {
                const double mf = 0.5 * (mu_[c] + mu_[r]);
                sig_plus[a][c] = stress(interior_gradient(u, dg, c, static_cast<std::size_t>(r), a), mf, eta_, dim);
            } else {
                sig_plus[a][c] = stress(wall_gradient(u, c, a, -1.0), mu_[c], eta_, dim);
            }
            if (id[a] == 0) sig_wall[a][c] = stress(wall_gradient(u, c, a, 1.0), mu_[c], eta_, dim);
        }
    }

#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
        Tensor t{};
        double o[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) {
            const long r = grid_.neighbor(c, a, +1);
            const Tensor& sp = sig_plus[a][c];
            if (r >= 0) {
                for (int i = 0; i < dim; ++i) {
                    o[i] -= w_inner_ * sp[i][a] / h_;
                    for (int b = 0; b < dim; ++b)
                        if (b != a) t[i][b] += 0.5 * w_inner_ * sp[i][b];
                }
            } else {
                for (int i = 0; i < dim; ++i) o[i] -= 2.0 * w_wall_ * sp[i][a] / h_;
            }
            const long l = grid_.neighbor(c, a, -1);
            if (l >= 0) {
                const Tensor& sl = sig_plus[a][l];
                for (int i = 0; i < dim; ++i) {
                    o[i] += w_inner_ * sl[i][a] / h_;
                    for (int b = 0; b < dim; ++b)
                        if (b != a) t[i][b] += 0.5 * w_inner_ * sl[i][b];
                }
            } else {
                for (int i = 0; i < dim; ++i) o[i] += 2.0 * w_wall_ * sig_wall[a][c][i][a] / h_;
            }
        }
        tau[c] = t;
        for (int i = 0; i < dim; ++i) out[i][c] = o[i];
    }

    // adjoint of the cell-centred difference acting on the tangential face stresses
    const double inv = 1.0 / (2.0 * h_);
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
        for (int b = 0; b < dim; ++b) {
            const long p = grid_.neighbor(c, b, +1);
            const long m = grid_.neighbor(c, b, -1);
            for (int i = 0; i < dim; ++i) {
                double v = 0.0;
                v += m >= 0 ? tau[m][i][b] : tau[c][i][b];
                v -= p >= 0 ? tau[p][i][b] : tau[c][i][b];
                out[i][c] += v * inv;
            }
        }
    }
}

void ViscousOperator::assemble() const
{
    const int dim = grid_.dim;
    const std::size_t n = grid_.cell_count();
    offsets_.clear();
    linear_offsets_.clear();
    slot_of_offset_.assign(125, -1);
    for (int dz = -2; dz <= 2; ++dz)
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx) {
                if (dim == 2 && dz != 0) continue;
                const int ax = std::abs(dx), ay = std::abs(dy), az = std::abs(dz);
                if (ax + ay + az > 3 || (ax == 2) + (ay == 2) + (az == 2) > 1) continue;
                slot_of_offset_[(dx + 2) + 5 * ((dy + 2) + 5 * (dz + 2))] = static_cast<int>(offsets_.size());
                offsets_.push_back({dx, dy, dz});
                linear_offsets_.push_back(dx + static_cast<long>(grid_.n) * (dy + static_cast<long>(grid_.n) * dz));
            }
    const std::size_t ns = offsets_.size();
    const std::size_t bs = static_cast<std::size_t>(dim * dim);
    blocks_.assign(n * ns * bs, 0.0);

    // scalar stencil of one face gradient: cells with a coefficient per derivative direction
    struct Entry {
        std::size_t cell;
        double coef[3];
    };
    std::vector<Entry> st;
    auto add = [&](std::size_t cell, int b, double v) {
        for (auto& e : st)
            if (e.cell == cell) {
                e.coef[b] += v;
                return;
            }
        Entry e{cell, {0.0, 0.0, 0.0}};
        e.coef[b] = v;
        st.push_back(e);
    };
    // half of the cell-centred difference in direction b at cell c (ghost u = -u)
    auto add_central = [&](std::size_t c, int b, double scale) {
        const long p = grid_.neighbor(c, b, +1);
        const long m = grid_.neighbor(c, b, -1);
        const double v = scale / (2.0 * h_);
        if (p >= 0) add(static_cast<std::size_t>(p), b, v); else add(c, b, -v);
        if (m >= 0) add(static_cast<std::size_t>(m), b, -v); else add(c, b, v);
    };
    auto scatter = [&](double w, double mu) {
        const double lam = eta_ - 2.0 / 3.0 * mu;
        for (const Entry& p : st) {
            const auto ip = grid_.ijk(p.cell);
            for (const Entry& q : st) {
                const auto iq = grid_.ijk(q.cell);
                const int off = (iq[0] - ip[0] + 2) + 5 * ((iq[1] - ip[1] + 2) + 5 * (iq[2] - ip[2] + 2));
                const int slot = slot_of_offset_[off];
                double* blk = &blocks_[(p.cell * ns + static_cast<std::size_t>(slot)) * bs];
                double ss = 0.0;
                for (int b = 0; b < dim; ++b) ss += p.coef[b] * q.coef[b];
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j)
                        blk[i * dim + j] += w * ((i == j ? mu * ss : 0.0) + mu * q.coef[i] * p.coef[j] + lam * p.coef[i] * q.coef[j]);
            }
        }
    };
    for (int a = 0; a < dim; ++a)
        for (std::size_t c = 0; c < n; ++c) {
            const auto id = grid_.ijk(c);
            if (id[a] == 0) {
                st.clear();
                add(c, a, 2.0 / h_);
                scatter(w_wall_, mu_[c]);
            }
            const long r = grid_.neighbor(c, a, +1);
            st.clear();
            if (r < 0) {
                add(c, a, -2.0 / h_);
                scatter(w_wall_, mu_[c]);
                continue;
            }
            const auto rr = static_cast<std::size_t>(r);
            add(rr, a, 1.0 / h_);
            add(c, a, -1.0 / h_);
            for (int b = 0; b < dim; ++b) {
                if (b == a) continue;
                add_central(c, b, 0.5);
                add_central(rr, b, 0.5);
            }
            scatter(w_inner_, 0.5 * (mu_[c] + mu_[rr]));
        }
    assembled_ = true;
}

void ViscousOperator::apply(const CellVectors& u, CellVectors& out) const
{
    if (!assembled_) assemble();
    const int dim = grid_.dim;
    const int n = grid_.n;
    const std::size_t nc = grid_.cell_count();
    const std::size_t ns = offsets_.size();
    const std::size_t bs = static_cast<std::size_t>(dim * dim);
    for (int i = 0; i < 3; ++i) out[i].resize(nc);
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < nc; ++c) {
        const auto id = grid_.ijk(c);
        double o[3] = {0.0, 0.0, 0.0};
        const double* blk = &blocks_[c * ns * bs];
        const bool inner = id[0] >= 2 && id[0] < n - 2 && id[1] >= 2 && id[1] < n - 2 &&
                           (dim == 2 || (id[2] >= 2 && id[2] < n - 2));
        if (inner && dim == 2) {
            const double* u0 = u[0].data() + c;
            const double* u1 = u[1].data() + c;
            for (std::size_t k = 0; k < ns; ++k, blk += bs) {
                const long q = linear_offsets_[k];
                o[0] += blk[0] * u0[q] + blk[1] * u1[q];
                o[1] += blk[2] * u0[q] + blk[3] * u1[q];
            }
            out[0][c] = o[0];
            out[1][c] = o[1];
            out[2][c] = 0.0;
            continue;
        }
        if (inner) {
            for (std::size_t k = 0; k < ns; ++k, blk += bs) {
                const std::size_t q = c + linear_offsets_[k];
                for (int i = 0; i < 3; ++i)
                    o[i] += blk[3 * i] * u[0][q] + blk[3 * i + 1] * u[1][q] + blk[3 * i + 2] * u[2][q];
            }
            for (int i = 0; i < 3; ++i) out[i][c] = o[i];
            continue;
        }
        for (std::size_t k = 0; k < ns; ++k, blk += bs) {
            const auto& off = offsets_[k];
            const int x = id[0] + off[0], y = id[1] + off[1], z = id[2] + off[2];
            if (x < 0 || x >= n || y < 0 || y >= n || z < 0 || z >= grid_.nz()) continue;
            const std::size_t q = grid_.index(x, y, z);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) o[i] += blk[i * dim + j] * u[j][q];
        }
        for (int i = 0; i < dim; ++i) out[i][c] = o[i];
        for (int i = dim; i < 3; ++i) out[i][c] = 0.0;
    }
}

double ViscousOperator::form(const CellVectors& u, const CellVectors& v) const
{
    return form_split(u, v, nullptr).total;
}

DissipationSplit ViscousOperator::form_split(const CellVectors& u, const CellVectors& v, const std::vector<double>* levelset) const
{
    std::vector<Tensor> du, dv;
    cell_gradients(u, du);
    cell_gradients(v, dv);
    const int dim = grid_.dim;
    // faces are visited in the same order for u and v
    std::vector<Tensor> gv;
    for_each_face(v, dv, [&](int, long, long, double, const Tensor& g) { gv.push_back(g); });
    std::vector<double> fluid, solid;
    std::size_t k = 0;
    for_each_face(u, du, [&](int, long l, long r, double w, const Tensor& g) {
        const bool inner = l >= 0 && r >= 0;
        const double mf = inner ? 0.5 * (mu_[l] + mu_[r]) : mu_[l >= 0 ? l : r];
        const double e = w * contract(stress(g, mf, eta_, dim), gv[k++]);
        bool is_fluid = true;
        if (levelset) {
            const auto& d = *levelset;
            is_fluid = (inner ? 0.5 * (d[l] + d[r]) : d[l >= 0 ? l : r]) < 0.0;
        }
        (is_fluid ? fluid : solid).push_back(e);
    });
    DissipationSplit s;
    s.fluid = pairwise_sum(fluid);
    s.solid = pairwise_sum(solid);
    s.total = s.fluid + s.solid;
    return s;
}

void ViscousOperator::diagonal(CellVectors& out) const
{
    const std::size_t n = grid_.cell_count();
    const int dim = grid_.dim;
    for (int i = 0; i < 3; ++i) out[i].assign(n, 0.0);
    const double h2 = h_ * h_;
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
        for (int a = 0; a < dim; ++a)
            for (int side : {-1, 1}) {
                const long q = grid_.neighbor(c, a, side);
                const double mf = q >= 0 ? 0.5 * (mu_[c] + mu_[q]) : mu_[c];
                const double scale = q >= 0 ? w_inner_ / h2 : 4.0 * w_wall_ / h2;
                for (int i = 0; i < dim; ++i)
                    out[i][c] += scale * (mf * (i == a ? 4.0 / 3.0 : 1.0) + (i == a ? eta_ : 0.0));
            }
    }
}

DissipationSplit ViscousOperator::dissipation(const CellVectors& u, const std::vector<double>* levelset) const
{
    std::vector<Tensor> du;
    cell_gradients(u, du);
    const int dim = grid_.dim;
    std::vector<double> fluid, solid;
    for_each_face(u, du, [&](int, long l, long r, double w, const Tensor& g) {
        const bool inner = l >= 0 && r >= 0;
        const double mf = inner ? 0.5 * (mu_[l] + mu_[r]) : mu_[l >= 0 ? l : r];
        const Tensor f = deviatoric_form(g, dim);
        const double tr = trace(g, dim);
        const double e = w * (0.5 * mf * contract(f, f) + eta_ * tr * tr);
        bool is_fluid = true;
        if (levelset) {
            const auto& d = *levelset;
            const double dv = inner ? 0.5 * (d[l] + d[r]) : d[l >= 0 ? l : r];
            is_fluid = dv < 0.0;
        }
        (is_fluid ? fluid : solid).push_back(e);
    });
    DissipationSplit s;
    s.fluid = pairwise_sum(fluid);
    s.solid = pairwise_sum(solid);
    s.total = s.fluid + s.solid;
    return s;
}

} // namespace penaflow
