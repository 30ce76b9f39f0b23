#include "penaflow/multigrid.hpp"

#include <cmath>

namespace penaflow {

namespace {

std::size_t idx(int n, int i, int j, int k)
{
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
}

} // namespace

void ScalarMultigrid::finalize(Level& L) const
{
    const std::size_t nc = L.cells();
    L.diag.assign(nc, 0.0);
    L.u.assign(nc, 0.0);
    L.r.assign(nc, 0.0);
    L.tmp.assign(nc, 0.0);
    const int nz = L.dim == 3 ? L.n : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < L.n; ++j)
            for (int i = 0; i < L.n; ++i) {
                const std::size_t c = idx(L.n, i, j, k);
                const int id[3] = {i, j, k};
                double d = L.m[c];
                for (int a = 0; a < L.dim; ++a) {
                    d += L.tp[a][c];
                    if (id[a] > 0) {
                        int q[3] = {i, j, k};
                        --q[a];
                        d += L.tp[a][idx(L.n, q[0], q[1], q[2])];
                    } else {
                        d += L.tw[a][c];
                    }
                }
                L.diag[c] = d;
            }
}

void ScalarMultigrid::setup(const Grid& g, const std::vector<double>& mass, const std::vector<double>& mu)
{
    levels_.clear();
    Level f;
    f.n = g.n;
    f.dim = g.dim;
    f.m = mass;
    const double h = g.spacing();
    const double scale = g.dim == 2 ? 1.0 : h;
    const std::size_t nc = f.cells();
    const int nz = g.dim == 3 ? g.n : 1;
    for (int a = 0; a < g.dim; ++a) {
        f.tp[a].assign(nc, 0.0);
        f.tw[a].assign(nc, 0.0);
    }
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                const std::size_t c = idx(g.n, i, j, k);
                const int id[3] = {i, j, k};
                for (int a = 0; a < g.dim; ++a) {
                    if (id[a] + 1 < g.n) {
                        int q[3] = {i, j, k};
                        ++q[a];
                        f.tp[a][c] = 0.5 * (mu[c] + mu[idx(g.n, q[0], q[1], q[2])]) * scale;
                    } else {
                        f.tp[a][c] = 2.0 * mu[c] * scale;
                    }
                    if (id[a] == 0) f.tw[a][c] = 2.0 * mu[c] * scale;
                }
            }
    finalize(f);
    levels_.push_back(std::move(f));

    while (levels_.back().n % 2 == 0 && levels_.back().n >= 8) {
        const Level& F = levels_.back();
        Level C;
        C.n = F.n / 2;
        C.dim = F.dim;
        const std::size_t cc = C.cells();
        C.m.assign(cc, 0.0);
        for (int a = 0; a < C.dim; ++a) {
            C.tp[a].assign(cc, 0.0);
            C.tw[a].assign(cc, 0.0);
        }
        const int fz = F.dim == 3 ? F.n : 1;
        for (int k = 0; k < fz; ++k)
            for (int j = 0; j < F.n; ++j)
                for (int i = 0; i < F.n; ++i) {
                    const std::size_t c = idx(F.n, i, j, k);
                    const std::size_t p = idx(C.n, i / 2, j / 2, F.dim == 3 ? k / 2 : 0);
                    const int id[3] = {i, j, k};
                    C.m[p] += F.m[c];
                    for (int a = 0; a < F.dim; ++a) {
                        if (id[a] % 2 == 1) C.tp[a][p] += F.tp[a][c];
                        if (id[a] == 0) C.tw[a][p] += F.tw[a][c];
                    }
                }
        finalize(C);
        levels_.push_back(std::move(C));
    }
}

void ScalarMultigrid::smooth(const Level& L, int color) const
{
    const int n = L.n;
    const int nz = L.dim == 3 ? n : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = (j + k + color) % 2; i < n; i += 2) {
                const std::size_t c = idx(n, i, j, k);
                const int id[3] = {i, j, k};
                double s = L.r[c];
                for (int a = 0; a < L.dim; ++a) {
                    const std::size_t stride = a == 0 ? 1 : (a == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n);
                    if (id[a] + 1 < n) s += L.tp[a][c] * L.u[c + stride];
                    if (id[a] > 0) s += L.tp[a][c - stride] * L.u[c - stride];
                }
                L.u[c] = s / L.diag[c];
            }
}

void ScalarMultigrid::residual(const Level& L) const
{
    const int n = L.n;
    const int nz = L.dim == 3 ? n : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t c = idx(n, i, j, k);
                const int id[3] = {i, j, k};
                double s = L.diag[c] * L.u[c];
                for (int a = 0; a < L.dim; ++a) {
                    const std::size_t stride = a == 0 ? 1 : (a == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n);
                    if (id[a] + 1 < n) s -= L.tp[a][c] * L.u[c + stride];
                    if (id[a] > 0) s -= L.tp[a][c - stride] * L.u[c - stride];
                }
                L.tmp[c] = L.r[c] - s;
            }
}

void ScalarMultigrid::cycle(std::size_t l) const
{
    const Level& L = levels_[l];
    std::fill(L.u.begin(), L.u.end(), 0.0);
    constexpr int nu = 2;
    if (l + 1 == levels_.size()) {
        constexpr int coarse = 40;
        for (int s = 0; s < coarse; ++s) {
            smooth(L, 0);
            smooth(L, 1);
        }
        for (int s = 0; s < coarse; ++s) {
            smooth(L, 1);
            smooth(L, 0);
        }
        return;
    }
    for (int s = 0; s < nu; ++s) {
        smooth(L, 0);
        smooth(L, 1);
    }
    residual(L);
    const Level& C = levels_[l + 1];
    std::fill(C.r.begin(), C.r.end(), 0.0);
    const int n = L.n;
    const int nz = L.dim == 3 ? n : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) C.r[idx(C.n, i / 2, j / 2, L.dim == 3 ? k / 2 : 0)] += L.tmp[idx(n, i, j, k)];
    cycle(l + 1);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) L.u[idx(n, i, j, k)] += C.u[idx(C.n, i / 2, j / 2, L.dim == 3 ? k / 2 : 0)];
    for (int s = 0; s < nu; ++s) {
        smooth(L, 1);
        smooth(L, 0);
    }
}

void ScalarMultigrid::vcycle(const std::vector<double>& r, std::vector<double>& z) const
{
    const Level& L = levels_.front();
    L.r = r;
    cycle(0);
    z = L.u;
}

void ScalarMultigrid::apply(const std::vector<double>& u, std::vector<double>& out) const
{
    const Level& L = levels_.front();
    L.u = u;
    std::fill(L.r.begin(), L.r.end(), 0.0);
    residual(L);
    out.resize(u.size());
    for (std::size_t c = 0; c < u.size(); ++c) out[c] = -L.tmp[c];
}

} // namespace penaflow
