#pragma once

#include <array>
#include <vector>

#include "penaflow/constitutive.hpp"
#include "penaflow/grid.hpp"
#include "penaflow/levelset.hpp"

namespace penaflow {

/// One vector component per array entry, cell-indexed.
using CellVectors = std::array<std::vector<double>, 3>;

CellVectors make_cell_vectors(const Grid& g);

/// mu_omega sampled at cell centres.
std::vector<double> viscosity_cells(const LevelSetField& d, const FluidParams& fp, const RegularizationParams& rp);

/// Cells where the smoothed interface delta is positive, with unit normal and delta value.
struct BandCell {
    std::size_t cell;
    Vec normal;
    double delta;
};
std::vector<BandCell> band_cells(const LevelSetField& d);

/// Cell-centred difference gradient with no-slip ghosts (u = -u beyond the walls); dg[c][i][b] = du_i/dx_b.
void central_gradients(const Grid& g, const CellVectors& u, std::vector<Tensor>& dg);

struct DissipationSplit {
    double total = 0.0;
    double fluid = 0.0;
    double solid = 0.0;
};

/// Face-based viscous operator on the cell grid with no-slip walls (ghost u = -u).
///
/// The face gradient takes the compact difference across the face for the normal derivative and
/// averages the two neighbouring cell-centred differences for the tangential ones. The bilinear form
///   a(u, v) = sum_f w_f [ mu_f F(G_f u) : G_f v + eta tr G_f u tr G_f v ],  F(G) = G + G^T - 2/3 tr G I
/// is symmetric positive semi-definite; `apply` returns K u with a(u, v) = sum_c v_c . (K u)_c.
class ViscousOperator {
public:
    ViscousOperator(const Grid& g, std::vector<double> mu_cells, double eta);

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] const std::vector<double>& mu() const noexcept { return mu_; }

    /// K u from the assembled block-sparse matrix (assembled on first use).
    void apply(const CellVectors& u, CellVectors& out) const;
    /// K u evaluated face by face without assembly. Not reentrant: uses internal scratch buffers.
    void apply_matrix_free(const CellVectors& u, CellVectors& out) const;
    [[nodiscard]] double form(const CellVectors& u, const CellVectors& v) const;
    /// a(u, v) split by the sign of d at the face.
    [[nodiscard]] DissipationSplit form_split(const CellVectors& u, const CellVectors& v, const std::vector<double>* levelset) const;
    /// Positive approximation of diag(K) per component, used as a Jacobi preconditioner.
    void diagonal(CellVectors& out) const;

    /// sum_f w_f (1/2 mu_f |F(G_f u)|^2 + eta (tr G_f u)^2), split by the sign of d at the face.
    [[nodiscard]] DissipationSplit dissipation(const CellVectors& u, const std::vector<double>* levelset = nullptr) const;

    void cell_gradients(const CellVectors& u, std::vector<Tensor>& dg) const { central_gradients(grid_, u, dg); }

    /// Visit every face with its gradient: f(axis, left cell or -1, right cell or -1, weight, G).
    template <class F>
    void for_each_face(const CellVectors& u, const std::vector<Tensor>& dg, F&& f) const;

private:
    [[nodiscard]] Tensor interior_gradient(const CellVectors& u, const std::vector<Tensor>& dg, std::size_t l, std::size_t r, int axis) const;
    [[nodiscard]] Tensor wall_gradient(const CellVectors& u, std::size_t c, int axis, double sign) const;

    void assemble() const;

    Grid grid_;
    std::vector<double> mu_;
    double eta_;
    double h_;
    double w_inner_;
    double w_wall_;
    // scratch for apply(); an operator instance must not be applied concurrently
    mutable std::vector<Tensor> scratch_grad_, scratch_tau_;
    mutable std::array<std::vector<Tensor>, 3> scratch_plus_, scratch_wall_;
    // block-sparse K: for every cell a fixed list of neighbour offsets, each with a dim x dim block
    mutable bool assembled_ = false;
    mutable std::vector<std::array<int, 3>> offsets_;
    mutable std::vector<long> linear_offsets_;
    mutable std::vector<int> slot_of_offset_; ///< 5^3 lookup, -1 when the offset is not in the pattern
    mutable std::vector<double> blocks_;      ///< [cell][slot][i][j], dim x dim per slot
};

template <class F>
void ViscousOperator::for_each_face(const CellVectors& u, const std::vector<Tensor>& dg, F&& f) const
{
    const std::size_t n = grid_.cell_count();
    for (int a = 0; a < grid_.dim; ++a)
        for (std::size_t c = 0; c < n; ++c) {
            const auto id = grid_.ijk(c);
            if (id[a] == 0) f(a, -1L, static_cast<long>(c), w_wall_, wall_gradient(u, c, a, 1.0));
            const long r = grid_.neighbor(c, a, +1);
            if (r >= 0)
                f(a, static_cast<long>(c), r, w_inner_, interior_gradient(u, dg, c, static_cast<std::size_t>(r), a));
            else
                f(a, static_cast<long>(c), -1L, w_wall_, wall_gradient(u, c, a, -1.0));
        }
}

} // namespace penaflow
