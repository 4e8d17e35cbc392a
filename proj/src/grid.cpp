#include "lowmac/grid.hpp"

#include <stdexcept>
#include <string>

namespace lowmac {

MacGrid::MacGrid(std::span<const int> cells_per_axis,
                 std::span<const double> lengths) {
    dim_ = static_cast<int>(cells_per_axis.size());
    if (dim_ != 2 && dim_ != 3)
        throw std::invalid_argument("MacGrid: dimension must be 2 or 3, got " +
                                    std::to_string(dim_));
    if (lengths.size() != cells_per_axis.size())
        throw std::invalid_argument("MacGrid: lengths/counts size mismatch");
    for (int a = 0; a < dim_; ++a) {
        if (cells_per_axis[a] < 2)
            throw std::invalid_argument(
                "MacGrid: need at least 2 cells per axis, axis " +
                std::to_string(a) + " has " +
                std::to_string(cells_per_axis[a]));
        if (!(lengths[a] > 0))
            throw std::invalid_argument("MacGrid: lengths must be positive");
        n_[a] = cells_per_axis[a];
        len_[a] = lengths[a];
        h_[a] = len_[a] / n_[a];
    }
    // unit-size padding for the unused axis keeps the index math uniform
    for (int a = dim_; a < 3; ++a) {
        n_[a] = 1;
        len_[a] = 1;
        h_[a] = 1;
    }

    cell_count_ = n_[0] * n_[1] * n_[2];
    cell_measure_ = h_[0] * h_[1] * h_[2];
    omega_ = len_[0] * len_[1] * (dim_ == 3 ? len_[2] : 1.0);

    for (int a = 0; a < dim_; ++a) {
        face_measure_[a] = cell_measure_ / h_[a];
        for (int b = 0; b < 3; ++b) face_dims_[a][b] = (b == a) ? n_[b] + 1 : n_[b];
        face_count_[a] = face_dims_[a][0] * face_dims_[a][1] * face_dims_[a][2];
        face_dof_[a].assign(face_count_[a], -1);
        internal_faces_[a].reserve(face_count_[a]);
        for (int f = 0; f < face_count_[a]; ++f)
            if (!face_is_external(a, f)) internal_faces_[a].push_back(f);
    }

    internal_total_ = 0;
    for (int a = 0; a < dim_; ++a)
        for (int f : internal_faces_[a]) {
            face_dof_[a][f] = internal_total_++;
            dof_face_.emplace_back(a, f);
        }

    build_dual_stencils();
}

std::array<double, 3> MacGrid::cell_center(int cell) const {
    const auto c = cell_coords(cell);
    std::array<double, 3> x{0, 0, 0};
    for (int a = 0; a < dim_; ++a) x[a] = (c[a] + 0.5) * h_[a];
    return x;
}

int MacGrid::face_index(int axis, const std::array<int, 3>& coords) const {
    const auto& d = face_dims_[axis];
    return coords[0] + d[0] * (coords[1] + d[1] * coords[2]);
}

std::array<int, 3> MacGrid::face_coords(int axis, int face) const {
    const auto& d = face_dims_[axis];
    std::array<int, 3> c{0, 0, 0};
    c[0] = face % d[0];
    face /= d[0];
    c[1] = face % d[1];
    c[2] = face / d[1];
    return c;
}

std::array<double, 3> MacGrid::face_center(int axis, int face) const {
    const auto c = face_coords(axis, face);
    std::array<double, 3> x{0, 0, 0};
    for (int a = 0; a < dim_; ++a)
        x[a] = (a == axis) ? c[a] * h_[a] : (c[a] + 0.5) * h_[a];
    return x;
}

std::array<int, 2> MacGrid::face_cells(int axis, int face) const {
    auto c = face_coords(axis, face);
    const int pos = c[axis];
    std::array<int, 2> kl{-1, -1};
    if (pos > 0) {
        auto lo = c;
        lo[axis] = pos - 1;
        kl[0] = cell_index(lo);
    }
    if (pos < n_[axis]) {
        auto hi = c;
        hi[axis] = pos;
        kl[1] = cell_index(hi);
    }
    return kl;
}

std::array<std::array<int, 2>, 3> MacGrid::cell_faces(int cell) const {
    const auto c = cell_coords(cell);
    std::array<std::array<int, 2>, 3> out{};
    for (int a = 0; a < dim_; ++a) {
        auto lo = c;
        out[a][0] = face_index(a, lo);
        lo[a] = c[a] + 1;
        out[a][1] = face_index(a, lo);
    }
    return out;
}

std::span<const DualFaceStencil> MacGrid::dual_faces(int axis, int face) const {
    const int off = stencil_offset_[axis][face];
    if (off < 0)
        throw std::invalid_argument("MacGrid::dual_faces: face is external");
    return {stencils_[axis].data() + off, static_cast<size_t>(2 * dim_)};
}

void MacGrid::build_dual_stencils() {
    for (int i = 0; i < dim_; ++i) {
        stencil_offset_[i].assign(face_count_[i], -1);
        stencils_[i].reserve(internal_faces_[i].size() * 2 * dim_);
        for (int f : internal_faces_[i]) {
            stencil_offset_[i][f] = static_cast<int>(stencils_[i].size());
            const auto fc = face_coords(i, f);
            const int pos = fc[i];

            // Two dual faces normal to axis i, on the mid-planes of the two
            // primal cells sharing f. Flux = signed half-sum of the two
            // axis-i fluxes of that cell; outward normal carries the sign.
            for (int side = 0; side < 2; ++side) {
                DualFaceStencil s{};
                s.kind = DualFaceStencil::Kind::Normal;
                s.boundary = false;
                s.flux_axis = i;
                s.measure = face_measure_[i];
                auto other = fc;
                other[i] = (side == 0) ? pos - 1 : pos + 1;
                const int of = face_index(i, other);
                s.face[0] = f;
                s.face[1] = of;
                const double sgn = (side == 0) ? -1.0 : 1.0;
                s.coeff[0] = 0.5 * sgn;
                s.coeff[1] = 0.5 * sgn;
                s.neighbor_face = of;
                stencils_[i].push_back(s);
            }

            // 2(d-1) dual faces tangent to axis i: union of halves of one
            // axis-j face of each of the two primal cells, on each side.
            for (int j = 0; j < dim_; ++j) {
                if (j == i) continue;
                for (int side = 0; side < 2; ++side) {
                    DualFaceStencil s{};
                    s.kind = DualFaceStencil::Kind::Tangent;
                    s.flux_axis = j;
                    s.measure = face_measure_[j];
                    const int tpos = fc[j] + side;  // axis-j face position
                    s.boundary = (tpos == 0 || tpos == n_[j]);
                    // axis-j faces of the lower (K) and upper (L) cell of f
                    auto pk = fc;
                    pk[i] = pos - 1;  // lower cell coords; j-entry is a face
                    pk[j] = tpos;     // position along j
                    // K occupies cells coords with c_i = pos-1; its axis-j
                    // face lattice coordinate along i is the cell index.
                    s.face[0] = face_index(j, pk);
                    auto pl = pk;
                    pl[i] = pos;
                    s.face[1] = face_index(j, pl);
                    const double sgn = (side == 0) ? -1.0 : 1.0;
                    s.coeff[0] = 0.5 * sgn;
                    s.coeff[1] = 0.5 * sgn;
                    if (s.boundary) {
                        s.neighbor_face = -1;
                    } else {
                        auto nb = fc;
                        nb[j] = fc[j] + (side == 0 ? -1 : 1);
                        s.neighbor_face = face_index(i, nb);
                    }
                    stencils_[i].push_back(s);
                }
            }
        }
    }
}

}  // namespace lowmac
