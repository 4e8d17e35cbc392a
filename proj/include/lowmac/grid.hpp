#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace lowmac {

/// Uniform staggered (MAC) mesh on a parallelepiped [0,L1]x...x[0,Ld],
/// d in {2,3}.
///
/// Layout of unknowns:
///  - scalars (density, pressure) live at cell centers;
///  - the i-th velocity component lives at the centers of the faces normal
///    to axis i.
///
/// Enumeration is lexicographic with axis 0 fastest, so all assembled
/// matrices and CSV outputs are reproducible bit for bit:
///  - cell id   = i0 + n0*(i1 + n1*i2)
///  - face id   (axis a) = c0 + N0*(c1 + N1*c2) where Na = na+1 along the
///    face-normal axis and Nb = nb transversally.
///
/// Every internal face s = K|L (K the cell on the lower side along the face
/// axis) carries a momentum ("dual") cell D_s made of the two half-cells
/// adjacent to s; on a uniform mesh |D_s| = |K| and each half measures
/// |K|/2. The boundary of D_s is split into dual faces, each carrying a
/// precomputed DualFaceStencil (see below).
class MacGrid;

/// One dual face of a momentum cell D_s, s normal to axis i.
///
/// Two kinds:
///  - Normal: the dual face is normal to axis i and sits on the mid-plane
///    of one of the two primal cells sharing s. Its mass flux combines the
///    two axis-i primal fluxes of that cell with orientation signs.
///  - Tangent: the dual face is normal to some transverse axis j and is the
///    union of the halves of one axis-j face of K and one of L; its mass
///    flux is the half-sum of those two primal fluxes.
///
/// The stencil stores the two primal faces and the signed half coefficients
/// such that for a flux set F (stored in +axis orientation out of the lower
/// cell):
///     F_dual = coeff[0]*F[face[0]] + coeff[1]*F[face[1]].
/// External primal faces are stored like any other; their fluxes are
/// identically zero. A tangent dual face contained in the domain boundary is
/// flagged `boundary` and excluded from all flux sums (its flux vanishes).
/// `neighbor_face` is the face s' of the same axis whose momentum cell sits
/// across this dual face; it is where centered face values are read from.
/// For a normal dual face next to the wall s' is the external face (its
/// stored velocity is zero); for boundary tangent faces it is -1.
struct DualFaceStencil {
    enum class Kind : std::uint8_t { Normal, Tangent };
    Kind kind;
    bool boundary;
    int flux_axis;      ///< axis of the two referenced primal faces
    int face[2];        ///< primal face ids (flux_axis), always valid ids
    double coeff[2];    ///< signed half coefficients (+-1/2)
    int neighbor_face;  ///< s' (same axis as s), -1 for boundary dual faces
    double measure;     ///< |dual face|
};

class MacGrid {
public:
    /// Builds the mesh. Requires d in {2,3}, all cell counts >= 2 (an axis
    /// with a single cell has no internal face, hence no momentum unknown)
    /// and positive lengths. Throws std::invalid_argument otherwise.
    MacGrid(std::span<const int> cells_per_axis,
            std::span<const double> lengths);

    int dim() const { return dim_; }
    int cells_per_axis(int axis) const { return n_[axis]; }
    double length(int axis) const { return len_[axis]; }
    double spacing(int axis) const { return h_[axis]; }
    double domain_measure() const { return omega_; }

    // -- cells -------------------------------------------------------------
    int cell_count() const { return cell_count_; }
    int cell_index(const std::array<int, 3>& c) const {
        return c[0] + n_[0] * (c[1] + n_[1] * c[2]);
    }
    std::array<int, 3> cell_coords(int cell) const {
        std::array<int, 3> c{0, 0, 0};
        c[0] = cell % n_[0];
        cell /= n_[0];
        c[1] = cell % n_[1];
        c[2] = cell / n_[1];
        return c;
    }
    double cell_measure() const { return cell_measure_; }
    std::array<double, 3> cell_center(int cell) const;

    // -- faces (per axis) ---------------------------------------------------
    /// Total number of axis-`axis` faces, internal and external.
    int face_count(int axis) const { return face_count_[axis]; }
    /// Face id from its lattice coordinates: `pos` in [0, n_axis] along the
    /// normal axis, cell coordinates transversally.
    int face_index(int axis, const std::array<int, 3>& coords) const;
    std::array<int, 3> face_coords(int axis, int face) const;
    bool face_is_external(int axis, int face) const {
        const int pos = face_coords(axis, face)[axis];
        return pos == 0 || pos == n_[axis];
    }
    double face_measure(int axis) const { return face_measure_[axis]; }
    std::array<double, 3> face_center(int axis, int face) const;

    /// Cells on either side of a face, lower then upper along the face
    /// axis; -1 when the face lies on the boundary. The unit normal stored
    /// with the flux convention points from lower to upper (+axis).
    std::array<int, 2> face_cells(int axis, int face) const;

    /// Faces of a cell: [axis][0]=lower, [axis][1]=upper face id.
    std::array<std::array<int, 2>, 3> cell_faces(int cell) const;

    // -- internal faces and momentum cells ----------------------------------
    const std::vector<int>& internal_faces(int axis) const {
        return internal_faces_[axis];
    }
    int internal_face_count() const { return internal_total_; }
    /// Dense 0-based numbering of internal faces across all axes
    /// (axis-major), -1 for external faces. Used as the unknown numbering of
    /// the velocity systems.
    int face_dof(int axis, int face) const { return face_dof_[axis][face]; }
    /// Inverse of face_dof.
    std::pair<int, int> dof_face(int dof) const { return dof_face_[dof]; }

    double dual_measure(int /*axis*/) const { return cell_measure_; }
    double half_dual_measure(int /*axis*/) const { return cell_measure_ / 2; }

    /// The 2d dual faces of the momentum cell of an internal face
    /// (2 normal + 2(d-1) tangent, tangent ones possibly flagged boundary).
    std::span<const DualFaceStencil> dual_faces(int axis, int face) const;

private:
    void build_dual_stencils();

    int dim_ = 0;
    std::array<int, 3> n_{1, 1, 1};
    std::array<double, 3> len_{1, 1, 1};
    std::array<double, 3> h_{1, 1, 1};
    double omega_ = 1;
    double cell_measure_ = 1;
    std::array<double, 3> face_measure_{1, 1, 1};
    int cell_count_ = 0;
    std::array<int, 3> face_count_{0, 0, 0};
    std::array<std::array<int, 3>, 3> face_dims_{};  // lattice dims per axis
    std::array<std::vector<int>, 3> internal_faces_;
    std::array<std::vector<int>, 3> face_dof_;
    std::vector<std::pair<int, int>> dof_face_;
    int internal_total_ = 0;
    // stencils for internal faces, 2*dim consecutive entries per face, in
    // the order of internal_faces_[axis]
    std::array<std::vector<DualFaceStencil>, 3> stencils_;
    std::array<std::vector<int>, 3> stencil_offset_;  // by face id
};

}  // namespace lowmac
