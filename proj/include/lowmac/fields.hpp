#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "lowmac/grid.hpp"

namespace lowmac {

/// One real value per primal cell, indexed by the grid's cell numbering.
class CellField {
public:
    explicit CellField(const MacGrid& g, double init = 0.0)
        : grid_(&g), v_(static_cast<size_t>(g.cell_count()), init) {}

    const MacGrid& grid() const { return *grid_; }
    int size() const { return static_cast<int>(v_.size()); }
    double operator[](int k) const { return v_[static_cast<size_t>(k)]; }
    double& operator[](int k) { return v_[static_cast<size_t>(k)]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    double min() const;
    double max() const;

private:
    const MacGrid* grid_;
    std::vector<double> v_;
};

/// One real value per face, grouped by axis. Velocity-like fields keep
/// external-face entries identically zero (homogeneous Dirichlet data);
/// construction zero-fills, and the solvers only ever write internal faces.
class FaceField {
public:
    explicit FaceField(const MacGrid& g) : grid_(&g) {
        for (int a = 0; a < g.dim(); ++a)
            v_[a].assign(static_cast<size_t>(g.face_count(a)), 0.0);
    }

    const MacGrid& grid() const { return *grid_; }
    double at(int axis, int face) const {
        return v_[axis][static_cast<size_t>(face)];
    }
    double& at(int axis, int face) { return v_[axis][static_cast<size_t>(face)]; }
    const std::vector<double>& values(int axis) const { return v_[axis]; }
    std::vector<double>& values(int axis) { return v_[axis]; }

    /// True when every external face carries exactly 0.
    bool external_faces_zero() const;
    /// Zeroes all external-face entries.
    void clear_external();

private:
    const MacGrid* grid_;
    std::array<std::vector<double>, 3> v_;
};

// -- norms -------------------------------------------------------------------

/// ( sum_K |K| f_K^2 )^{1/2}
double norm_l2_cells(const CellField& f);

/// ( sum_K |K| |f_K|^q )^{1/q}, q >= 1 (throws below 1).
double norm_lq_cells(const CellField& f, double q);

/// max_K |f_K|
double norm_linf_cells(const CellField& f);

/// Broken H^1 norm of a velocity field: the square root of the sum, over
/// components and mesh directions, of volume-weighted squared difference
/// quotients between adjacent values. Quotients normal to walls use the
/// stored zero boundary values; transverse boundary quotients run from the
/// last value to the zero wall value over the half spacing, with half
/// volume weight. This is exactly the norm whose square the viscous
/// operator's Laplacian part reproduces under summation by parts.
double norm_broken_h1(const FaceField& u);

/// (1/2) sum_i sum_s |D_s| rho_Ds u_{s,i}^2 over internal faces.
/// Throws std::domain_error when rho_dual is not positive on some internal
/// face.
double weighted_kinetic_energy(const FaceField& rho_dual, const FaceField& u);

/// L2 norm over internal faces with dual-cell weights (no density):
/// ( sum_i sum_s |D_s| u_{s,i}^2 )^{1/2}
double norm_l2_faces(const FaceField& u);

// -- CSV snapshots -------------------------------------------------------------

/// One row per cell: index, center coordinates, value. Header row included,
/// values printed with 17 significant digits.
void write_csv(std::ostream& os, const CellField& f,
               const std::string& value_name = "value");
/// One row per face: axis, index, center coordinates, value.
void write_csv(std::ostream& os, const FaceField& f,
               const std::string& value_name = "value");

}  // namespace lowmac
