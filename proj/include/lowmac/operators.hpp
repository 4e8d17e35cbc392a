#pragma once

#include <array>
#include <vector>

#include "lowmac/barotropic.hpp"
#include "lowmac/fields.hpp"
#include "lowmac/grid.hpp"

namespace lowmac {

/// Upwind mass fluxes. One value is stored per face in the +axis
/// orientation (out of the lower cell); the flux out of the upper cell is
/// its negative, so antisymmetry is structural. External faces carry exact
/// zeros.
struct MassFluxSet {
    const MacGrid* grid;
    std::array<std::vector<double>, 3> flux;  // per axis, all faces

    explicit MassFluxSet(const MacGrid& g) : grid(&g) {
        for (int a = 0; a < g.dim(); ++a)
            flux[a].assign(static_cast<size_t>(g.face_count(a)), 0.0);
    }
    /// Stored (+axis oriented) flux through a face.
    double stored(int axis, int face) const { return flux[axis][face]; }
    /// Flux outward from `cell` through its face (signed).
    double outward(int axis, int face, bool cell_is_lower) const {
        return cell_is_lower ? flux[axis][face] : -flux[axis][face];
    }
};

/// Mass fluxes through the dual faces of every momentum cell, aligned with
/// MacGrid::dual_faces ordering (2*dim entries per internal face, in the
/// order of MacGrid::internal_faces).
struct DualFluxSet {
    const MacGrid* grid;
    std::array<std::vector<double>, 3> flux;  // per axis of the momentum cell

    explicit DualFluxSet(const MacGrid& g) : grid(&g) {
        for (int a = 0; a < g.dim(); ++a)
            flux[a].assign(g.internal_faces(a).size() * 2 * g.dim(), 0.0);
    }
};

/// F_{K,s} = |s| rho_s u_{K,s}, upwind density (rho of the cell the flow
/// leaves; ties take the lower cell, the flux is zero there anyway).
MassFluxSet mass_flux(const CellField& rho, const FaceField& u);

/// div(rho u)_K = (1/|K|) sum of outward mass fluxes.
CellField mass_divergence(const CellField& rho, const FaceField& u);
CellField flux_divergence(const MassFluxSet& F);

/// (div u)_K = (1/|K|) sum |s| u_{K,s}  (mass divergence at unit density).
CellField velocity_divergence(const FaceField& u);

/// Face-difference gradient of a generic cell field:
/// (grad q)_{s,i} = (|s|/|D_s|) (q_L - q_K) in the +axis orientation; zero
/// on external faces.
FaceField gradient_of_cells(const CellField& q);

/// Discrete pressure gradient of the barotropic pressure of `rho`:
/// same stencil as gradient_of_cells applied to rho^gamma, with the pressure
/// difference evaluated in cancellation-free form (Barotropic::pressure_diff).
/// Throws std::domain_error if rho is not positive everywhere.
FaceField pressure_gradient(const CellField& rho, double gamma);

/// rho_{D_s} = (|D_{K,s}| rho_K + |D_{L,s}| rho_L)/|D_s|, the arithmetic
/// mean on a uniform mesh. Internal faces only (external entries left 0).
FaceField dual_density(const CellField& rho);

/// Dual-face mass fluxes assembled from the primal flux set through the
/// precomputed stencils. Locally conservative; zero through boundary dual
/// faces.
DualFluxSet dual_mass_fluxes(const MassFluxSet& F);

/// Momentum convection:
/// div(rho v_i u)_s = (1/|D_s|) sum over dual faces of F_dual * centered v,
/// the centered value being the mean of v at s and at the neighbor face
/// (stored zero when the neighbor is external).
FaceField velocity_convection(const DualFluxSet& Fd, const FaceField& v);

/// Viscous operator div(tau(u)) per unit dual volume:
/// mu * component-wise MAC Laplacian (reflected ghosts give the value -u at
/// tangential walls, the stored zeros close the normal direction) plus
/// (mu+lambda) * face difference of the cell divergences.
/// Requires mu > 0 and mu + lambda > 0.
FaceField diffusion(const FaceField& u, double mu, double lambda);

}  // namespace lowmac
