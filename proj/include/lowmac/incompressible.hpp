#pragma once

#include <vector>

#include "lowmac/fields.hpp"
#include "lowmac/grid.hpp"
#include "lowmac/linsolve.hpp"

namespace lowmac {

struct IncParams {
    double mu = 0.1;
    double lambda = 0.0;
    double dt = 1e-2;
    double lin_tol = 1e-12;

    void validate() const;
};

/// State of the incompressible MAC pressure-correction (projection) scheme:
/// velocity with zero external faces and a mean-free pressure fluctuation.
/// After every correction the discrete divergence vanishes to solver
/// tolerance.
struct IncState {
    int n = 0;
    FaceField u;
    CellField dp;
    IncParams params;

    IncState(const MacGrid& g, const IncParams& prm)
        : u(g), dp(g), params(prm) {}
};

struct IncRecord {
    int step = 0;
    double time = 0;
    double kinetic = 0;    ///< (1/2) sum |D_s| u^2
    double div_linf = 0;   ///< max_K |(div u)_K|
    double dp_l2 = 0;
    double dp_mean = 0;
};

/// Implicit momentum prediction at unit density:
/// (u~ - u^n)/dt + div(u~_i u^n) - div tau(u~) + grad dp^n = 0,
/// with the same convection, viscous and gradient stencils as the
/// compressible scheme evaluated at rho = 1.
FaceField inc_prediction_step(const IncState& s);

/// Projection: solve the pressure Poisson problem obtained by eliminating
/// u^{n+1} = u~ - dt (grad dp^{n+1} - grad dp^n) in div u^{n+1} = 0 (the
/// Poisson operator is assembled as the literal composition of the
/// divergence and gradient stencils, with a Lagrange multiplier carrying the
/// zero-mean constraint), renormalize dp to exact zero mean and reconstruct
/// the velocity.
struct IncCorrection {
    FaceField u;
    CellField dp;
    double residual = 0;

    IncCorrection(const MacGrid& g) : u(g), dp(g) {}
};
IncCorrection inc_correction_step(const IncState& s, const FaceField& u_tilde);

IncState inc_advance(const IncState& s);

struct IncTrajectory {
    IncState final;
    std::vector<IncRecord> records;
};
IncTrajectory inc_run(const IncState& init, int nsteps);

/// The unscaled Poisson matrix of the projection: row K of
/// -|K| div(grad q)_K, built column by column from the discrete operators
/// themselves so it coincides with their composition exactly.
SparseMatrix assemble_cell_poisson(const MacGrid& g);

}  // namespace lowmac
