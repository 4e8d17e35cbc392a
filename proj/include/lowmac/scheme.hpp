#pragma once

#include <vector>

#include "lowmac/diagnostics_record.hpp"
#include "lowmac/fields.hpp"
#include "lowmac/grid.hpp"
#include "lowmac/operators.hpp"

namespace lowmac {

struct SchemeParams {
    double gamma = 2.0;    ///< pressure law exponent, >= 1
    double mu = 0.1;       ///< shear viscosity, > 0
    double lambda = 0.0;   ///< second viscosity, mu + lambda > 0
    double mach = 1.0;     ///< Mach number scaling the pressure gradient
    double dt = 1e-2;      ///< constant time step
    double lin_tol = 1e-12;      ///< relative residual of linear solves
    double newton_tol = 1e-11;   ///< mass-balance max residual, times max(1, max rho)
    int newton_max_iter = 50;
    int max_halvings = 30;

    void validate() const;
};

/// Time-level data advanced by one step of the pressure-correction
/// algorithm. Invariants: both densities positive, p = rho^gamma cell by
/// cell, u zero on external faces, and (for every computed level) the mass
/// balance holds on the momentum cells between (rho_prev, rho, u) up to the
/// nonlinear solver tolerance; the initialization establishes it at step 0
/// by constructing rho_prev from the backward mass balance.
struct SchemeState {
    int n = 0;             ///< time index of (rho, u, p)
    CellField rho_prev;    ///< density at n-1
    CellField rho;         ///< density at n
    FaceField u;           ///< velocity at n
    CellField p;           ///< pressure rho^gamma at n
    FaceField grad_p;      ///< discrete pressure gradient at n
    SchemeParams params;
    double visc_accum = 0;  ///< sum_k dt ||u~^k||_{1,M}^2 up to level n
    double c0 = 0;          ///< initial-data entropy constant

    SchemeState(const MacGrid& g, const SchemeParams& prm)
        : rho_prev(g), rho(g), u(g), p(g), grad_p(g), params(prm) {}
};

struct PredictionResult {
    FaceField u_tilde;       ///< predicted velocity, zero on external faces
    FaceField scaled_grad;   ///< sqrt(rho^n_D / rho^{n-1}_D) grad p^n
    double residual = 0;     ///< linear solve residual (2-norm)

    PredictionResult(const MacGrid& g) : u_tilde(g), scaled_grad(g) {}
};

struct CorrectionResult {
    CellField rho;
    FaceField u;
    CellField p;
    FaceField grad_p;
    int newton_iterations = 0;
    double mass_residual = 0;  ///< final max-norm residual of the mass balance
    std::vector<double> residual_history;

    CorrectionResult(const MacGrid& g)
        : rho(g), u(g), p(g), grad_p(g) {}
};

struct StepResult {
    SchemeState state;          ///< the advanced state (level n+1)
    PredictionResult prediction;
    DiagnosticsRecord record;
};

/// Builds the level-0 state from cell-averaged density and face-averaged
/// velocity: rho^{-1} solves the backward mass balance
/// (rho^0 - rho^{-1})/dt + div(rho^0 u^0) = 0 explicitly, so the momentum
/// cells start with a consistent mass history. Throws std::domain_error for
/// nonpositive rho0 and when the backward density loses positivity (time
/// step too large for the data).
SchemeState init_state(const CellField& rho0, const FaceField& u0,
                       const SchemeParams& params);

/// (sqrt(rho^n_D / rho^{n-1}_D)) grad p^n, face by face.
FaceField scale_pressure_gradient(const SchemeState& s);

/// Solves the implicit momentum prediction for u~:
/// (rho^n_D u~ - rho^{n-1}_D u^n)/dt + div(rho^n u~ u^n) - div tau(u~)
///   + Ma^-2 scaled_grad = 0,
/// one coupled sparse system over all components.
PredictionResult prediction_step(const SchemeState& s);

/// Solves the coupled correction: velocity update from the new pressure
/// gradient plus the implicit upwind mass balance, by Newton iteration on
/// the density increment with the velocity eliminated. The upwind direction
/// is frozen per iterate; positivity is kept by step halving; after meeting
/// the tolerance one extra iteration polishes the residual. The returned
/// velocity satisfies the gradient update relation against the returned
/// gradient to machine precision; the gradient is the one of the increment
/// form and may differ from pressure_gradient(rho) by the rounding of
/// rho^n + increment (sub-ulp increments are resolved, the stored density
/// is not).
CorrectionResult correction_step(const SchemeState& s,
                                 const PredictionResult& pred);

/// One full step: scaling, prediction, correction, time-level roll, and the
/// diagnostics record for the transition.
StepResult advance(const SchemeState& s);

}  // namespace lowmac
