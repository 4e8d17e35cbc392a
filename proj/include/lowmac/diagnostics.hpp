#pragma once

#include <vector>

#include "lowmac/barotropic.hpp"
#include "lowmac/diagnostics_record.hpp"
#include "lowmac/fields.hpp"
#include "lowmac/grid.hpp"
#include "lowmac/scheme.hpp"

namespace lowmac {

/// Residual of the per-face kinetic energy identity of one step, together
/// with the per-face sum of the absolute values of its constituents
/// ("scale") and the nonnegative time-discretization remainder R.
/// `before` holds levels n-1 and n, `after` levels n and n+1, `pred` the
/// predicted velocity of the transition.
struct KineticIdentityReport {
    FaceField residual;
    FaceField scale;
    FaceField remainder;  ///< R_{s,i} = rho^{n-1}_D (u~ - u^n)^2 / (2 dt)
    double max_rel = 0;
    double min_remainder = 0;
};
KineticIdentityReport kinetic_energy_residual(const SchemeState& before,
                                              const PredictionResult& pred,
                                              const SchemeState& after);

/// Residual of the mass balance on momentum cells between (rho^n, rho^{n+1},
/// u^{n+1}), relative to constituent magnitudes; max over faces.
double dual_mass_balance_residual(const CellField& rho_old,
                                  const CellField& rho_new,
                                  const FaceField& u_new, double dt);

/// Remainder R_K of the discrete renormalization identity: the negative of
/// the sum of the explicit terms (time difference of Pi, upwinded
/// divergence of b(rho)u - b'(1) rho u, and p div u), which must come out
/// nonnegative when (rho_old, rho_new, u_new) satisfy the mass balance.
/// The divergence and pressure-work terms are evaluated in the equivalent
/// fluctuation form Pi-flux + (p-1) div u, which keeps them meaningful at
/// vanishing Mach numbers.
struct RenormalizationReport {
    CellField remainder;
    CellField scale;
    double min_rel = 0;
};
RenormalizationReport renormalization_remainder(const CellField& rho_old,
                                                const CellField& rho_new,
                                                const FaceField& u_new,
                                                double gamma, double dt);

/// Left-hand side of the local entropy inequality of the step (the four
/// computable terms; the dropped remainder is nonnegative, so lhs <= 0 up to
/// solver residuals). `scale` sums the absolute constituent magnitudes.
struct LocalEntropyReport {
    double lhs = 0;
    double scale = 0;
};
LocalEntropyReport local_entropy_lhs(const SchemeState& before,
                                     const PredictionResult& pred,
                                     const SchemeState& after);

/// The four accumulated terms of the global entropy estimate at the state's
/// time level: kinetic energy against the previous density, Ma^-2 relative
/// entropy, accumulated viscous dissipation, Ma^-4 weighted gradient energy.
struct GlobalEntropyTerms {
    double kinetic = 0;
    double pi = 0;
    double visc = 0;
    double grad = 0;
    double sum() const { return kinetic + pi + visc + grad; }
};
GlobalEntropyTerms global_entropy_terms(const SchemeState& s);

/// The initial-data constant bounding the global entropy for all steps.
double initial_constant_c0(const SchemeState& init);

/// delta p = (p - volume mean of p) / Ma^2, exactly mean-free.
CellField pressure_fluctuation(const CellField& p, double mach);

/// Inf-sup constant of the mesh: smallest nonzero generalized singular
/// value beta of the divergence coupling, i.e.
///   beta = min_{p mean-free} max_u (sum_K |K| p_K (div u)_K)
///                                  / (||u||_{1,M} ||p||_{L2}).
/// Dense spectral computation; grids above 32^2-equivalent size are
/// rejected.
double infsup_estimate(const MacGrid& g);

/// Verification report of the upper/lower quadratic bounds of Pi_gamma.
/// Constants are fixed deterministically by ratio extremization on fine
/// grids (with a small safety margin); `violations` counts sample points
/// falling outside the bounds.
struct PiBoundsReport {
    double gamma = 0;
    double c_upper = 0;       ///< Pi <= c_upper (rho-1)^2 on (0,2)
    double c_lower_quad = 0;  ///< gamma in [1,2): Pi >= c (rho-1)^2 on (0,R)
    double c_lower_pow = 0;   ///< gamma in [1,2): Pi >= c |rho-1|^gamma on [R,inf)
    double radius = 3.0;      ///< the fixed R of the two-regime bound
    int samples = 0;
    int violations = 0;
    bool pass() const { return violations == 0; }
};
PiBoundsReport pi_gamma_bounds_check(double gamma, int samples_per_regime);

void fill_record_norms(const SchemeState& s, DiagnosticsRecord& rec);

}  // namespace lowmac
