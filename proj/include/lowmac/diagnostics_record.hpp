#pragma once

#include <iosfwd>
#include <vector>

namespace lowmac {

/// Per-step values of every discrete identity and inequality the scheme is
/// supposed to satisfy, plus the norms tracked by the Mach sweeps.
/// Residual-like entries are stored relative to the per-face/per-cell sum of
/// the absolute values of the identity's additive constituents, so a value
/// of 1e-12 means "twelve digits of cancellation".
struct DiagnosticsRecord {
    int step = 0;
    double time = 0;

    double kinetic_max_rel = 0;   ///< max_f |kinetic identity residual|/scale
    double kinetic_min_remainder = 0;  ///< min_f R_{s,i} (must be >= 0)
    double dual_mass_max_rel = 0;      ///< max_s |dual mass balance|/scale
    double renorm_min_rel = 0;         ///< min_K R_K/scale (>= -1e-12 expected)

    double local_entropy_lhs = 0;
    double local_entropy_rel = 0;  ///< lhs/scale (<= 1e-10 expected)

    double entropy_kinetic = 0;  ///< (1/2) sum |D| rho^{n-1} |u^n|^2
    double entropy_pi = 0;       ///< Ma^-2 sum |K| Pi(rho^n)
    double entropy_visc = 0;     ///< mu sum_k dt ||u~^k||^2
    double entropy_grad = 0;     ///< Ma^-4 (dt^2/2) sum |D| |grad p|^2/rho
    double global_entropy_lhs = 0;  ///< sum of the four terms above
    double c0 = 0;                  ///< initial-data constant

    double dp_l2 = 0;             ///< ||(p - mean)/Ma^2||_L2
    double rho_minus_one_l2 = 0;
    double rho_minus_one_lq = 0;
    double q_exponent = 2;        ///< q = min(gamma, 2)
    double rho_minus_one_linf = 0;
    double u_tilde_h1 = 0;
    double total_mass = 0;
    double rho_min = 0;

    int newton_iterations = 0;
    double prediction_residual = 0;  ///< linear residual of the prediction solve
    double mass_residual = 0;        ///< final max-norm mass-balance residual
};

/// CSV writer: a leading '#' comment line documents the fixed column order,
/// then one row per record, 17 significant digits.
void write_records_csv(std::ostream& os,
                       const std::vector<DiagnosticsRecord>& recs);

}  // namespace lowmac
