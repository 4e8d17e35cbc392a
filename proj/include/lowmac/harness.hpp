#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "lowmac/diagnostics_record.hpp"
#include "lowmac/fields.hpp"
#include "lowmac/grid.hpp"
#include "lowmac/incompressible.hpp"
#include "lowmac/scheme.hpp"

namespace lowmac {

struct RunConfig {
    int d = 2;
    std::array<int, 3> dims{32, 32, 32};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    double gamma = 2.0;
    double mu = 0.1;
    double lambda = 0.0;
    double dt = 5e-3;
    double t_end = 0.1;
    std::vector<double> ma_list{1e-1, 1e-2, 1e-3, 1e-4};
    double amp_stream = 0.5;        ///< stream-function amplitude
    double amp_density = 0.02;      ///< density perturbation, x Ma^2
    double amp_compressible = 1.0;  ///< non-solenoidal velocity, x Ma
    std::string outdir;             ///< empty: no CSV output
    int snapshot_stride = 0;        ///< 0: no field snapshots
    double lin_tol = 1e-12;
    double newton_tol = 1e-11;

    int steps() const;
    void validate() const;
    MacGrid make_grid() const;
    SchemeParams scheme_params(double mach) const;
    IncParams inc_params() const;
};

/// Line-based `key = value` config with [section] headers; '#' and ';'
/// start comments. Unknown keys are rejected. Returns the defaults
/// overridden by the file contents.
RunConfig load_config_file(const std::string& path);

/// Well-prepared initial data at Mach number `ma`:
///  - `u0`: discrete curl of the corner-sampled stream function
///    A sin^2(pi x/L1) sin^2(pi y/L2) (times a sin^2 profile in z for d=3),
///    exactly divergence-free by telescoping, plus ma * amp_compressible
///    times a smooth non-solenoidal field vanishing on the boundary;
///  - `rho0 = 1 + ma^2 * amp_density * sin(2 pi x/L1) sin(2 pi y/L2) (...)`
///    sampled at cell centers;
///  - `u_limit`, `dp_limit`: the ma -> 0 limit of the data, i.e. the
///    solenoidal part and the limit pressure fluctuation
///    gamma * amp_density * (s - mean s).
/// Throws std::invalid_argument when the density amplitude reaches 1.
struct WellPreparedData {
    CellField rho0;
    FaceField u0;
    FaceField u_limit;
    CellField dp_limit;

    WellPreparedData(const MacGrid& g)
        : rho0(g, 1.0), u0(g), u_limit(g), dp_limit(g) {}
};
WellPreparedData well_prepared_data(double ma, const MacGrid& g,
                                    const RunConfig& cfg);

/// One compressible run at fixed Mach number. `failed` carries the reason
/// when a step aborts; diagnostics of completed steps are kept either way.
struct CompressibleRun {
    double ma = 0;
    bool failed = false;
    std::string error;
    int steps_completed = 0;
    std::vector<DiagnosticsRecord> records;
    double c0 = 0;
    double init_rho_ratio = 0;      ///< max|rho^0 - 1| / ma^2
    double init_gradp_ratio = 0;    ///< max|grad p^0| / ma^2
    double init_rho_back_ratio = 0;  ///< max|rho^{-1} - 1| / ma
    double max_rho_dev_l2 = 0;
    double max_rho_dev_lq = 0;
    double max_dp_l2 = 0;
    double max_global_entropy = 0;
    std::unique_ptr<SchemeState> final;  ///< null when failed
};
CompressibleRun run_compressible(const RunConfig& cfg, double ma,
                                 const MacGrid& g);

struct IncompressibleRun {
    std::vector<IncRecord> records;
    std::unique_ptr<IncState> final;
};
IncompressibleRun run_incompressible(const RunConfig& cfg, const MacGrid& g);

struct SweepEntry {
    double ma = 0;
    bool failed = false;
    std::string error;
    double max_rho_dev_l2 = 0;
    double max_rho_dev_lq = 0;
    double max_dp_l2 = 0;
    double max_global_entropy = 0;
    double c0 = 0;
    double init_rho_ratio = 0;
    double init_gradp_ratio = 0;
    double init_rho_back_ratio = 0;
    double terminal_du_h1 = 0;   ///< ||u^ma - u^inc||_{1,M} at t = T
    double terminal_ddp_l2 = 0;  ///< ||dp^ma - dp^inc||_{L2} at t = T
    double worst_kinetic_rel = 0;
    double worst_kinetic_min_remainder = 0;  ///< min over steps/faces of R_{s,i}
    double worst_dual_mass_rel = 0;
    double worst_renorm_rel = 0;     ///< min over steps of min_K R_K/scale
    double worst_local_entropy = 0;  ///< max over steps of lhs/scale
    double entropy_excess = 0;       ///< max over steps of lhs_n - c0
};

struct SweepReport {
    std::vector<SweepEntry> entries;  ///< one per Mach number, input order
    double order_rho_l2 = 0;  ///< log-log slope of max_n ||rho-1||_L2 vs ma
    double order_rho_lq = 0;
    int succeeded = 0;
};

/// Runs the compressible scheme for every Mach number of the config
/// (concurrently; the runs share nothing but the immutable grid), the
/// incompressible reference once, and reduces the results. Failed runs are
/// marked and skipped by the order fits; the sweep continues past them.
SweepReport mach_sweep(const RunConfig& cfg);

/// Acceptance-style assertions over a sweep report; all tolerances pinned.
struct SweepChecks {
    bool identities_ok = false;      ///< kinetic/dual-mass/renorm/entropy per step
    bool entropy_bounded = false;    ///< global entropy <= C0 + 1e-9 max(1,C0)
    bool init_scalings_stable = false;      ///< init ratios vary by < 2x across sweep
    bool order_ok = false;           ///< order of ||rho-1||_L2 >= 0.9
    bool du_decreasing = false;      ///< terminal velocity gap strictly down
    bool du_small_at_end = false;    ///< last gap <= 5% of first
    bool dp_bounded = false;         ///< ||dp|| at last ma <= 2x first
    bool all() const {
        return identities_ok && entropy_bounded && init_scalings_stable && order_ok &&
               du_decreasing && du_small_at_end && dp_bounded;
    }
};
SweepChecks evaluate_sweep(const SweepReport& rep);

void write_sweep_csv(std::ostream& os, const SweepReport& rep);

/// Random-field identity test suite (duality, conservativity, coercivity,
/// telescoping, Pi_gamma bounds); prints one line per check. Returns true
/// when everything passes.
bool run_identity_checks(unsigned seed, std::ostream& os);

}  // namespace lowmac
