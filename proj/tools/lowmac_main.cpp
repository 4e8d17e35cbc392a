#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "lowmac/diagnostics.hpp"
#include "lowmac/harness.hpp"

namespace {

struct CliOverrides {
    std::string config_file;
    lowmac::RunConfig cfg;

    void attach(CLI::App* app) {
        app->add_option("--config", config_file,
                        "key = value config file with [section] headers");
        app->add_option("--d", cfg.d, "space dimension (2 or 3)");
        app->add_option("--nx", cfg.dims[0], "cells along x");
        app->add_option("--ny", cfg.dims[1], "cells along y");
        app->add_option("--nz", cfg.dims[2], "cells along z");
        app->add_option("--lx", cfg.lengths[0], "domain length x");
        app->add_option("--ly", cfg.lengths[1], "domain length y");
        app->add_option("--lz", cfg.lengths[2], "domain length z");
        app->add_option("--gamma", cfg.gamma, "pressure law exponent");
        app->add_option("--mu", cfg.mu, "shear viscosity");
        app->add_option("--lambda", cfg.lambda, "second viscosity");
        app->add_option("--dt", cfg.dt, "time step");
        app->add_option("--t-end", cfg.t_end, "final time");
        app->add_option("--ma", cfg.ma_list,
                        "Mach numbers, strictly decreasing")
            ->delimiter(',');
        app->add_option("--amp-stream", cfg.amp_stream,
                        "stream function amplitude");
        app->add_option("--amp-density", cfg.amp_density,
                        "density perturbation amplitude (x Ma^2)");
        app->add_option("--amp-compressible", cfg.amp_compressible,
                        "non-solenoidal velocity amplitude (x Ma)");
        app->add_option("--outdir", cfg.outdir, "output directory for CSV");
        app->add_option("--snapshot-stride", cfg.snapshot_stride,
                        "write field snapshots every N steps (0 = off)");
        app->add_option("--lin-tol", cfg.lin_tol, "linear solver tolerance");
        app->add_option("--newton-tol", cfg.newton_tol,
                        "mass balance residual tolerance");
    }

    /// File values first, command-line flags on top.
    lowmac::RunConfig resolve(const CLI::App& app) const {
        lowmac::RunConfig out =
            config_file.empty() ? lowmac::RunConfig{}
                                : lowmac::load_config_file(config_file);
        auto set = [&](const char* flag, auto member) {
            if (app.count(flag)) out.*member = cfg.*member;
        };
        set("--d", &lowmac::RunConfig::d);
        set("--gamma", &lowmac::RunConfig::gamma);
        set("--mu", &lowmac::RunConfig::mu);
        set("--lambda", &lowmac::RunConfig::lambda);
        set("--dt", &lowmac::RunConfig::dt);
        set("--t-end", &lowmac::RunConfig::t_end);
        set("--amp-stream", &lowmac::RunConfig::amp_stream);
        set("--amp-density", &lowmac::RunConfig::amp_density);
        set("--amp-compressible", &lowmac::RunConfig::amp_compressible);
        set("--outdir", &lowmac::RunConfig::outdir);
        set("--snapshot-stride", &lowmac::RunConfig::snapshot_stride);
        set("--lin-tol", &lowmac::RunConfig::lin_tol);
        set("--newton-tol", &lowmac::RunConfig::newton_tol);
        if (app.count("--ma")) out.ma_list = cfg.ma_list;
        if (app.count("--nx")) out.dims[0] = cfg.dims[0];
        if (app.count("--ny")) out.dims[1] = cfg.dims[1];
        if (app.count("--nz")) out.dims[2] = cfg.dims[2];
        if (app.count("--lx")) out.lengths[0] = cfg.lengths[0];
        if (app.count("--ly")) out.lengths[1] = cfg.lengths[1];
        if (app.count("--lz")) out.lengths[2] = cfg.lengths[2];
        return out;
    }
};

int cmd_run(const lowmac::RunConfig& cfg, double ma) {
    cfg.validate();
    if (!cfg.outdir.empty())
        std::filesystem::create_directories(cfg.outdir);
    const lowmac::MacGrid g = cfg.make_grid();
    const lowmac::CompressibleRun run = lowmac::run_compressible(cfg, ma, g);
    if (run.failed) {
        std::cerr << "run failed: " << run.error << "\n";
        return 1;
    }
    double worst_kin = 0, worst_dual = 0;
    double worst_renorm = std::numeric_limits<double>::infinity();
    double worst_loc = -std::numeric_limits<double>::infinity();
    double excess = -std::numeric_limits<double>::infinity();
    if (run.records.empty()) worst_renorm = worst_loc = excess = 0;
    for (const auto& r : run.records) {
        worst_kin = std::max(worst_kin, r.kinetic_max_rel);
        worst_dual = std::max(worst_dual, r.dual_mass_max_rel);
        worst_renorm = std::min(worst_renorm, r.renorm_min_rel);
        worst_loc = std::max(worst_loc, r.local_entropy_rel);
        excess = std::max(excess, r.global_entropy_lhs - r.c0);
    }
    std::printf("ma=%g steps=%d\n", ma, run.steps_completed);
    std::printf("  max_n |rho-1|_L2      = %.6e\n", run.max_rho_dev_l2);
    std::printf("  max_n |dp|_L2         = %.6e\n", run.max_dp_l2);
    std::printf("  C0                    = %.6e\n", run.c0);
    std::printf("  kinetic identity rel  = %.3e\n", worst_kin);
    std::printf("  dual mass rel         = %.3e\n", worst_dual);
    std::printf("  renorm min rel        = %.3e\n", worst_renorm);
    std::printf("  local entropy rel     = %.3e\n", worst_loc);
    std::printf("  entropy excess vs C0  = %.3e\n", excess);
    const bool ok = worst_kin <= 1e-10 && worst_dual <= 1e-10 &&
                    worst_renorm >= -1e-12 && worst_loc <= 1e-10 &&
                    excess <= 1e-9 * std::max(1.0, run.c0);
    std::printf("checks: %s\n", ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
}

int cmd_sweep(const lowmac::RunConfig& cfg) {
    cfg.validate();
    const lowmac::SweepReport rep = lowmac::mach_sweep(cfg);
    for (const auto& e : rep.entries) {
        std::printf("ma=%-8g %s  max|rho-1|_L2=%.4e  max|dp|_L2=%.4e  "
                    "du_H1=%.4e  ddp_L2=%.4e\n",
                    e.ma, e.failed ? "FAILED" : "ok    ", e.max_rho_dev_l2,
                    e.max_dp_l2, e.terminal_du_h1, e.terminal_ddp_l2);
        if (e.failed) std::printf("    %s\n", e.error.c_str());
    }
    std::printf("order of max_n |rho-1|_L2 in ma: %.3f\n", rep.order_rho_l2);
    const lowmac::SweepChecks checks = lowmac::evaluate_sweep(rep);
    std::printf("identities_ok=%d entropy_bounded=%d init_scalings_stable=%d "
                "order_ok=%d du_decreasing=%d du_small=%d dp_bounded=%d\n",
                checks.identities_ok, checks.entropy_bounded,
                checks.init_scalings_stable, checks.order_ok, checks.du_decreasing,
                checks.du_small_at_end, checks.dp_bounded);
    return checks.all() ? 0 : 1;
}

int cmd_infsup(const lowmac::RunConfig& cfg) {
    const lowmac::MacGrid g = cfg.make_grid();
    const double beta = lowmac::infsup_estimate(g);
    std::printf("beta(%d", cfg.dims[0]);
    for (int a = 1; a < cfg.d; ++a) std::printf("x%d", cfg.dims[a]);
    std::printf(") = %.8f\n", beta);
    return beta > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Staggered-grid pressure-correction solver for compressible "
        "barotropic flow, with a low-Mach verification harness"};
    app.require_subcommand(1);

    CliOverrides common;

    CLI::App* run = app.add_subcommand("run", "single run at one Mach number");
    double run_ma = 1e-2;
    run->add_option("--mach", run_ma, "Mach number")->required();
    common.attach(run);

    CLI::App* sweep =
        app.add_subcommand("sweep", "Mach sweep against the projection scheme");
    common.attach(sweep);

    CLI::App* check =
        app.add_subcommand("check", "identity test suite on random fields");
    unsigned seed = 12345;
    check->add_option("--seed", seed, "random seed");

    CLI::App* infsup =
        app.add_subcommand("infsup", "inf-sup constant of the mesh");
    common.attach(infsup);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(common.resolve(*run), run_ma);
        if (sweep->parsed()) return cmd_sweep(common.resolve(*sweep));
        if (check->parsed())
            return lowmac::run_identity_checks(seed, std::cout) ? 0 : 1;
        if (infsup->parsed()) return cmd_infsup(common.resolve(*infsup));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
