#include "lowmac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lowmac/barotropic.hpp"
#include "lowmac/diagnostics.hpp"
#include "lowmac/operators.hpp"

namespace lowmac {

namespace {
constexpr double kPi = std::numbers::pi;
}

int RunConfig::steps() const {
    return static_cast<int>(std::llround(t_end / dt));
}

void RunConfig::validate() const {
    if (d != 2 && d != 3)
        throw std::invalid_argument("config: d must be 2 or 3");
    for (int a = 0; a < d; ++a) {
        if (dims[a] < 2) throw std::invalid_argument("config: dims must be >= 2");
        if (!(lengths[a] > 0))
            throw std::invalid_argument("config: lengths must be positive");
    }
    if (!(gamma >= 1)) throw std::invalid_argument("config: gamma must be >= 1");
    if (!(mu > 0)) throw std::invalid_argument("config: mu must be > 0");
    if (!(mu + lambda > 0))
        throw std::invalid_argument("config: mu + lambda must be > 0");
    if (!(dt > 0) || !(t_end > 0))
        throw std::invalid_argument("config: dt and t_end must be positive");
    const double ratio = t_end / dt;
    if (std::abs(ratio - std::llround(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(
            "config: t_end must be an integer multiple of dt");
    if (ma_list.empty())
        throw std::invalid_argument("config: ma_list must not be empty");
    for (size_t i = 0; i < ma_list.size(); ++i) {
        if (!(ma_list[i] > 0))
            throw std::invalid_argument("config: Mach numbers must be positive");
        if (i > 0 && !(ma_list[i] < ma_list[i - 1]))
            throw std::invalid_argument(
                "config: ma_list must be strictly decreasing");
    }
    if (amp_density < 0 || amp_stream < 0 || amp_compressible < 0)
        throw std::invalid_argument("config: amplitudes must be nonnegative");
    if (!(lin_tol > 0) || !(newton_tol > 0))
        throw std::invalid_argument("config: tolerances must be positive");
}

MacGrid RunConfig::make_grid() const {
    return MacGrid(std::span<const int>(dims.data(), d),
                   std::span<const double>(lengths.data(), d));
}

SchemeParams RunConfig::scheme_params(double mach) const {
    SchemeParams p;
    p.gamma = gamma;
    p.mu = mu;
    p.lambda = lambda;
    p.mach = mach;
    p.dt = dt;
    p.lin_tol = lin_tol;
    p.newton_tol = newton_tol;
    return p;
}

IncParams RunConfig::inc_params() const {
    IncParams p;
    p.mu = mu;
    p.lambda = lambda;
    p.dt = dt;
    p.lin_tol = lin_tol;
    return p;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    RunConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "grid.d") cfg.d = std::stoi(val);
        else if (key == "grid.nx") cfg.dims[0] = std::stoi(val);
        else if (key == "grid.ny") cfg.dims[1] = std::stoi(val);
        else if (key == "grid.nz") cfg.dims[2] = std::stoi(val);
        else if (key == "grid.lx") cfg.lengths[0] = std::stod(val);
        else if (key == "grid.ly") cfg.lengths[1] = std::stod(val);
        else if (key == "grid.lz") cfg.lengths[2] = std::stod(val);
        else if (key == "physics.gamma") cfg.gamma = std::stod(val);
        else if (key == "physics.mu") cfg.mu = std::stod(val);
        else if (key == "physics.lambda") cfg.lambda = std::stod(val);
        else if (key == "time.dt") cfg.dt = std::stod(val);
        else if (key == "time.t_end") cfg.t_end = std::stod(val);
        else if (key == "data.amp_stream") cfg.amp_stream = std::stod(val);
        else if (key == "data.amp_density") cfg.amp_density = std::stod(val);
        else if (key == "data.amp_compressible")
            cfg.amp_compressible = std::stod(val);
        else if (key == "sweep.ma_list") cfg.ma_list = parse_list(val);
        else if (key == "output.dir") cfg.outdir = val;
        else if (key == "output.snapshot_stride")
            cfg.snapshot_stride = std::stoi(val);
        else if (key == "solver.lin_tol") cfg.lin_tol = std::stod(val);
        else if (key == "solver.newton_tol") cfg.newton_tol = std::stod(val);
        else
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
    }
    return cfg;
}

WellPreparedData well_prepared_data(double ma, const MacGrid& g,
                                    const RunConfig& cfg) {
    if (!(ma > 0)) throw std::invalid_argument("well_prepared_data: ma <= 0");
    if (cfg.amp_density * ma * ma >= 1.0)
        throw std::invalid_argument(
            "well_prepared_data: density amplitude reaches vacuum");
    WellPreparedData out(g);
    const double A = cfg.amp_stream;
    const double B = cfg.amp_density;
    const double W = cfg.amp_compressible;
    const int d = g.dim();
    const double L0 = g.length(0), L1 = g.length(1);
    const double L2 = d == 3 ? g.length(2) : 1.0;

    auto psi = [&](double x, double y) {
        const double sx = std::sin(kPi * x / L0);
        const double sy = std::sin(kPi * y / L1);
        return A * sx * sx * sy * sy;
    };
    auto zprofile = [&](double z) {
        if (d == 2) return 1.0;
        const double sz = std::sin(kPi * z / L2);
        return sz * sz;
    };
    auto wmode = [&](const std::array<double, 3>& x) {
        double v = std::sin(kPi * x[0] / L0) * std::sin(kPi * x[1] / L1);
        if (d == 3) v *= std::sin(kPi * x[2] / L2);
        return v;
    };

    // solenoidal part: corner differences of the stream function
    for (int f = 0; f < g.face_count(0); ++f) {
        const auto c = g.face_coords(0, f);
        const double x = c[0] * g.spacing(0);
        const double ylo = c[1] * g.spacing(1);
        const double yhi = (c[1] + 1) * g.spacing(1);
        const double zc = (c[2] + 0.5) * g.spacing(2);
        out.u_limit.at(0, f) =
            (psi(x, yhi) - psi(x, ylo)) / g.spacing(1) * zprofile(zc);
    }
    for (int f = 0; f < g.face_count(1); ++f) {
        const auto c = g.face_coords(1, f);
        const double y = c[1] * g.spacing(1);
        const double xlo = c[0] * g.spacing(0);
        const double xhi = (c[0] + 1) * g.spacing(0);
        const double zc = (c[2] + 0.5) * g.spacing(2);
        out.u_limit.at(1, f) =
            -(psi(xhi, y) - psi(xlo, y)) / g.spacing(0) * zprofile(zc);
    }
    out.u_limit.clear_external();

    // compressible component, vanishing on the boundary, scaled by ma
    for (int a = 0; a < d; ++a)
        for (int f : g.internal_faces(a))
            out.u0.at(a, f) =
                out.u_limit.at(a, f) + ma * W * wmode(g.face_center(a, f));

    auto smode = [&](const std::array<double, 3>& x) {
        double v = std::sin(2 * kPi * x[0] / L0) * std::sin(2 * kPi * x[1] / L1);
        if (d == 3) v *= std::sin(2 * kPi * x[2] / L2);
        return v;
    };
    double smean = 0;
    for (int k = 0; k < g.cell_count(); ++k) {
        const double s = smode(g.cell_center(k));
        out.rho0[k] = 1.0 + ma * ma * B * s;
        out.dp_limit[k] = cfg.gamma * B * s;
        smean += g.cell_measure() * out.dp_limit[k];
    }
    smean /= g.domain_measure();
    for (int k = 0; k < g.cell_count(); ++k) out.dp_limit[k] -= smean;
    for (int k = 0; k < g.cell_count(); ++k)
        if (!(out.rho0[k] > 0))
            throw std::invalid_argument(
                "well_prepared_data: nonpositive initial density");
    return out;
}

namespace {

std::string format_ma(double ma) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", ma);
    return buf;
}

void write_snapshot(const std::string& outdir, double ma, int step,
                    const SchemeState& s) {
    const MacGrid& g = s.rho.grid();
    std::ofstream os(outdir + "/fields_" + format_ma(ma) + "_" +
                     std::to_string(step) + ".csv");
    os << "kind,axis,index,x,y,z,rho,p,u\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (int k = 0; k < g.cell_count(); ++k) {
        const auto x = g.cell_center(k);
        os << "cell,-1," << k << ',';
        num(x[0]); os << ','; num(x[1]); os << ','; num(x[2]); os << ',';
        num(s.rho[k]); os << ','; num(s.p[k]); os << ",0\n";
    }
    for (int a = 0; a < g.dim(); ++a)
        for (int f = 0; f < g.face_count(a); ++f) {
            const auto x = g.face_center(a, f);
            os << "face," << a << ',' << f << ',';
            num(x[0]); os << ','; num(x[1]); os << ','; num(x[2]);
            os << ",0,0,";
            num(s.u.at(a, f));
            os << '\n';
        }
}

}  // namespace

CompressibleRun run_compressible(const RunConfig& cfg, double ma,
                                 const MacGrid& g) {
    CompressibleRun run;
    run.ma = ma;
    const int nsteps = cfg.steps();
    try {
        const WellPreparedData data = well_prepared_data(ma, g, cfg);
        SchemeState state = init_state(data.rho0, data.u0, cfg.scheme_params(ma));
        run.c0 = state.c0;

        CellField dev(g);
        for (int k = 0; k < g.cell_count(); ++k) dev[k] = state.rho[k] - 1.0;
        run.init_rho_ratio = norm_linf_cells(dev) / (ma * ma);
        double gmax = 0;
        for (int a = 0; a < g.dim(); ++a)
            for (int f : g.internal_faces(a))
                gmax = std::max(gmax, std::abs(state.grad_p.at(a, f)));
        run.init_gradp_ratio = gmax / (ma * ma);
        for (int k = 0; k < g.cell_count(); ++k)
            dev[k] = state.rho_prev[k] - 1.0;
        run.init_rho_back_ratio = norm_linf_cells(dev) / ma;

        const bool snapshots = !cfg.outdir.empty() && cfg.snapshot_stride > 0;
        if (snapshots) write_snapshot(cfg.outdir, ma, 0, state);

        for (int n = 0; n < nsteps; ++n) {
            StepResult step = advance(state);
            state = std::move(step.state);
            run.records.push_back(step.record);
            run.steps_completed = n + 1;
            run.max_rho_dev_l2 =
                std::max(run.max_rho_dev_l2, step.record.rho_minus_one_l2);
            run.max_rho_dev_lq =
                std::max(run.max_rho_dev_lq, step.record.rho_minus_one_lq);
            run.max_dp_l2 = std::max(run.max_dp_l2, step.record.dp_l2);
            run.max_global_entropy =
                std::max(run.max_global_entropy, step.record.global_entropy_lhs);
            if (snapshots && (n + 1) % cfg.snapshot_stride == 0)
                write_snapshot(cfg.outdir, ma, n + 1, state);
        }
        run.final = std::make_unique<SchemeState>(std::move(state));
    } catch (const std::exception& e) {
        run.failed = true;
        run.error = "step " + std::to_string(run.steps_completed) + ": " +
                    e.what();
    }
    if (!cfg.outdir.empty()) {
        std::ofstream os(cfg.outdir + "/diagnostics_" + format_ma(ma) + ".csv");
        write_records_csv(os, run.records);
    }
    return run;
}

IncompressibleRun run_incompressible(const RunConfig& cfg, const MacGrid& g) {
    // reference data: the Mach-zero limit of the prepared initial state
    // (the limit fields do not depend on the Mach argument)
    const WellPreparedData data = well_prepared_data(1e-4, g, cfg);
    IncState init(g, cfg.inc_params());
    init.u = data.u_limit;
    init.dp = data.dp_limit;
    IncTrajectory tr = inc_run(init, cfg.steps());
    IncompressibleRun out;
    out.records = std::move(tr.records);
    out.final = std::make_unique<IncState>(std::move(tr.final));
    return out;
}

namespace {

SweepEntry summarize(const CompressibleRun& run, const IncState* ref) {
    SweepEntry e;
    e.ma = run.ma;
    e.failed = run.failed;
    e.error = run.error;
    e.max_rho_dev_l2 = run.max_rho_dev_l2;
    e.max_rho_dev_lq = run.max_rho_dev_lq;
    e.max_dp_l2 = run.max_dp_l2;
    e.max_global_entropy = run.max_global_entropy;
    e.c0 = run.c0;
    e.init_rho_ratio = run.init_rho_ratio;
    e.init_gradp_ratio = run.init_gradp_ratio;
    e.init_rho_back_ratio = run.init_rho_back_ratio;
    if (!run.records.empty()) {
        e.worst_renorm_rel = std::numeric_limits<double>::infinity();
        e.worst_local_entropy = -std::numeric_limits<double>::infinity();
        e.entropy_excess = -std::numeric_limits<double>::infinity();
    }
    for (const auto& r : run.records) {
        e.worst_kinetic_rel = std::max(e.worst_kinetic_rel, r.kinetic_max_rel);
        e.worst_kinetic_min_remainder =
            std::min(e.worst_kinetic_min_remainder, r.kinetic_min_remainder);
        e.worst_dual_mass_rel =
            std::max(e.worst_dual_mass_rel, r.dual_mass_max_rel);
        e.worst_renorm_rel = std::min(e.worst_renorm_rel, r.renorm_min_rel);
        e.worst_local_entropy =
            std::max(e.worst_local_entropy, r.local_entropy_rel);
        e.entropy_excess =
            std::max(e.entropy_excess, r.global_entropy_lhs - r.c0);
    }
    if (!run.failed && run.final && ref) {
        const MacGrid& g = run.final->rho.grid();
        FaceField du(g);
        for (int a = 0; a < g.dim(); ++a)
            for (int f : g.internal_faces(a))
                du.at(a, f) = run.final->u.at(a, f) - ref->u.at(a, f);
        e.terminal_du_h1 = norm_broken_h1(du);
        const CellField dp =
            pressure_fluctuation(run.final->p, run.final->params.mach);
        CellField ddp(g);
        for (int k = 0; k < g.cell_count(); ++k) ddp[k] = dp[k] - ref->dp[k];
        e.terminal_ddp_l2 = norm_l2_cells(ddp);
    }
    return e;
}

double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (const auto& [x, y] : pts) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

SweepReport mach_sweep(const RunConfig& cfg) {
    cfg.validate();
    if (!cfg.outdir.empty()) std::filesystem::create_directories(cfg.outdir);
    const MacGrid g = cfg.make_grid();

    auto inc_future = std::async(std::launch::async, [&] {
        return run_incompressible(cfg, g);
    });
    std::vector<std::future<CompressibleRun>> futures;
    futures.reserve(cfg.ma_list.size());
    for (double ma : cfg.ma_list)
        futures.push_back(std::async(std::launch::async, [&cfg, &g, ma] {
            return run_compressible(cfg, ma, g);
        }));

    const IncompressibleRun inc = inc_future.get();
    SweepReport rep;
    for (auto& fut : futures) {
        const CompressibleRun run = fut.get();
        rep.entries.push_back(summarize(run, inc.final.get()));
        if (!run.failed) ++rep.succeeded;
    }

    std::vector<std::pair<double, double>> pts_l2, pts_lq;
    for (const auto& e : rep.entries)
        if (!e.failed && e.max_rho_dev_l2 > 0) {
            pts_l2.emplace_back(e.ma, e.max_rho_dev_l2);
            pts_lq.emplace_back(e.ma, e.max_rho_dev_lq);
        }
    if (pts_l2.size() >= 3) {
        rep.order_rho_l2 = loglog_slope(pts_l2);
        rep.order_rho_lq = loglog_slope(pts_lq);
    }

    if (!cfg.outdir.empty()) {
        std::ofstream os(cfg.outdir + "/sweep_report.csv");
        write_sweep_csv(os, rep);
    }
    return rep;
}

SweepChecks evaluate_sweep(const SweepReport& rep) {
    SweepChecks c;
    if (rep.entries.empty()) return c;
    c.identities_ok = true;
    c.entropy_bounded = true;
    for (const auto& e : rep.entries) {
        if (e.failed) {
            c.identities_ok = false;
            c.entropy_bounded = false;
            continue;
        }
        if (e.worst_kinetic_rel > 1e-10 || e.worst_dual_mass_rel > 1e-10 ||
            e.worst_renorm_rel < -1e-12 || e.worst_local_entropy > 1e-10)
            c.identities_ok = false;
        if (e.entropy_excess > 1e-9 * std::max(1.0, e.c0))
            c.entropy_bounded = false;
    }

    auto ratio_spread = [&](auto pick) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (const auto& e : rep.entries) {
            if (e.failed) continue;
            const double v = pick(e);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return (lo > 0 && std::isfinite(lo)) ? hi / lo
                                             : std::numeric_limits<double>::infinity();
    };
    c.init_scalings_stable =
        ratio_spread([](const SweepEntry& e) { return e.init_rho_ratio; }) < 2.0 &&
        ratio_spread([](const SweepEntry& e) { return e.init_gradp_ratio; }) < 2.0 &&
        ratio_spread([](const SweepEntry& e) { return e.init_rho_back_ratio; }) < 2.0;

    c.order_ok = rep.succeeded >= 3 && rep.order_rho_l2 >= 0.9;

    std::vector<const SweepEntry*> ok;
    for (const auto& e : rep.entries)
        if (!e.failed) ok.push_back(&e);
    if (ok.size() >= 2) {
        c.du_decreasing = true;
        for (size_t i = 1; i < ok.size(); ++i)
            if (!(ok[i]->terminal_du_h1 < ok[i - 1]->terminal_du_h1))
                c.du_decreasing = false;
        c.du_small_at_end =
            ok.back()->terminal_du_h1 <= 0.05 * ok.front()->terminal_du_h1;
        c.dp_bounded = ok.back()->max_dp_l2 <= 2.0 * ok.front()->max_dp_l2;
    }
    return c;
}

void write_sweep_csv(std::ostream& os, const SweepReport& rep) {
    os << "# columns: ma,status,max_rho_dev_l2,max_rho_dev_lq,max_dp_l2,"
          "max_global_entropy,c0,init_rho_ratio,init_gradp_ratio,init_rho_back_ratio,"
          "terminal_du_h1,terminal_ddp_l2,worst_kinetic_rel,"
          "worst_dual_mass_rel,worst_renorm_rel,worst_local_entropy\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (const auto& e : rep.entries) {
        num(e.ma);
        os << ',' << (e.failed ? "failed" : "ok");
        for (double v :
             {e.max_rho_dev_l2, e.max_rho_dev_lq, e.max_dp_l2,
              e.max_global_entropy, e.c0, e.init_rho_ratio, e.init_gradp_ratio,
              e.init_rho_back_ratio, e.terminal_du_h1, e.terminal_ddp_l2,
              e.worst_kinetic_rel, e.worst_dual_mass_rel, e.worst_renorm_rel,
              e.worst_local_entropy}) {
            os << ',';
            num(v);
        }
        os << '\n';
    }
    os << "# order_rho_l2 = ";
    num(rep.order_rho_l2);
    os << "\n# order_rho_lq = ";
    num(rep.order_rho_lq);
    os << "\n";
}

bool run_identity_checks(unsigned seed, std::ostream& os) {
    const int n[2] = {16, 16};
    const double len[2] = {1.0, 1.0};
    const MacGrid g(std::span<const int>(n, 2), std::span<const double>(len, 2));
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto random_cells = [&](double lo, double hi) {
        CellField f(g);
        std::uniform_real_distribution<double> d(lo, hi);
        for (int k = 0; k < g.cell_count(); ++k) f[k] = d(rng);
        return f;
    };
    auto random_velocity = [&] {
        FaceField u(g);
        for (int a = 0; a < g.dim(); ++a)
            for (int f : g.internal_faces(a)) u.at(a, f) = uni(rng);
        return u;
    };

    bool all_ok = true;
    auto report = [&](const char* name, bool ok, double value) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", value);
        os << (ok ? "PASS" : "FAIL") << "  " << name << " (" << buf << ")\n";
        all_ok = all_ok && ok;
    };

    // grad-div duality
    double worst_dual = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const CellField rho = random_cells(0.1, 2.0);
        const FaceField u = random_velocity();
        const Barotropic eos(1.8);
        const FaceField gp = pressure_gradient(rho, 1.8);
        const CellField div = velocity_divergence(u);
        double sum = 0, scale = 0;
        for (int k = 0; k < g.cell_count(); ++k) {
            const double t = g.cell_measure() * eos.pressure(rho[k]) * div[k];
            sum += t;
            scale += std::abs(t);
        }
        for (int a = 0; a < g.dim(); ++a)
            for (int f : g.internal_faces(a)) {
                const double t = g.dual_measure(a) * u.at(a, f) * gp.at(a, f);
                sum += t;
                scale += std::abs(t);
            }
        worst_dual = std::max(worst_dual, std::abs(sum) / scale);
    }
    report("grad-div duality, 100 random fields", worst_dual <= 1e-12,
           worst_dual);

    // dual flux conservativity: antisymmetric across every interior dual face
    {
        const CellField rho = random_cells(0.2, 3.0);
        const FaceField u = random_velocity();
        const DualFluxSet Fd = dual_mass_fluxes(mass_flux(rho, u));
        double worst = 0;
        for (int i = 0; i < g.dim(); ++i) {
            const int nsten = 2 * g.dim();
            size_t pos = 0;
            for (int f : g.internal_faces(i)) {
                const auto stens = g.dual_faces(i, f);
                for (int q = 0; q < nsten; ++q) {
                    const DualFaceStencil& st = stens[q];
                    if (st.boundary) continue;
                    const int nb = st.neighbor_face;
                    if (g.face_dof(i, nb) < 0) continue;
                    // locate the reciprocal stencil on the neighbor
                    const auto back = g.dual_faces(i, nb);
                    size_t npos = 0;
                    for (int ff : g.internal_faces(i)) {
                        if (ff == nb) break;
                        ++npos;
                    }
                    for (int q2 = 0; q2 < nsten; ++q2)
                        if (back[q2].kind == st.kind &&
                            back[q2].neighbor_face == f) {
                            const double a = Fd.flux[i][pos * nsten + q];
                            const double b = Fd.flux[i][npos * nsten + q2];
                            worst = std::max(worst, std::abs(a + b));
                        }
                }
                ++pos;
            }
        }
        report("dual flux conservativity (exact)", worst == 0.0, worst);
    }

    // diffusion coercivity
    {
        double worst = 1e300;
        for (int trial = 0; trial < 100; ++trial) {
            const FaceField u = random_velocity();
            const FaceField visc = diffusion(u, 0.7, -0.4);
            double quad = 0, scale = 0;
            for (int a = 0; a < g.dim(); ++a)
                for (int f : g.internal_faces(a)) {
                    const double t =
                        g.dual_measure(a) * u.at(a, f) * visc.at(a, f);
                    quad -= t;
                    scale += std::abs(t);
                }
            const double h1 = norm_broken_h1(u);
            const double slack = quad - 0.7 * h1 * h1;
            worst = std::min(worst, slack / std::max(scale, 1e-300));
        }
        report("diffusion coercivity, 100 random fields", worst >= -1e-12,
               worst);
    }

    // mass conservation of an explicit update (flux telescoping)
    {
        const CellField rho = random_cells(0.0, 2.0);
        const FaceField u = random_velocity();
        const CellField div = flux_divergence(mass_flux(rho, u));
        double mass_rate = 0, scale = 0;
        for (int k = 0; k < g.cell_count(); ++k) {
            mass_rate += g.cell_measure() * div[k];
            scale += g.cell_measure() * std::abs(div[k]);
        }
        const double rel = std::abs(mass_rate) / std::max(scale, 1e-300);
        report("mass flux telescoping", rel <= 1e-12, rel);
    }

    // convection integration by parts:
    // sum |D| v conv(v) = (1/2) sum v^2 sum_eps F
    {
        const CellField rho = random_cells(0.2, 2.0);
        const FaceField u = random_velocity();
        const FaceField v = random_velocity();
        const DualFluxSet Fd = dual_mass_fluxes(mass_flux(rho, u));
        const FaceField conv = velocity_convection(Fd, v);
        double lhs = 0, rhs = 0, scale = 0;
        for (int i = 0; i < g.dim(); ++i) {
            const int nsten = 2 * g.dim();
            size_t pos = 0;
            for (int f : g.internal_faces(i)) {
                const double vf = v.at(i, f);
                const double t = g.dual_measure(i) * vf * conv.at(i, f);
                lhs += t;
                scale += std::abs(t);
                double fsum = 0;
                for (int q = 0; q < nsten; ++q)
                    fsum += Fd.flux[i][pos * nsten + q];
                rhs += 0.5 * vf * vf * fsum;
                scale += std::abs(0.5 * vf * vf * fsum);
                ++pos;
            }
        }
        const double rel = std::abs(lhs - rhs) / std::max(scale, 1e-300);
        report("convection integration by parts", rel <= 1e-12, rel);
    }

    // Pi_gamma bounds
    {
        bool ok = true;
        double worst = 0;
        for (double gamma : {1.0, 1.4, 2.0, 3.0}) {
            const PiBoundsReport r = pi_gamma_bounds_check(gamma, 10000);
            ok = ok && r.pass();
            worst = std::max(worst, static_cast<double>(r.violations));
        }
        report("Pi_gamma bounds, gamma in {1,1.4,2,3}", ok, worst);
    }

    return all_ok;
}

}  // namespace lowmac
