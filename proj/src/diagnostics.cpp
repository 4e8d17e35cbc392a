#include "lowmac/diagnostics.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include "lowmac/operators.hpp"

namespace lowmac {

KineticIdentityReport kinetic_energy_residual(const SchemeState& before,
                                              const PredictionResult& pred,
                                              const SchemeState& after) {
    const MacGrid& g = before.rho.grid();
    if (after.n != before.n + 1)
        throw std::invalid_argument(
            "kinetic_energy_residual: states are not consecutive levels");
    const SchemeParams& prm = before.params;
    const FaceField rd_n = dual_density(before.rho);
    const FaceField rd_prev = dual_density(before.rho_prev);
    const DualFluxSet Fd = dual_mass_fluxes(mass_flux(before.rho, before.u));
    const FaceField visc = diffusion(pred.u_tilde, prm.mu, prm.lambda);

    KineticIdentityReport rep{FaceField(g), FaceField(g), FaceField(g), 0.0,
                              std::numeric_limits<double>::infinity()};
    const double inv2dt = 1.0 / (2 * prm.dt);
    const double ma2 = prm.mach * prm.mach;
    const double tele = prm.dt / (ma2 * ma2);

    for (int i = 0; i < g.dim(); ++i) {
        const double inv2dual = 1.0 / (2 * g.dual_measure(i));
        const int nsten = 2 * g.dim();
        size_t pos = 0;
        for (int f : g.internal_faces(i)) {
            const double un = before.u.at(i, f);
            const double unew = after.u.at(i, f);
            const double ut = pred.u_tilde.at(i, f);
            const double gn = before.grad_p.at(i, f);
            const double gnew = after.grad_p.at(i, f);
            const double rn = rd_n.at(i, f);
            const double rp = rd_prev.at(i, f);

            const double t1a = inv2dt * rn * unew * unew;
            const double t1b = -inv2dt * rp * un * un;
            double t2 = 0, t2_abs = 0;
            const auto stens = g.dual_faces(i, f);
            for (int q = 0; q < nsten; ++q) {
                const DualFaceStencil& st = stens[q];
                const double flux = Fd.flux[i][pos * nsten + q];
                if (st.boundary) continue;
                const double term =
                    inv2dual * flux * ut * pred.u_tilde.at(i, st.neighbor_face);
                t2 += term;
                t2_abs += std::abs(term);
            }
            const double t3 = -visc.at(i, f) * ut;
            const double t4 = gnew * unew / ma2;
            const double t5a = tele * gnew * gnew / (2 * rn);
            const double t5b = -tele * gn * gn / (2 * rp);
            const double rem = inv2dt * rp * (ut - un) * (ut - un);

            const double resid = t1a + t1b + t2 + t3 + t4 + t5a + t5b + rem;
            const double scale = std::abs(t1a) + std::abs(t1b) + t2_abs +
                                 std::abs(t3) + std::abs(t4) + std::abs(t5a) +
                                 std::abs(t5b) + rem;
            rep.residual.at(i, f) = resid;
            rep.scale.at(i, f) = scale;
            rep.remainder.at(i, f) = rem;
            if (scale > 0)
                rep.max_rel = std::max(rep.max_rel, std::abs(resid) / scale);
            rep.min_remainder = std::min(rep.min_remainder, rem);
            ++pos;
        }
    }
    return rep;
}

double dual_mass_balance_residual(const CellField& rho_old,
                                  const CellField& rho_new,
                                  const FaceField& u_new, double dt) {
    const MacGrid& g = rho_old.grid();
    const FaceField rd_old = dual_density(rho_old);
    const FaceField rd_new = dual_density(rho_new);
    const DualFluxSet Fd = dual_mass_fluxes(mass_flux(rho_new, u_new));

    double worst = 0;
    for (int i = 0; i < g.dim(); ++i) {
        const double vol = g.dual_measure(i);
        const int nsten = 2 * g.dim();
        size_t pos = 0;
        for (int f : g.internal_faces(i)) {
            double s = 0, s_abs = 0;
            for (int q = 0; q < nsten; ++q) {
                const double flux = Fd.flux[i][pos * nsten + q];
                s += flux;
                s_abs += std::abs(flux);
            }
            const double time_new = vol / dt * rd_new.at(i, f);
            const double time_old = vol / dt * rd_old.at(i, f);
            const double resid = (time_new - time_old) + s;
            const double scale =
                std::abs(time_new) + std::abs(time_old) + s_abs;
            if (scale > 0) worst = std::max(worst, std::abs(resid) / scale);
            ++pos;
        }
    }
    return worst;
}

RenormalizationReport renormalization_remainder(const CellField& rho_old,
                                                const CellField& rho_new,
                                                const FaceField& u_new,
                                                double gamma, double dt) {
    const MacGrid& g = rho_old.grid();
    const Barotropic eos(gamma);
    const CellField div = velocity_divergence(u_new);
    const double inv_dt = 1.0 / dt;
    const double inv_vol = 1.0 / g.cell_measure();

    RenormalizationReport rep{CellField(g), CellField(g),
                              std::numeric_limits<double>::infinity()};
    for (int k = 0; k < g.cell_count(); ++k) {
        const double t1a = inv_dt * eos.pi(rho_new[k]);
        const double t1b = -inv_dt * eos.pi(rho_old[k]);
        // b(rho)u - b'(1) rho u flux plus p div u, regrouped as the
        // Pi-upwind flux plus (p - 1) div u; identical term by term since
        // b - b'(1) id = Pi - 1
        double t2 = 0, t2_abs = 0;
        const auto faces = g.cell_faces(k);
        for (int a = 0; a < g.dim(); ++a) {
            const double area = g.face_measure(a);
            for (int side = 0; side < 2; ++side) {
                const int f = faces[a][side];
                if (g.face_is_external(a, f)) continue;
                const double v = u_new.at(a, f);
                const auto kl = g.face_cells(a, f);
                const double rho_up = (v >= 0) ? rho_new[kl[0]] : rho_new[kl[1]];
                const double outward = (side == 0) ? -v : v;
                const double term =
                    inv_vol * area * outward * eos.pi(rho_up);
                t2 += term;
                t2_abs += std::abs(term);
            }
        }
        const double t3 = eos.pressure_diff(1.0, rho_new[k]) * div[k];
        const double rem = -(t1a + t1b + t2 + t3);
        const double scale = std::abs(t1a) + std::abs(t1b) + t2_abs +
                             std::abs(t3) + std::abs(rem);
        rep.remainder[k] = rem;
        rep.scale[k] = scale;
        if (scale > 0) rep.min_rel = std::min(rep.min_rel, rem / scale);
    }
    if (!std::isfinite(rep.min_rel)) rep.min_rel = 0;
    return rep;
}

LocalEntropyReport local_entropy_lhs(const SchemeState& before,
                                     const PredictionResult& pred,
                                     const SchemeState& after) {
    const MacGrid& g = before.rho.grid();
    const SchemeParams& prm = before.params;
    const FaceField rd_n = dual_density(before.rho);
    const FaceField rd_prev = dual_density(before.rho_prev);
    const Barotropic eos(prm.gamma);
    const double ma2 = prm.mach * prm.mach;
    const double tele = prm.dt * prm.dt / (ma2 * ma2);

    double kin_new = 0, kin_old = 0, grad_new = 0, grad_old = 0;
    for (int i = 0; i < g.dim(); ++i) {
        const double vol = g.dual_measure(i);
        for (int f : g.internal_faces(i)) {
            const double un = before.u.at(i, f);
            const double unew = after.u.at(i, f);
            kin_new += 0.5 * vol * rd_n.at(i, f) * unew * unew;
            kin_old += 0.5 * vol * rd_prev.at(i, f) * un * un;
            const double gn = before.grad_p.at(i, f);
            const double gnew = after.grad_p.at(i, f);
            grad_new += tele * vol * gnew * gnew / (2 * rd_n.at(i, f));
            grad_old += tele * vol * gn * gn / (2 * rd_prev.at(i, f));
        }
    }
    double pi_new = 0, pi_old = 0;
    const double vol_c = g.cell_measure();
    for (int k = 0; k < g.cell_count(); ++k) {
        pi_new += vol_c / ma2 * eos.pi(after.rho[k]);
        pi_old += vol_c / ma2 * eos.pi(before.rho[k]);
    }
    const double h1 = norm_broken_h1(pred.u_tilde);
    const double visc = prm.mu * prm.dt * h1 * h1;

    LocalEntropyReport rep;
    rep.lhs = (kin_new - kin_old) + (pi_new - pi_old) + visc +
              (grad_new - grad_old);
    rep.scale =
        kin_new + kin_old + pi_new + pi_old + visc + grad_new + grad_old;
    return rep;
}

GlobalEntropyTerms global_entropy_terms(const SchemeState& s) {
    const MacGrid& g = s.rho.grid();
    const SchemeParams& prm = s.params;
    const FaceField rd_prev = dual_density(s.rho_prev);
    const Barotropic eos(prm.gamma);
    const double ma2 = prm.mach * prm.mach;
    const double tele = prm.dt * prm.dt / (ma2 * ma2);

    GlobalEntropyTerms t;
    for (int i = 0; i < g.dim(); ++i) {
        const double vol = g.dual_measure(i);
        for (int f : g.internal_faces(i)) {
            const double u = s.u.at(i, f);
            const double gp = s.grad_p.at(i, f);
            t.kinetic += 0.5 * vol * rd_prev.at(i, f) * u * u;
            t.grad += tele * vol * gp * gp / (2 * rd_prev.at(i, f));
        }
    }
    const double vol_c = g.cell_measure();
    for (int k = 0; k < g.cell_count(); ++k)
        t.pi += vol_c / ma2 * eos.pi(s.rho[k]);
    t.visc = prm.mu * s.visc_accum;
    return t;
}

double initial_constant_c0(const SchemeState& init) {
    GlobalEntropyTerms t = global_entropy_terms(init);
    return t.kinetic + t.pi + t.grad;
}

CellField pressure_fluctuation(const CellField& p, double mach) {
    if (!(mach > 0))
        throw std::invalid_argument("pressure_fluctuation: Mach must be > 0");
    const MacGrid& g = p.grid();
    const double vol = g.cell_measure();
    double mean = 0;
    for (int k = 0; k < p.size(); ++k) mean += vol * p[k];
    mean /= g.domain_measure();
    CellField dp(g);
    const double inv_ma2 = 1.0 / (mach * mach);
    for (int k = 0; k < p.size(); ++k) dp[k] = (p[k] - mean) * inv_ma2;
    // renormalize so the discrete mean vanishes exactly
    double m2 = 0;
    for (int k = 0; k < p.size(); ++k) m2 += vol * dp[k];
    m2 /= g.domain_measure();
    for (int k = 0; k < p.size(); ++k) dp[k] -= m2;
    return dp;
}

double infsup_estimate(const MacGrid& g) {
    const int nc = g.cell_count();
    if (nc > 1024)
        throw std::invalid_argument(
            "infsup_estimate: grid too large for dense spectral work");
    const int nf = g.internal_face_count();

    // Divergence coupling: (D u)_K = sum_s |s| u_{K,s}
    Eigen::SparseMatrix<double> D(nc, nf);
    {
        std::vector<Eigen::Triplet<double>> t;
        for (int a = 0; a < g.dim(); ++a) {
            const double area = g.face_measure(a);
            for (int f : g.internal_faces(a)) {
                const auto kl = g.face_cells(a, f);
                const int dof = g.face_dof(a, f);
                t.emplace_back(kl[0], dof, area);
                t.emplace_back(kl[1], dof, -area);
            }
        }
        D.setFromTriplets(t.begin(), t.end());
    }

    // Velocity H^1 Gram matrix, assembled from the same difference
    // quotients as the broken H^1 norm.
    Eigen::SparseMatrix<double> AH(nf, nf);
    {
        std::vector<Eigen::Triplet<double>> t;
        const double vol = g.cell_measure();
        auto add_pair = [&](int p, int q, double w) {
            if (p >= 0) t.emplace_back(p, p, w);
            if (q >= 0) t.emplace_back(q, q, w);
            if (p >= 0 && q >= 0) {
                t.emplace_back(p, q, -w);
                t.emplace_back(q, p, -w);
            }
        };
        for (int i = 0; i < g.dim(); ++i) {
            {
                const double w = vol / (g.spacing(i) * g.spacing(i));
                for (int f = 0; f < g.face_count(i); ++f) {
                    const auto c = g.face_coords(i, f);
                    if (c[i] == g.cells_per_axis(i)) continue;
                    auto cn = c;
                    cn[i] = c[i] + 1;
                    add_pair(g.face_dof(i, f),
                             g.face_dof(i, g.face_index(i, cn)), w);
                }
            }
            for (int j = 0; j < g.dim(); ++j) {
                if (j == i) continue;
                const double w = vol / (g.spacing(j) * g.spacing(j));
                for (int f = 0; f < g.face_count(i); ++f) {
                    const auto c = g.face_coords(i, f);
                    const int dof = g.face_dof(i, f);
                    if (dof < 0) continue;
                    if (c[j] == 0) t.emplace_back(dof, dof, 2 * w);
                    if (c[j] + 1 < g.cells_per_axis(j)) {
                        auto cn = c;
                        cn[j] = c[j] + 1;
                        add_pair(dof, g.face_dof(i, g.face_index(i, cn)), w);
                    } else {
                        t.emplace_back(dof, dof, 2 * w);
                    }
                }
            }
        }
        AH.setFromTriplets(t.begin(), t.end());
    }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(AH);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("infsup_estimate: H1 Gram factorization failed");
    Eigen::MatrixXd X = ldlt.solve(Eigen::MatrixXd(D.transpose()));
    // Schur complement scaled by the pressure mass matrix (vol * I)
    Eigen::MatrixXd T = (Eigen::MatrixXd(D) * X) / g.cell_measure();
    T = 0.5 * (T + T.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
    // the constant-pressure mode carries the single zero eigenvalue
    const double beta2 = eig.eigenvalues()(1);
    return std::sqrt(std::max(beta2, 0.0));
}

PiBoundsReport pi_gamma_bounds_check(double gamma, int samples_per_regime) {
    const Barotropic eos(gamma);
    PiBoundsReport rep;
    rep.gamma = gamma;
    rep.radius = 3.0;

    // fixed constants from ratio extremization on fine grids
    const int ngrid = 40001;
    {
        double sup = 0;
        for (int k = 1; k < ngrid; ++k) {
            const double rho = 2.0 * k / ngrid;
            if (rho == 1.0) continue;
            const double x = rho - 1.0;
            sup = std::max(sup, eos.pi(rho) / (x * x));
        }
        rep.c_upper = 1.02 * sup;
    }
    if (gamma < 2.0) {
        double inf_quad = std::numeric_limits<double>::infinity();
        for (int k = 1; k < ngrid; ++k) {
            const double rho = rep.radius * k / ngrid;
            if (rho == 1.0) continue;
            const double x = rho - 1.0;
            inf_quad = std::min(inf_quad, eos.pi(rho) / (x * x));
        }
        rep.c_lower_quad = 0.98 * inf_quad;
        double inf_pow = std::numeric_limits<double>::infinity();
        for (int k = 0; k < ngrid; ++k) {
            const double rho =
                rep.radius * std::exp(std::log(1e6 / rep.radius) * k / (ngrid - 1));
            inf_pow = std::min(
                inf_pow, eos.pi(rho) / std::pow(rho - 1.0, gamma));
        }
        rep.c_lower_pow = 0.98 * inf_pow;
    } else {
        rep.c_lower_quad = 1.0;
        rep.c_lower_pow = 1.0;
    }

    std::mt19937 rng(20240613u);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (rng() / 4294967296.0);
    };

    for (int k = 0; k < samples_per_regime; ++k) {
        const double rho = uniform(1e-6, 2.0 - 1e-12);
        const double x = rho - 1.0;
        ++rep.samples;
        if (eos.pi(rho) > rep.c_upper * x * x) ++rep.violations;
    }
    if (gamma >= 2.0) {
        for (int k = 0; k < samples_per_regime; ++k) {
            const double rho = std::exp(uniform(std::log(1e-6), std::log(1e6)));
            const double x = rho - 1.0;
            ++rep.samples;
            if (eos.pi(rho) < x * x && rho != 1.0) ++rep.violations;
        }
    } else {
        for (int k = 0; k < samples_per_regime; ++k) {
            const double rho = uniform(1e-6, rep.radius);
            const double x = rho - 1.0;
            ++rep.samples;
            if (eos.pi(rho) < rep.c_lower_quad * x * x && rho != 1.0)
                ++rep.violations;
        }
        for (int k = 0; k < samples_per_regime; ++k) {
            const double rho =
                std::exp(uniform(std::log(rep.radius), std::log(1e6)));
            ++rep.samples;
            if (eos.pi(rho) < rep.c_lower_pow * std::pow(rho - 1.0, gamma))
                ++rep.violations;
        }
    }
    return rep;
}

void fill_record_norms(const SchemeState& s, DiagnosticsRecord& rec) {
    const MacGrid& g = s.rho.grid();
    const CellField dp = pressure_fluctuation(s.p, s.params.mach);
    rec.dp_l2 = norm_l2_cells(dp);
    CellField dev(g);
    for (int k = 0; k < g.cell_count(); ++k) dev[k] = s.rho[k] - 1.0;
    rec.rho_minus_one_l2 = norm_l2_cells(dev);
    rec.q_exponent = std::min(s.params.gamma, 2.0);
    rec.rho_minus_one_lq = norm_lq_cells(dev, rec.q_exponent);
    rec.rho_minus_one_linf = norm_linf_cells(dev);
    double mass = 0;
    for (int k = 0; k < g.cell_count(); ++k) mass += g.cell_measure() * s.rho[k];
    rec.total_mass = mass;
    rec.rho_min = s.rho.min();
}

void write_records_csv(std::ostream& os,
                       const std::vector<DiagnosticsRecord>& recs) {
    os << "# columns: step,time,kinetic_max_rel,kinetic_min_remainder,"
          "dual_mass_max_rel,renorm_min_rel,local_entropy_lhs,"
          "local_entropy_rel,entropy_kinetic,entropy_pi,entropy_visc,"
          "entropy_grad,global_entropy_lhs,c0,dp_l2,rho_minus_one_l2,"
          "rho_minus_one_lq,q_exponent,rho_minus_one_linf,u_tilde_h1,"
          "total_mass,rho_min,newton_iterations,prediction_residual,"
          "mass_residual\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (const auto& r : recs) {
        os << r.step << ',';
        num(r.time);
        for (double v :
             {r.kinetic_max_rel, r.kinetic_min_remainder, r.dual_mass_max_rel,
              r.renorm_min_rel, r.local_entropy_lhs, r.local_entropy_rel,
              r.entropy_kinetic, r.entropy_pi, r.entropy_visc, r.entropy_grad,
              r.global_entropy_lhs, r.c0, r.dp_l2, r.rho_minus_one_l2,
              r.rho_minus_one_lq, r.q_exponent, r.rho_minus_one_linf,
              r.u_tilde_h1, r.total_mass, r.rho_min}) {
            os << ',';
            num(v);
        }
        os << ',' << r.newton_iterations << ',';
        num(r.prediction_residual);
        os << ',';
        num(r.mass_residual);
        os << '\n';
    }
}

}  // namespace lowmac
