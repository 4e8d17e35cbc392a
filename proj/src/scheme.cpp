#include "lowmac/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lowmac/diagnostics.hpp"
#include "lowmac/linsolve.hpp"

namespace lowmac {

void SchemeParams::validate() const {
    if (!(gamma >= 1)) throw std::invalid_argument("params: gamma must be >= 1");
    if (!(mu > 0)) throw std::invalid_argument("params: mu must be > 0");
    if (!(mu + lambda > 0))
        throw std::invalid_argument("params: mu + lambda must be > 0");
    if (!(mach > 0)) throw std::invalid_argument("params: mach must be > 0");
    if (!(dt > 0)) throw std::invalid_argument("params: dt must be > 0");
}

SchemeState init_state(const CellField& rho0, const FaceField& u0,
                       const SchemeParams& params) {
    params.validate();
    const MacGrid& g = rho0.grid();
    for (int k = 0; k < g.cell_count(); ++k)
        if (!(rho0[k] > 0))
            throw std::domain_error("init_state: rho0 must be positive");
    if (!u0.external_faces_zero())
        throw std::invalid_argument(
            "init_state: u0 must vanish on external faces");

    SchemeState s(g, params);
    s.n = 0;
    s.rho = rho0;
    s.u = u0;
    const CellField div0 = mass_divergence(rho0, u0);
    for (int k = 0; k < g.cell_count(); ++k) {
        s.rho_prev[k] = rho0[k] + params.dt * div0[k];
        if (!(s.rho_prev[k] > 0))
            throw std::domain_error(
                "init_state: backward density lost positivity (time step too "
                "large for the data at this Mach number)");
    }
    const Barotropic eos(params.gamma);
    for (int k = 0; k < g.cell_count(); ++k) s.p[k] = eos.pressure(rho0[k]);
    s.grad_p = pressure_gradient(rho0, params.gamma);
    s.visc_accum = 0;
    s.c0 = initial_constant_c0(s);
    return s;
}

FaceField scale_pressure_gradient(const SchemeState& s) {
    const MacGrid& g = s.rho.grid();
    const FaceField rd_n = dual_density(s.rho);
    const FaceField rd_prev= dual_density(s.rho_prev);
    FaceField out(g);
    for (int a = 0; a < g.dim(); ++a)
        for (int f : g.internal_faces(a)) {
            const double num = rd_n.at(a, f);
            const double den = rd_prev.at(a, f);
            if (!(num > 0) || !(den > 0))
                throw std::domain_error(
                    "scale_pressure_gradient: nonpositive dual density");
            out.at(a, f) = std::sqrt(num / den) * s.grad_p.at(a, f);
        }
    return out;
}

PredictionResult prediction_step(const SchemeState& s) {
    const MacGrid& g = s.rho.grid();
    const SchemeParams& prm = s.params;
    PredictionResult res(g);
    res.scaled_grad = scale_pressure_gradient(s);

    const FaceField rd_n = dual_density(s.rho);
    const FaceField rd_prev = dual_density(s.rho_prev);
    const DualFluxSet Fd = dual_mass_fluxes(mass_flux(s.rho, s.u));

    const int n = g.internal_face_count();
    SparseMatrix A(n);
    std::vector<double> b(n);
    const double inv_ma2 = 1.0 / (prm.mach * prm.mach);
    const double mu = prm.mu, mpl = prm.mu + prm.lambda;
    const double inv_dt = 1.0 / prm.dt;
    const double inv_vol = 1.0 / g.cell_measure();

    for (int i = 0; i < g.dim(); ++i) {
        const double inv_dual = 1.0 / g.dual_measure(i);
        const int nsten = 2 * g.dim();
        size_t pos = 0;
        for (int f : g.internal_faces(i)) {
            const int row = g.face_dof(i, f);
            A.add(row, row, rd_n.at(i, f) * inv_dt);

            // convection through the dual faces, centered value
            const auto stens = g.dual_faces(i, f);
            for (int q = 0; q < nsten; ++q) {
                const DualFaceStencil& st = stens[q];
                if (st.boundary) continue;
                const double c = 0.5 * inv_dual * Fd.flux[i][pos * nsten + q];
                A.add(row, row, c);
                const int nb = g.face_dof(i, st.neighbor_face);
                if (nb >= 0) A.add(row, nb, c);
            }

            // -mu * Laplacian
            const auto c = g.face_coords(i, f);
            {
                const double w = mu / (g.spacing(i) * g.spacing(i));
                A.add(row, row, 2 * w);
                for (int side = 0; side < 2; ++side) {
                    auto cn = c;
                    cn[i] = c[i] + (side == 0 ? -1 : 1);
                    const int nb = g.face_dof(i, g.face_index(i, cn));
                    if (nb >= 0) A.add(row, nb, -w);
                }
            }
            for (int j = 0; j < g.dim(); ++j) {
                if (j == i) continue;
                const double w = mu / (g.spacing(j) * g.spacing(j));
                A.add(row, row, 2 * w);
                for (int side = 0; side < 2; ++side) {
                    const int t = c[j] + (side == 0 ? -1 : 1);
                    if (t < 0 || t >= g.cells_per_axis(j)) {
                        A.add(row, row, w);  // mirror ghost -u
                    } else {
                        auto cn = c;
                        cn[j] = t;
                        A.add(row, g.face_dof(i, g.face_index(i, cn)), -w);
                    }
                }
            }

            // -(mu+lambda) * grad(div u), coupling all components
            const double coef_gd = g.face_measure(i) / g.dual_measure(i);
            const auto kl = g.face_cells(i, f);
            for (int side = 0; side < 2; ++side) {
                const int cell = kl[side];
                const double w = (side == 0 ? mpl : -mpl) * coef_gd * inv_vol;
                const auto faces = g.cell_faces(cell);
                for (int a = 0; a < g.dim(); ++a) {
                    const double area = g.face_measure(a);
                    const int lo = g.face_dof(a, faces[a][0]);
                    const int hi = g.face_dof(a, faces[a][1]);
                    if (lo >= 0) A.add(row, lo, w * (-area));
                    if (hi >= 0) A.add(row, hi, w * area);
                }
            }

            b[row] = rd_prev.at(i, f) * s.u.at(i, f) * inv_dt -
                     inv_ma2 * res.scaled_grad.at(i, f);
            ++pos;
        }
    }

    const std::vector<double> x = solve(A, b, prm.lin_tol, 10000, &res.residual);
    for (int d = 0; d < n; ++d) {
        const auto [axis, face] = g.dof_face(d);
        res.u_tilde.at(axis, face) = x[d];
    }
    return res;
}

CorrectionResult correction_step(const SchemeState& s,
                                 const PredictionResult& pred) {
    const MacGrid& g = s.rho.grid();
    const SchemeParams& prm = s.params;
    const Barotropic eos(prm.gamma);
    const FaceField rd_n = dual_density(s.rho);
    const int nc = g.cell_count();
    const double inv_dt = 1.0 / prm.dt;
    const double inv_vol = 1.0 / g.cell_measure();
    const double inv_ma2 = 1.0 / (prm.mach * prm.mach);

    CorrectionResult out(g);

    // The Newton unknown is the density increment over rho^n. At small Mach
    // numbers the converged increment drops below one ulp of the density
    // itself while the eliminated pressure force amplifies every density
    // ulp by dt/Ma^2, so iterating on rho directly would stall far above
    // the tolerance. All pressure differences are therefore evaluated from
    // the exactly-known increment (pressure_diff_incr), and the returned
    // velocity and gradient are the ones of the increment form, which keeps
    // the velocity-update relation exact for the stored fields.
    std::vector<double> delta(nc, 0.0);
    std::vector<double> H(nc);

    struct Eval {
        FaceField u;
        FaceField grad;
        double res;
    };
    auto evaluate = [&](const std::vector<double>& d) {
        Eval ev{FaceField(g), FaceField(g), 0.0};
        for (int a = 0; a < g.dim(); ++a) {
            const double coef_g = g.face_measure(a) / g.dual_measure(a);
            for (int f : g.internal_faces(a)) {
                const auto kl = g.face_cells(a, f);
                const double aK = s.rho[kl[0]] + d[kl[0]];
                const double aL = s.rho[kl[1]] + d[kl[1]];
                const double diff =
                    (s.rho[kl[1]] - s.rho[kl[0]]) + (d[kl[1]] - d[kl[0]]);
                const double gp =
                    coef_g * eos.pressure_diff_incr(aK, aL, diff);
                ev.grad.at(a, f) = gp;
                ev.u.at(a, f) =
                    pred.u_tilde.at(a, f) -
                    prm.dt * inv_ma2 / rd_n.at(a, f) *
                        (gp - pred.scaled_grad.at(a, f));
            }
        }
        for (int k = 0; k < nc; ++k) H[k] = d[k] * inv_dt;
        for (int a = 0; a < g.dim(); ++a) {
            const double area = g.face_measure(a);
            for (int f : g.internal_faces(a)) {
                const auto kl = g.face_cells(a, f);
                const double v = ev.u.at(a, f);
                const double up =
                    (v >= 0) ? s.rho[kl[0]] + d[kl[0]] : s.rho[kl[1]] + d[kl[1]];
                const double flux = area * up * v;
                H[kl[0]] += inv_vol * flux;
                H[kl[1]] -= inv_vol * flux;
            }
        }
        for (int k = 0; k < nc; ++k)
            ev.res = std::max(ev.res, std::abs(H[k]));
        return ev;
    };

    std::vector<double> best_delta = delta;
    double best_res = std::numeric_limits<double>::infinity();
    bool polished = false;
    int iterations = 0;

    for (int iter = 0;; ++iter) {
        const Eval ev = evaluate(delta);
        out.residual_history.push_back(ev.res);
        if (ev.res < best_res) {
            best_res = ev.res;
            best_delta = delta;
        }
        double rho_max = 0;
        for (int k = 0; k < nc; ++k)
            rho_max = std::max(rho_max, s.rho[k] + delta[k]);
        const double threshold = prm.newton_tol * std::max(1.0, rho_max);
        if (ev.res <= threshold) {
            if (polished) break;
            polished = true;  // one extra iteration sharpens the residual
        }
        if (iter >= prm.newton_max_iter) {
            if (best_res <= threshold) break;
            throw SolveError(
                "correction_step: Newton stalled at residual " +
                    std::to_string(best_res) + " after " +
                    std::to_string(iter) + " iterations",
                out.residual_history);
        }

        // Jacobian with the upwind direction frozen at the current iterate
        SparseMatrix J(nc);
        for (int k = 0; k < nc; ++k) J.add(k, k, inv_dt);
        for (int a = 0; a < g.dim(); ++a) {
            const double area = g.face_measure(a);
            const double coef_g = area / g.dual_measure(a);
            for (int f : g.internal_faces(a)) {
                const auto kl = g.face_cells(a, f);
                const double v = ev.u.at(a, f);
                const bool up_is_lower = (v >= 0);
                const double rK = s.rho[kl[0]] + delta[kl[0]];
                const double rL = s.rho[kl[1]] + delta[kl[1]];
                const double rho_up = up_is_lower ? rK : rL;
                const double cfac = prm.dt * inv_ma2 / rd_n.at(a, f);
                const double du_dK =
                    cfac * coef_g * eos.pressure_derivative(rK);
                const double du_dL =
                    -cfac * coef_g * eos.pressure_derivative(rL);
                const double dF_dK =
                    area * ((up_is_lower ? v : 0.0) + rho_up * du_dK);
                const double dF_dL =
                    area * ((up_is_lower ? 0.0 : v) + rho_up * du_dL);
                J.add(kl[0], kl[0], inv_vol * dF_dK);
                J.add(kl[0], kl[1], inv_vol * dF_dL);
                J.add(kl[1], kl[0], -inv_vol * dF_dK);
                J.add(kl[1], kl[1], -inv_vol * dF_dL);
            }
        }
        std::vector<double> rhs(nc);
        for (int k = 0; k < nc; ++k) rhs[k] = -H[k];
        const std::vector<double> step = solve(J, rhs, prm.lin_tol);

        double alpha = 1.0;
        int halvings = 0;
        for (;;) {
            bool positive = true;
            for (int k = 0; k < nc; ++k)
                if (!(s.rho[k] + delta[k] + alpha * step[k] > 0)) {
                    positive = false;
                    break;
                }
            if (positive) break;
            if (++halvings > prm.max_halvings)
                throw SolveError(
                    "correction_step: density positivity lost after " +
                        std::to_string(prm.max_halvings) + " step halvings",
                    out.residual_history);
            alpha *= 0.5;
        }
        for (int k = 0; k < nc; ++k) delta[k] += alpha * step[k];
        iterations = iter + 1;
    }

    const Eval final_ev = evaluate(best_delta);
    out.newton_iterations = iterations;
    out.mass_residual = best_res;
    out.u = final_ev.u;
    out.grad_p = final_ev.grad;
    for (int k = 0; k < nc; ++k) {
        out.rho[k] = s.rho[k] + best_delta[k];
        out.p[k] = eos.pressure(out.rho[k]);
    }
    return out;
}

StepResult advance(const SchemeState& s) {
    const MacGrid& g = s.rho.grid();
    PredictionResult pred = prediction_step(s);
    CorrectionResult corr = correction_step(s, pred);

    SchemeState next(g, s.params);
    next.n = s.n + 1;
    next.rho_prev = s.rho;
    next.rho = corr.rho;
    next.u = corr.u;
    next.p = corr.p;
    next.grad_p = corr.grad_p;
    next.c0 = s.c0;
    const double h1 = norm_broken_h1(pred.u_tilde);
    next.visc_accum = s.visc_accum + s.params.dt * h1 * h1;

    DiagnosticsRecord rec;
    rec.step = next.n;
    rec.time = next.n * s.params.dt;
    rec.newton_iterations = corr.newton_iterations;
    rec.prediction_residual = pred.residual;
    rec.mass_residual = corr.mass_residual;
    rec.u_tilde_h1 = h1;

    const KineticIdentityReport kin = kinetic_energy_residual(s, pred, next);
    rec.kinetic_max_rel = kin.max_rel;
    rec.kinetic_min_remainder = kin.min_remainder;
    rec.dual_mass_max_rel =
        dual_mass_balance_residual(s.rho, next.rho, next.u, s.params.dt);
    const RenormalizationReport ren = renormalization_remainder(
        s.rho, next.rho, next.u, s.params.gamma, s.params.dt);
    rec.renorm_min_rel = ren.min_rel;
    const LocalEntropyReport loc = local_entropy_lhs(s, pred, next);
    rec.local_entropy_lhs = loc.lhs;
    rec.local_entropy_rel = loc.scale > 0 ? loc.lhs / loc.scale : 0.0;
    const GlobalEntropyTerms glob = global_entropy_terms(next);
    rec.entropy_kinetic = glob.kinetic;
    rec.entropy_pi = glob.pi;
    rec.entropy_visc = glob.visc;
    rec.entropy_grad = glob.grad;
    rec.global_entropy_lhs = glob.sum();
    rec.c0 = s.c0;
    fill_record_norms(next, rec);

    return StepResult{std::move(next), std::move(pred), rec};
}

}  // namespace lowmac
