#include "lowmac/incompressible.hpp"

#include <cmath>
#include <stdexcept>

#include "lowmac/operators.hpp"

namespace lowmac {

void IncParams::validate() const {
    if (!(mu > 0)) throw std::invalid_argument("inc params: mu must be > 0");
    if (!(mu + lambda > 0))
        throw std::invalid_argument("inc params: mu + lambda must be > 0");
    if (!(dt > 0)) throw std::invalid_argument("inc params: dt must be > 0");
}

FaceField inc_prediction_step(const IncState& s) {
    const MacGrid& g = s.u.grid();
    const IncParams& prm = s.params;
    const CellField ones(g, 1.0);
    const DualFluxSet Fd = dual_mass_fluxes(mass_flux(ones, s.u));
    const FaceField grad_dp = gradient_of_cells(s.dp);

    const int n = g.internal_face_count();
    SparseMatrix A(n);
    std::vector<double> b(n);
    const double mu = prm.mu, mpl = prm.mu + prm.lambda;
    const double inv_dt = 1.0 / prm.dt;
    const double inv_vol = 1.0 / g.cell_measure();

    for (int i = 0; i < g.dim(); ++i) {
        const double inv_dual = 1.0 / g.dual_measure(i);
        const int nsten = 2 * g.dim();
        size_t pos = 0;
        for (int f : g.internal_faces(i)) {
            const int row = g.face_dof(i, f);
            A.add(row, row, inv_dt);

            const auto stens = g.dual_faces(i, f);
            for (int q = 0; q < nsten; ++q) {
                const DualFaceStencil& st = stens[q];
                if (st.boundary) continue;
                const double c = 0.5 * inv_dual * Fd.flux[i][pos * nsten + q];
                A.add(row, row, c);
                const int nb = g.face_dof(i, st.neighbor_face);
                if (nb >= 0) A.add(row, nb, c);
            }

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
                        A.add(row, row, w);
                    } else {
                        auto cn = c;
                        cn[j] = t;
                        A.add(row, g.face_dof(i, g.face_index(i, cn)), -w);
                    }
                }
            }

            const double coef_gd = g.face_measure(i) / g.dual_measure(i);
            const auto kl = g.face_cells(i, f);
            for (int side = 0; side < 2; ++side) {
                const double w = (side == 0 ? mpl : -mpl) * coef_gd * inv_vol;
                const auto faces = g.cell_faces(kl[side]);
                for (int a = 0; a < g.dim(); ++a) {
                    const double area = g.face_measure(a);
                    const int lo = g.face_dof(a, faces[a][0]);
                    const int hi = g.face_dof(a, faces[a][1]);
                    if (lo >= 0) A.add(row, lo, w * (-area));
                    if (hi >= 0) A.add(row, hi, w * area);
                }
            }

            b[row] = s.u.at(i, f) * inv_dt - grad_dp.at(i, f);
            ++pos;
        }
    }

    const std::vector<double> x = solve(A, b, prm.lin_tol);
    FaceField ut(g);
    for (int d = 0; d < n; ++d) {
        const auto [axis, face] = g.dof_face(d);
        ut.at(axis, face) = x[d];
    }
    return ut;
}

SparseMatrix assemble_cell_poisson(const MacGrid& g) {
    const int nc = g.cell_count();
    SparseMatrix A(nc);
    CellField e(g);
    const double vol = g.cell_measure();
    for (int col = 0; col < nc; ++col) {
        e[col] = 1.0;
        const CellField lap = velocity_divergence(gradient_of_cells(e));
        // touched rows: the column cell and its face neighbors
        A.add(col, col, -vol * lap[col]);
        const auto faces = g.cell_faces(col);
        for (int a = 0; a < g.dim(); ++a)
            for (int side = 0; side < 2; ++side) {
                const int f = faces[a][side];
                if (g.face_is_external(a, f)) continue;
                const auto kl = g.face_cells(a, f);
                const int nb = (kl[0] == col) ? kl[1] : kl[0];
                A.add(nb, col, -vol * lap[nb]);
            }
        e[col] = 0.0;
    }
    return A;
}

IncCorrection inc_correction_step(const IncState& s,
                                  const FaceField& u_tilde) {
    const MacGrid& g = s.u.grid();
    const IncParams& prm = s.params;
    const int nc = g.cell_count();
    const double vol = g.cell_measure();

    const CellField div_ut = velocity_divergence(u_tilde);
    const CellField lap_dpn = velocity_divergence(gradient_of_cells(s.dp));

    // dt * (-|K| div grad) dp' + |K| m = -|K| div u~ - dt |K| div grad dp^n,
    // plus the zero-mean row for the multiplier m.
    const SparseMatrix P = assemble_cell_poisson(g);
    SparseMatrix A(nc + 1);
    for (const auto& t : P.triplets())
        A.add(t.row, t.col, prm.dt * t.value);
    std::vector<double> b(nc + 1, 0.0);
    for (int k = 0; k < nc; ++k) {
        A.add(k, nc, vol);
        A.add(nc, k, vol);
        b[k] = -vol * div_ut[k] + prm.dt * (-vol * lap_dpn[k]);
    }

    IncCorrection out(g);
    const std::vector<double> x = solve(A, b, prm.lin_tol, 10000, &out.residual);
    for (int k = 0; k < nc; ++k) out.dp[k] = x[k];
    double mean = 0;
    for (int k = 0; k < nc; ++k) mean += vol * out.dp[k];
    mean /= g.domain_measure();
    for (int k = 0; k < nc; ++k) out.dp[k] -= mean;

    const FaceField grad_new = gradient_of_cells(out.dp);
    const FaceField grad_old = gradient_of_cells(s.dp);
    for (int a = 0; a < g.dim(); ++a)
        for (int f : g.internal_faces(a))
            out.u.at(a, f) =
                u_tilde.at(a, f) -
                prm.dt * (grad_new.at(a, f) - grad_old.at(a, f));
    return out;
}

IncState inc_advance(const IncState& s) {
    const FaceField ut = inc_prediction_step(s);
    IncCorrection corr = inc_correction_step(s, ut);
    IncState next(s.u.grid(), s.params);
    next.n = s.n + 1;
    next.u = std::move(corr.u);
    next.dp = std::move(corr.dp);
    return next;
}

IncTrajectory inc_run(const IncState& init, int nsteps) {
    const MacGrid& g = init.u.grid();
    IncTrajectory tr{init, {}};
    tr.records.reserve(nsteps);
    for (int k = 0; k < nsteps; ++k) {
        tr.final = inc_advance(tr.final);
        IncRecord rec;
        rec.step = tr.final.n;
        rec.time = tr.final.n * init.params.dt;
        const double unorm = norm_l2_faces(tr.final.u);
        rec.kinetic = 0.5 * unorm * unorm;
        rec.div_linf = norm_linf_cells(velocity_divergence(tr.final.u));
        rec.dp_l2 = norm_l2_cells(tr.final.dp);
        double mean = 0;
        for (int k2 = 0; k2 < g.cell_count(); ++k2)
            mean += g.cell_measure() * tr.final.dp[k2];
        rec.dp_mean = mean / g.domain_measure();
        tr.records.push_back(rec);
    }
    return tr;
}

}  // namespace lowmac
