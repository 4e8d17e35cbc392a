#include "lowmac/operators.hpp"

#include <stdexcept>

namespace lowmac {

MassFluxSet mass_flux(const CellField& rho, const FaceField& u) {
    const MacGrid& g = rho.grid();
    MassFluxSet F(g);
    for (int a = 0; a < g.dim(); ++a) {
        const double area = g.face_measure(a);
        for (int f : g.internal_faces(a)) {
            const auto kl = g.face_cells(a, f);
            const double v = u.at(a, f);
            const double r = (v >= 0) ? rho[kl[0]] : rho[kl[1]];
            F.flux[a][f] = area * r * v;
        }
    }
    return F;
}

CellField flux_divergence(const MassFluxSet& F) {
    const MacGrid& g = *F.grid;
    CellField div(g);
    const double inv_vol = 1.0 / g.cell_measure();
    for (int k = 0; k < g.cell_count(); ++k) {
        const auto faces = g.cell_faces(k);
        double s = 0;
        for (int a = 0; a < g.dim(); ++a) {
            s -= F.flux[a][faces[a][0]];
            s += F.flux[a][faces[a][1]];
        }
        div[k] = inv_vol * s;
    }
    return div;
}

CellField mass_divergence(const CellField& rho, const FaceField& u) {
    return flux_divergence(mass_flux(rho, u));
}

CellField velocity_divergence(const FaceField& u) {
    const MacGrid& g = u.grid();
    CellField div(g);
    const double inv_vol = 1.0 / g.cell_measure();
    for (int k = 0; k < g.cell_count(); ++k) {
        const auto faces = g.cell_faces(k);
        double s = 0;
        for (int a = 0; a < g.dim(); ++a) {
            const double area = g.face_measure(a);
            s -= area * 1.0 * u.at(a, faces[a][0]);
            s += area * 1.0 * u.at(a, faces[a][1]);
        }
        div[k] = inv_vol * s;
    }
    return div;
}

FaceField gradient_of_cells(const CellField& q) {
    const MacGrid& g = q.grid();
    FaceField grad(g);
    for (int a = 0; a < g.dim(); ++a) {
        const double coef = g.face_measure(a) / g.dual_measure(a);
        for (int f : g.internal_faces(a)) {
            const auto kl = g.face_cells(a, f);
            grad.at(a, f) = coef * (q[kl[1]] - q[kl[0]]);
        }
    }
    return grad;
}

FaceField pressure_gradient(const CellField& rho, double gamma) {
    const MacGrid& g = rho.grid();
    for (int k = 0; k < g.cell_count(); ++k)
        if (!(rho[k] > 0))
            throw std::domain_error(
                "pressure_gradient: density must be positive");
    const Barotropic eos(gamma);
    FaceField grad(g);
    for (int a = 0; a < g.dim(); ++a) {
        const double coef = g.face_measure(a) / g.dual_measure(a);
        for (int f : g.internal_faces(a)) {
            const auto kl = g.face_cells(a, f);
            grad.at(a, f) = coef * eos.pressure_diff(rho[kl[0]], rho[kl[1]]);
        }
    }
    return grad;
}

FaceField dual_density(const CellField& rho) {
    const MacGrid& g = rho.grid();
    FaceField rd(g);
    for (int a = 0; a < g.dim(); ++a) {
        const double half = g.half_dual_measure(a);
        const double inv = 1.0 / g.dual_measure(a);
        for (int f : g.internal_faces(a)) {
            const auto kl = g.face_cells(a, f);
            rd.at(a, f) = inv * (half * rho[kl[0]] + half * rho[kl[1]]);
        }
    }
    return rd;
}

DualFluxSet dual_mass_fluxes(const MassFluxSet& F) {
    const MacGrid& g = *F.grid;
    DualFluxSet Fd(g);
    for (int a = 0; a < g.dim(); ++a) {
        size_t idx = 0;
        for (int f : g.internal_faces(a)) {
            for (const DualFaceStencil& s : g.dual_faces(a, f)) {
                double v = 0;
                if (!s.boundary)
                    v = s.coeff[0] * F.flux[s.flux_axis][s.face[0]] +
                        s.coeff[1] * F.flux[s.flux_axis][s.face[1]];
                Fd.flux[a][idx++] = v;
            }
        }
    }
    return Fd;
}

FaceField velocity_convection(const DualFluxSet& Fd, const FaceField& v) {
    const MacGrid& g = *Fd.grid;
    FaceField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_vol = 1.0 / g.dual_measure(a);
        size_t idx = 0;
        for (int f : g.internal_faces(a)) {
            const double vf = v.at(a, f);
            double s = 0;
            for (const DualFaceStencil& st : g.dual_faces(a, f)) {
                const double flux = Fd.flux[a][idx++];
                if (st.boundary) continue;
                const double vn = v.at(a, st.neighbor_face);
                s += flux * 0.5 * (vf + vn);
            }
            out.at(a, f) = inv_vol * s;
        }
    }
    return out;
}

FaceField diffusion(const FaceField& u, double mu, double lambda) {
    if (!(mu > 0) || !(mu + lambda > 0))
        throw std::invalid_argument(
            "diffusion: need mu > 0 and mu + lambda > 0");
    const MacGrid& g = u.grid();
    const CellField div = velocity_divergence(u);
    FaceField out(g);
    for (int i = 0; i < g.dim(); ++i) {
        const double coef_gd = g.face_measure(i) / g.dual_measure(i);
        for (int f : g.internal_faces(i)) {
            const auto c = g.face_coords(i, f);
            const double uf = u.at(i, f);
            double lap = 0;
            // along the component axis the neighbors are faces, with the
            // stored boundary zeros closing the stencil
            {
                const double h2 = g.spacing(i) * g.spacing(i);
                auto cm = c, cp = c;
                cm[i] = c[i] - 1;
                cp[i] = c[i] + 1;
                const double um = u.at(i, g.face_index(i, cm));
                const double up = u.at(i, g.face_index(i, cp));
                lap += (up - 2 * uf + um) / h2;
            }
            // transverse directions use the mirror value -u at walls so the
            // interpolated wall velocity vanishes
            for (int j = 0; j < g.dim(); ++j) {
                if (j == i) continue;
                const double h2 = g.spacing(j) * g.spacing(j);
                double um, up;
                if (c[j] == 0) {
                    um = -uf;
                } else {
                    auto cm = c;
                    cm[j] = c[j] - 1;
                    um = u.at(i, g.face_index(i, cm));
                }
                if (c[j] + 1 == g.cells_per_axis(j)) {
                    up = -uf;
                } else {
                    auto cp = c;
                    cp[j] = c[j] + 1;
                    up = u.at(i, g.face_index(i, cp));
                }
                lap += (up - 2 * uf + um) / h2;
            }
            const auto kl = g.face_cells(i, f);
            const double grad_div = coef_gd * (div[kl[1]] - div[kl[0]]);
            out.at(i, f) = mu * lap + (mu + lambda) * grad_div;
        }
    }
    return out;
}

}  // namespace lowmac
