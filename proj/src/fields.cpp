#include "lowmac/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace lowmac {

double CellField::min() const {
    return *std::min_element(v_.begin(), v_.end());
}

double CellField::max() const {
    return *std::max_element(v_.begin(), v_.end());
}

bool FaceField::external_faces_zero() const {
    const MacGrid& g = *grid_;
    for (int a = 0; a < g.dim(); ++a)
        for (int f = 0; f < g.face_count(a); ++f)
            if (g.face_is_external(a, f) && at(a, f) != 0.0) return false;
    return true;
}

void FaceField::clear_external() {
    const MacGrid& g = *grid_;
    for (int a = 0; a < g.dim(); ++a)
        for (int f = 0; f < g.face_count(a); ++f)
            if (g.face_is_external(a, f)) at(a, f) = 0.0;
}

double norm_l2_cells(const CellField& f) {
    const double vol = f.grid().cell_measure();
    double s = 0;
    for (int k = 0; k < f.size(); ++k) s += vol * f[k] * f[k];
    return std::sqrt(s);
}

double norm_lq_cells(const CellField& f, double q) {
    if (!(q >= 1))
        throw std::invalid_argument("norm_lq_cells: q must be >= 1");
    const double vol = f.grid().cell_measure();
    double s = 0;
    for (int k = 0; k < f.size(); ++k) s += vol * std::pow(std::abs(f[k]), q);
    return std::pow(s, 1.0 / q);
}

double norm_linf_cells(const CellField& f) {
    double m = 0;
    for (int k = 0; k < f.size(); ++k) m = std::max(m, std::abs(f[k]));
    return m;
}

double norm_broken_h1(const FaceField& u) {
    const MacGrid& g = u.grid();
    const double vol = g.cell_measure();
    double s = 0;
    for (int i = 0; i < g.dim(); ++i) {
        // direction i (normal): adjacent values along the component axis,
        // external zeros included as stored
        {
            const double h = g.spacing(i);
            for (int f = 0; f < g.face_count(i); ++f) {
                const auto c = g.face_coords(i, f);
                if (c[i] == g.cells_per_axis(i)) continue;
                auto cn = c;
                cn[i] = c[i] + 1;
                const double q = (u.at(i, g.face_index(i, cn)) - u.at(i, f)) / h;
                s += vol * q * q;
            }
        }
        // transverse directions: interior quotients over h_j, wall quotients
        // over h_j/2 with half weight
        for (int j = 0; j < g.dim(); ++j) {
            if (j == i) continue;
            const double h = g.spacing(j);
            for (int f = 0; f < g.face_count(i); ++f) {
                const auto c = g.face_coords(i, f);
                const double uf = u.at(i, f);
                if (c[j] == 0) {
                    const double q = uf / (h / 2);
                    s += 0.5 * vol * q * q;
                }
                if (c[j] + 1 < g.cells_per_axis(j)) {
                    auto cn = c;
                    cn[j] = c[j] + 1;
                    const double q = (u.at(i, g.face_index(i, cn)) - uf) / h;
                    s += vol * q * q;
                } else {
                    const double q = uf / (h / 2);
                    s += 0.5 * vol * q * q;
                }
            }
        }
    }
    return std::sqrt(s);
}

double weighted_kinetic_energy(const FaceField& rho_dual, const FaceField& u) {
    const MacGrid& g = u.grid();
    double s = 0;
    for (int i = 0; i < g.dim(); ++i) {
        const double vol = g.dual_measure(i);
        for (int f : g.internal_faces(i)) {
            const double r = rho_dual.at(i, f);
            if (!(r > 0))
                throw std::domain_error(
                    "weighted_kinetic_energy: nonpositive dual density");
            const double v = u.at(i, f);
            s += vol * r * v * v;
        }
    }
    return 0.5 * s;
}

double norm_l2_faces(const FaceField& u) {
    const MacGrid& g = u.grid();
    double s = 0;
    for (int i = 0; i < g.dim(); ++i) {
        const double vol = g.dual_measure(i);
        for (int f : g.internal_faces(i)) {
            const double v = u.at(i, f);
            s += vol * v * v;
        }
    }
    return std::sqrt(s);
}

namespace {

void print_g17(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

}  // namespace

void write_csv(std::ostream& os, const CellField& f,
               const std::string& value_name) {
    const MacGrid& g = f.grid();
    os << "cell,x,y,z," << value_name << "\n";
    for (int k = 0; k < f.size(); ++k) {
        const auto x = g.cell_center(k);
        os << k << ',';
        print_g17(os, x[0]);
        os << ',';
        print_g17(os, x[1]);
        os << ',';
        print_g17(os, x[2]);
        os << ',';
        print_g17(os, f[k]);
        os << '\n';
    }
}

void write_csv(std::ostream& os, const FaceField& f,
               const std::string& value_name) {
    const MacGrid& g = f.grid();
    os << "axis,face,x,y,z," << value_name << "\n";
    for (int a = 0; a < g.dim(); ++a)
        for (int fc = 0; fc < g.face_count(a); ++fc) {
            const auto x = g.face_center(a, fc);
            os << a << ',' << fc << ',';
            print_g17(os, x[0]);
            os << ',';
            print_g17(os, x[1]);
            os << ',';
            print_g17(os, x[2]);
            os << ',';
            print_g17(os, f.at(a, fc));
            os << '\n';
        }
}

}  // namespace lowmac
