#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lowmac/fields.hpp"
#include "lowmac/grid.hpp"

using namespace lowmac;

namespace {

MacGrid make2d(int nx, int ny, double lx = 1.0, double ly = 1.0) {
    const int n[2] = {nx, ny};
    const double l[2] = {lx, ly};
    return MacGrid(std::span<const int>(n, 2), std::span<const double>(l, 2));
}

CellField random_cells(const MacGrid& g, std::mt19937& rng, double lo = -1,
                       double hi = 1) {
    std::uniform_real_distribution<double> d(lo, hi);
    CellField f(g);
    for (int k = 0; k < g.cell_count(); ++k) f[k] = d(rng);
    return f;
}

FaceField random_velocity(const MacGrid& g, std::mt19937& rng) {
    std::uniform_real_distribution<double> d(-1, 1);
    FaceField u(g);
    for (int a = 0; a < g.dim(); ++a)
        for (int f : g.internal_faces(a)) u.at(a, f) = d(rng);
    return u;
}

/// Independent oracle: broken H1 norm assembled pair by pair from scratch.
double h1_oracle(const FaceField& u) {
    const MacGrid& g = u.grid();
    const double vol = g.cell_measure();
    double s = 0;
    for (int i = 0; i < g.dim(); ++i) {
        for (int f = 0; f < g.face_count(i); ++f) {
            const auto c = g.face_coords(i, f);
            // along the component axis
            if (c[i] < g.cells_per_axis(i)) {
                auto cn = c;
                cn[i]++;
                const double dq =
                    (u.at(i, g.face_index(i, cn)) - u.at(i, f)) / g.spacing(i);
                s += vol * dq * dq;
            }
            // transverse
            for (int j = 0; j < g.dim(); ++j) {
                if (j == i) continue;
                const double h = g.spacing(j);
                if (c[j] + 1 < g.cells_per_axis(j)) {
                    auto cn = c;
                    cn[j]++;
                    const double dq =
                        (u.at(i, g.face_index(i, cn)) - u.at(i, f)) / h;
                    s += vol * dq * dq;
                } else {
                    const double dq = (0.0 - u.at(i, f)) / (h / 2);
                    s += 0.5 * vol * dq * dq;
                }
                if (c[j] == 0) {
                    const double dq = (u.at(i, f) - 0.0) / (h / 2);
                    s += 0.5 * vol * dq * dq;
                }
            }
        }
    }
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("cell L2 norm") {
    const MacGrid g = make2d(4, 4);
    CellField f(g);
    CHECK(norm_l2_cells(f) == 0.0);
    for (int k = 0; k < g.cell_count(); ++k) f[k] = 2.0;
    CHECK(norm_l2_cells(f) == doctest::Approx(2.0).epsilon(1e-15));

    std::mt19937 rng(7);
    const CellField r = random_cells(g, rng);
    double oracle = 0;
    for (int k = 0; k < g.cell_count(); ++k)
        oracle += g.cell_measure() * r[k] * r[k];
    oracle = std::sqrt(oracle);
    CHECK(norm_l2_cells(r) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("broken H1 norm") {
    const MacGrid g = make2d(4, 4);
    FaceField u(g);
    CHECK(norm_broken_h1(u) == 0.0);

    // single interior value against the hand-assembled quotients
    u.at(0, g.face_index(0, {2, 1, 0})) = 1.0;
    CHECK(norm_broken_h1(u) == doctest::Approx(h1_oracle(u)).epsilon(1e-14));

    std::mt19937 rng(11);
    const FaceField v = random_velocity(g, rng);
    CHECK(norm_broken_h1(v) == doctest::Approx(h1_oracle(v)).epsilon(1e-14));

    // homogeneity with alpha = -3
    FaceField w(g);
    for (int a = 0; a < 2; ++a)
        for (int f : g.internal_faces(a)) w.at(a, f) = -3.0 * v.at(a, f);
    CHECK(norm_broken_h1(w) ==
          doctest::Approx(3.0 * norm_broken_h1(v)).epsilon(1e-13));
}

TEST_CASE("weighted kinetic energy") {
    const MacGrid g = make2d(4, 4);
    FaceField rho_d(g), u(g);
    for (int a = 0; a < 2; ++a)
        for (int f : g.internal_faces(a)) rho_d.at(a, f) = 1.0;
    CHECK(weighted_kinetic_energy(rho_d, u) == 0.0);

    double dual_total = 0;
    for (int a = 0; a < 2; ++a)
        for (int f : g.internal_faces(a)) {
            u.at(a, f) = 1.0;
            dual_total += g.dual_measure(a);
        }
    CHECK(weighted_kinetic_energy(rho_d, u) ==
          doctest::Approx(0.5 * dual_total).epsilon(1e-15));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> pos(0.5, 2.0);
    std::uniform_real_distribution<double> uni(-1, 1);
    FaceField r2(g), u2(g);
    double oracle = 0;
    for (int a = 0; a < 2; ++a)
        for (int f : g.internal_faces(a)) {
            r2.at(a, f) = pos(rng);
            u2.at(a, f) = uni(rng);
            oracle += 0.5 * g.dual_measure(a) * r2.at(a, f) * u2.at(a, f) *
                      u2.at(a, f);
        }
    CHECK(weighted_kinetic_energy(r2, u2) ==
          doctest::Approx(oracle).epsilon(1e-14));

    FaceField bad = r2;
    bad.at(0, g.internal_faces(0)[0]) = -1.0;
    CHECK_THROWS_AS(weighted_kinetic_energy(bad, u2), std::domain_error);
}

TEST_CASE("Lq and Linf norms") {
    const MacGrid g = make2d(4, 4, 2.0, 1.0);  // |Omega| = 2
    CellField f(g, 3.0);
    for (double q : {1.0, 1.4, 2.0, 3.0})
        CHECK(norm_lq_cells(f, q) ==
              doctest::Approx(3.0 * std::pow(2.0, 1.0 / q)).epsilon(1e-14));
    CHECK(norm_linf_cells(f) == 3.0);
    CHECK_THROWS_AS(norm_lq_cells(f, 0.5), std::invalid_argument);

    std::mt19937 rng(19);
    const CellField r = random_cells(g, rng);
    CHECK(norm_lq_cells(r, 2.0) ==
          doctest::Approx(norm_l2_cells(r)).epsilon(1e-14));
    double oracle = 0;
    for (int k = 0; k < g.cell_count(); ++k)
        oracle += g.cell_measure() * std::pow(std::abs(r[k]), 1.4);
    CHECK(norm_lq_cells(r, 1.4) ==
          doctest::Approx(std::pow(oracle, 1.0 / 1.4)).epsilon(1e-14));
}

TEST_CASE("norm properties: triangle inequality and split additivity") {
    const MacGrid g = make2d(8, 8);
    std::mt19937 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const CellField a = random_cells(g, rng);
        const CellField b = random_cells(g, rng);
        CellField sum(g);
        for (int k = 0; k < g.cell_count(); ++k) sum[k] = a[k] + b[k];
        CHECK(norm_l2_cells(sum) <=
              norm_l2_cells(a) + norm_l2_cells(b) + 1e-13);
        for (double q : {1.0, 2.5})
            CHECK(norm_lq_cells(sum, q) <=
                  norm_lq_cells(a, q) + norm_lq_cells(b, q) + 1e-13);
    }
    // absolute homogeneity with alpha = -2.5
    {
        const CellField a = random_cells(g, rng);
        CellField sa(g);
        for (int k = 0; k < g.cell_count(); ++k) sa[k] = -2.5 * a[k];
        CHECK(norm_l2_cells(sa) ==
              doctest::Approx(2.5 * norm_l2_cells(a)).epsilon(1e-13));
        CHECK(norm_lq_cells(sa, 1.4) ==
              doctest::Approx(2.5 * norm_lq_cells(a, 1.4)).epsilon(1e-13));
        CHECK(norm_linf_cells(sa) ==
              doctest::Approx(2.5 * norm_linf_cells(a)).epsilon(1e-15));
    }
    // disjoint supports: squared L2 norms add
    CellField left(g), right(g), both(g);
    std::uniform_real_distribution<double> uni(-1, 1);
    for (int k = 0; k < g.cell_count(); ++k) {
        const double v = uni(rng);
        if (g.cell_coords(k)[0] < 4)
            left[k] = v;
        else
            right[k] = v;
        both[k] = v;
    }
    const double lhs = norm_l2_cells(both) * norm_l2_cells(both);
    const double rhs = norm_l2_cells(left) * norm_l2_cells(left) +
                       norm_l2_cells(right) * norm_l2_cells(right);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("external faces stay zero") {
    const MacGrid g = make2d(3, 3);
    FaceField u(g);
    CHECK(u.external_faces_zero());
    u.at(0, g.face_index(0, {0, 1, 0})) = 0.5;
    CHECK(!u.external_faces_zero());
    u.clear_external();
    CHECK(u.external_faces_zero());
}

TEST_CASE("csv snapshots carry 17 significant digits") {
    const MacGrid g = make2d(2, 2);
    CellField f(g);
    f[0] = 1.0 / 3.0;
    f[3] = -2.718281828459045;
    std::ostringstream os;
    write_csv(os, f, "rho");
    std::istringstream in(os.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "cell,x,y,z,rho");
    std::string line;
    std::getline(in, line);
    const auto last = line.rfind(',');
    CHECK(std::stod(line.substr(last + 1)) == f[0]);

    FaceField u(g);
    u.at(1, g.face_index(1, {0, 1, 0})) = 0.1;
    std::ostringstream os2;
    write_csv(os2, u, "vel");
    std::istringstream in2(os2.str());
    std::getline(in2, header);
    CHECK(header == "axis,face,x,y,z,vel");
    int rows = 0;
    while (std::getline(in2, line)) ++rows;
    CHECK(rows == g.face_count(0) + g.face_count(1));
}
