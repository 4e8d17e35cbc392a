#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "lowmac/incompressible.hpp"
#include "lowmac/operators.hpp"

using namespace lowmac;

namespace {

MacGrid make2d(int nx, int ny) {
    const int n[2] = {nx, ny};
    const double l[2] = {1.0, 1.0};
    return MacGrid(std::span<const int>(n, 2), std::span<const double>(l, 2));
}

IncParams params() {
    IncParams p;
    p.mu = 0.3;
    p.lambda = 0.1;
    p.dt = 0.01;
    return p;
}

FaceField stream_field(const MacGrid& g, double amplitude) {
    constexpr double pi = std::numbers::pi;
    auto psi = [&](double x, double y) {
        const double sx = std::sin(pi * x / g.length(0));
        const double sy = std::sin(pi * y / g.length(1));
        return amplitude * sx * sx * sy * sy;
    };
    FaceField u(g);
    for (int f : g.internal_faces(0)) {
        const auto c = g.face_coords(0, f);
        const double x = c[0] * g.spacing(0);
        u.at(0, f) = (psi(x, (c[1] + 1) * g.spacing(1)) -
                      psi(x, c[1] * g.spacing(1))) /
                     g.spacing(1);
    }
    for (int f : g.internal_faces(1)) {
        const auto c = g.face_coords(1, f);
        const double y = c[1] * g.spacing(1);
        u.at(1, f) = -(psi((c[0] + 1) * g.spacing(0), y) -
                       psi(c[0] * g.spacing(0), y)) /
                     g.spacing(0);
    }
    return u;
}

}  // namespace

TEST_CASE("zero state is a fixed point") {
    const MacGrid g = make2d(4, 4);
    IncState s(g, params());
    const FaceField ut = inc_prediction_step(s);
    for (int a = 0; a < 2; ++a)
        for (int f = 0; f < g.face_count(a); ++f) CHECK(ut.at(a, f) == 0.0);
    const IncState next = inc_advance(s);
    for (int a = 0; a < 2; ++a)
        for (int f = 0; f < g.face_count(a); ++f)
            CHECK(next.u.at(a, f) == 0.0);
    for (int k = 0; k < g.cell_count(); ++k)
        CHECK(std::abs(next.dp[k]) <= 1e-13);
}

TEST_CASE("prediction matches a dense solve on 2x2") {
    const MacGrid g = make2d(2, 2);
    const IncParams prm = params();
    IncState s(g, prm);
    const int fid[4] = {g.face_index(0, {1, 0, 0}), g.face_index(0, {1, 1, 0}),
                        g.face_index(1, {0, 1, 0}), g.face_index(1, {1, 1, 0})};
    const int fax[4] = {0, 0, 1, 1};
    const double u_n[4] = {0.3, -0.2, 0.1, -0.4};
    for (int r = 0; r < 4; ++r) s.u.at(fax[r], fid[r]) = u_n[r];
    const double dpn[4] = {0.2, -0.1, 0.05, -0.15};
    for (int k = 0; k < 4; ++k) s.dp[k] = dpn[k];

    const FaceField ut = inc_prediction_step(s);

    // independent dense assembly (see the compressible analogue)
    const double h = 0.5, area = 0.5, dvol = 0.25;
    const int fc[4][2] = {{0, 1}, {2, 3}, {0, 2}, {1, 3}};
    double fst[4];
    for (int r = 0; r < 4; ++r) fst[r] = area * u_n[r];  // rho = 1
    struct Dual {
        double flux;
        int nb;
    };
    const std::vector<std::vector<Dual>> duals = {
        {{-0.5 * fst[0], -1}, {0.5 * fst[0], -1}, {0.5 * (fst[2] + fst[3]), 1}},
        {{-0.5 * fst[1], -1}, {0.5 * fst[1], -1}, {-0.5 * (fst[2] + fst[3]), 0}},
        {{-0.5 * fst[2], -1}, {0.5 * fst[2], -1}, {0.5 * (fst[0] + fst[1]), 3}},
        {{-0.5 * fst[3], -1}, {0.5 * fst[3], -1}, {-0.5 * (fst[0] + fst[1]), 2}},
    };
    const double divc[4][4] = {{2, 0, 2, 0},
                               {-2, 0, 0, 2},
                               {0, 2, -2, 0},
                               {0, -2, 0, -2}};
    const int partner[4] = {1, 0, 3, 2};
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    Eigen::Vector4d rhs;
    for (int r = 0; r < 4; ++r) {
        M(r, r) += 1.0 / prm.dt;
        for (const Dual& d : duals[r]) {
            M(r, r) += d.flux / (2 * dvol);
            if (d.nb >= 0) M(r, d.nb) += d.flux / (2 * dvol);
        }
        M(r, r) += prm.mu * 2 / (h * h);
        M(r, r) += prm.mu * 3 / (h * h);
        M(r, partner[r]) += -prm.mu / (h * h);
        const int K = fc[r][0], L = fc[r][1];
        for (int c = 0; c < 4; ++c)
            M(r, c) += -(prm.mu + prm.lambda) * (area / dvol) *
                       (divc[L][c] - divc[K][c]);
        rhs(r) = u_n[r] / prm.dt - (area / dvol) * (dpn[L] - dpn[K]);
    }
    const Eigen::Vector4d x = M.partialPivLu().solve(rhs);
    for (int r = 0; r < 4; ++r)
        CHECK(ut.at(fax[r], fid[r]) == doctest::Approx(x(r)).epsilon(1e-12));
}

TEST_CASE("projection leaves a solenoidal prediction untouched") {
    const MacGrid g = make2d(8, 8);
    IncState s(g, params());
    const FaceField ut = stream_field(g, 0.4);
    const IncCorrection corr = inc_correction_step(s, ut);
    for (int k = 0; k < g.cell_count(); ++k)
        CHECK(std::abs(corr.dp[k]) <= 1e-11);
    for (int a = 0; a < 2; ++a)
        for (int f : g.internal_faces(a))
            CHECK(corr.u.at(a, f) ==
                  doctest::Approx(ut.at(a, f)).epsilon(1e-11));
}

TEST_CASE("projection output is discretely divergence free") {
    const MacGrid g = make2d(8, 8);
    IncState s(g, params());
    for (int k = 0; k < g.cell_count(); ++k)
        s.dp[k] = 0.05 * std::sin(2.0 * k);
    FaceField ut = stream_field(g, 0.4);
    // pollute with a non-solenoidal component
    for (int f : g.internal_faces(0)) {
        const auto x = g.face_center(0, f);
        ut.at(0, f) += 0.2 * std::sin(std::numbers::pi * x[0]) *
                       std::sin(std::numbers::pi * x[1]);
    }
    const IncCorrection corr = inc_correction_step(s, ut);
    const CellField div = velocity_divergence(corr.u);
    double umax = 0;
    for (int a = 0; a < 2; ++a)
        for (int f : g.internal_faces(a))
            umax = std::max(umax, std::abs(ut.at(a, f)));
    for (int k = 0; k < g.cell_count(); ++k)
        CHECK(std::abs(div[k]) <= 1e-11 * std::max(1.0, umax));
    // exact zero mean after renormalization
    double mean = 0;
    for (int k = 0; k < g.cell_count(); ++k)
        mean += g.cell_measure() * corr.dp[k];
    CHECK(std::abs(mean) <= 1e-13);
}

TEST_CASE("projection matches a dense solve on 4x4") {
    const MacGrid g = make2d(4, 4);
    const IncParams prm = params();
    IncState s(g, prm);
    for (int k = 0; k < g.cell_count(); ++k)
        s.dp[k] = 0.1 * std::cos(1.7 * k);
    double mean0 = 0;
    for (int k = 0; k < g.cell_count(); ++k)
        mean0 += g.cell_measure() * s.dp[k];
    mean0 /= g.domain_measure();
    for (int k = 0; k < g.cell_count(); ++k) s.dp[k] -= mean0;
    FaceField ut(g);
    for (int a = 0; a < 2; ++a)
        for (int f : g.internal_faces(a))
            ut.at(a, f) = std::sin(0.8 * f + a);

    const IncCorrection corr = inc_correction_step(s, ut);

    // dense oracle with the Lagrange multiplier row
    const int nc = g.cell_count();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nc + 1, nc + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nc + 1);
    const double vol = g.cell_measure();
    for (int a = 0; a < 2; ++a) {
        const double w =
            g.face_measure(a) * g.face_measure(a) / g.dual_measure(a);
        for (int f : g.internal_faces(a)) {
            const auto kl = g.face_cells(a, f);
            A(kl[0], kl[0]) += prm.dt * w;
            A(kl[1], kl[1]) += prm.dt * w;
            A(kl[0], kl[1]) -= prm.dt * w;
            A(kl[1], kl[0]) -= prm.dt * w;
        }
    }
    const CellField divu = velocity_divergence(ut);
    const CellField lapn = velocity_divergence(gradient_of_cells(s.dp));
    for (int k = 0; k < nc; ++k) {
        A(k, nc) = vol;
        A(nc, k) = vol;
        b(k) = -vol * divu[k] - prm.dt * vol * lapn[k];
    }
    const Eigen::VectorXd x = A.partialPivLu().solve(b);
    double mean = 0;
    for (int k = 0; k < nc; ++k) mean += vol * x(k);
    mean /= g.domain_measure();
    for (int k = 0; k < nc; ++k)
        CHECK(corr.dp[k] == doctest::Approx(x(k) - mean).epsilon(1e-10));
}

TEST_CASE("poisson matrix equals the divergence-gradient composition") {
    const MacGrid g = make2d(4, 4);
    const SparseMatrix P = assemble_cell_poisson(g);
    const int nc = g.cell_count();
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(nc, nc);
    for (const auto& t : P.triplets()) dense(t.row, t.col) += t.value;
    CellField e(g);
    for (int col = 0; col < nc; ++col) {
        e[col] = 1.0;
        const CellField lap = velocity_divergence(gradient_of_cells(e));
        for (int row = 0; row < nc; ++row)
            CHECK(dense(row, col) == -g.cell_measure() * lap[row]);
        e[col] = 0.0;
    }
}

TEST_CASE("kinetic energy decays without forcing") {
    const MacGrid g = make2d(8, 8);
    IncState s(g, params());
    s.u = stream_field(g, 0.5);
    const IncTrajectory tr = inc_run(s, 10);
    double prev = 1e300;
    for (const auto& r : tr.records) {
        CHECK(r.kinetic <= prev + 1e-12);
        CHECK(r.div_linf <= 1e-11);
        CHECK(std::abs(r.dp_mean) <= 1e-13);
        prev = r.kinetic;
    }
    CHECK(tr.final.n == 10);
}

TEST_CASE("advance is deterministic") {
    const MacGrid g = make2d(6, 6);
    IncState s(g, params());
    s.u = stream_field(g, 0.3);
    const IncState a = inc_advance(s);
    const IncState b = inc_advance(s);
    for (int ax = 0; ax < 2; ++ax)
        for (int f : g.internal_faces(ax))
            CHECK(a.u.at(ax, f) == b.u.at(ax, f));
    for (int k = 0; k < g.cell_count(); ++k) CHECK(a.dp[k] == b.dp[k]);
}

#include "lowmac/barotropic.hpp"
#include "lowmac/scheme.hpp"

TEST_CASE("prediction is the vanishing-Mach limit of the compressible one") {
    const MacGrid g = make2d(8, 8);
    const IncParams prm = params();
    IncState s(g, prm);
    s.u = stream_field(g, 0.4);
    for (int k = 0; k < g.cell_count(); ++k)
        s.dp[k] = 0.1 * std::sin(2 * std::numbers::pi *
                                 g.cell_center(k)[0]) *
                  std::sin(2 * std::numbers::pi * g.cell_center(k)[1]);
    const FaceField ut_inc = inc_prediction_step(s);

    // compressible state carrying the same data: p = 1 + ma^2 dp, equal
    // density history, so the scaled gradient is exactly grad dp * ma^2
    const double gamma = 1.4;
    const Barotropic eos(gamma);
    auto gap_at = [&](double ma) {
        SchemeParams cprm;
        cprm.gamma = gamma;
        cprm.mu = prm.mu;
        cprm.lambda = prm.lambda;
        cprm.dt = prm.dt;
        cprm.mach = ma;
        SchemeState cs(g, cprm);
        cs.n = 1;
        for (int k = 0; k < g.cell_count(); ++k) {
            const double p = 1.0 + ma * ma * s.dp[k];
            cs.rho[k] = std::exp(std::log(p) / gamma);
            cs.rho_prev[k] = cs.rho[k];
            cs.p[k] = eos.pressure(cs.rho[k]);
        }
        cs.u = s.u;
        cs.grad_p = pressure_gradient(cs.rho, gamma);
        const PredictionResult pred = prediction_step(cs);
        double gap = 0, ref = 0;
        for (int a = 0; a < 2; ++a)
            for (int f : g.internal_faces(a)) {
                gap = std::max(gap, std::abs(pred.u_tilde.at(a, f) -
                                             ut_inc.at(a, f)));
                ref = std::max(ref, std::abs(ut_inc.at(a, f)));
            }
        return gap / ref;
    };
    const double g2 = gap_at(1e-2);
    const double g3 = gap_at(1e-3);
    const double g4 = gap_at(1e-4);
    CHECK(g3 <= 1e-5);
    CHECK(g4 <= 1e-7);
    // quadratic decay of the gap in the Mach number; the finest level is
    // skipped since prescribing p = 1 + ma^2 dp through a stored density
    // rounds at eps/ma^2 and floors the gap there
    CHECK(g3 <= 0.03 * g2);
}
