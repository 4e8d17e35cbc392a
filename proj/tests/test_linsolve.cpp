#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "lowmac/linsolve.hpp"

using namespace lowmac;

TEST_CASE("identity system returns the right-hand side") {
    SparseMatrix A(3);
    for (int i = 0; i < 3; ++i) A.add(i, i, 1.0);
    const std::vector<double> b{1.0, -2.0, 0.5};
    const std::vector<double> x = solve(A, b);
    for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-15));
}

TEST_CASE("1d Poisson with three nodes") {
    // -u'' = 1, h = 1, Dirichlet ends: tridiag(-1, 2, -1) x = (1,1,1)
    SparseMatrix A(3);
    A.set_spd(true);
    A.add(0, 0, 2.0);
    A.add(1, 1, 2.0);
    A.add(2, 2, 2.0);
    A.add(0, 1, -1.0);
    A.add(1, 0, -1.0);
    A.add(1, 2, -1.0);
    A.add(2, 1, -1.0);
    const std::vector<double> x = solve(A, {1.0, 1.0, 1.0});
    CHECK(x[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x[2] == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("random SPD 50x50 against a dense factorization") {
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> uni(-1, 1);
    const int n = 50;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = uni(rng);
    const Eigen::MatrixXd S = M.transpose() * M + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = uni(rng);

    SparseMatrix A(n);
    A.set_spd(true);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A.add(i, j, S(i, j));
    const std::vector<double> x = solve(A, {b.data(), b.data() + n}, 1e-12);
    const Eigen::VectorXd ref = S.ldlt().solve(b);
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(x[i] - ref(i)) <= 1e-10 * std::max(1.0, std::abs(ref(i))));
}

TEST_CASE("nonsymmetric system against a dense LU") {
    std::mt19937 rng(67);
    std::uniform_real_distribution<double> uni(-1, 1);
    const int n = 24;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            M(i, j) = uni(rng) + (i == j ? 5.0 : 0.0);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = uni(rng);
    SparseMatrix A(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A.add(i, j, M(i, j));
    double resid = -1;
    const std::vector<double> x = solve(A, {b.data(), b.data() + n}, 1e-12,
                                        10000, &resid);
    CHECK(resid >= 0);
    CHECK(resid <= 1e-12 * std::max(1.0, b.norm()));
    const Eigen::VectorXd ref = M.partialPivLu().solve(b);
    for (int i = 0; i < n; ++i)
        CHECK(x[i] == doctest::Approx(ref(i)).epsilon(1e-11));
}

TEST_CASE("residual contract is verified and failures carry history") {
    SparseMatrix A(2);  // singular
    A.add(0, 0, 1.0);
    A.add(0, 1, 1.0);
    A.add(1, 0, 1.0);
    A.add(1, 1, 1.0);
    CHECK_THROWS_AS(solve(A, {1.0, 0.0}), SolveError);
}

TEST_CASE("dimension mismatch rejected") {
    SparseMatrix A(3);
    for (int i = 0; i < 3; ++i) A.add(i, i, 1.0);
    CHECK_THROWS_AS(solve(A, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("smallest singular value") {
    {
        std::vector<double> eye(9, 0.0);
        eye[0] = eye[4] = eye[8] = 1.0;
        CHECK(smallest_singular_value(eye, 3, 3) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        std::vector<double> d(9, 0.0);
        d[0] = 1.0;
        d[4] = 2.0;
        d[8] = 3.0;
        CHECK(smallest_singular_value(d, 3, 3) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        // oracle: power iteration on (A^T A)^{-1}
        std::mt19937 rng(71);
        std::uniform_real_distribution<double> uni(-1, 1);
        const int n = 10;
        Eigen::MatrixXd M(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) = uni(rng);
        const Eigen::MatrixXd AtA = M.transpose() * M;
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(AtA);
        Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
        double lam = 0;
        for (int it = 0; it < 500; ++it) {
            v = lu.solve(v);
            lam = v.norm();
            v /= lam;
        }
        const double sigma_min_oracle = 1.0 / std::sqrt(lam);
        std::vector<double> data(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) data[i * n + j] = M(i, j);
        CHECK(smallest_singular_value(data, n, n) ==
              doctest::Approx(sigma_min_oracle).epsilon(1e-8));
    }
}

TEST_CASE("spd flag is audited against the assembled matrix") {
    SparseMatrix A(3);
    A.set_spd(true);
    A.add(0, 0, 2.0);
    A.add(1, 1, 2.0);
    A.add(2, 2, 2.0);
    A.add(0, 1, -1.0);  // missing the mirror entry
    CHECK_THROWS_AS(solve(A, {1.0, 1.0, 1.0}), std::invalid_argument);
}
