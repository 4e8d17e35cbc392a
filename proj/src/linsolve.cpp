#include "lowmac/linsolve.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>

namespace lowmac {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat to_eigen(const SparseMatrix& A) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(A.triplets().size());
    for (const auto& e : A.triplets()) t.emplace_back(e.row, e.col, e.value);
    SpMat m(A.size(), A.size());
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

double residual_norm(const SpMat& m, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& b) {
    return (m * x - b).norm();
}

}  // namespace

std::vector<double> solve(const SparseMatrix& A, const std::vector<double>& b,
                          double tol, int max_iter,
                          double* achieved_residual) {
    const int n = A.size();
    if (static_cast<int>(b.size()) != n)
        throw std::invalid_argument("solve: dimension mismatch");
    const SpMat m = to_eigen(A);
    if (A.spd() && n <= 200) {
        // audit the symmetry claim at test sizes
        const SpMat diff = SpMat(m.transpose()) - m;
        double worst = 0, scale = 0;
        for (int k = 0; k < diff.outerSize(); ++k)
            for (SpMat::InnerIterator it(diff, k); it; ++it)
                worst = std::max(worst, std::abs(it.value()));
        for (int k = 0; k < m.outerSize(); ++k)
            for (SpMat::InnerIterator it(m, k); it; ++it)
                scale = std::max(scale, std::abs(it.value()));
        if (worst > 1e-12 * std::max(1.0, scale))
            throw std::invalid_argument(
                "solve: matrix flagged symmetric is not");
    }
    const Eigen::VectorXd rhs =
        Eigen::Map<const Eigen::VectorXd>(b.data(), n);
    const double target = tol * std::max(1.0, rhs.norm());
    std::vector<double> history;

    Eigen::VectorXd x;
    bool have_x = false;

    if (n >= 20000) {
        if (A.spd()) {
            Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
            cg.setTolerance(tol);
            cg.setMaxIterations(max_iter);
            cg.compute(m);
            x = cg.solveWithGuess(rhs, Eigen::VectorXd::Zero(n));
            have_x = (cg.info() == Eigen::Success);
        } else {
            Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> bicg;
            bicg.setTolerance(tol);
            bicg.setMaxIterations(max_iter);
            bicg.compute(m);
            x = bicg.solveWithGuess(rhs, Eigen::VectorXd::Zero(n));
            have_x = (bicg.info() == Eigen::Success);
        }
        if (have_x) {
            const double r = residual_norm(m, x, rhs);
            history.push_back(r);
            if (r <= target) {
                if (achieved_residual) *achieved_residual = r;
                return {x.data(), x.data() + n};
            }
        }
    }

    // direct sparse factorization (primary path under 20k unknowns,
    // fallback above)
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(m);
    lu.factorize(m);
    if (lu.info() != Eigen::Success)
        throw SolveError("solve: sparse LU factorization failed", history);
    x = lu.solve(rhs);
    double r = residual_norm(m, x, rhs);
    history.push_back(r);
    for (int k = 0; k < 2 && r > target; ++k) {
        // iterative refinement in working precision
        const Eigen::VectorXd corr = lu.solve(rhs - m * x);
        x += corr;
        r = residual_norm(m, x, rhs);
        history.push_back(r);
    }
    if (r > target)
        throw SolveError("solve: residual " + std::to_string(r) +
                             " above tolerance " + std::to_string(target),
                         history);
    if (achieved_residual) *achieved_residual = r;
    return {x.data(), x.data() + n};
}

double smallest_singular_value(const std::vector<double>& data, int rows,
                               int cols) {
    if (rows <= 0 || cols <= 0 ||
        static_cast<size_t>(rows) * cols != data.size())
        throw std::invalid_argument("smallest_singular_value: bad shape");
    Eigen::MatrixXd A(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) A(i, j) = data[i * cols + j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    return svd.singularValues()(std::min(rows, cols) - 1);
}

}  // namespace lowmac
