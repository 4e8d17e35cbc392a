#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lowmac {

/// Square sparse matrix assembled from triplets in deterministic order.
/// Duplicate entries are summed.
class SparseMatrix {
public:
    explicit SparseMatrix(int n) : n_(n) {}

    int size() const { return n_; }
    void add(int row, int col, double v) { trip_.push_back({row, col, v}); }
    /// Marks the matrix symmetric positive definite, enabling the
    /// conjugate-direction / Cholesky-type paths. The flag is checked
    /// against A = A^T on assembly for small systems.
    void set_spd(bool spd) { spd_ = spd; }
    bool spd() const { return spd_; }

    struct Triplet {
        int row, col;
        double value;
    };
    const std::vector<Triplet>& triplets() const { return trip_; }

private:
    int n_;
    bool spd_ = false;
    std::vector<Triplet> trip_;
};

/// Linear solve failure; carries the residual history of the attempt.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, std::vector<double> residuals)
        : std::runtime_error(what), residual_history(std::move(residuals)) {}
    std::vector<double> residual_history;
};

/// Solves A x = b to ||Ax - b||_2 <= tol * max(1, ||b||_2).
///
/// Systems below 20 000 unknowns go to a direct sparse factorization
/// (deterministic and accurate enough for the identity tests downstream);
/// larger ones use a preconditioned Krylov iteration: conjugate gradients
/// when the SPD flag is set, BiCGSTAB otherwise, with the direct path as
/// fallback on stagnation. The residual contract is verified on every call;
/// one step of iterative refinement is applied if the first factorization
/// falls short. Initial guess is always zero.
std::vector<double> solve(const SparseMatrix& A, const std::vector<double>& b,
                          double tol = 1e-12, int max_iter = 10000,
                          double* achieved_residual = nullptr);

/// Smallest singular value of a dense row-major matrix (rows x cols), to
/// about 1e-8 relative.
double smallest_singular_value(const std::vector<double>& data, int rows,
                               int cols);

}  // namespace lowmac
