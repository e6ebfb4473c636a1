#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "darwin/sparse.hpp"

namespace darwin {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Preconditioner { none, jacobi, ssor };

struct CgOptions {
    double tol = 1e-10;           // relative residual target, ||r|| / ||b||
    int max_iter = 5000;
    Preconditioner precond = Preconditioner::jacobi;
    double ssor_omega = 1.0;
    /// Optional per-iteration hook (iteration count, current iterate).
    std::function<void(int, const std::vector<double>&)> monitor;
};

struct SolveReport {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
    std::string note;
};

/// Preconditioned conjugate gradients on a symmetric positive (semi)definite
/// system. x carries the initial guess in and the solution out. All inner
/// products run in fixed storage order, so identical inputs give bitwise
/// identical iterates (single-threaded by design; a parallel reduction would
/// change low-order bits but no contract). Breakdown (indefinite or NaN
/// curvature) is reported via converged = false, note = "breakdown".
SolveReport cg_solve(const SparseMatrix& a, const std::vector<double>& b,
                     std::vector<double>& x, const CgOptions& opt = {});

/// Dense LU factorization used as the reference ("oracle") solver. Refuses
/// systems above max_size, detects singularity to working precision, and
/// verifies every solve to 1e-10 relative residual.
class DenseLuOracle {
public:
    explicit DenseLuOracle(Eigen::MatrixXd a, int max_size = 5000);
    std::vector<double> solve(const std::vector<double>& b) const;
    int size() const { return static_cast<int>(a_.rows()); }

private:
    Eigen::MatrixXd a_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

Eigen::MatrixXd to_dense(const SparseMatrix& a);

/// One-shot convenience wrapper around DenseLuOracle.
std::vector<double> dense_lu_solve(const SparseMatrix& a, const std::vector<double>& b,
                                   int max_size = 5000);
std::vector<double> dense_lu_solve(const Eigen::MatrixXd& a, const std::vector<double>& b,
                                   int max_size = 5000);

/// Dense generalized symmetric eigenproblem K v = lambda diag(m) v with
/// diag(m) positive definite; eigenvalues ascending. Test oracle only.
struct GeneralizedEigenResult {
    std::vector<double> eigenvalues;
    Eigen::MatrixXd eigenvectors;  // columns, diag(m)-orthonormal
};

GeneralizedEigenResult generalized_eigenpairs(const SparseMatrix& k,
                                              const std::vector<double>& m_diag,
                                              int max_size = 5000);

/// Index of the smallest eigenvalue above rel_cut * max(|eigenvalue|).
int smallest_nonzero_index(const std::vector<double>& eigenvalues, double rel_cut = 1e-8);

}  // namespace darwin
