#include "darwin/solver.hpp"

#include <cmath>

namespace darwin {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];  // fixed left-to-right
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

/// Jacobi / SSOR application helpers share the diagonal extraction.
std::vector<double> diagonal_of(const SparseMatrix& a) {
    std::vector<double> d(a.rows(), 0.0);
    for (int r = 0; r < a.rows(); ++r) d[r] = a.coeff(r, r);
    return d;
}

void apply_jacobi(const std::vector<double>& diag, const std::vector<double>& r,
                  std::vector<double>& z) {
    z.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        z[i] = diag[i] != 0.0 ? r[i] / diag[i] : r[i];
}

/// z = M^-1 r for M_ssor ~ (D + w L) D^-1 (D + w U); the constant prefactor is
/// irrelevant to the CG trajectory.
void apply_ssor(const SparseMatrix& a, const std::vector<double>& diag, double w,
                const std::vector<double>& r, std::vector<double>& v,
                std::vector<double>& z) {
    const int n = a.rows();
    v.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = r[i];
        for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            const int j = a.col_idx()[k];
            if (j >= i) break;  // columns sorted: strictly-lower part only
            s -= w * a.values()[k] * v[j];
        }
        v[i] = diag[i] != 0.0 ? s / diag[i] : s;
    }
    z.assign(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = diag[i] * v[i];
        for (int k = a.row_ptr()[i + 1] - 1; k >= a.row_ptr()[i]; --k) {
            const int j = a.col_idx()[k];
            if (j <= i) break;  // strictly-upper part only
            s -= w * a.values()[k] * z[j];
        }
        z[i] = diag[i] != 0.0 ? s / diag[i] : s;
    }
}

}  // namespace

SolveReport cg_solve(const SparseMatrix& a, const std::vector<double>& b,
                     std::vector<double>& x, const CgOptions& opt) {
    if (a.rows() != a.cols()) throw SolverError("cg: matrix not square");
    if (static_cast<int>(b.size()) != a.rows()) throw SolverError("cg: rhs size mismatch");
    if (x.empty()) x.assign(a.rows(), 0.0);
    if (static_cast<int>(x.size()) != a.rows()) throw SolverError("cg: guess size mismatch");

    SolveReport rep;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(a.rows(), 0.0);
        rep.converged = true;
        return rep;
    }

    const std::vector<double> diag =
        opt.precond == Preconditioner::none ? std::vector<double>() : diagonal_of(a);

    std::vector<double> r(a.rows()), z, p, ap, ssor_tmp;
    a.apply(x, ap);
    for (int i = 0; i < a.rows(); ++i) r[i] = b[i] - ap[i];
    // A warm start whose residual exceeds ||b|| is worse than starting from zero,
    // and it raises the attainable floating-point residual floor (which scales with
    // ||A||*||x||*eps) above tight relative tolerances whenever ||b|| is small.
    if (norm2(r) > bnorm) {
        x.assign(a.rows(), 0.0);
        r = b;
    }

    auto precondition = [&](const std::vector<double>& rin, std::vector<double>& zout) {
        switch (opt.precond) {
            case Preconditioner::none: zout = rin; break;
            case Preconditioner::jacobi: apply_jacobi(diag, rin, zout); break;
            case Preconditioner::ssor: apply_ssor(a, diag, opt.ssor_omega, rin, ssor_tmp, zout); break;
        }
    };

    double rnorm = norm2(r);
    rep.rel_residual = rnorm / bnorm;
    if (rep.rel_residual <= opt.tol) {
        rep.converged = true;
        return rep;
    }

    precondition(r, z);
    p = z;
    double rz = dot(r, z);

    for (int it = 1; it <= opt.max_iter; ++it) {
        a.apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0) || !std::isfinite(pap)) {
            rep.iterations = it - 1;
            rep.note = "breakdown";
            return rep;
        }
        const double alpha = rz / pap;
        for (int i = 0; i < a.rows(); ++i) x[i] += alpha * p[i];
        for (int i = 0; i < a.rows(); ++i) r[i] -= alpha * ap[i];
        rnorm = norm2(r);
        rep.iterations = it;
        rep.rel_residual = rnorm / bnorm;
        if (opt.monitor) opt.monitor(it, x);
        if (rep.rel_residual <= opt.tol) {
            rep.converged = true;
            break;
        }
        precondition(r, z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < a.rows(); ++i) p[i] = z[i] + beta * p[i];
    }

    // Report the true residual, not the recursion residual.
    a.apply(x, ap);
    for (int i = 0; i < a.rows(); ++i) r[i] = b[i] - ap[i];
    rep.rel_residual = norm2(r) / bnorm;
    rep.converged = rep.rel_residual <= opt.tol;
    return rep;
}

Eigen::MatrixXd to_dense(const SparseMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r)
        for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k)
            m(r, a.col_idx()[k]) = a.values()[k];
    return m;
}

DenseLuOracle::DenseLuOracle(Eigen::MatrixXd a, int max_size) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw SolverError("dense oracle: matrix not square");
    if (a_.rows() > max_size)
        throw SolverError("dense oracle: system larger than the oracle size limit (" +
                          std::to_string(max_size) + ")");
    if (a_.rows() == 0) return;  // empty system: factorization and solves are trivial
    lu_.compute(a_);
    const Eigen::VectorXd u = lu_.matrixLU().diagonal().cwiseAbs();
    const double umax = u.maxCoeff();
    if (!(umax > 0.0) || u.minCoeff() < 1e-14 * umax)
        throw SolverError("dense oracle: matrix singular to working precision");
}

std::vector<double> DenseLuOracle::solve(const std::vector<double>& b) const {
    if (static_cast<int>(b.size()) != a_.rows())
        throw SolverError("dense oracle: rhs size mismatch");
    if (b.empty()) return {};
    const Eigen::Map<const Eigen::VectorXd> bv(b.data(), b.size());
    if (bv.norm() == 0.0) return std::vector<double>(b.size(), 0.0);
    Eigen::VectorXd x = lu_.solve(bv);
    const double rel = (a_ * x - bv).norm() / bv.norm();
    if (!(rel <= 1e-10))
        throw SolverError("dense oracle: solve residual " + std::to_string(rel) +
                          " exceeds 1e-10 (matrix effectively singular)");
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> dense_lu_solve(const SparseMatrix& a, const std::vector<double>& b,
                                   int max_size) {
    return DenseLuOracle(to_dense(a), max_size).solve(b);
}

std::vector<double> dense_lu_solve(const Eigen::MatrixXd& a, const std::vector<double>& b,
                                   int max_size) {
    return DenseLuOracle(a, max_size).solve(b);
}

GeneralizedEigenResult generalized_eigenpairs(const SparseMatrix& k,
                                              const std::vector<double>& m_diag,
                                              int max_size) {
    if (k.rows() != k.cols() || static_cast<int>(m_diag.size()) != k.rows())
        throw SolverError("eigen oracle: shape mismatch");
    if (k.rows() > max_size) throw SolverError("eigen oracle: system too large");
    for (double m : m_diag)
        if (!(m > 0.0)) throw SolverError("eigen oracle: mass diagonal must be positive");
    Eigen::MatrixXd kd = to_dense(k);
    Eigen::MatrixXd md = Eigen::MatrixXd::Zero(k.rows(), k.rows());
    for (int i = 0; i < k.rows(); ++i) md(i, i) = m_diag[i];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(kd, md);
    if (es.info() != Eigen::Success) throw SolverError("eigen oracle: solver failed");
    GeneralizedEigenResult res;
    res.eigenvalues.assign(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
    res.eigenvectors = es.eigenvectors();
    return res;
}

int smallest_nonzero_index(const std::vector<double>& eigenvalues, double rel_cut) {
    double max_abs = 0.0;
    for (double ev : eigenvalues) max_abs = std::max(max_abs, std::abs(ev));
    const double cut = rel_cut * max_abs;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
        if (eigenvalues[i] > cut) return static_cast<int>(i);
    throw SolverError("eigen oracle: no nonzero eigenvalue above the cut");
}

}  // namespace darwin
