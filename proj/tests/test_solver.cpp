#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "darwin/solver.hpp"
#include "darwin/sparse.hpp"
#include "doctest.h"

using namespace darwin;

namespace {

SparseMatrix poisson1d(int n) {
    std::vector<std::tuple<int, int, double>> t;
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.0);
        if (i > 0) t.emplace_back(i, i - 1, -1.0);
        if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
    }
    return SparseMatrix::from_triplets(n, n, t);
}

}  // namespace

TEST_CASE("cg solves the 5-point Poisson chain to the known solution") {
    // tridiag(-1,2,-1) x = ones has the closed form x_i = (i+1)(5-i)/2.
    const auto a = poisson1d(5);
    const std::vector<double> b(5, 1.0);
    const std::vector<double> expect{2.5, 4.0, 4.5, 4.0, 2.5};
    for (Preconditioner p : {Preconditioner::none, Preconditioner::jacobi,
                             Preconditioner::ssor}) {
        CgOptions opt;
        opt.tol = 1e-13;
        opt.precond = p;
        std::vector<double> x;
        const SolveReport rep = cg_solve(a, b, x, opt);
        CHECK(rep.converged);
        CHECK(rep.iterations <= 8);  // exact termination in n steps plus rounding slack
        for (int i = 0; i < 5; ++i) CHECK(x[i] == doctest::Approx(expect[i]).epsilon(1e-10));
    }
}

TEST_CASE("dense LU oracle solves a 2x2 system exactly") {
    Eigen::MatrixXd a(2, 2);
    a << 2.0, 1.0, 1.0, 3.0;
    const DenseLuOracle lu(a);
    const auto x = lu.solve({3.0, 5.0});
    CHECK(x[0] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.4).epsilon(1e-14));
    CHECK_THROWS_AS(lu.solve({1.0}), SolverError);
}

TEST_CASE("cg is bitwise deterministic") {
    const auto a = poisson1d(40);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> b(40);
    for (double& v : b) v = dist(rng);
    CgOptions opt;
    opt.tol = 1e-12;
    std::vector<double> x1, x2;
    cg_solve(a, b, x1, opt);
    cg_solve(a, b, x2, opt);
    CHECK(std::memcmp(x1.data(), x2.data(), x1.size() * sizeof(double)) == 0);
}

TEST_CASE("cg error decreases monotonically in the A-norm") {
    const auto a = poisson1d(30);
    std::vector<double> b(30, 0.0);
    b[7] = 1.0;
    b[21] = -2.0;
    std::vector<double> xstar;
    {
        CgOptions tight;
        tight.tol = 1e-15;
        cg_solve(a, b, xstar, tight);
    }
    auto a_norm_err = [&](const std::vector<double>& x) {
        std::vector<double> e(x.size()), ae;
        for (std::size_t i = 0; i < x.size(); ++i) e[i] = x[i] - xstar[i];
        a.apply(e, ae);
        double s = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) s += e[i] * ae[i];
        return std::sqrt(std::max(0.0, s));
    };
    CgOptions opt;
    opt.tol = 1e-12;
    double prev = a_norm_err(std::vector<double>(30, 0.0));
    bool monotone = true;
    opt.monitor = [&](int, const std::vector<double>& x) {
        const double cur = a_norm_err(x);
        if (cur > prev * (1.0 + 1e-12) + 1e-15) monotone = false;
        prev = cur;
    };
    std::vector<double> x;
    const SolveReport rep = cg_solve(a, b, x, opt);
    CHECK(rep.converged);
    CHECK(monotone);
}

TEST_CASE("cg reports failure on an inconsistent singular system") {
    // [[1,-1],[-1,1]] is PSD with kernel span{(1,1)}; b = (1,1) is not in range.
    const auto a = SparseMatrix::from_triplets(
        2, 2, {{0, 0, 1.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 1.0}});
    CgOptions opt;
    opt.tol = 1e-12;
    opt.max_iter = 50;
    std::vector<double> x;
    const SolveReport rep = cg_solve(a, {1.0, 1.0}, x, opt);
    CHECK_FALSE(rep.converged);
}

TEST_CASE("cg solves a consistent singular system") {
    const auto a = SparseMatrix::from_triplets(
        2, 2, {{0, 0, 1.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 1.0}});
    CgOptions opt;
    opt.tol = 1e-12;
    std::vector<double> x;
    const SolveReport rep = cg_solve(a, {1.0, -1.0}, x, opt);
    CHECK(rep.converged);
    CHECK(x[0] - x[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("a bad warm start falls back to the zero start") {
    // Tiny right-hand side with a huge stale guess: the attainable residual
    // from the stale guess sits far above tol * ||b||, so the solver must
    // restart from zero rather than report failure.
    const auto a = poisson1d(5);
    std::vector<double> b(5, 1e-13);
    std::vector<double> x_zero;
    CgOptions opt;
    opt.tol = 1e-12;
    cg_solve(a, b, x_zero, opt);
    std::vector<double> x_warm(5, 1.0e3);
    const SolveReport rep = cg_solve(a, b, x_warm, opt);
    CHECK(rep.converged);
    for (int i = 0; i < 5; ++i)
        CHECK(x_warm[i] == doctest::Approx(x_zero[i]).epsilon(1e-10));
}

TEST_CASE("a good warm start is accepted without iterations") {
    const auto a = poisson1d(5);
    const std::vector<double> b{1.0, 0.0, 0.0, 0.0, 0.0};
    std::vector<double> x;
    CgOptions opt;
    opt.tol = 1e-12;
    cg_solve(a, b, x, opt);
    std::vector<double> warm = x;
    const SolveReport rep = cg_solve(a, b, warm, opt);
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
}

TEST_CASE("dense LU oracle rejects singular, non-square and oversized systems") {
    Eigen::MatrixXd sing(2, 2);
    sing << 1.0, 2.0, 2.0, 4.0;
    CHECK_THROWS_AS(DenseLuOracle{sing}, SolverError);
    Eigen::MatrixXd rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(DenseLuOracle{rect}, SolverError);
    Eigen::MatrixXd big = Eigen::MatrixXd::Identity(4, 4);
    CHECK_THROWS_AS(DenseLuOracle(big, 3), SolverError);
}

TEST_CASE("dense LU oracle handles the empty system") {
    const DenseLuOracle lu(Eigen::MatrixXd(0, 0));
    CHECK(lu.size() == 0);
    CHECK(lu.solve({}).empty());
}

TEST_CASE("generalized eigenpairs match a hand-solved 2x2 pencil") {
    // K = [[2,-1],[-1,2]], M = diag(1,4): det(K - t M) = 4t^2 - 10t + 3.
    const auto k = SparseMatrix::from_triplets(
        2, 2, {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}});
    const auto r = generalized_eigenpairs(k, {1.0, 4.0});
    REQUIRE(r.eigenvalues.size() == 2);
    const double disc = std::sqrt(100.0 - 48.0);
    CHECK(r.eigenvalues[0] == doctest::Approx((10.0 - disc) / 8.0).epsilon(1e-12));
    CHECK(r.eigenvalues[1] == doctest::Approx((10.0 + disc) / 8.0).epsilon(1e-12));
    // Columns are M-orthonormal.
    const Eigen::VectorXd v0 = r.eigenvectors.col(0);
    CHECK(v0[0] * v0[0] * 1.0 + v0[1] * v0[1] * 4.0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("smallest_nonzero_index skips the numerical kernel") {
    CHECK(smallest_nonzero_index({0.0, 1e-20, 0.5, 2.0}) == 2);
    CHECK(smallest_nonzero_index({1.0, 2.0}) == 0);
    CHECK_THROWS_AS(smallest_nonzero_index({0.0, 0.0}), SolverError);
}
