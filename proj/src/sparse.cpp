#include "darwin/sparse.hpp"

#include <cmath>

namespace darwin {

SparseMatrix normal_product(const IntMatrix& a, const std::vector<double>& d) {
    if (static_cast<int>(d.size()) != a.rows())
        throw std::invalid_argument("normal_product: diagonal size mismatch");
    const int n = a.cols();

    // Transpose adjacency: for each column, the incident rows in ascending order.
    std::vector<int> count(n, 0);
    for (std::size_t k = 0; k < a.nonzeros(); ++k) ++count[a.col_idx()[k]];
    std::vector<int> tp(n + 1, 0);
    for (int c = 0; c < n; ++c) tp[c + 1] = tp[c] + count[c];
    std::vector<int> trow(a.nonzeros());
    std::vector<std::int64_t> tval(a.nonzeros());
    std::vector<int> cursor(tp.begin(), tp.end() - 1);
    for (int r = 0; r < a.rows(); ++r)
        for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
            const int c = a.col_idx()[k];
            trow[cursor[c]] = r;
            tval[cursor[c]] = a.values()[k];
            ++cursor[c];
        }

    std::vector<std::tuple<int, int, double>> t;
    std::vector<double> acc(n, 0.0);
    std::vector<bool> used(n, false);
    std::vector<int> marked;
    for (int i = 0; i < n; ++i) {
        marked.clear();
        for (int k = tp[i]; k < tp[i + 1]; ++k) {
            const int r = trow[k];
            const std::int64_t a_ri = tval[k];
            for (int kr = a.row_ptr()[r]; kr < a.row_ptr()[r + 1]; ++kr) {
                const int j = a.col_idx()[kr];
                // Canonical term order: the +-1 incidence product first, then the
                // weight; (i,j) and (j,i) therefore accumulate identical doubles.
                const double term = d[r] * static_cast<double>(a_ri * a.values()[kr]);
                if (!used[j]) {
                    used[j] = true;
                    marked.push_back(j);
                }
                acc[j] += term;
            }
        }
        std::sort(marked.begin(), marked.end());
        for (int j : marked) {
            t.emplace_back(i, j, acc[j]);
            acc[j] = 0.0;
            used[j] = false;
        }
    }
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix add_diagonal(const SparseMatrix& a, const std::vector<double>& d) {
    if (a.rows() != a.cols() || static_cast<int>(d.size()) != a.rows())
        throw std::invalid_argument("add_diagonal: shape mismatch");
    std::vector<std::tuple<int, int, double>> t;
    t.reserve(a.nonzeros() + d.size());
    for (int r = 0; r < a.rows(); ++r)
        for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k)
            t.emplace_back(r, a.col_idx()[k], a.values()[k]);
    for (int i = 0; i < a.rows(); ++i) t.emplace_back(i, i, d[i]);
    return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

double symmetry_defect(const SparseMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("symmetry_defect: not square");
    double worst = 0.0;
    for (int r = 0; r < a.rows(); ++r)
        for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
            const double diff = std::abs(a.values()[k] - a.coeff(a.col_idx()[k], r));
            if (diff > worst) worst = diff;
        }
    return worst;
}

}  // namespace darwin
