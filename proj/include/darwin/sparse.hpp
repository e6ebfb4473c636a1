#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace darwin {

/// Compressed-sparse-row matrix. Column indices are strictly increasing within
/// each row and duplicate-free; construction via from_triplets enforces both.
/// The integer instantiation is used for the incidence operators so mimetic
/// identities (curl-of-gradient, divergence-of-curl) can be checked exactly.
template <typename T>
class Csr {
public:
    Csr() = default;
    Csr(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

    static Csr from_triplets(int rows, int cols,
                             std::vector<std::tuple<int, int, T>> triplets) {
        for (const auto& [r, c, v] : triplets) {
            (void)v;
            if (r < 0 || r >= rows || c < 0 || c >= cols)
                throw std::invalid_argument("sparse: triplet index out of range");
        }
        std::sort(triplets.begin(), triplets.end(),
                  [](const auto& a, const auto& b) {
                      return std::tie(std::get<0>(a), std::get<1>(a)) <
                             std::tie(std::get<0>(b), std::get<1>(b));
                  });
        Csr m(rows, cols);
        m.col_idx_.reserve(triplets.size());
        m.values_.reserve(triplets.size());
        std::size_t i = 0;
        for (int r = 0; r < rows; ++r) {
            while (i < triplets.size() && std::get<0>(triplets[i]) == r) {
                const int c = std::get<1>(triplets[i]);
                T sum = std::get<2>(triplets[i]);
                ++i;
                while (i < triplets.size() && std::get<0>(triplets[i]) == r &&
                       std::get<1>(triplets[i]) == c) {
                    sum += std::get<2>(triplets[i]);
                    ++i;
                }
                m.col_idx_.push_back(c);
                m.values_.push_back(sum);
            }
            m.row_ptr_[r + 1] = static_cast<int>(m.col_idx_.size());
        }
        return m;
    }

    static Csr identity(int n) {
        std::vector<std::tuple<int, int, T>> t;
        t.reserve(n);
        for (int i = 0; i < n; ++i) t.emplace_back(i, i, T(1));
        return from_triplets(n, n, std::move(t));
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t nonzeros() const { return col_idx_.size(); }

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<T>& values() const { return values_; }
    std::vector<T>& values() { return values_; }

    /// y = A x. Row-major accumulation in storage order: deterministic.
    void apply(const std::vector<T>& x, std::vector<T>& y) const {
        if (static_cast<int>(x.size()) != cols_)
            throw std::invalid_argument("sparse: apply size mismatch");
        y.assign(rows_, T(0));
        for (int r = 0; r < rows_; ++r) {
            T acc = T(0);
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                acc += values_[k] * x[col_idx_[k]];
            y[r] = acc;
        }
    }

    std::vector<T> apply(const std::vector<T>& x) const {
        std::vector<T> y;
        apply(x, y);
        return y;
    }

    /// y = A^T x without forming the transpose.
    void apply_transpose(const std::vector<T>& x, std::vector<T>& y) const {
        if (static_cast<int>(x.size()) != rows_)
            throw std::invalid_argument("sparse: apply_transpose size mismatch");
        y.assign(cols_, T(0));
        for (int r = 0; r < rows_; ++r) {
            const T xr = x[r];
            if (xr == T(0)) continue;
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                y[col_idx_[k]] += values_[k] * xr;
        }
    }

    std::vector<T> apply_transpose(const std::vector<T>& x) const {
        std::vector<T> y;
        apply_transpose(x, y);
        return y;
    }

    Csr transpose() const {
        std::vector<std::tuple<int, int, T>> t;
        t.reserve(nonzeros());
        for (int r = 0; r < rows_; ++r)
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                t.emplace_back(col_idx_[k], r, values_[k]);
        return from_triplets(cols_, rows_, std::move(t));
    }

    /// Keep only the columns with keep[c] >= 0 and renumber them to keep[c].
    Csr select_columns(const std::vector<int>& keep, int new_cols) const {
        if (static_cast<int>(keep.size()) != cols_)
            throw std::invalid_argument("sparse: select_columns map size mismatch");
        std::vector<std::tuple<int, int, T>> t;
        t.reserve(nonzeros());
        for (int r = 0; r < rows_; ++r)
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                if (keep[col_idx_[k]] >= 0)
                    t.emplace_back(r, keep[col_idx_[k]], values_[k]);
        return from_triplets(rows_, new_cols, std::move(t));
    }

    /// Keep only the rows listed (in order); row i of the result is rows[i] of *this.
    Csr select_rows(const std::vector<int>& rows) const {
        std::vector<std::tuple<int, int, T>> t;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const int r = rows[i];
            if (r < 0 || r >= rows_)
                throw std::invalid_argument("sparse: select_rows index out of range");
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                t.emplace_back(static_cast<int>(i), col_idx_[k], values_[k]);
        }
        return from_triplets(static_cast<int>(rows.size()), cols_, std::move(t));
    }

    template <typename U>
    Csr<U> cast() const {
        std::vector<std::tuple<int, int, U>> t;
        t.reserve(nonzeros());
        for (int r = 0; r < rows_; ++r)
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                t.emplace_back(r, col_idx_[k], static_cast<U>(values_[k]));
        return Csr<U>::from_triplets(rows_, cols_, std::move(t));
    }

    T max_abs() const {
        T m = T(0);
        for (const T& v : values_) {
            const T a = v < T(0) ? -v : v;
            if (a > m) m = a;
        }
        return m;
    }

    T coeff(int r, int c) const {
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            if (col_idx_[k] == c) return values_[k];
        return T(0);
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<T> values_;
};

using SparseMatrix = Csr<double>;
using IntMatrix = Csr<std::int64_t>;

/// C = A B (general sparse product, row-merge formulation).
template <typename T>
Csr<T> multiply(const Csr<T>& a, const Csr<T>& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("sparse: multiply shape mismatch");
    std::vector<std::tuple<int, int, T>> t;
    std::vector<T> acc(b.cols(), T(0));
    std::vector<int> marked;
    for (int r = 0; r < a.rows(); ++r) {
        marked.clear();
        for (int ka = a.row_ptr()[r]; ka < a.row_ptr()[r + 1]; ++ka) {
            const int m = a.col_idx()[ka];
            const T av = a.values()[ka];
            for (int kb = b.row_ptr()[m]; kb < b.row_ptr()[m + 1]; ++kb) {
                const int c = b.col_idx()[kb];
                if (acc[c] == T(0)) marked.push_back(c);
                acc[c] += av * b.values()[kb];
            }
        }
        std::sort(marked.begin(), marked.end());
        for (int c : marked) {
            if (acc[c] != T(0)) t.emplace_back(r, c, acc[c]);
            acc[c] = T(0);
        }
    }
    return Csr<T>::from_triplets(a.rows(), b.cols(), std::move(t));
}

/// A^T diag(d) A for an incidence-type A (entries +-1), d indexed by rows of A.
/// Every term is computed as d[r] * (a_ri * a_rj) and rows are visited in
/// ascending order for both (i,j) and (j,i), so the result is bitwise symmetric.
SparseMatrix normal_product(const IntMatrix& a, const std::vector<double>& d);

/// Adds diag(d) in place; the sparsity pattern must already contain the diagonal
/// or the entry is inserted.
SparseMatrix add_diagonal(const SparseMatrix& a, const std::vector<double>& d);

/// Symmetry check by exhaustive pattern comparison: returns the largest
/// |a_ij - a_ji| (exactly 0 for matrices built by normal_product).
double symmetry_defect(const SparseMatrix& a);

}  // namespace darwin
