#include "cgspatial/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cgspatial/errors.hpp"

namespace cgspatial {

SparseMatrix from_triplets(const TripletList& entries, std::size_t n_rows,
                           std::size_t n_cols) {
    for (const Triplet& t : entries) {
        if (t.row >= n_rows || t.col >= n_cols) {
            throw std::invalid_argument(
                "from_triplets: entry (" + std::to_string(t.row) + ", " +
                std::to_string(t.col) + ") outside " + std::to_string(n_rows) +
                "x" + std::to_string(n_cols));
        }
    }

    // Stable sort keeps duplicate entries in insertion order, so the
    // summation order per (row, col) key is reproducible. Structurally
    // symmetric assemblies then yield bitwise-symmetric results.
    std::vector<std::size_t> perm(entries.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(),
                     [&entries](std::size_t a, std::size_t b) {
                         const Triplet& ta = entries[a];
                         const Triplet& tb = entries[b];
                         if (ta.row != tb.row) return ta.row < tb.row;
                         return ta.col < tb.col;
                     });

    SparseMatrix a;
    a.n_rows = n_rows;
    a.n_cols = n_cols;
    a.row_ptr.assign(n_rows + 1, 0);
    a.col_idx.reserve(entries.size());
    a.values.reserve(entries.size());

    std::size_t k = 0;
    for (std::size_t i = 0; i < n_rows; ++i) {
        a.row_ptr[i] = a.col_idx.size();
        while (k < perm.size() && entries[perm[k]].row == i) {
            const std::size_t col = entries[perm[k]].col;
            double sum = 0.0;
            while (k < perm.size() && entries[perm[k]].row == i &&
                   entries[perm[k]].col == col) {
                sum += entries[perm[k]].value;
                ++k;
            }
            a.col_idx.push_back(col);
            a.values.push_back(sum);
        }
    }
    a.row_ptr[n_rows] = a.col_idx.size();
    return a;
}

DenseVector spmv(const SparseMatrix& a, const DenseVector& x) {
    if (x.size() != a.n_cols) {
        throw std::invalid_argument("spmv: vector length " +
                                    std::to_string(x.size()) +
                                    " != n_cols " + std::to_string(a.n_cols));
    }
    DenseVector y(a.n_rows, 0.0);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        double acc = 0.0;
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            acc += a.values[p] * x[a.col_idx[p]];
        }
        y[i] = acc;
    }
    return y;
}

DenseVector spmv_transpose(const SparseMatrix& a, const DenseVector& x) {
    if (x.size() != a.n_rows) {
        throw std::invalid_argument("spmv_transpose: vector length " +
                                    std::to_string(x.size()) +
                                    " != n_rows " + std::to_string(a.n_rows));
    }
    DenseVector y(a.n_cols, 0.0);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            y[a.col_idx[p]] += a.values[p] * xi;
        }
    }
    return y;
}

SparseMatrix transpose(const SparseMatrix& a) {
    SparseMatrix t;
    t.n_rows = a.n_cols;
    t.n_cols = a.n_rows;
    t.row_ptr.assign(a.n_cols + 1, 0);
    t.col_idx.resize(a.nnz());
    t.values.resize(a.nnz());

    for (std::size_t p = 0; p < a.nnz(); ++p) {
        ++t.row_ptr[a.col_idx[p] + 1];
    }
    for (std::size_t j = 0; j < a.n_cols; ++j) {
        t.row_ptr[j + 1] += t.row_ptr[j];
    }
    std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            const std::size_t q = next[a.col_idx[p]]++;
            t.col_idx[q] = i;  // rows visited in order, so columns stay sorted
            t.values[q] = a.values[p];
        }
    }
    return t;
}

DenseVector lower_tri_solve(const SparseMatrix& l, const DenseVector& b) {
    if (l.n_rows != l.n_cols) {
        throw std::invalid_argument("lower_tri_solve: matrix not square");
    }
    if (b.size() != l.n_rows) {
        throw std::invalid_argument("lower_tri_solve: rhs length mismatch");
    }
    DenseVector x(b);
    for (std::size_t i = 0; i < l.n_rows; ++i) {
        double acc = x[i];
        double diag = 0.0;
        bool has_diag = false;
        for (std::size_t p = l.row_ptr[i]; p < l.row_ptr[i + 1]; ++p) {
            const std::size_t j = l.col_idx[p];
            if (j < i) {
                acc -= l.values[p] * x[j];
            } else if (j == i) {
                diag = l.values[p];
                has_diag = true;
            } else {
                throw std::invalid_argument(
                    "lower_tri_solve: entry above the diagonal in row " +
                    std::to_string(i));
            }
        }
        if (!has_diag || diag == 0.0) {
            throw singular_factor_error(
                "lower_tri_solve: zero or absent diagonal at row " +
                    std::to_string(i),
                i);
        }
        x[i] = acc / diag;
    }
    return x;
}

DenseVector upper_tri_solve(const SparseMatrix& u, const DenseVector& b) {
    if (u.n_rows != u.n_cols) {
        throw std::invalid_argument("upper_tri_solve: matrix not square");
    }
    if (b.size() != u.n_rows) {
        throw std::invalid_argument("upper_tri_solve: rhs length mismatch");
    }
    DenseVector x(b);
    for (std::size_t ii = u.n_rows; ii-- > 0;) {
        double acc = x[ii];
        double diag = 0.0;
        bool has_diag = false;
        for (std::size_t p = u.row_ptr[ii]; p < u.row_ptr[ii + 1]; ++p) {
            const std::size_t j = u.col_idx[p];
            if (j > ii) {
                acc -= u.values[p] * x[j];
            } else if (j == ii) {
                diag = u.values[p];
                has_diag = true;
            } else {
                throw std::invalid_argument(
                    "upper_tri_solve: entry below the diagonal in row " +
                    std::to_string(ii));
            }
        }
        if (!has_diag || diag == 0.0) {
            throw singular_factor_error(
                "upper_tri_solve: zero or absent diagonal at row " +
                    std::to_string(ii),
                ii);
        }
        x[ii] = acc / diag;
    }
    return x;
}

DenseVector lower_tri_transpose_solve(const SparseMatrix& l,
                                      const DenseVector& b) {
    if (l.n_rows != l.n_cols) {
        throw std::invalid_argument(
            "lower_tri_transpose_solve: matrix not square");
    }
    if (b.size() != l.n_rows) {
        throw std::invalid_argument(
            "lower_tri_transpose_solve: rhs length mismatch");
    }
    // L^T is upper triangular; its columns are the rows of L. Sweep rows
    // of L backwards: divide by the diagonal, then push the solved value
    // into the strictly-lower entries of that row.
    DenseVector x(b);
    for (std::size_t ii = l.n_rows; ii-- > 0;) {
        const std::size_t begin = l.row_ptr[ii];
        const std::size_t end = l.row_ptr[ii + 1];
        if (begin == end || l.col_idx[end - 1] != ii ||
            l.values[end - 1] == 0.0) {
            throw singular_factor_error(
                "lower_tri_transpose_solve: zero or absent diagonal at row " +
                    std::to_string(ii),
                ii);
        }
        const double xi = x[ii] / l.values[end - 1];
        x[ii] = xi;
        for (std::size_t p = begin; p + 1 < end; ++p) {
            x[l.col_idx[p]] -= l.values[p] * xi;
        }
    }
    return x;
}

DenseMatrix to_dense(const SparseMatrix& a) {
    constexpr std::size_t kMaxEntries = 1000000;
    if (a.n_rows != 0 && a.n_cols > kMaxEntries / a.n_rows) {
        throw std::invalid_argument("to_dense: matrix exceeds the 1e6-entry guard");
    }
    DenseMatrix d(a.n_rows, a.n_cols);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            d.at(i, a.col_idx[p]) = a.values[p];
        }
    }
    return d;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace cgspatial
