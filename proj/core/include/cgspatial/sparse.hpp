#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cgspatial {

using DenseVector = std::vector<double>;

/// Coordinate-format entry used to assemble sparse matrices.
/// Duplicate (row, col) pairs are summed at assembly.
struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

using TripletList = std::vector<Triplet>;

/// Row-major dense matrix. Used for small covariance blocks, test
/// oracles and the dense reference solver.
struct DenseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> data;  // row-major, n_rows * n_cols

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols)
        : n_rows(rows), n_cols(cols), data(rows * cols, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * n_cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * n_cols + j]; }
};

/// Compressed sparse row matrix, the canonical storage for every solver
/// and preconditioner in this library.
///
/// Invariants (guaranteed by from_triplets, expected by all operations):
///   - row_ptr has length n_rows + 1, is non-decreasing, row_ptr[0] == 0,
///     row_ptr[n_rows] == nnz == col_idx.size() == values.size()
///   - within each row, col_idx is strictly increasing
///   - every col_idx entry is < n_cols
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_ptr;  // length n_rows + 1
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const { return col_idx.size(); }

    std::span<const std::size_t> row_cols(std::size_t i) const {
        return {col_idx.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
    }
    std::span<const double> row_values(std::size_t i) const {
        return {values.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
    }
};

/// Assemble canonical CSR from triplets; duplicates are summed.
/// Throws std::invalid_argument if any index is out of range.
SparseMatrix from_triplets(const TripletList& entries, std::size_t n_rows,
                           std::size_t n_cols);

/// y = A x. Throws std::invalid_argument on dimension mismatch.
DenseVector spmv(const SparseMatrix& a, const DenseVector& x);

/// y = A^T x, computed by scatter without materializing the transpose.
DenseVector spmv_transpose(const SparseMatrix& a, const DenseVector& x);

/// Canonical CSR transpose.
SparseMatrix transpose(const SparseMatrix& a);

/// Forward substitution for lower-triangular L with explicit nonzero
/// diagonal. Throws cgspatial::singular_factor_error when a diagonal
/// entry is absent or zero.
DenseVector lower_tri_solve(const SparseMatrix& l, const DenseVector& b);

/// Back substitution for upper-triangular U; mirror of lower_tri_solve.
DenseVector upper_tri_solve(const SparseMatrix& u, const DenseVector& b);

/// Solve L^T x = b given L in CSR, using a column sweep over the rows
/// of L. Avoids materializing the transpose; shared by the sparse
/// Cholesky solve and the IC(0) preconditioner apply.
DenseVector lower_tri_transpose_solve(const SparseMatrix& l,
                                      const DenseVector& b);

/// Dense expansion, guarded to n_rows * n_cols <= 1e6 entries; intended
/// as a test oracle surface. Throws std::invalid_argument past the guard.
DenseMatrix to_dense(const SparseMatrix& a);

// Small vector kernels shared by the iterative solvers.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

}  // namespace cgspatial
