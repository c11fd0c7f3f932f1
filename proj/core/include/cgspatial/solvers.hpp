#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "cgspatial/preconditioners.hpp"
#include "cgspatial/sparse.hpp"

namespace cgspatial {

/// Matrix-free SPD operator: dim plus a deterministic matvec. The CG
/// family only ever touches A through this.
struct LinearOperator {
    std::size_t dim = 0;
    std::function<void(std::span<const double>, std::span<double>)> apply;
};

/// Operator backed by an explicit sparse matrix. Borrows `a`; the
/// matrix must outlive the operator.
LinearOperator matrix_operator(const SparseMatrix& a);

struct SolverConfig {
    double tol = 1e-8;         // relative true-residual threshold
    std::size_t max_iter = 0;  // 0 means 10 * dim
    bool record_history = false;
};

/// Outcome of one solve. When record_history is set, residual_history
/// holds per-iteration residual norms and (for cg_solve only) the
/// direction/residual vectors used by the conjugacy diagnostics; keep
/// that to small systems.
struct SolveReport {
    std::size_t iterations = 0;
    double residual_norm = 0.0;  // final true residual
    bool converged = false;
    double wall_time = 0.0;  // seconds
    std::vector<double> residual_history;
    std::vector<DenseVector> direction_history;
    std::vector<DenseVector> residual_vector_history;
};

/// Plain conjugate gradient with the textbook recurrences:
///   p0 = r0 = b - A x0
///   alpha = p'r / p'Ap,  x += alpha p,  r -= alpha Ap
///   tau = -r'Ap / p'Ap,  p = r + tau p
/// One operator matvec per iteration. Convergence is declared on the
/// true residual ||b - Ax|| <= tol * ||b||. Iteration-cap exhaustion is
/// reported (converged = false), not thrown; a non-positive p'Ap throws
/// cgspatial::not_spd_error.
std::pair<DenseVector, SolveReport> cg_solve(const LinearOperator& a,
                                             const DenseVector& b,
                                             const DenseVector& x0,
                                             const SolverConfig& cfg = {});

/// Preconditioned CG (Hestenes-Stiefel form, z = M^{-1} r, beta from
/// r'z ratios). With the identity preconditioner this reproduces
/// cg_solve up to floating-point association.
std::pair<DenseVector, SolveReport> pcg_solve(const LinearOperator& a,
                                              const Preconditioner& m,
                                              const DenseVector& b,
                                              const SolverConfig& cfg = {});

/// Least-squares CG on min ||X v - y||_2 via the normal equations,
/// without forming X'X: one matvec with X and one with X' per
/// iteration. Converged means ||X'(y - Xv)|| <= tol * ||X'y||.
std::pair<DenseVector, SolveReport> cgls_solve(const SparseMatrix& x,
                                               const DenseVector& y,
                                               const SolverConfig& cfg = {});

/// Row-wise lower-triangular sparsity pattern (diagonal included).
struct SparsityPattern {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col_idx;
};

/// Structure-only analysis of a Cholesky factorization in natural
/// order: elimination tree, per-column factor counts, and the exact
/// row-wise pattern of L including fill.
struct SymbolicFactor {
    std::vector<std::ptrdiff_t> elimination_tree;  // parent, -1 at roots
    std::vector<std::size_t> column_counts;        // nnz per column of L
    SparsityPattern l_pattern;
};

/// Predict the factor structure from the sparsity pattern alone.
/// Requires a structurally symmetric square input (only the lower
/// triangle is read); throws std::invalid_argument if non-square.
SymbolicFactor symbolic_cholesky(const SparseMatrix& pattern);

/// Numeric factorization L L' = A on the symbolic pattern; values
/// outside the pattern are exactly zero. Throws cgspatial::not_spd_error
/// naming the pivot row on a non-positive pivot.
SparseMatrix numeric_cholesky(const SparseMatrix& a, const SymbolicFactor& sym);

/// x = L^{-T} L^{-1} b for a factor from numeric_cholesky.
DenseVector cholesky_solve(const SparseMatrix& l, const DenseVector& b);

/// Dense reference solve: Cholesky on symmetric input with a
/// partial-pivot LU fallback (LAPACK-backed, the same route as the
/// default solver in R). Guarded to n <= 20,000; throws
/// std::invalid_argument past the guard and std::domain_error on
/// singular input.
DenseVector dense_solve(const DenseMatrix& a, const DenseVector& b);

namespace detail {

/// Row-oriented Cholesky restricted to a given lower-triangular pattern:
/// fill outside the pattern is dropped, which makes it both the exact
/// factorization kernel (pattern from symbolic_cholesky) and the IC(0)
/// kernel (pattern = lower triangle of A). diag_scale multiplies the
/// diagonal of A before factorizing (1 + shift for shifted IC).
SparseMatrix cholesky_on_pattern(const SparseMatrix& a,
                                 const std::vector<std::size_t>& row_ptr,
                                 const std::vector<std::size_t>& col_idx,
                                 double diag_scale);

}  // namespace detail

}  // namespace cgspatial
