#pragma once

// Independent reference implementations used as test oracles. These are
// deliberately written against the textbook definitions (dense storage,
// Gauss-Jordan, boolean elimination) and share no code with the solver
// paths they check.

#include <cstddef>
#include <vector>

#include "cgspatial/kernels.hpp"
#include "cgspatial/sparse.hpp"

namespace oracle {

using cgspatial::DenseMatrix;
using cgspatial::DenseVector;

DenseVector dense_matvec(const DenseMatrix& a, const DenseVector& x);
DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix dense_transpose(const DenseMatrix& a);

/// Gauss-Jordan inverse with partial pivoting; throws std::domain_error
/// on singular input.
DenseMatrix gauss_jordan_inverse(const DenseMatrix& a);

/// Gaussian elimination solve with partial pivoting.
DenseVector gauss_solve(DenseMatrix a, DenseVector b);

/// Textbook dense lower-triangular Cholesky; throws std::domain_error
/// when the input is not positive definite.
DenseMatrix dense_cholesky(const DenseMatrix& a);

/// Exponential covariance matrix computed from first principles
/// (std::exp over pairwise distances), independent of the kernels
/// module internals.
DenseMatrix exponential_cov(const std::vector<cgspatial::Location>& pts,
                            double sigma2, double phi);

/// Brute-force nearest earlier neighbors in modeling order: positions of
/// the min(i, m) smallest (squared distance, position) pairs among
/// 0..i-1, sorted ascending by position.
std::vector<std::size_t> nearest_earlier(
    const std::vector<cgspatial::Location>& ordered_pts, std::size_t i,
    std::size_t m);

/// Boolean elimination fill: the exact lower-triangular pattern
/// (diagonal included) of the Cholesky factor of a symmetric pattern,
/// natural order. pattern is a dense n x n 0/1 matrix.
std::vector<std::vector<bool>> symbolic_fill(
    const std::vector<std::vector<bool>>& pattern);

/// Dense brute-force NIG posterior on the stacked least-squares form:
/// explicitly builds X* from (X, I/delta, prior rows, D^{-1/2}(I - A)),
/// forms X*'X*, inverts it, and evaluates mu*, a*, b*.
struct DensePosterior {
    DenseVector mu_star;
    DenseMatrix v_star;  // (X*'X*)^{-1}
    double a_star = 0.0;
    double b_star = 0.0;
};

DensePosterior dense_posterior(const DenseMatrix& x, const DenseVector& y,
                               const DenseMatrix& a_dense,
                               const DenseVector& d_diag, double delta2,
                               double prior_a, double prior_b);

/// Basic moment helpers for the Monte Carlo checks.
double mean(const DenseVector& xs);
double variance(const DenseVector& xs);
double skewness(const DenseVector& xs);

}  // namespace oracle
