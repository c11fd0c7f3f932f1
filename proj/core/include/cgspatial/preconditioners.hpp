#pragma once

#include <cstddef>

#include "cgspatial/sparse.hpp"

namespace cgspatial {

enum class PreconditionerKind { Identity, Jacobi, IncompleteCholesky };

/// SPD preconditioner applied as z = M^{-1} r inside PCG.
///   Identity            - no payload
///   Jacobi              - diagonal of A
///   IncompleteCholesky  - zero-fill factor on the lower pattern of A
struct Preconditioner {
    PreconditionerKind kind = PreconditionerKind::Identity;
    DenseVector diagonal;      // Jacobi
    SparseMatrix ic_factor;    // IncompleteCholesky
    double ic_shift = 0.0;     // diagonal shift applied on IC breakdown, 0 if none
};

Preconditioner identity_build();

/// Stores diag(A). Throws std::invalid_argument when a diagonal entry is
/// missing or not strictly positive.
Preconditioner jacobi_build(const SparseMatrix& a);

struct Ic0Options {
    /// On a non-positive pivot, retry with A + alpha * diag(A), alpha
    /// doubling from 1e-3; the shift that succeeded lands in
    /// Preconditioner::ic_shift. When disabled the breakdown surfaces as
    /// cgspatial::not_spd_error carrying the pivot index.
    bool diagonal_shift_fallback = true;
};

/// Zero-fill incomplete Cholesky: factor entries on exactly the lower
/// pattern of A. Exact whenever the true factor has no fill.
Preconditioner ic0_build(const SparseMatrix& a, const Ic0Options& opts = {});

/// z = M^{-1} r.
DenseVector apply(const Preconditioner& m, const DenseVector& r);

}  // namespace cgspatial
