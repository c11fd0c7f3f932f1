#include "cgspatial/preconditioners.hpp"

#include <stdexcept>
#include <string>

#include "cgspatial/errors.hpp"
#include "cgspatial/solvers.hpp"

namespace cgspatial {

Preconditioner identity_build() { return {}; }

Preconditioner jacobi_build(const SparseMatrix& a) {
    if (a.n_rows != a.n_cols) {
        throw std::invalid_argument("jacobi_build: matrix not square");
    }
    Preconditioner m;
    m.kind = PreconditionerKind::Jacobi;
    m.diagonal.assign(a.n_rows, 0.0);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        bool found = false;
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            if (a.col_idx[p] == i) {
                m.diagonal[i] = a.values[p];
                found = true;
                break;
            }
        }
        if (!found || !(m.diagonal[i] > 0.0)) {
            throw std::invalid_argument(
                "jacobi_build: missing or non-positive diagonal at row " +
                std::to_string(i));
        }
    }
    return m;
}

namespace {

// Lower-triangular pattern of A, diagonal included.
void lower_pattern(const SparseMatrix& a, std::vector<std::size_t>& row_ptr,
                   std::vector<std::size_t>& col_idx) {
    row_ptr.assign(a.n_rows + 1, 0);
    col_idx.clear();
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            if (a.col_idx[p] > i) break;
            col_idx.push_back(a.col_idx[p]);
        }
        row_ptr[i + 1] = col_idx.size();
    }
}

}  // namespace

Preconditioner ic0_build(const SparseMatrix& a, const Ic0Options& opts) {
    if (a.n_rows != a.n_cols) {
        throw std::invalid_argument("ic0_build: matrix not square");
    }
    Preconditioner m;
    m.kind = PreconditionerKind::IncompleteCholesky;

    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col_idx;
    lower_pattern(a, row_ptr, col_idx);

    try {
        m.ic_factor = detail::cholesky_on_pattern(a, row_ptr, col_idx, 1.0);
        return m;
    } catch (const not_spd_error&) {
        if (!opts.diagonal_shift_fallback) throw;
    }

    for (double shift = 1e-3; shift <= 1e3; shift *= 2.0) {
        try {
            m.ic_factor =
                detail::cholesky_on_pattern(a, row_ptr, col_idx, 1.0 + shift);
            m.ic_shift = shift;
            return m;
        } catch (const not_spd_error&) {
            // keep doubling
        }
    }
    throw not_spd_error(
        "ic0_build: breakdown persists up to diagonal shift 1e3", a.n_rows);
}

DenseVector apply(const Preconditioner& m, const DenseVector& r) {
    switch (m.kind) {
        case PreconditionerKind::Identity:
            return r;
        case PreconditionerKind::Jacobi: {
            if (r.size() != m.diagonal.size()) {
                throw std::invalid_argument("apply: dimension mismatch");
            }
            DenseVector z(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) {
                z[i] = r[i] / m.diagonal[i];
            }
            return z;
        }
        case PreconditionerKind::IncompleteCholesky:
            return lower_tri_transpose_solve(m.ic_factor,
                                             lower_tri_solve(m.ic_factor, r));
    }
    throw std::logic_error("apply: unknown preconditioner kind");
}

}  // namespace cgspatial
