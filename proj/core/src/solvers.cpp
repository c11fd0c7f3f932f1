#include "cgspatial/solvers.hpp"

#include <lapacke.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cgspatial/errors.hpp"

namespace cgspatial {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void apply_into(const LinearOperator& a, const DenseVector& x, DenseVector& y) {
    a.apply(std::span<const double>(x), std::span<double>(y));
}

std::size_t effective_max_iter(const SolverConfig& cfg, std::size_t dim) {
    return cfg.max_iter > 0 ? cfg.max_iter : 10 * std::max<std::size_t>(dim, 1);
}

double true_residual_norm(const LinearOperator& a, const DenseVector& b,
                          const DenseVector& x, DenseVector& scratch) {
    apply_into(a, x, scratch);
    double acc = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = b[i] - scratch[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

LinearOperator matrix_operator(const SparseMatrix& a) {
    if (a.n_rows != a.n_cols) {
        throw std::invalid_argument("matrix_operator: matrix not square");
    }
    LinearOperator op;
    op.dim = a.n_rows;
    op.apply = [&a](std::span<const double> in, std::span<double> out) {
        for (std::size_t i = 0; i < a.n_rows; ++i) {
            double acc = 0.0;
            for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
                acc += a.values[p] * in[a.col_idx[p]];
            }
            out[i] = acc;
        }
    };
    return op;
}

std::pair<DenseVector, SolveReport> cg_solve(const LinearOperator& a,
                                             const DenseVector& b,
                                             const DenseVector& x0,
                                             const SolverConfig& cfg) {
    const auto t0 = Clock::now();
    const std::size_t n = a.dim;
    if (b.size() != n || x0.size() != n) {
        throw std::invalid_argument("cg_solve: dimension mismatch");
    }
    SolveReport report;
    DenseVector x = x0;
    DenseVector scratch(n);

    const double b_norm = norm2(b);
    const double threshold = cfg.tol * b_norm;
    if (b_norm == 0.0) {
        report.converged = true;
        report.wall_time = seconds_since(t0);
        return {DenseVector(n, 0.0), report};
    }

    DenseVector r(n);
    apply_into(a, x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    DenseVector p = r;
    DenseVector ap(n);

    double r_norm = norm2(r);
    if (cfg.record_history) {
        report.residual_history.push_back(r_norm);
        report.residual_vector_history.push_back(r);
        report.direction_history.push_back(p);
    }
    if (r_norm <= threshold) {
        report.converged = true;
        report.residual_norm = r_norm;
        report.wall_time = seconds_since(t0);
        return {x, report};
    }

    const std::size_t max_iter = effective_max_iter(cfg, n);
    // The recurrence residual can drift from b - Ax; once it reports
    // convergence we confirm against the true residual and keep
    // iterating under a tightened internal target if needed.
    double internal_threshold = threshold;

    for (std::size_t k = 1; k <= max_iter; ++k) {
        apply_into(a, p, ap);
        const double p_ap = dot(p, ap);
        if (!(p_ap > 0.0)) {
            throw not_spd_error(
                "cg_solve: non-positive curvature p'Ap at iteration " +
                    std::to_string(k),
                k);
        }
        const double alpha = dot(p, r) / p_ap;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        report.iterations = k;

        r_norm = norm2(r);
        if (cfg.record_history) report.residual_history.push_back(r_norm);

        if (r_norm <= internal_threshold) {
            const double true_norm = true_residual_norm(a, b, x, scratch);
            if (true_norm <= threshold) {
                report.converged = true;
                report.residual_norm = true_norm;
                report.wall_time = seconds_since(t0);
                return {x, report};
            }
            internal_threshold = 0.5 * r_norm;
        }

        const double tau = -dot(r, ap) / p_ap;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + tau * p[i];
        if (cfg.record_history) {
            report.residual_vector_history.push_back(r);
            report.direction_history.push_back(p);
        }
    }

    report.converged = false;
    report.residual_norm = true_residual_norm(a, b, x, scratch);
    report.wall_time = seconds_since(t0);
    return {x, report};
}

std::pair<DenseVector, SolveReport> pcg_solve(const LinearOperator& a,
                                              const Preconditioner& m,
                                              const DenseVector& b,
                                              const SolverConfig& cfg) {
    const auto t0 = Clock::now();
    const std::size_t n = a.dim;
    if (b.size() != n) {
        throw std::invalid_argument("pcg_solve: dimension mismatch");
    }
    SolveReport report;
    DenseVector x(n, 0.0);
    DenseVector scratch(n);

    const double b_norm = norm2(b);
    const double threshold = cfg.tol * b_norm;
    if (b_norm == 0.0) {
        report.converged = true;
        report.wall_time = seconds_since(t0);
        return {x, report};
    }

    DenseVector r = b;  // x0 = 0
    DenseVector z = cgspatial::apply(m, r);
    DenseVector p = z;
    DenseVector ap(n);
    double rz = dot(r, z);

    double r_norm = norm2(r);
    if (cfg.record_history) report.residual_history.push_back(r_norm);
    if (r_norm <= threshold) {
        report.converged = true;
        report.residual_norm = r_norm;
        report.wall_time = seconds_since(t0);
        return {x, report};
    }

    const std::size_t max_iter = effective_max_iter(cfg, n);
    double internal_threshold = threshold;

    for (std::size_t k = 1; k <= max_iter; ++k) {
        apply_into(a, p, ap);
        const double p_ap = dot(p, ap);
        if (!(p_ap > 0.0)) {
            throw not_spd_error(
                "pcg_solve: non-positive curvature p'Ap at iteration " +
                    std::to_string(k),
                k);
        }
        const double alpha = rz / p_ap;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        report.iterations = k;

        r_norm = norm2(r);
        if (cfg.record_history) report.residual_history.push_back(r_norm);

        if (r_norm <= internal_threshold) {
            const double true_norm = true_residual_norm(a, b, x, scratch);
            if (true_norm <= threshold) {
                report.converged = true;
                report.residual_norm = true_norm;
                report.wall_time = seconds_since(t0);
                return {x, report};
            }
            internal_threshold = 0.5 * r_norm;
        }

        z = cgspatial::apply(m, r);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    report.converged = false;
    report.residual_norm = true_residual_norm(a, b, x, scratch);
    report.wall_time = seconds_since(t0);
    return {x, report};
}

std::pair<DenseVector, SolveReport> cgls_solve(const SparseMatrix& x_mat,
                                               const DenseVector& y,
                                               const SolverConfig& cfg) {
    const auto t0 = Clock::now();
    if (y.size() != x_mat.n_rows) {
        throw std::invalid_argument("cgls_solve: rhs length mismatch");
    }
    const std::size_t cols = x_mat.n_cols;
    SolveReport report;

    DenseVector v(cols, 0.0);
    DenseVector r = y;                       // y - X v
    DenseVector s = spmv_transpose(x_mat, r);  // X'(y - X v)
    DenseVector p = s;

    const double s0_norm = norm2(s);
    const double threshold = cfg.tol * s0_norm;
    if (s0_norm == 0.0) {
        report.converged = true;
        report.wall_time = seconds_since(t0);
        return {v, report};
    }

    double gamma = s0_norm * s0_norm;
    const std::size_t max_iter = effective_max_iter(cfg, cols);
    double internal_threshold = threshold;

    for (std::size_t k = 1; k <= max_iter; ++k) {
        const DenseVector q = spmv(x_mat, p);
        const double qq = dot(q, q);
        if (qq == 0.0) break;  // p in the null space; stationary
        const double alpha = gamma / qq;
        for (std::size_t i = 0; i < cols; ++i) v[i] += alpha * p[i];
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha * q[i];
        s = spmv_transpose(x_mat, r);
        const double gamma_next = dot(s, s);
        const double s_norm = std::sqrt(gamma_next);
        report.iterations = k;
        if (cfg.record_history) report.residual_history.push_back(s_norm);

        if (s_norm <= internal_threshold) {
            // Recompute the normal residual from v to discount drift.
            DenseVector true_r = spmv(x_mat, v);
            for (std::size_t i = 0; i < true_r.size(); ++i) {
                true_r[i] = y[i] - true_r[i];
            }
            const double true_norm = norm2(spmv_transpose(x_mat, true_r));
            if (true_norm <= threshold) {
                report.converged = true;
                report.residual_norm = true_norm;
                report.wall_time = seconds_since(t0);
                return {v, report};
            }
            internal_threshold = 0.5 * s_norm;
        }

        const double beta = gamma_next / gamma;
        gamma = gamma_next;
        for (std::size_t i = 0; i < cols; ++i) p[i] = s[i] + beta * p[i];
    }

    DenseVector true_r = spmv(x_mat, v);
    for (std::size_t i = 0; i < true_r.size(); ++i) true_r[i] = y[i] - true_r[i];
    report.residual_norm = norm2(spmv_transpose(x_mat, true_r));
    report.converged = report.residual_norm <= threshold;
    report.wall_time = seconds_since(t0);
    return {v, report};
}

SymbolicFactor symbolic_cholesky(const SparseMatrix& pattern) {
    if (pattern.n_rows != pattern.n_cols) {
        throw std::invalid_argument("symbolic_cholesky: matrix not square");
    }
    const std::size_t n = pattern.n_rows;
    SymbolicFactor sym;
    sym.elimination_tree.assign(n, -1);

    // Elimination tree by ancestor path compression (Liu's algorithm,
    // as in Davis, "Direct Methods for Sparse Linear Systems").
    std::vector<std::ptrdiff_t> ancestor(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = pattern.row_ptr[i]; p < pattern.row_ptr[i + 1];
             ++p) {
            std::ptrdiff_t j = static_cast<std::ptrdiff_t>(pattern.col_idx[p]);
            while (j != -1 && j < static_cast<std::ptrdiff_t>(i)) {
                const std::ptrdiff_t next = ancestor[j];
                ancestor[j] = static_cast<std::ptrdiff_t>(i);
                if (next == -1) {
                    sym.elimination_tree[j] = static_cast<std::ptrdiff_t>(i);
                }
                j = next;
            }
        }
    }

    // Row pattern of L: nodes reached from the lower entries of row i by
    // walking parents until the stamp marks them visited.
    sym.l_pattern.n = n;
    sym.l_pattern.row_ptr.assign(n + 1, 0);
    std::vector<std::size_t> stamp(n, static_cast<std::size_t>(-1));
    std::vector<std::size_t> reach;
    for (std::size_t i = 0; i < n; ++i) {
        reach.clear();
        stamp[i] = i;
        for (std::size_t p = pattern.row_ptr[i]; p < pattern.row_ptr[i + 1];
             ++p) {
            std::size_t j = pattern.col_idx[p];
            if (j >= i) continue;
            while (stamp[j] != i) {
                stamp[j] = i;
                reach.push_back(j);
                const std::ptrdiff_t parent = sym.elimination_tree[j];
                if (parent == -1) break;
                j = static_cast<std::size_t>(parent);
            }
        }
        std::sort(reach.begin(), reach.end());
        reach.push_back(i);  // diagonal
        sym.l_pattern.col_idx.insert(sym.l_pattern.col_idx.end(), reach.begin(),
                                     reach.end());
        sym.l_pattern.row_ptr[i + 1] = sym.l_pattern.col_idx.size();
    }

    sym.column_counts.assign(n, 0);
    for (std::size_t c : sym.l_pattern.col_idx) ++sym.column_counts[c];
    return sym;
}

namespace detail {

SparseMatrix cholesky_on_pattern(const SparseMatrix& a,
                                 const std::vector<std::size_t>& row_ptr,
                                 const std::vector<std::size_t>& col_idx,
                                 double diag_scale) {
    const std::size_t n = a.n_rows;
    SparseMatrix l;
    l.n_rows = n;
    l.n_cols = n;
    l.row_ptr = row_ptr;
    l.col_idx = col_idx;
    l.values.assign(col_idx.size(), 0.0);

    DenseVector work(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t begin = row_ptr[i];
        const std::size_t end = row_ptr[i + 1];
        if (begin == end || col_idx[end - 1] != i) {
            throw not_spd_error(
                "cholesky_on_pattern: missing diagonal in pattern row " +
                    std::to_string(i),
                i);
        }

        // Scatter the lower part of A's row i (pattern is a superset).
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            const std::size_t j = a.col_idx[p];
            if (j > i) break;
            work[j] = (j == i) ? a.values[p] * diag_scale : a.values[p];
        }

        // L(i,k) for each pattern column k < i, ascending.
        for (std::size_t q = begin; q + 1 < end; ++q) {
            const std::size_t k = col_idx[q];
            double acc = work[k];
            const std::size_t k_begin = l.row_ptr[k];
            const std::size_t k_end = l.row_ptr[k + 1];
            for (std::size_t t = k_begin; t + 1 < k_end; ++t) {
                acc -= l.values[t] * work[l.col_idx[t]];
            }
            work[k] = acc / l.values[k_end - 1];
        }

        double diag = work[i];
        for (std::size_t q = begin; q + 1 < end; ++q) {
            const double lik = work[col_idx[q]];
            diag -= lik * lik;
        }
        if (!(diag > 0.0)) {
            for (std::size_t q = begin; q < end; ++q) work[col_idx[q]] = 0.0;
            throw not_spd_error(
                "cholesky_on_pattern: non-positive pivot at row " +
                    std::to_string(i),
                i);
        }

        for (std::size_t q = begin; q + 1 < end; ++q) {
            l.values[q] = work[col_idx[q]];
            work[col_idx[q]] = 0.0;
        }
        l.values[end - 1] = std::sqrt(diag);
        work[i] = 0.0;
    }
    return l;
}

}  // namespace detail

SparseMatrix numeric_cholesky(const SparseMatrix& a, const SymbolicFactor& sym) {
    if (a.n_rows != a.n_cols) {
        throw std::invalid_argument("numeric_cholesky: matrix not square");
    }
    if (a.n_rows != sym.l_pattern.n) {
        throw std::invalid_argument(
            "numeric_cholesky: symbolic factor dimension mismatch");
    }
    return detail::cholesky_on_pattern(a, sym.l_pattern.row_ptr,
                                       sym.l_pattern.col_idx, 1.0);
}

DenseVector cholesky_solve(const SparseMatrix& l, const DenseVector& b) {
    return lower_tri_transpose_solve(l, lower_tri_solve(l, b));
}

namespace {

bool is_symmetric_dense(const DenseMatrix& a) {
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t j = i + 1; j < a.n_cols; ++j) {
            if (a.at(i, j) != a.at(j, i)) return false;
        }
    }
    return true;
}

}  // namespace

DenseVector dense_solve(const DenseMatrix& a, const DenseVector& b) {
    if (a.n_rows != a.n_cols) {
        throw std::invalid_argument("dense_solve: matrix not square");
    }
    constexpr std::size_t kSizeGuard = 20000;
    if (a.n_rows > kSizeGuard) {
        throw std::invalid_argument(
            "dense_solve: n = " + std::to_string(a.n_rows) +
            " exceeds the 20000 size guard");
    }
    if (b.size() != a.n_rows) {
        throw std::invalid_argument("dense_solve: rhs length mismatch");
    }
    const auto n = static_cast<lapack_int>(a.n_rows);
    std::vector<double> factor = a.data;
    DenseVector x = b;

    if (is_symmetric_dense(a)) {
        // Column-major view of a symmetric row-major buffer is the same
        // matrix, so dpotrf/dpotrs apply directly.
        lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n,
                                         factor.data(), n);
        if (info == 0) {
            info = LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', n, 1, factor.data(), n,
                                  x.data(), n);
            if (info != 0) {
                throw std::domain_error("dense_solve: dpotrs failed");
            }
            return x;
        }
        if (info < 0) throw std::domain_error("dense_solve: dpotrf bad arg");
        factor = a.data;  // not SPD, fall through to LU
        x = b;
    }

    // Column-major LU of the row-major buffer factors A^T; solving with
    // trans = 'T' then yields the solution of A x = b.
    std::vector<lapack_int> ipiv(a.n_rows);
    lapack_int info =
        LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, factor.data(), n, ipiv.data());
    if (info > 0) {
        throw std::domain_error("dense_solve: matrix is singular");
    }
    if (info < 0) throw std::domain_error("dense_solve: dgetrf bad arg");
    info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'T', n, 1, factor.data(), n,
                          ipiv.data(), x.data(), n);
    if (info != 0) throw std::domain_error("dense_solve: dgetrs failed");
    return x;
}

}  // namespace cgspatial
