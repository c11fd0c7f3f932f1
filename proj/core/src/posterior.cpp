#include "cgspatial/posterior.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cgspatial/errors.hpp"
#include "cgspatial/preconditioners.hpp"

namespace cgspatial {

std::string method_name(SolveMethod method) {
    switch (method) {
        case SolveMethod::Cgsparse: return "cgsparse";
        case SolveMethod::IdentityPcg: return "identity-pcg";
        case SolveMethod::JacobiPcg: return "jacobi-pcg";
        case SolveMethod::Ic0Pcg: return "ic0-pcg";
        case SolveMethod::Cgls: return "cgls";
        case SolveMethod::SymbolicCholesky: return "symbolic-cholesky";
        case SolveMethod::Dense: return "dense";
    }
    return "unknown";
}

std::optional<SolveMethod> parse_method(std::string_view name) {
    if (name == "cgsparse" || name == "cg") return SolveMethod::Cgsparse;
    if (name == "identity-pcg" || name == "identity" || name == "pcg-identity")
        return SolveMethod::IdentityPcg;
    if (name == "jacobi-pcg" || name == "jacobi" || name == "pcg-jacobi")
        return SolveMethod::JacobiPcg;
    if (name == "ic0-pcg" || name == "ic0" || name == "pcg-ic0")
        return SolveMethod::Ic0Pcg;
    if (name == "cgls") return SolveMethod::Cgls;
    if (name == "symbolic-cholesky" || name == "cholesky")
        return SolveMethod::SymbolicCholesky;
    if (name == "dense") return SolveMethod::Dense;
    return std::nullopt;
}

std::vector<SolveMethod> all_methods() {
    return {SolveMethod::Cgsparse,  SolveMethod::IdentityPcg,
            SolveMethod::JacobiPcg, SolveMethod::Ic0Pcg,
            SolveMethod::Cgls,      SolveMethod::SymbolicCholesky,
            SolveMethod::Dense};
}

std::string method_names_joined() {
    std::string out;
    for (SolveMethod m : all_methods()) {
        if (!out.empty()) out += ", ";
        out += method_name(m);
    }
    return out;
}

SolverConfig posterior_solver_config() {
    SolverConfig cfg;
    cfg.tol = 1e-10;
    cfg.max_iter = 0;
    return cfg;
}

LinearOperator StackedSystem::matrix_op() const {
    return matrix_operator(normal_matrix);
}

LinearOperator StackedSystem::implicit_op() const {
    LinearOperator op;
    op.dim = dim();
    op.apply = [this](std::span<const double> in, std::span<double> out) {
        const double inv_d2 = 1.0 / delta2;
        // s = X v_beta + v_w
        DenseVector s(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = in[p + i];
            for (std::size_t j = 0; j < p; ++j) acc += x.at(i, j) * in[j];
            s[i] = acc;
        }
        // beta block: (1/d2) X's + Vb^{-1} v_beta
        for (std::size_t j = 0; j < p; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += x.at(i, j) * s[i];
            acc *= inv_d2;
            if (!flat_beta_prior) {
                for (std::size_t k = 0; k < p; ++k) {
                    acc += v_beta_inv.at(j, k) * in[k];
                }
            }
            out[j] = acc;
        }
        // w block: (1/d2) s + C^{-1} v_w
        DenseVector vw(in.begin() + static_cast<std::ptrdiff_t>(p), in.end());
        DenseVector cw = precision_matvec(factors, vw);
        for (std::size_t i = 0; i < n; ++i) {
            out[p + i] = inv_d2 * s[i] + cw[i];
        }
    };
    return op;
}

namespace {

// Dense lower Cholesky for the small p x p prior covariance.
DenseMatrix dense_cholesky_lower(const DenseMatrix& a) {
    const std::size_t k = a.n_rows;
    DenseMatrix l(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        double d = a.at(j, j);
        for (std::size_t q = 0; q < j; ++q) d -= l.at(j, q) * l.at(j, q);
        if (!(d > 0.0)) {
            throw std::invalid_argument(
                "assemble_stacked: v_beta is not positive definite");
        }
        l.at(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < k; ++i) {
            double s = a.at(i, j);
            for (std::size_t q = 0; q < j; ++q) s -= l.at(i, q) * l.at(j, q);
            l.at(i, j) = s / l.at(j, j);
        }
    }
    return l;
}

// Rows of L^{-1} by forward-solving L z = e_j, column by column.
DenseMatrix dense_lower_inverse(const DenseMatrix& l) {
    const std::size_t k = l.n_rows;
    DenseMatrix inv(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        DenseVector z(k, 0.0);
        z[j] = 1.0;
        for (std::size_t i = j; i < k; ++i) {
            double s = z[i];
            for (std::size_t q = j; q < i; ++q) s -= l.at(i, q) * z[q];
            z[i] = s / l.at(i, i);
        }
        for (std::size_t i = 0; i < k; ++i) inv.at(i, j) = z[i];
    }
    return inv;
}

}  // namespace

StackedSystem assemble_stacked(const DenseMatrix& x, const DenseVector& y,
                               NngpFactors factors, double delta2,
                               const NigPrior& prior) {
    if (!(delta2 > 0.0)) {
        throw std::invalid_argument("assemble_stacked: delta2 must be > 0");
    }
    const std::size_t n = y.size();
    const std::size_t p = x.n_cols;
    if (x.n_rows != n || factors.size() != n) {
        throw std::invalid_argument("assemble_stacked: dimension mismatch");
    }
    if (!prior.flat()) {
        if (prior.v_beta->n_rows != p || prior.v_beta->n_cols != p ||
            prior.mu_beta.size() != p) {
            throw std::invalid_argument(
                "assemble_stacked: prior dimensions do not match p");
        }
    }

    StackedSystem sys;
    sys.n = n;
    sys.p = p;
    sys.delta2 = delta2;
    sys.x = x;
    sys.flat_beta_prior = prior.flat();
    sys.v_beta_inv = DenseMatrix(p, p);

    DenseMatrix l_beta_inv;  // p x p, informative prior only
    if (!prior.flat()) {
        const DenseMatrix l = dense_cholesky_lower(*prior.v_beta);
        l_beta_inv = dense_lower_inverse(l);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < p; ++k) {
                    acc += l_beta_inv.at(k, i) * l_beta_inv.at(k, j);
                }
                sys.v_beta_inv.at(i, j) = acc;
            }
        }
    }

    const double inv_delta = 1.0 / std::sqrt(delta2);
    const double inv_d2 = 1.0 / delta2;

    // Stacked rectangular design and response.
    const std::size_t prior_rows = prior.flat() ? 0 : p;
    const std::size_t total_rows = n + prior_rows + n;
    TripletList design;
    design.reserve(n * (p + 1) + prior_rows * p + factors.a_matrix.nnz() + n);
    sys.stacked_response.assign(total_rows, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            design.push_back({i, j, x.at(i, j) * inv_delta});
        }
        design.push_back({i, p + i, inv_delta});
        sys.stacked_response[i] = y[i] * inv_delta;
    }
    if (!prior.flat()) {
        for (std::size_t r = 0; r < p; ++r) {
            for (std::size_t c = 0; c < p; ++c) {
                design.push_back({n + r, c, l_beta_inv.at(r, c)});
            }
            double acc = 0.0;
            for (std::size_t c = 0; c < p; ++c) {
                acc += l_beta_inv.at(r, c) * prior.mu_beta[c];
            }
            sys.stacked_response[n + r] = acc;
        }
    }
    const std::size_t w_base = n + prior_rows;
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = 1.0 / std::sqrt(factors.d_diag[i]);
        for (std::size_t q = factors.a_matrix.row_ptr[i];
             q < factors.a_matrix.row_ptr[i + 1]; ++q) {
            design.push_back(
                {w_base + i, p + factors.a_matrix.col_idx[q],
                 -factors.a_matrix.values[q] * scale});
        }
        design.push_back({w_base + i, p + i, scale});
    }
    sys.stacked_design = from_triplets(design, total_rows, p + n);

    // rhs = X*' y* (zero rows of y* contribute nothing).
    sys.rhs = spmv_transpose(sys.stacked_design, sys.stacked_response);

    // Assembled normal matrix, block layout [beta | w].
    const SparseMatrix precision = assemble_precision(factors);
    TripletList normal;
    normal.reserve(p * p + 2 * n * p + precision.nnz() + n);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                acc += x.at(r, i) * x.at(r, j);
            }
            double v = acc * inv_d2;
            if (!prior.flat()) v += sys.v_beta_inv.at(i, j);
            normal.push_back({i, j, v});
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double v = x.at(i, j) * inv_d2;
            normal.push_back({j, p + i, v});
            normal.push_back({p + i, j, v});
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t q = precision.row_ptr[i]; q < precision.row_ptr[i + 1];
             ++q) {
            normal.push_back({p + i, p + precision.col_idx[q],
                              precision.values[q]});
        }
        normal.push_back({p + i, p + i, inv_d2});
    }
    sys.normal_matrix = from_triplets(normal, p + n, p + n);
    sys.factors = std::move(factors);
    return sys;
}

namespace {

// Dense expansion for the dense strategy; mirrors the dense_solve size
// guard instead of the to_dense test guard.
DenseMatrix expand_for_dense(const SparseMatrix& a) {
    if (a.n_rows > 20000) {
        throw std::invalid_argument(
            "dense strategy: n = " + std::to_string(a.n_rows) +
            " exceeds the 20000 size guard");
    }
    DenseMatrix d(a.n_rows, a.n_cols);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t q = a.row_ptr[i]; q < a.row_ptr[i + 1]; ++q) {
            d.at(i, a.col_idx[q]) = a.values[q];
        }
    }
    return d;
}

SolveReport direct_report(const SparseMatrix& a, const DenseVector& rhs,
                          const DenseVector& x, double wall_time) {
    SolveReport report;
    DenseVector ax = spmv(a, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        const double d = rhs[i] - ax[i];
        acc += d * d;
    }
    report.residual_norm = std::sqrt(acc);
    report.converged = std::isfinite(report.residual_norm);
    report.wall_time = wall_time;
    return report;
}

// Solve the normal system with the selected strategy. For CGLS the
// row-space right-hand side must be supplied; every other strategy uses
// the normal-space rhs.
std::pair<DenseVector, SolveReport> solve_system(const StackedSystem& sys,
                                                 SolveMethod method,
                                                 const DenseVector& normal_rhs,
                                                 const DenseVector* row_rhs,
                                                 const SolverConfig& cfg) {
    using Clock = std::chrono::steady_clock;
    switch (method) {
        case SolveMethod::Cgsparse: {
            const LinearOperator op = sys.matrix_op();
            return cg_solve(op, normal_rhs, DenseVector(sys.dim(), 0.0), cfg);
        }
        case SolveMethod::IdentityPcg: {
            const LinearOperator op = sys.matrix_op();
            return pcg_solve(op, identity_build(), normal_rhs, cfg);
        }
        case SolveMethod::JacobiPcg: {
            const LinearOperator op = sys.matrix_op();
            return pcg_solve(op, jacobi_build(sys.normal_matrix), normal_rhs,
                             cfg);
        }
        case SolveMethod::Ic0Pcg: {
            const LinearOperator op = sys.matrix_op();
            return pcg_solve(op, ic0_build(sys.normal_matrix), normal_rhs,
                             cfg);
        }
        case SolveMethod::Cgls: {
            if (row_rhs == nullptr) {
                throw std::invalid_argument(
                    "solve_system: cgls needs the stacked right-hand side");
            }
            return cgls_solve(sys.stacked_design, *row_rhs, cfg);
        }
        case SolveMethod::SymbolicCholesky: {
            const auto t0 = Clock::now();
            const SymbolicFactor sym = symbolic_cholesky(sys.normal_matrix);
            const SparseMatrix l = numeric_cholesky(sys.normal_matrix, sym);
            DenseVector x = cholesky_solve(l, normal_rhs);
            const double dt =
                std::chrono::duration<double>(Clock::now() - t0).count();
            SolveReport report = direct_report(sys.normal_matrix, normal_rhs,
                                               x, dt);
            return {std::move(x), report};
        }
        case SolveMethod::Dense: {
            const auto t0 = Clock::now();
            const DenseMatrix dense = expand_for_dense(sys.normal_matrix);
            DenseVector x = dense_solve(dense, normal_rhs);
            const double dt =
                std::chrono::duration<double>(Clock::now() - t0).count();
            SolveReport report = direct_report(sys.normal_matrix, normal_rhs,
                                               x, dt);
            return {std::move(x), report};
        }
    }
    throw std::logic_error("solve_system: unknown method");
}

}  // namespace

std::pair<DenseVector, SolveReport> posterior_mean(const StackedSystem& sys,
                                                   SolveMethod method,
                                                   const SolverConfig& cfg) {
    return solve_system(sys, method, sys.rhs, &sys.stacked_response, cfg);
}

std::pair<double, double> ab_star(const StackedSystem& sys,
                                  const NigPrior& prior,
                                  const DenseVector& mu_star) {
    if (mu_star.size() != sys.dim()) {
        throw std::invalid_argument("ab_star: mu_star length mismatch");
    }
    const double a_star = prior.a + 0.5 * static_cast<double>(sys.n);
    // y*'y* carries both the scaled data term and the prior-mean rows,
    // and mu*' X*'y* equals mu*' V*^{-1} mu* at the solution.
    const double y_star_sq = dot(sys.stacked_response, sys.stacked_response);
    const double b_star = prior.b + 0.5 * (y_star_sq - dot(mu_star, sys.rhs));
    if (!(b_star > 0.0)) {
        throw std::domain_error(
            "ab_star: non-positive b* (likely an unconverged posterior mean)");
    }
    return {a_star, b_star};
}

double sample_sigma2(double a_star, double b_star, RngState& rng) {
    if (!(a_star > 0.0) || !(b_star > 0.0)) {
        throw std::invalid_argument("sample_sigma2: a*, b* must be > 0");
    }
    return 1.0 / rng.gamma(a_star, b_star);
}

PosteriorDraw sample_gamma(const StackedSystem& sys,
                           const DenseVector& mu_star, double sigma2,
                           SolveMethod method, RngState& rng,
                           const SolverConfig& cfg) {
    if (!(sigma2 > 0.0)) {
        throw std::invalid_argument("sample_gamma: sigma2 must be > 0");
    }
    if (mu_star.size() != sys.dim()) {
        throw std::invalid_argument("sample_gamma: mu_star length mismatch");
    }
    const double sd = std::sqrt(sigma2);
    DenseVector eta(sys.stacked_design.n_rows);
    for (double& e : eta) e = sd * rng.normal();

    DenseVector v;
    SolveReport report;
    if (method == SolveMethod::Cgls) {
        std::tie(v, report) = cgls_solve(sys.stacked_design, eta, cfg);
    } else {
        const DenseVector normal_rhs = spmv_transpose(sys.stacked_design, eta);
        std::tie(v, report) = solve_system(sys, method, normal_rhs, &eta, cfg);
    }

    PosteriorDraw draw;
    draw.sigma2 = sigma2;
    draw.tau2 = sys.delta2 * sigma2;
    draw.solver_converged = report.converged;
    draw.solver_iterations = report.iterations;
    draw.beta.assign(mu_star.begin(),
                     mu_star.begin() + static_cast<std::ptrdiff_t>(sys.p));
    draw.w.assign(mu_star.begin() + static_cast<std::ptrdiff_t>(sys.p),
                  mu_star.end());
    for (std::size_t j = 0; j < sys.p; ++j) draw.beta[j] += v[j];
    for (std::size_t i = 0; i < sys.n; ++i) draw.w[i] += v[sys.p + i];
    return draw;
}

FitResult fit(const DenseMatrix& x, const DenseVector& y,
              const std::vector<Location>& locations, std::size_t m,
              const CovarianceKernel& kernel, double delta2,
              const NigPrior& prior, SolveMethod method, std::size_t n_draws,
              RngState& rng, const SolverConfig& cfg) {
    const std::size_t n = y.size();
    if (x.n_rows != n || locations.size() != n) {
        throw std::invalid_argument("fit: dimension mismatch");
    }
    const std::size_t p = x.n_cols;

    const std::vector<std::size_t> order = build_order(locations);
    const NeighborSets nbrs = build_neighbor_sets(locations, order, m);
    NngpFactors factors = build_nngp_factors(kernel, locations, nbrs);

    DenseMatrix x_ord(n, p);
    DenseVector y_ord(n);
    for (std::size_t i = 0; i < n; ++i) {
        y_ord[i] = y[order[i]];
        for (std::size_t j = 0; j < p; ++j) {
            x_ord.at(i, j) = x.at(order[i], j);
        }
    }

    const StackedSystem sys =
        assemble_stacked(x_ord, y_ord, std::move(factors), delta2, prior);

    auto [mu_sys, mu_report] = posterior_mean(sys, method, cfg);
    const auto [a_star, b_star] = ab_star(sys, prior, mu_sys);

    FitResult result;
    result.summary.a_star = a_star;
    result.summary.b_star = b_star;
    result.summary.solve_reports.push_back(mu_report);

    // Map the w block back to input row order.
    result.summary.mu_star.assign(sys.dim(), 0.0);
    for (std::size_t j = 0; j < p; ++j) result.summary.mu_star[j] = mu_sys[j];
    for (std::size_t i = 0; i < n; ++i) {
        result.summary.mu_star[p + order[i]] = mu_sys[p + i];
    }

    result.draws.reserve(n_draws);
    for (std::size_t k = 0; k < n_draws; ++k) {
        RngState sub = rng.substream(k);
        const double sigma2 = sample_sigma2(a_star, b_star, sub);
        PosteriorDraw draw = sample_gamma(sys, mu_sys, sigma2, method, sub, cfg);
        DenseVector w_input(n);
        for (std::size_t i = 0; i < n; ++i) w_input[order[i]] = draw.w[i];
        draw.w = std::move(w_input);
        result.draws.push_back(std::move(draw));
    }
    return result;
}

}  // namespace cgspatial
