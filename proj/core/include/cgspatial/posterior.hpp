#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgspatial/kernels.hpp"
#include "cgspatial/nngp.hpp"
#include "cgspatial/rng.hpp"
#include "cgspatial/solvers.hpp"
#include "cgspatial/sparse.hpp"

namespace cgspatial {

/// Normal-Inverse-Gamma prior on (gamma, sigma2). A missing v_beta means
/// the flat (noninformative) beta prior: zero precision contribution.
struct NigPrior {
    DenseVector mu_beta;                 // length p; ignored under flat prior
    std::optional<DenseMatrix> v_beta;   // p x p SPD
    double a = 2.0;                      // IG shape, > 0
    double b = 1.0;                      // IG scale, > 0

    bool flat() const { return !v_beta.has_value(); }
};

/// The seven solve strategies the benchmark compares.
enum class SolveMethod {
    Cgsparse,          // plain CG on the assembled sparse normal matrix
    IdentityPcg,       // PCG, identity preconditioner
    JacobiPcg,         // PCG, diagonal preconditioner
    Ic0Pcg,            // PCG, zero-fill incomplete Cholesky
    Cgls,              // least-squares CG on the stacked rectangular system
    SymbolicCholesky,  // symbolic + numeric sparse Cholesky direct solve
    Dense,             // dense reference solve
};

/// Canonical CLI/table name ("cgsparse", "jacobi-pcg", ...).
std::string method_name(SolveMethod method);

/// Accepts canonical names and the common short aliases
/// ("cg", "jacobi", "pcg-jacobi", "cholesky", ...). Case-sensitive.
std::optional<SolveMethod> parse_method(std::string_view name);

std::vector<SolveMethod> all_methods();

/// List of valid method names, for usage errors.
std::string method_names_joined();

/// The posterior normal-equation system X*' X* mu* = X*' y* in block
/// layout [beta | w]:
///
///   X* stacks (1/delta) [X : I_n], the beta-prior square-root rows
///   (informative prior only), and the latent-prior rows
///   D^{-1/2} (I - A); y* stacks y/delta, the prior-mean rows, and
///   zeros. The assembled normal matrix carries the NNGP precision
///   directly in its w-block, so the w-block diagonal reads
///   C^{-1} + (1/delta^2) I.
///
/// Both an assembled sparse matrix and an implicit block matvec are
/// kept; they agree to rounding. The rectangular stacked form exists
/// for the least-squares strategy.
struct StackedSystem {
    std::size_t n = 0;  // observations
    std::size_t p = 0;  // covariates
    double delta2 = 1.0;

    DenseMatrix x;            // n x p design
    NngpFactors factors;      // latent precision factors
    DenseMatrix v_beta_inv;   // p x p prior precision, zero when flat
    bool flat_beta_prior = true;

    SparseMatrix normal_matrix;   // (p+n) x (p+n)
    DenseVector rhs;              // X*' y*
    SparseMatrix stacked_design;  // X*
    DenseVector stacked_response; // y*

    std::size_t dim() const { return n + p; }

    /// Operator backed by the assembled normal matrix (borrows *this).
    LinearOperator matrix_op() const;

    /// Matrix-free operator applying the Eq-block matvec through X and
    /// the NNGP factors without touching the assembled matrix
    /// (borrows *this).
    LinearOperator implicit_op() const;
};

/// Build the stacked system. Throws std::invalid_argument on
/// non-positive delta2 or inconsistent dimensions.
StackedSystem assemble_stacked(const DenseMatrix& x, const DenseVector& y,
                               NngpFactors factors, double delta2,
                               const NigPrior& prior);

/// Solver settings used on the posterior path; tighter than the generic
/// default so the seven strategies agree to 1e-6 per entry.
SolverConfig posterior_solver_config();

/// Solve X*' X* mu* = X*' y* with the selected strategy. Non-convergence
/// is reported on the SolveReport, not thrown; the iterate is still
/// returned.
std::pair<DenseVector, SolveReport> posterior_mean(
    const StackedSystem& sys, SolveMethod method,
    const SolverConfig& cfg = posterior_solver_config());

/// Posterior IG parameters: a* = a + n/2 and
/// b* = b + (y*'y* - mu*' X*'y*) / 2, which never forms V*^{-1}.
/// Throws std::domain_error when b* is non-positive (an unconverged
/// mu* upstream).
std::pair<double, double> ab_star(const StackedSystem& sys,
                                  const NigPrior& prior,
                                  const DenseVector& mu_star);

/// One inverse-gamma draw: 1 / Gamma(shape a_star, rate b_star), so
/// E[sigma2] = b_star / (a_star - 1).
double sample_sigma2(double a_star, double b_star, RngState& rng);

/// One joint draw of (beta, w) given sigma2.
struct PosteriorDraw {
    double sigma2 = 0.0;
    double tau2 = 0.0;  // delta2 * sigma2
    DenseVector beta;
    DenseVector w;
    bool solver_converged = true;
    std::size_t solver_iterations = 0;
};

/// gamma = mu* + v where v solves X*'X* v = X*' eta and eta is a
/// N(0, sigma2 I) draw over the rows of the stacked design; then
/// gamma | sigma2 ~ N(mu*, sigma2 V*) exactly up to solver tolerance.
PosteriorDraw sample_gamma(const StackedSystem& sys,
                           const DenseVector& mu_star, double sigma2,
                           SolveMethod method, RngState& rng,
                           const SolverConfig& cfg = posterior_solver_config());

struct PosteriorSummary {
    DenseVector mu_star;  // length p + n; w block in input row order
    double a_star = 0.0;
    double b_star = 0.0;
    std::vector<SolveReport> solve_reports;  // [0] is the mu* solve
};

struct FitResult {
    PosteriorSummary summary;
    std::vector<PosteriorDraw> draws;
};

/// End-to-end pipeline: modeling order, neighbor sets, NNGP factors,
/// stacked system, mu*, (a*, b*), then n_draws joint draws. Each draw
/// consumes an independent RNG substream keyed by its index, so the
/// draw sequence is deterministic for a given (seed, method). All
/// w-indexed outputs are returned in input row order.
FitResult fit(const DenseMatrix& x, const DenseVector& y,
              const std::vector<Location>& locations, std::size_t m,
              const CovarianceKernel& kernel, double delta2,
              const NigPrior& prior, SolveMethod method, std::size_t n_draws,
              RngState& rng,
              const SolverConfig& cfg = posterior_solver_config());

}  // namespace cgspatial
