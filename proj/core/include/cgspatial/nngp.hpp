#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cgspatial/kernels.hpp"
#include "cgspatial/rng.hpp"
#include "cgspatial/sparse.hpp"

namespace cgspatial {

/// Modeling order plus, for each order position i, the (at most m)
/// nearest earlier-ordered positions. Neighbor lists are sorted
/// ascending by position; ties in distance break toward the lower
/// position. Position 0 has no neighbors.
struct NeighborSets {
    std::vector<std::size_t> order;    // order[k] = input index of the k-th point
    std::vector<std::size_t> offsets;  // length n + 1
    std::vector<std::size_t> indices;  // earlier order positions, flat
    std::size_t m = 0;

    /// Order positions whose neighbor set contains a zero-distance
    /// point; the small Cholesky in build_nngp_factors may fail there.
    std::vector<std::size_t> coincident_positions;

    std::size_t size() const { return order.size(); }
    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {indices.data() + offsets[i], offsets[i + 1] - offsets[i]};
    }
};

/// Sparse factors of the nearest-neighbor GP precision
/// (I - A)^T D^{-1} (I - A): strictly lower-triangular A with at most m
/// nonzeros per row, and the positive conditional variances D.
/// Everything is indexed in order positions, not input indices.
struct NngpFactors {
    SparseMatrix a_matrix;
    DenseVector d_diag;

    std::size_t size() const { return d_diag.size(); }
};

/// Deterministic default modeling order: ascending on x, ties on y,
/// remaining ties keep input order.
std::vector<std::size_t> build_order(const std::vector<Location>& locations);

enum class NeighborSearch {
    BruteForce,  // reference semantics, O(n^2)
    Grid,        // bucketed search, bitwise-identical output
};

NeighborSets build_neighbor_sets(const std::vector<Location>& locations,
                                 std::vector<std::size_t> order, std::size_t m,
                                 NeighborSearch search = NeighborSearch::Grid);

/// Row i of A solves C(N(i), N(i)) a = C(N(i), i); d[i] is the
/// conditional variance C(i,i) - C(i, N(i)) a. Throws
/// cgspatial::not_spd_error naming the order position whose neighbor
/// covariance block is numerically singular (e.g. coincident points).
NngpFactors build_nngp_factors(const CovarianceKernel& kernel,
                               const std::vector<Location>& locations,
                               const NeighborSets& nbrs);

/// (I - A)^T D^{-1} (I - A) v in three sparse passes; never forms the
/// product matrix.
DenseVector precision_matvec(const NngpFactors& f, const DenseVector& v);

/// Explicit sparse precision (I - A)^T D^{-1} (I - A); canonical CSR,
/// bitwise symmetric, at most n (m + 1)^2 nonzeros.
SparseMatrix assemble_precision(const NngpFactors& f);

/// One draw of w ~ N(0, C_nngp) via w = (I - A)^{-1} D^{1/2} z with z
/// standard normal, by sparse forward substitution.
DenseVector simulate_latent(const NngpFactors& f, RngState& rng);

}  // namespace cgspatial
