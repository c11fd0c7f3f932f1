#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cgspatial/kernels.hpp"
#include "cgspatial/rng.hpp"
#include "cgspatial/sparse.hpp"

namespace cgspatial {

struct SpatialDataset {
    std::vector<Location> locations;  // planar, units of 1,000 km
    DenseMatrix x;                    // n x p covariates
    DenseVector y;                    // response
    std::string coord_x_name = "sx";
    std::string coord_y_name = "sy";
    std::string response_name = "y";
    std::vector<std::string> covariate_names;

    std::size_t size() const { return y.size(); }
};

/// Column selection for read_csv. Either the geographic pair
/// (lon_col, lat_col), routed through the sinusoidal projection, or the
/// planar pair (x_col, y_col) taken as-is; exactly one pair must be set.
struct CsvSchema {
    std::optional<std::string> lon_col;
    std::optional<std::string> lat_col;
    std::optional<std::string> x_col;
    std::optional<std::string> y_col;
    std::string response_col;
    std::vector<std::string> covariate_cols;
};

/// Parse a header-row CSV ('.' decimals, UTF-8). Malformed numerics,
/// NA cells and missing columns raise std::runtime_error naming the
/// offending 1-based line.
SpatialDataset read_csv(const std::string& path, const CsvSchema& schema);

/// Full-precision CSV writer; read_csv(write_csv(ds)) reproduces every
/// value exactly.
void write_csv(const SpatialDataset& ds, const std::string& path);

/// Ground truth retained by the synthetic generator.
struct SimulationTruth {
    DenseVector beta;
    DenseVector w;  // latent field, input row order
    std::uint64_t seed = 0;
    double sigma2 = 1.0;
    double phi = 1.0;
    double delta2 = 1.0;
    std::size_t m = 0;
};

/// Synthetic dataset on the unit square: X = [1, standard-normal
/// columns], latent w drawn from the NNGP factors, y = X beta + w + eps
/// with eps ~ N(0, delta2 * sigma2 I).
std::pair<SpatialDataset, SimulationTruth> simulate_dataset(
    std::size_t n, std::size_t p, const CovarianceKernel& kernel,
    const DenseVector& beta, double delta2, std::size_t m, RngState& rng);

}  // namespace cgspatial
