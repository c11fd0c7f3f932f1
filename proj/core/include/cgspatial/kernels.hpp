#pragma once

#include <vector>

#include "cgspatial/sparse.hpp"

namespace cgspatial {

/// Planar coordinates in units of 1,000 km (the sinusoidal projection
/// target) or abstract unit-square coordinates for simulated data.
struct Location {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Location& a, const Location& b);

enum class KernelFamily { Exponential };

/// Stationary covariance function. Only the exponential family
/// sigma2 * exp(-phi * d) is implemented; the enum leaves room for a
/// Matern extension without interface change.
struct CovarianceKernel {
    KernelFamily family = KernelFamily::Exponential;
    double sigma2 = 1.0;  // process variance, > 0
    double phi = 1.0;     // decay rate per unit distance, > 0
};

/// Validate kernel parameters; throws std::invalid_argument.
void validate(const CovarianceKernel& kernel);

/// Sinusoidal (equal-area) projection of geographic coordinates to
/// planar units of 1,000 km, mean Earth radius 6371 km:
///   x = R * lon_rad * cos(lat_rad), y = R * lat_rad.
/// Throws std::invalid_argument for lon outside [-180, 180] or lat
/// outside [-90, 90].
Location sinusoidal_project(double lon_deg, double lat_deg);

/// Covariance between two locations.
double cov(const CovarianceKernel& kernel, const Location& s1,
           const Location& s2);

/// Dense cross-covariance matrix, element (i, j) = cov(kernel, s1[i], s2[j]).
/// Intended for small neighbor blocks and test oracles.
DenseMatrix cov_matrix(const CovarianceKernel& kernel,
                       const std::vector<Location>& s1,
                       const std::vector<Location>& s2);

}  // namespace cgspatial
