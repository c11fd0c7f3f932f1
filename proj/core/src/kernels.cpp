#include "cgspatial/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cgspatial {

namespace {
constexpr double kEarthRadiusKm = 6371.0;
}

double distance(const Location& a, const Location& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

void validate(const CovarianceKernel& kernel) {
    if (!(kernel.sigma2 > 0.0)) {
        throw std::invalid_argument("kernel: sigma2 must be > 0");
    }
    if (!(kernel.phi > 0.0)) {
        throw std::invalid_argument("kernel: phi must be > 0");
    }
}

Location sinusoidal_project(double lon_deg, double lat_deg) {
    if (!(lon_deg >= -180.0 && lon_deg <= 180.0)) {
        throw std::invalid_argument("sinusoidal_project: longitude " +
                                    std::to_string(lon_deg) +
                                    " outside [-180, 180]");
    }
    if (!(lat_deg >= -90.0 && lat_deg <= 90.0)) {
        throw std::invalid_argument("sinusoidal_project: latitude " +
                                    std::to_string(lat_deg) +
                                    " outside [-90, 90]");
    }
    const double lon_rad = lon_deg * std::numbers::pi / 180.0;
    const double lat_rad = lat_deg * std::numbers::pi / 180.0;
    return {kEarthRadiusKm * lon_rad * std::cos(lat_rad) / 1000.0,
            kEarthRadiusKm * lat_rad / 1000.0};
}

double cov(const CovarianceKernel& kernel, const Location& s1,
           const Location& s2) {
    return kernel.sigma2 * std::exp(-kernel.phi * distance(s1, s2));
}

DenseMatrix cov_matrix(const CovarianceKernel& kernel,
                       const std::vector<Location>& s1,
                       const std::vector<Location>& s2) {
    DenseMatrix c(s1.size(), s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        for (std::size_t j = 0; j < s2.size(); ++j) {
            c.at(i, j) = cov(kernel, s1[i], s2[j]);
        }
    }
    return c;
}

}  // namespace cgspatial
