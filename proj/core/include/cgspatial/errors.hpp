#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cgspatial {

/// A factorization or triangular solve hit a zero/absent diagonal.
class singular_factor_error : public std::domain_error {
public:
    singular_factor_error(const std::string& what, std::size_t index)
        : std::domain_error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// An operation that requires symmetric positive definiteness observed a
/// non-positive pivot; index() names the offending pivot or row.
class not_spd_error : public std::domain_error {
public:
    not_spd_error(const std::string& what, std::size_t index)
        : std::domain_error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace cgspatial
