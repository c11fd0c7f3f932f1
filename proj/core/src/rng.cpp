#include "cgspatial/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cgspatial {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Steele, Lea & Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngState::next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * kGolden);
}

double RngState::uniform01() {
    // 53 mantissa bits, offset by half an ulp to stay inside (0, 1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngState::normal() {
    while (true) {
        const double u = 2.0 * uniform01() - 1.0;
        const double v = 2.0 * uniform01() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

double RngState::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw std::invalid_argument("gamma: shape and rate must be > 0");
    }
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0, rate);
        return g * std::pow(uniform01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) {
            return d * v / rate;
        }
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v / rate;
        }
    }
}

RngState RngState::substream(std::uint64_t stream) const {
    // Substream seeds live in a mixed key space disjoint from the raw
    // counter outputs of the parent.
    return RngState(mix64(seed_ ^ mix64(stream + 1) ^ 0xA3EC4E93C5A1D9E7ull));
}

}  // namespace cgspatial
