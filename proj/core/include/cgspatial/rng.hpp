#pragma once

#include <cstdint>

namespace cgspatial {

/// Counter-based pseudorandom generator: output k is a fixed 64-bit mix
/// (the SplitMix64 finalizer) of seed and counter, so identical
/// (seed, counter) states produce identical sequences on every platform.
/// Not thread-safe; parallel consumers take independent substreams.
class RngState {
public:
    explicit RngState(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();

    /// Uniform draw strictly inside (0, 1).
    double uniform01();

    /// Standard normal via the Marsaglia polar method (no cached spare,
    /// the state stays a pure (seed, counter) pair).
    double normal();

    /// Gamma(shape, rate) via the Marsaglia-Tsang squeeze-rejection
    /// method, with the standard power boost for shape < 1.
    /// Throws std::invalid_argument unless shape > 0 and rate > 0.
    double gamma(double shape, double rate);

    /// Independent generator for stream index `stream`; derived
    /// generators never overlap the parent sequence.
    RngState substream(std::uint64_t stream) const;

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace cgspatial
