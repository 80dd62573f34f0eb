#pragma once

#include <cstdint>
#include <random>

namespace tshrink {

/// Generator used everywhere randomness is drawn.
using Rng = std::mt19937_64;

/// Named substreams. Every random quantity is drawn from a generator keyed by
/// (seed, stream, index) so adding draws to one stream never shifts another.
enum class Stream : std::uint64_t {
  Design = 1,
  Noise = 2,
  SignalPositions = 3,
  Gibbs = 4,
  MarginalKl = 5,
  Property = 6,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Independent generator for (seed, stream, index).
Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

}  // namespace tshrink
