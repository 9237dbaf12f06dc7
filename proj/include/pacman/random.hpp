#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace pacman {

using Rng = std::mt19937_64;

// Independent, reproducible stream derived from (seed, stream).
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

// Uniform double in [0, 1) built from the top 53 bits, so the draw sequence is
// identical across standard library implementations.
double uniform01(Rng& rng);

// Inverse-CDF draw from a discrete distribution. `probs` need not be exactly
// normalized; the last index absorbs rounding slack.
std::size_t sample_categorical(std::span<const double> probs, Rng& rng);

}  // namespace pacman
