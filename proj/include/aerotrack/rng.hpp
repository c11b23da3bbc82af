#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace aerotrack {

using Rng = std::mt19937_64;

/// Independent stream derived from a root seed and a stream name (plus an optional index,
/// e.g. an episode number). The derivation is stable across platforms.
Rng make_stream(std::uint64_t root_seed, std::string_view name, std::uint64_t index = 0);

/// Uniform in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Gaussian sample; sigma == 0 returns the mean without consuming randomness.
double normal(Rng& rng, double mean, double sigma);

bool bernoulli(Rng& rng, double p);

}  // namespace aerotrack
