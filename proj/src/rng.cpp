#include "aerotrack/rng.hpp"

#include <cmath>

namespace aerotrack {

Rng make_stream(std::uint64_t root_seed, std::string_view name, std::uint64_t index) {
  // FNV-1a over the name, mixed with the seed and index through a seed_seq.
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double normal(Rng& rng, double mean, double sigma) {
  if (sigma == 0.0) return mean;
  // Marsaglia polar method; one value per call keeps the stream stateless.
  double x, y, s;
  do {
    x = 2.0 * uniform01(rng) - 1.0;
    y = 2.0 * uniform01(rng) - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  return mean + sigma * x * std::sqrt(-2.0 * std::log(s) / s);
}

bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

}  // namespace aerotrack
