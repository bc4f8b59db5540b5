#include "gdim/rng.hpp"

#include <cmath>

namespace gdim {

std::uint64_t poisson_draw(std::mt19937_64& eng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 30.0) {
    const double u = uniform01(eng);
    double pk = std::exp(-mean);
    double cdf = pk;
    std::uint64_t k = 0;
    // The cap guards against u landing in the rounding gap above the final cdf.
    while (u >= cdf && k < 1000) {
      ++k;
      pk *= mean / static_cast<double>(k);
      cdf += pk;
    }
    return k;
  }
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(eng);
}

std::uint64_t binomial_draw(std::mt19937_64& eng, std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  if (trials <= 64) {
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) hits += uniform01(eng) < p ? 1 : 0;
    return hits;
  }
  std::binomial_distribution<std::uint64_t> dist(trials, p);
  return dist(eng);
}

}  // namespace gdim
