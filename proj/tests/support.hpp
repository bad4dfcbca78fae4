#pragma once

#include <chernoff_sbm/dists.hpp>
#include <chernoff_sbm/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace chernoff_sbm::fixture {

// Probabilities in [lo, hi], at least one differing coordinate.
inline HypothesisPair random_pair(CounterRng& rng, std::size_t n, double lo = 0.05, double hi = 0.95) {
  std::vector<double> p0(n);
  std::vector<double> p1(n);
  for (std::size_t j = 0; j < n; ++j) {
    p0[j] = lo + (hi - lo) * rng.uniform();
    p1[j] = lo + (hi - lo) * rng.uniform();
  }
  return HypothesisPair::validate(std::move(p0), std::move(p1));
}

// Same, but coordinates drawn from a few values so grouping is non-trivial.
inline HypothesisPair random_repetitive_pair(CounterRng& rng, std::size_t n) {
  const double values[] = {0.1, 0.25, 0.4, 0.55, 0.7, 0.85};
  std::vector<double> p0(n);
  std::vector<double> p1(n);
  do {
    for (std::size_t j = 0; j < n; ++j) {
      p0[j] = values[rng.below(6)];
      p1[j] = values[rng.below(6)];
    }
  } while (p0 == p1);
  return HypothesisPair::validate(std::move(p0), std::move(p1));
}

inline std::size_t random_size(CounterRng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// log P(x) under a product-Bernoulli law, x given as a bit mask.
inline double product_log_mass(std::span<const double> p, std::uint64_t mask) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    s += ((mask >> j) & 1U) ? std::log(p[j]) : std::log1p(-p[j]);
  }
  return s;
}

}  // namespace chernoff_sbm::fixture
