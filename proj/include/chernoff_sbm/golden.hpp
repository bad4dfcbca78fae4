#pragma once

#include <cmath>

namespace chernoff_sbm {

struct GoldenResult {
  double x;
  double fx;
  double lo;
  double hi;
  int iterations;
};

/// Golden-section search for the maximizer of a unimodal function on [lo, hi].
/// Stops when the bracket is narrower than `tolerance` or when the interior
/// points stop moving in floating point.
template <typename F>
GoldenResult golden_section_maximize(F&& f, double lo, double hi, double tolerance,
                                     int max_iterations = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  for (; it < max_iterations && (hi - lo) > tolerance; ++it) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      if (!(c > lo && c < d)) break;
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      if (!(d > c && d < hi)) break;
      fd = f(d);
    }
  }
  const bool left = fc >= fd;
  return {left ? c : d, left ? fc : fd, lo, hi, it};
}

}  // namespace chernoff_sbm
