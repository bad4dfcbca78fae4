#pragma once

// Chernoff alpha-divergence and information for product-Bernoulli pairs, the
// non-asymptotic sandwich bounds on the total-variation affinity built from
// them, and the tilted-measure Monte-Carlo estimator of the affinity.

#include <chernoff_sbm/dists.hpp>
#include <chernoff_sbm/error.hpp>
#include <chernoff_sbm/golden.hpp>
#include <chernoff_sbm/numeric.hpp>
#include <chernoff_sbm/parallel.hpp>
#include <chernoff_sbm/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace chernoff_sbm {

namespace detail {

inline std::vector<Group> as_groups(const HypothesisPair& pair) {
  std::vector<Group> out;
  out.reserve(pair.size());
  for (std::size_t j = 0; j < pair.size(); ++j) out.push_back({pair.p0()[j], pair.p1()[j], 1});
  return out;
}

inline void check_alpha_open(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(Errc::AlphaOutOfRange, "alpha = " + std::to_string(alpha) + " is not in (0,1)");
  }
}

/// Per-coordinate quantities under the tilted Bernoulli law at `alpha`.
struct TiltedCoordinate {
  double log_mass;   // log(p0^(1-a) p1^a + q0^(1-a) q1^a), q = 1 - p
  double p_alpha;    // tilted success probability
  double log_ratio1; // log l(1) = log(p0 / p1)
  double log_ratio0; // log l(0) = log(q0 / q1)
};

inline TiltedCoordinate tilt(double p0, double p1, double alpha) {
  const double lp0 = std::log(p0);
  const double lp1 = std::log(p1);
  const double lq0 = std::log1p(-p0);
  const double lq1 = std::log1p(-p1);
  const double a = (1.0 - alpha) * lp0 + alpha * lp1;
  const double b = (1.0 - alpha) * lq0 + alpha * lq1;
  const double log_mass = log_add_exp(a, b);
  return {log_mass, std::exp(a - log_mass), lp0 - lp1, lq0 - lq1};
}

inline double alpha_divergence(std::span<const Group> groups, double alpha) {
  CompensatedSum acc;
  for (const auto& g : groups) {
    if (g.p0 == g.p1) continue;
    acc.add(-static_cast<double>(g.count) * tilt(g.p0, g.p1, alpha).log_mass);
  }
  return std::max(0.0, acc.value());
}

/// d/dalpha of the divergence, which equals the tilted mean of log l(Y).
inline double tilted_mean_log_ratio(std::span<const Group> groups, double alpha) {
  CompensatedSum acc;
  for (const auto& g : groups) {
    if (g.p0 == g.p1) continue;
    const auto t = tilt(g.p0, g.p1, alpha);
    acc.add(static_cast<double>(g.count) *
            (t.p_alpha * t.log_ratio1 + (1.0 - t.p_alpha) * t.log_ratio0));
  }
  return acc.value();
}

/// Sum of tilted variances of log l_j(Y_j); minus the second derivative.
inline double tilted_variance_sum(std::span<const Group> groups, double alpha) {
  CompensatedSum acc;
  for (const auto& g : groups) {
    if (g.p0 == g.p1) continue;
    const auto t = tilt(g.p0, g.p1, alpha);
    const double slope = t.log_ratio1 - t.log_ratio0;
    acc.add(static_cast<double>(g.count) * slope * slope * t.p_alpha * (1.0 - t.p_alpha));
  }
  return acc.value();
}

}  // namespace detail

inline double alpha_divergence(const HypothesisPair& pair, double alpha) {
  detail::check_alpha_open(alpha);
  return detail::alpha_divergence(detail::as_groups(pair), alpha);
}

inline double alpha_divergence(const GroupedPair& pair, double alpha) {
  detail::check_alpha_open(alpha);
  return detail::alpha_divergence(pair.groups(), alpha);
}

struct ChernoffInformation {
  double d_star;
  double alpha_star;
};

inline constexpr double kAlphaSearchLo = 1e-6;
inline constexpr double kAlphaSearchHi = 1.0 - 1e-6;
inline constexpr double kAlphaTolerance = 1e-12;

namespace detail {

inline ChernoffInformation chernoff_information(std::span<const Group> groups) {
  const bool degenerate =
      std::all_of(groups.begin(), groups.end(), [](const Group& g) { return g.p0 == g.p1; });
  if (degenerate) {
    throw Error(Errc::DegeneratePair,
                "hypotheses coincide on every coordinate; the supremum over alpha sits at the "
                "boundary");
  }
  auto objective = [&](double a) { return alpha_divergence(groups, a); };
  const auto coarse =
      golden_section_maximize(objective, kAlphaSearchLo, kAlphaSearchHi, kAlphaTolerance);

  // Golden section stalls once divergence values tie in floating point, which
  // for large n happens well before the alpha bracket reaches 1e-12. Finish
  // with safeguarded Newton steps on the (monotone) derivative.
  double alpha = coarse.x;
  double lo = kAlphaSearchLo;
  double hi = kAlphaSearchHi;
  for (int it = 0; it < 60; ++it) {
    const double slope = tilted_mean_log_ratio(groups, alpha);
    if (slope == 0.0) break;
    if (slope > 0) {
      lo = alpha;
    } else {
      hi = alpha;
    }
    const double curvature = tilted_variance_sum(groups, alpha);
    double next = alpha + slope / curvature;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - alpha);
    alpha = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * alpha) break;
  }
  return {alpha_divergence(groups, alpha), alpha};
}

}  // namespace detail

inline ChernoffInformation chernoff_information(const HypothesisPair& pair) {
  return detail::chernoff_information(detail::as_groups(pair));
}

inline ChernoffInformation chernoff_information(const GroupedPair& pair) {
  return detail::chernoff_information(pair.groups());
}

/// Success probability of the tilted law p0^(1-a) p1^a / normalizer. Exact
/// endpoints at alpha = 0 and 1.
inline double tilted_probability(double p0, double p1, double alpha) {
  if (alpha == 0.0) return p0;
  if (alpha == 1.0) return p1;
  if (p0 == p1) return p0;
  return detail::tilt(p0, p1, alpha).p_alpha;
}

/// Root-mean tilted variance of the per-coordinate log-likelihood ratio.
inline double sigma_bar(const GroupedPair& pair, double alpha) {
  detail::check_alpha_open(alpha);
  return std::sqrt(detail::tilted_variance_sum(pair.groups(), alpha) /
                   static_cast<double>(pair.size()));
}

inline double sigma_bar(const HypothesisPair& pair, double alpha) {
  detail::check_alpha_open(alpha);
  return std::sqrt(detail::tilted_variance_sum(detail::as_groups(pair), alpha) /
                   static_cast<double>(pair.size()));
}

/// Largest |log(p0 (1 - p1) / (p1 (1 - p0)))| over coordinates.
inline double c1_span(const GroupedPair& pair) {
  double span = 0.0;
  for (const auto& g : pair.groups()) span = std::max(span, std::abs(logit(g.p0) - logit(g.p1)));
  return span;
}

inline double c1_span(const HypothesisPair& pair) {
  double span = 0.0;
  for (std::size_t j = 0; j < pair.size(); ++j) {
    span = std::max(span, std::abs(logit(pair.p0()[j]) - logit(pair.p1()[j])));
  }
  return span;
}

/// Constants of the sandwich bound as functions of the span C1.
struct SandwichConstants {
  double c2;  // upper multiplier for the tilted expectation of g
  double c3;  // lower multiplier
  double c4;  // upper multiplier in the final affinity display
  double threshold;  // scale required before the lower bound applies

  static SandwichConstants from_span(double c1) {
    constexpr double kBerryEsseen = 0.56;
    const double root2pi = std::sqrt(2.0 * std::numbers::pi);
    SandwichConstants k{};
    k.c2 = std::max(2.0, 2.0 * std::pow(kBerryEsseen * c1, 1.5) * std::exp(root2pi * c1));
    k.c3 = std::exp(-2.0 * kBerryEsseen * root2pi * c1) / 30.0;
    k.c4 = 1.0 + 0.28 * c1;
    const double gate1 = std::max(root2pi * kBerryEsseen * c1, 2.0);
    const double gate2 =
        2.0 * std::pow(kBerryEsseen * c1, 1.5) * std::exp(root2pi * kBerryEsseen * c1);
    k.threshold = std::max(gate1, gate2);
    return k;
  }
};

/// Everything the sandwich bound needs, plus the bounds themselves. Linear
/// bounds underflow to zero for large n; the log_* fields never do.
struct BoundReport {
  std::int64_t n = 0;
  double d_star = 0.0;
  double alpha_star = 0.5;
  double sigma_bar = 0.0;
  double c1 = 0.0;
  double scale = 0.0;
  SandwichConstants constants{};
  double lower = 0.0;
  double upper = 0.0;
  double upper_c2 = 0.0;
  double log_lower = 0.0;
  double log_upper = 0.0;
  double log_upper_c2 = 0.0;
  bool lower_applicable = false;
};

inline BoundReport theorem1_bounds(const GroupedPair& pair) {
  const auto info = chernoff_information(pair);
  BoundReport r;
  r.n = pair.size();
  r.d_star = info.d_star;
  r.alpha_star = info.alpha_star;
  r.sigma_bar = sigma_bar(pair, info.alpha_star);
  r.c1 = c1_span(pair);
  r.scale = std::sqrt(static_cast<double>(r.n)) * r.sigma_bar * r.alpha_star *
            (1.0 - r.alpha_star);
  r.constants = SandwichConstants::from_span(r.c1);
  const double log_base = -std::log(r.scale) - r.d_star;
  r.log_lower = std::log(r.constants.c3) + log_base;
  r.log_upper = std::log(r.constants.c4) + log_base;
  r.log_upper_c2 = std::log(r.constants.c2) + log_base;
  r.lower = std::exp(r.log_lower);
  r.upper = std::exp(r.log_upper);
  r.upper_c2 = std::exp(r.log_upper_c2);
  r.lower_applicable = r.scale >= r.constants.threshold;
  return r;
}

inline BoundReport theorem1_bounds(const HypothesisPair& pair) {
  return theorem1_bounds(group(pair));
}

/// Classical lower bound on the affinity (twice the Bayes risk bound):
/// 1/2 min(e^{-a sqrt(n) s}, e^{-(1-a) sqrt(n) s}) e^{-D*}, returned in log form.
inline double shannon_log_lower_bound(const GroupedPair& pair) {
  const auto info = chernoff_information(pair);
  const double spread = std::sqrt(static_cast<double>(pair.size())) *
                        sigma_bar(pair, info.alpha_star);
  const double worst = std::max(info.alpha_star, 1.0 - info.alpha_star);
  return std::log(0.5) - worst * spread - info.d_star;
}

inline double shannon_lower_bound(const GroupedPair& pair) {
  return std::exp(shannon_log_lower_bound(pair));
}

inline double shannon_lower_bound(const HypothesisPair& pair) {
  return shannon_lower_bound(group(pair));
}

inline double bernoulli_log_partition(double theta) { return softplus(theta); }

/// Closed-form alpha-divergence for an exponential family with log-partition
/// A: sum_j (1-a) A(t0_j) + a A(t1_j) - A((1-a) t0_j + a t1_j).
template <typename LogPartition>
double expfam_alpha_divergence(LogPartition&& log_partition, std::span<const double> theta0,
                               std::span<const double> theta1, double alpha) {
  if (theta0.size() != theta1.size()) {
    throw Error(Errc::LengthMismatch, "natural parameter vectors differ in length");
  }
  auto eval = [&](double theta) {
    double value;
    try {
      value = std::invoke(log_partition, theta);
    } catch (const std::exception& e) {
      throw Error(Errc::EvaluationFailure, std::string("log-partition threw: ") + e.what());
    }
    if (!std::isfinite(value)) {
      throw Error(Errc::EvaluationFailure,
                  "log-partition not finite at theta = " + std::to_string(theta));
    }
    return value;
  };
  CompensatedSum acc;
  for (std::size_t j = 0; j < theta0.size(); ++j) {
    const double mixed = (1.0 - alpha) * theta0[j] + alpha * theta1[j];
    acc.add((1.0 - alpha) * eval(theta0[j]) + alpha * eval(theta1[j]) - eval(mixed));
  }
  return acc.value();
}

/// E[g_a(Z)] for Z ~ N(0, sigma^2), g_a(x) = exp(min(a x, (a - 1) x)).
/// Each half-line integral is exp(y^2) erfc(y) / 2 with y = sigma a / sqrt 2.
inline double gaussian_g_expectation(double sigma, double alpha) {
  if (!(sigma >= 0.0)) throw Error(Errc::OutOfRange, "sigma must be non-negative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(Errc::AlphaOutOfRange, "alpha not in [0,1]");
  const double y0 = sigma * alpha / std::numbers::sqrt2;
  const double y1 = sigma * (1.0 - alpha) / std::numbers::sqrt2;
  return 0.5 * erfcx(y0) + 0.5 * erfcx(y1);
}

inline double g_alpha(double x, double alpha) {
  return std::exp(std::min(alpha * x, (alpha - 1.0) * x));
}

struct MonteCarloAffinity {
  double estimate;
  double std_error;
  double log_estimate;
  double log_std_error;
  std::uint64_t samples;
};

/// Unbiased estimator of the affinity via the tilted representation
/// eta = e^{-D*} E_{Y ~ tilted}[g_{a*}(log l(Y))]. Sample i is drawn from the
/// counter stream (seed, i), and partial sums are merged in block order, so
/// the result does not depend on `threads`.
inline MonteCarloAffinity tilted_mc_affinity(const GroupedPair& pair, std::uint64_t samples,
                                             std::uint64_t seed, unsigned threads = 1) {
  if (samples == 0) throw Error(Errc::OutOfRange, "samples must be positive");
  const auto info = chernoff_information(pair);
  const double alpha = info.alpha_star;

  struct Sampler {
    std::vector<double> cdf;  // Binom(count, p_alpha) CDF over 0..count
    double log_ratio1;
    double log_ratio0;
    std::int64_t count;
  };
  std::vector<Sampler> samplers;
  for (const auto& g : pair.groups()) {
    if (g.p0 == g.p1) continue;
    const auto t = detail::tilt(g.p0, g.p1, alpha);
    Sampler s{{}, t.log_ratio1, t.log_ratio0, g.count};
    const auto logpmf = binomial_log_pmf_table(g.count, t.p_alpha);
    s.cdf.resize(logpmf.size());
    CompensatedSum acc;
    for (std::size_t x = 0; x < logpmf.size(); ++x) {
      acc.add(std::exp(logpmf[x]));
      s.cdf[x] = acc.value();
    }
    s.cdf.back() = std::max(s.cdf.back(), 1.0);
    samplers.push_back(std::move(s));
  }

  constexpr std::uint64_t kBlocks = 64;
  std::vector<CompensatedSum> sums(kBlocks);
  std::vector<CompensatedSum> squares(kBlocks);
  parallel_for(kBlocks, threads, [&](std::size_t block) {
    const std::uint64_t begin = samples * block / kBlocks;
    const std::uint64_t end = samples * (block + 1) / kBlocks;
    for (std::uint64_t i = begin; i < end; ++i) {
      CounterRng rng(seed, i);
      double log_l = 0.0;
      for (const auto& s : samplers) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(s.cdf.begin(), s.cdf.end(), u);
        const auto x = static_cast<double>(std::min<std::ptrdiff_t>(
            it - s.cdf.begin(), static_cast<std::ptrdiff_t>(s.count)));
        log_l += x * s.log_ratio1 + (static_cast<double>(s.count) - x) * s.log_ratio0;
      }
      const double g = g_alpha(log_l, alpha);
      sums[block].add(g);
      squares[block].add(g * g);
    }
  });
  CompensatedSum total;
  CompensatedSum total_sq;
  for (std::uint64_t b = 0; b < kBlocks; ++b) {
    total.add(sums[b].value());
    total_sq.add(squares[b].value());
  }
  const auto n = static_cast<double>(samples);
  const double mean = total.value() / n;
  double se_g = std::numeric_limits<double>::infinity();
  if (samples > 1) {
    const double var = std::max(0.0, (total_sq.value() - n * mean * mean) / (n - 1.0));
    se_g = std::sqrt(var / n);
  }
  MonteCarloAffinity out{};
  out.samples = samples;
  out.log_estimate = std::log(mean) - info.d_star;
  out.log_std_error = std::log(se_g) - info.d_star;
  out.estimate = std::exp(out.log_estimate);
  out.std_error = std::exp(out.log_std_error);
  return out;
}

inline MonteCarloAffinity tilted_mc_affinity(const HypothesisPair& pair, std::uint64_t samples,
                                             std::uint64_t seed, unsigned threads = 1) {
  return tilted_mc_affinity(group(pair), samples, seed, threads);
}

}  // namespace chernoff_sbm
