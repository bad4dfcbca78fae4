#pragma once

// Exact total-variation affinity eta = sum_x min(phi0(x), phi1(x)) for
// product-Bernoulli pairs (Bayes error = eta / 2).

#include <chernoff_sbm/dists.hpp>
#include <chernoff_sbm/error.hpp>
#include <chernoff_sbm/numeric.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace chernoff_sbm {

inline constexpr std::size_t kBruteForceMaxCoordinates = 20;
inline constexpr double kGroupedGridLimit = 1e7;

/// Enumerates all 2^n outcomes. Only for n <= 20.
inline double affinity_bruteforce(const HypothesisPair& pair) {
  const std::size_t n = pair.size();
  if (n > kBruteForceMaxCoordinates) {
    throw Error(Errc::TooLarge, "brute-force affinity limited to n <= 20, got " + std::to_string(n));
  }
  std::vector<double> l1_0(n), l0_0(n), l1_1(n), l0_1(n);
  for (std::size_t j = 0; j < n; ++j) {
    l1_0[j] = std::log(pair.p0()[j]);
    l0_0[j] = std::log1p(-pair.p0()[j]);
    l1_1[j] = std::log(pair.p1()[j]);
    l0_1[j] = std::log1p(-pair.p1()[j]);
  }
  CompensatedSum acc;
  const std::uint64_t outcomes = std::uint64_t{1} << n;
  for (std::uint64_t x = 0; x < outcomes; ++x) {
    double log0 = 0.0;
    double log1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if ((x >> j) & 1U) {
        log0 += l1_0[j];
        log1 += l1_1[j];
      } else {
        log0 += l0_0[j];
        log1 += l0_1[j];
      }
    }
    acc.add(std::exp(std::min(log0, log1)));
  }
  return acc.value();
}

struct AffinityResult {
  double eta;
  double log_eta;
};

namespace detail {

/// Prefix/suffix log-masses of one binomial group under both hypotheses.
struct GroupTables {
  std::int64_t count;
  std::vector<double> logpmf0;
  std::vector<double> logpmf1;
  double llr_base;   // log phi0/phi1 at x = 0: count * log(q0 / q1)
  double llr_slope;  // increment per success: log(p0 q1 / (p1 q0))

  GroupTables(const Group& g)
      : count(g.count),
        logpmf0(binomial_log_pmf_table(g.count, g.p0)),
        logpmf1(binomial_log_pmf_table(g.count, g.p1)),
        llr_base(static_cast<double>(g.count) * (std::log1p(-g.p0) - std::log1p(-g.p1))),
        llr_slope(logit(g.p0) - logit(g.p1)) {}

  double llr(std::int64_t x) const { return llr_base + static_cast<double>(x) * llr_slope; }
};

/// log of sum_{x < k} exp(table[x]) for k = 0..size (index k holds the
/// prefix of the first k entries).
inline std::vector<double> log_prefix(const std::vector<double>& table) {
  std::vector<double> out(table.size() + 1, -std::numeric_limits<double>::infinity());
  LogSumExp acc;
  for (std::size_t k = 0; k < table.size(); ++k) {
    acc.add(table[k]);
    out[k + 1] = acc.value();
  }
  return out;
}

/// log of sum_{x >= k} exp(table[x]) for k = 0..size.
inline std::vector<double> log_suffix(const std::vector<double>& table) {
  std::vector<double> out(table.size() + 1, -std::numeric_limits<double>::infinity());
  LogSumExp acc;
  for (std::size_t k = table.size(); k-- > 0;) {
    acc.add(table[k]);
    out[k] = acc.value();
  }
  return out;
}

}  // namespace detail

/// Grid cells the grouped method enumerates: the product of (count + 1) over
/// all informative groups except the largest, which is summed in closed form.
inline double grouped_grid_cells(const GroupedPair& grouped) {
  std::vector<std::int64_t> counts;
  for (const auto& g : grouped.groups()) {
    if (g.p0 != g.p1) counts.push_back(g.count);
  }
  if (counts.empty()) return 1.0;
  const auto largest = std::max_element(counts.begin(), counts.end());
  double cells = 1.0;
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it != largest) cells *= static_cast<double>(*it + 1);
  }
  return cells;
}

/// Exact affinity through per-group success counts (the sufficient
/// statistic within a group). Groups with p0 == p1 contribute a common factor
/// and drop out. The remaining groups are enumerated as a count grid except
/// the largest one: for fixed counts elsewhere the log-likelihood ratio is
/// monotone in that group's count, so its sum splits at one threshold into a
/// prefix of one binomial and a suffix of the other.
inline AffinityResult affinity_grouped(const GroupedPair& grouped) {
  std::vector<detail::GroupTables> tables;
  for (const auto& g : grouped.groups()) {
    if (g.p0 != g.p1) tables.emplace_back(g);
  }
  if (tables.empty()) return {1.0, 0.0};
  const double cells = grouped_grid_cells(grouped);
  if (cells > kGroupedGridLimit) {
    throw Error(Errc::GridTooLarge, "grouped affinity grid has " + std::to_string(cells) +
                                        " cells (limit 1e7)");
  }
  auto last_it = std::max_element(tables.begin(), tables.end(),
                                  [](const auto& a, const auto& b) { return a.count < b.count; });
  std::iter_swap(last_it, tables.end() - 1);
  const detail::GroupTables& last = tables.back();
  const std::size_t outer = tables.size() - 1;

  const auto prefix0 = detail::log_prefix(last.logpmf0);
  const auto prefix1 = detail::log_prefix(last.logpmf1);
  const auto suffix0 = detail::log_suffix(last.logpmf0);
  const auto suffix1 = detail::log_suffix(last.logpmf1);

  // For x in the last group, phi0 >= phi1 iff outer_llr + last.llr(x) >= 0.
  // With positive slope that set is {x >= t}; with negative slope {x < t}.
  auto first_at_or_above = [&](double outer_llr) {
    std::int64_t lo = 0;
    std::int64_t hi = last.count + 1;
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (outer_llr + last.llr(mid) >= 0.0) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  };
  auto first_below = [&](double outer_llr) {
    std::int64_t lo = 0;
    std::int64_t hi = last.count + 1;
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (outer_llr + last.llr(mid) < 0.0) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  };

  std::vector<std::int64_t> x(outer, 0);
  LogSumExp total;
  while (true) {
    double log0 = 0.0;
    double log1 = 0.0;
    double outer_llr = 0.0;
    for (std::size_t g = 0; g < outer; ++g) {
      const auto xi = static_cast<std::size_t>(x[g]);
      log0 += tables[g].logpmf0[xi];
      log1 += tables[g].logpmf1[xi];
      outer_llr += tables[g].llr(x[g]);
    }
    if (last.llr_slope > 0) {
      const auto t = static_cast<std::size_t>(first_at_or_above(outer_llr));
      total.add(log1 + suffix1[t]);  // x >= t: phi1 is the smaller mass
      total.add(log0 + prefix0[t]);
    } else {
      const auto t = static_cast<std::size_t>(first_below(outer_llr));
      total.add(log1 + prefix1[t]);  // x < t: phi1 is the smaller mass
      total.add(log0 + suffix0[t]);
    }
    std::size_t g = 0;
    for (; g < outer; ++g) {
      if (++x[g] <= tables[g].count) break;
      x[g] = 0;
    }
    if (g == outer) break;
  }
  const double log_eta = std::min(0.0, total.value());
  return {std::exp(log_eta), log_eta};
}

inline AffinityResult affinity_grouped(const HypothesisPair& pair) {
  return affinity_grouped(group(pair));
}

/// Exact affinity for a per-coordinate pair: enumeration for small n,
/// grouped counts otherwise.
inline AffinityResult affinity(const HypothesisPair& pair) {
  if (pair.size() <= 12) {
    const double eta = affinity_bruteforce(pair);
    return {eta, std::log(eta)};
  }
  return affinity_grouped(group(pair));
}

inline AffinityResult affinity(const GroupedPair& grouped) { return affinity_grouped(grouped); }

inline double bayes_error(const HypothesisPair& pair) { return 0.5 * affinity(pair).eta; }
inline double bayes_error(const GroupedPair& grouped) { return 0.5 * affinity(grouped).eta; }

inline double tv_distance(const HypothesisPair& pair) { return 1.0 - affinity(pair).eta; }
inline double tv_distance(const GroupedPair& grouped) { return 1.0 - affinity(grouped).eta; }

}  // namespace chernoff_sbm
