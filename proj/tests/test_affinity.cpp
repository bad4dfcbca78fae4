#include <chernoff_sbm/affinity.hpp>
#include <chernoff_sbm/chernoff.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"

using namespace chernoff_sbm;

namespace {

// Direct binomial min-sum for one iid group.
double binomial_min_sum(double p, double q, int n) {
  double s = 0.0;
  for (int y = 0; y <= n; ++y) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
    const double a = lc + y * std::log(p) + (n - y) * std::log1p(-p);
    const double b = lc + y * std::log(q) + (n - y) * std::log1p(-q);
    s += std::exp(std::min(a, b));
  }
  return s;
}

}  // namespace

TEST(BruteForce, Examples) {
  for (std::size_t n : {1u, 5u, 12u}) {
    EXPECT_NEAR(affinity_bruteforce(HypothesisPair::iid(0.37, 0.37, n)), 1.0, 1e-14);
  }
  EXPECT_NEAR(affinity_bruteforce(validate_pair({0.55}, {0.45})), 0.9, 1e-15);
  try {
    affinity_bruteforce(HypothesisPair::iid(0.3, 0.7, 21));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooLarge);
  }
}

TEST(Grouped, OracleEquivalence) {
  CounterRng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = fixture::random_size(rng, 1, 14);
    const auto pair = trial % 2 ? fixture::random_pair(rng, n) : fixture::random_repetitive_pair(rng, n);
    const auto exact = affinity_grouped(group(pair));
    EXPECT_NEAR(exact.eta, affinity_bruteforce(pair), 1e-12);
    EXPECT_NEAR(std::exp(exact.log_eta), exact.eta, 1e-14);
  }
}

TEST(Grouped, SingleGroupMatchesBruteForce) {
  for (std::int64_t n = 1; n <= 14; ++n) {
    const auto g = GroupedPair::from_groups({Group{0.3, 0.7, n}});
    EXPECT_NEAR(affinity_grouped(g).eta, affinity_bruteforce(expand(g)), 1e-12);
  }
}

TEST(Grouped, BinomialSufficiency) {
  for (int n : {5, 10, 50, 200}) {
    const auto g = GroupedPair::from_groups({Group{0.3, 0.7, n}});
    EXPECT_NEAR(affinity_grouped(g).eta, binomial_min_sum(0.3, 0.7, n), 1e-12) << n;
  }
}

TEST(Grouped, IdenticalPair) {
  const auto r = affinity_grouped(GroupedPair::from_groups({Group{0.4, 0.4, 30}, Group{0.2, 0.2, 5}}));
  EXPECT_NEAR(r.eta, 1.0, 1e-14);
  EXPECT_NEAR(r.log_eta, 0.0, 1e-14);
}

TEST(Grouped, GridLimit) {
  // Reduced grid (all groups but the largest): 2001 * 2001 * 2001 > 1e7.
  std::vector<Group> groups{{0.3, 0.4, 2000}, {0.5, 0.6, 2000}, {0.2, 0.3, 2000}, {0.6, 0.5, 2500}};
  try {
    affinity_grouped(GroupedPair::from_groups(groups));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::GridTooLarge);
  }
  // K = 3 rows of a 600-node model stay exact.
  const auto k3 = GroupedPair::from_groups({Group{0.5, 0.3, 200}, Group{0.3, 0.5, 200}, Group{0.3, 0.2, 200}});
  EXPECT_LE(grouped_grid_cells(k3), kGroupedGridLimit);
  EXPECT_NO_THROW(affinity_grouped(k3));
}

TEST(Grouped, LogSpaceForTinyAffinity) {
  const auto r = affinity_grouped(GroupedPair::from_groups({Group{0.3, 0.7, 40000}}));
  EXPECT_EQ(r.eta, 0.0);
  const double d = -std::log(2 * std::sqrt(0.21));
  // log eta = -n D* - log(n) / 2 + O(1)
  EXPECT_NEAR(r.log_eta + 40000 * d + 0.5 * std::log(40000.0), 0.0, 2.0);
}

TEST(Grouped, MatchesMonteCarloOnLargeMixedPair) {
  const auto g = GroupedPair::from_groups({Group{0.3, 0.4, 150}, Group{0.5, 0.45, 200}, Group{0.2, 0.3, 90}});
  const auto exact = affinity_grouped(g);
  const auto mc = tilted_mc_affinity(g, 200'000, 9);
  EXPECT_LE(std::abs(mc.estimate - exact.eta), 4 * mc.std_error);
}

TEST(Affinity, SymmetryAndPermutation) {
  CounterRng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pair = fixture::random_pair(rng, fixture::random_size(rng, 2, 12));
    const double eta = affinity(pair).eta;
    EXPECT_EQ(affinity_bruteforce(pair), affinity_bruteforce(pair.swapped()));
    EXPECT_NEAR(affinity_grouped(pair.swapped()).eta, eta, 1e-14);
    std::vector<double> p0(pair.p0().begin(), pair.p0().end());
    std::vector<double> p1(pair.p1().begin(), pair.p1().end());
    std::vector<std::size_t> perm(p0.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<double> q0;
    std::vector<double> q1;
    for (auto j : perm) {
      q0.push_back(p0[j]);
      q1.push_back(p1[j]);
    }
    EXPECT_NEAR(affinity(validate_pair(q0, q1)).eta, eta, 1e-13);
  }
}

TEST(Affinity, BoundsConsistency) {
  CounterRng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pair = fixture::random_pair(rng, fixture::random_size(rng, 1, 14));
    const double eta = affinity(pair).eta;
    const auto info = chernoff_information(pair);
    EXPECT_LE(eta, std::exp(-info.d_star) + 1e-12);
    EXPECT_LE(shannon_lower_bound(pair), eta);
  }
}

TEST(BayesError, Examples) {
  EXPECT_NEAR(bayes_error(HypothesisPair::iid(0.2, 0.2, 4)), 0.5, 1e-15);
  EXPECT_NEAR(bayes_error(validate_pair({0.55}, {0.45})), 0.45, 1e-15);
  double previous = 0.5;
  for (std::size_t n = 1; n <= 14; ++n) {
    const double e = bayes_error(HypothesisPair::iid(0.55, 0.45, n));
    EXPECT_LE(e, previous + 1e-15) << n;
    previous = e;
  }
}

TEST(TotalVariation, Examples) {
  EXPECT_NEAR(tv_distance(HypothesisPair::iid(0.2, 0.2, 3)), 0.0, 1e-15);
  EXPECT_NEAR(tv_distance(validate_pair({0.55}, {0.45})), 0.1, 1e-15);
  EXPECT_NEAR(tv_distance(GroupedPair::from_groups({Group{0.55, 0.45, 1}})), 0.1, 1e-15);
}

// TV as the largest gap over all events, for n <= 3.
TEST(TotalVariation, SupremumOverEvents) {
  CounterRng rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = fixture::random_size(rng, 1, 3);
    const auto pair = fixture::random_pair(rng, n);
    const std::size_t outcomes = std::size_t{1} << n;
    std::vector<double> m0(outcomes);
    std::vector<double> m1(outcomes);
    for (std::size_t x = 0; x < outcomes; ++x) {
      m0[x] = std::exp(fixture::product_log_mass(pair.p0(), x));
      m1[x] = std::exp(fixture::product_log_mass(pair.p1(), x));
    }
    double sup = 0.0;
    for (std::uint64_t event = 0; event < (std::uint64_t{1} << outcomes); ++event) {
      double gap = 0.0;
      for (std::size_t x = 0; x < outcomes; ++x) {
        if ((event >> x) & 1U) gap += m0[x] - m1[x];
      }
      sup = std::max(sup, std::abs(gap));
    }
    EXPECT_NEAR(tv_distance(pair), sup, 1e-14);
  }
}
