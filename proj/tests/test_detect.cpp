#include <chernoff_sbm/detect.hpp>
#include <chernoff_sbm/sbm.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace chernoff_sbm;

namespace {

Eigen::MatrixXd two_block(double a, double b) {
  Eigen::MatrixXd p(2, 2);
  p << a, b, b, a;
  return p;
}

// Disjoint cliques of the given sizes, planted labels 0, 1, ...
std::pair<Graph, Labeling> cliques(std::vector<std::size_t> sizes) {
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  Labeling labels;
  std::int64_t offset = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const auto s = static_cast<std::int64_t>(sizes[c]);
    for (std::int64_t i = 0; i < s; ++i) {
      labels.push_back(static_cast<int>(c));
      for (std::int64_t j = 0; j < i; ++j) edges.emplace_back(offset + i, offset + j);
    }
    offset += s;
  }
  return {Graph::from_edges(static_cast<std::size_t>(offset), edges), labels};
}

Labeling random_labels(CounterRng& rng, std::size_t n, std::size_t k) {
  Labeling z(n);
  for (auto& v : z) v = static_cast<int>(rng.below(k));
  return z;
}

double brute_force_mis(const Labeling& z_hat, const Labeling& z, std::size_t k) {
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = z.size();
  do {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < z.size(); ++i) wrong += perm[z_hat[i]] != z[i];
    best = std::min(best, wrong);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(z.size());
}

}  // namespace

TEST(Mis, Examples) {
  EXPECT_EQ(mis(Labeling{0, 1, 1, 0}, Labeling{0, 1, 1, 0}, 2), 0.0);
  EXPECT_EQ(mis(Labeling{1, 0, 0, 1}, Labeling{0, 1, 1, 0}, 2), 0.0);
  EXPECT_DOUBLE_EQ(mis(Labeling{0, 0, 0, 1}, Labeling{0, 0, 1, 1}, 2), 0.25);
  try {
    mis(Labeling{0, 1}, Labeling{0}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
  EXPECT_THROW(mis(Labeling{0, 2}, Labeling{0, 1}, 2), Error);
}

TEST(Mis, PermutationInvariantAndMatchesEnumeration) {
  CounterRng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng.below(6);
    const std::size_t n = 1 + rng.below(40);
    const auto z = random_labels(rng, n, k);
    const auto z_hat = random_labels(rng, n, k);
    std::vector<int> pi(k);
    std::iota(pi.begin(), pi.end(), 0);
    rng.shuffle(pi);
    Labeling permuted(n);
    for (std::size_t i = 0; i < n; ++i) permuted[i] = pi[z_hat[i]];
    EXPECT_EQ(mis(permuted, z, k), mis(z_hat, z, k));
    EXPECT_DOUBLE_EQ(mis(z_hat, z, k), brute_force_mis(z_hat, z, k));
  }
}

TEST(Mis, AssignmentPathForLargeK) {
  CounterRng rng(32);
  const std::size_t k = 12;
  const auto z = random_labels(rng, 300, k);
  std::vector<int> pi(k);
  std::iota(pi.begin(), pi.end(), 0);
  rng.shuffle(pi);
  Labeling z_hat(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) z_hat[i] = pi[z[i]];
  EXPECT_EQ(mis(z_hat, z, k), 0.0);
  z_hat[0] = (z_hat[0] + 1) % static_cast<int>(k);
  EXPECT_DOUBLE_EQ(mis(z_hat, z, k), 1.0 / 300.0);
}

TEST(Assignment, MatchesEnumeration) {
  CounterRng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const auto k = static_cast<Eigen::Index>(1 + rng.below(5));
    Eigen::MatrixXd cost(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) cost(i, j) = std::floor(10 * rng.uniform());
    }
    const auto a = solve_assignment(cost);
    double got = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) got += cost(i, a[static_cast<std::size_t>(i)]);
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double s = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) s += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(got, best);
  }
}

TEST(MatchLabels, Examples) {
  const Labeling ref{0, 0, 1, 1, 2, 2};
  EXPECT_EQ(match_labels(ref, ref, 3), ref);
  EXPECT_EQ(match_labels(ref, Labeling{2, 2, 0, 0, 1, 1}, 3), ref);
  CounterRng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_labels(rng, 25, 3);
    const auto b = random_labels(rng, 25, 3);
    const auto matched = match_labels(a, b, 3);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) agree += matched[i] == a[i];
    EXPECT_DOUBLE_EQ(1.0 - static_cast<double>(agree) / 25.0, brute_force_mis(b, a, 3));
  }
}

TEST(EstimateP, Examples) {
  const std::vector<int> dense{0, 1, 1, 0};
  const Graph g = Graph::from_dense(2, dense);
  const auto est = estimate_p(g, Labeling{0, 0}, 1);
  EXPECT_EQ(est.raw(0, 0), 1.0);
  EXPECT_EQ(est.clipped(0, 0), 1.0 - 1.0 / 4.0);

  const Graph empty = Graph::from_edges(5, {});
  const auto zero = estimate_p(empty, Labeling{0, 1, 0, 1, 0}, 2);
  EXPECT_TRUE((zero.raw.array() == 0.0).all());
  EXPECT_TRUE((zero.clipped.array() == 1.0 / 25.0).all());
}

TEST(EstimateP, EmptyCellsUseGlobalDensity) {
  const auto [g, z] = cliques({4, 4});
  Labeling lab(8, 0);
  lab[7] = 1;  // community 1 has a single node: no within pairs
  const auto est = estimate_p(g, lab, 2);
  ASSERT_EQ(est.empty_cells.size(), 1u);
  EXPECT_EQ(est.empty_cells[0], std::make_pair(1, 1));
  EXPECT_DOUBLE_EQ(est.raw(1, 1), 12.0 / 28.0);
}

TEST(EstimateP, SymmetricAndOrderInvariant) {
  Eigen::MatrixXd p(3, 3);
  p << 0.5, 0.2, 0.3, 0.2, 0.6, 0.25, 0.3, 0.25, 0.45;
  const auto model = SbmModel::balanced(90, p);
  const Graph g = sample_adjacency(model, 4);
  Labeling z(model.labels().begin(), model.labels().end());
  const auto est = estimate_p(g, z, 3);
  EXPECT_EQ(est.raw, est.raw.transpose());

  std::vector<std::size_t> perm(90);
  std::iota(perm.begin(), perm.end(), 0);
  CounterRng rng(1);
  rng.shuffle(perm);
  const Graph h = g.induced(perm);
  Labeling zp(90);
  for (std::size_t k = 0; k < 90; ++k) zp[k] = z[perm[k]];
  EXPECT_EQ(estimate_p(h, zp, 3).raw, est.raw);
}

TEST(EstimateP, ConcentratesOnTrueLabels) {
  const auto model = SbmModel::balanced(2000, two_block(0.55, 0.45));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto est = estimate_p(sample_adjacency(model, seed), model.labels(), 2);
    EXPECT_LE((est.raw - model.connectivity()).cwiseAbs().maxCoeff(), 0.01);
  }
}

TEST(LrClassify, SingleCommunityAndTies) {
  const auto [g, z] = cliques({5, 5});
  std::vector<std::size_t> all(10);
  std::iota(all.begin(), all.end(), 0);
  const auto one = lr_classify(g, all, all, Labeling(10, 0), Eigen::MatrixXd::Constant(1, 1, 0.3));
  EXPECT_EQ(one, Labeling(10, 0));
  const auto tied = lr_classify(g, all, all, z, Eigen::MatrixXd::Constant(2, 2, 0.3));
  EXPECT_EQ(tied, Labeling(10, 0));
}

TEST(LrClassify, GenieRecovery) {
  const std::size_t n = 200;
  const auto model = SbmModel::balanced(n, two_block(0.9, 0.1));
  std::vector<std::size_t> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  const std::size_t row[1] = {n};
  int correct = 0;
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    CounterRng rng(trial, 99);
    const int k = static_cast<int>(trial % 2);
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.bernoulli(model.connectivity()(k, model.labels()[j]))) {
        edges.emplace_back(static_cast<std::int64_t>(n), static_cast<std::int64_t>(j));
      }
    }
    const Graph g = Graph::from_edges(n + 1, edges);
    correct += lr_classify(g, row, cols, model.labels(), model.connectivity())[0] == k;
  }
  EXPECT_GE(correct, 990);
}

// Sufficient-statistic scores equal direct per-edge sums.
TEST(LrClassify, SufficientStatisticsMatchDirectScores) {
  CounterRng rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + rng.below(3);
    const std::size_t n = 20 + rng.below(180);
    Eigen::MatrixXd p(k, k);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a; b < k; ++b) p(a, b) = p(b, a) = 0.05 + 0.9 * rng.uniform();
    }
    const auto model = SbmModel::create(random_labels(rng, n, k), p);
    const Graph g = sample_adjacency(model, trial);
    const Labeling z(model.labels().begin(), model.labels().end());
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const auto got = lr_classify(g, all, all, z, p);
    const LogProbabilities logs(p);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::int64_t> b(k, 0);
      std::vector<std::int64_t> m(k, 0);
      int best = 0;
      double best_score = -1e300;
      for (std::size_t c = 0; c < k; ++c) {
        double direct = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double a = g.has_edge(i, j) ? 1.0 : 0.0;
          direct += a * std::log(p(c, z[j])) + (1 - a) * std::log(1 - p(c, z[j]));
          if (c == 0) {
            ++m[z[j]];
            b[z[j]] += g.has_edge(i, j);
          }
        }
        EXPECT_NEAR(logs.score(static_cast<Eigen::Index>(c), b, m), direct, 1e-9 * (1 + std::abs(direct)));
        if (direct > best_score) {
          best_score = direct;
          best = static_cast<int>(c);
        }
      }
      EXPECT_EQ(got[i], best);
    }
  }
}

TEST(LrClassify, RelabelInvariance) {
  Eigen::MatrixXd p(3, 3);
  p << 0.5, 0.2, 0.3, 0.2, 0.6, 0.25, 0.3, 0.25, 0.45;
  const auto model = SbmModel::balanced(120, p);
  const Graph g = sample_adjacency(model, 7);
  std::vector<std::size_t> all(120);
  std::iota(all.begin(), all.end(), 0);
  const Labeling z(model.labels().begin(), model.labels().end());
  const auto base = lr_classify(g, all, all, z, p);
  const int pi[3] = {2, 0, 1};
  Eigen::MatrixXd q(3, 3);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) q(pi[a], pi[b]) = p(a, b);
  }
  Labeling zp(120);
  for (std::size_t i = 0; i < 120; ++i) zp[i] = pi[z[i]];
  const auto moved = lr_classify(g, all, all, zp, q);
  for (std::size_t i = 0; i < 120; ++i) EXPECT_EQ(moved[i], pi[base[i]]);
}

TEST(Lanczos, MatchesDenseSolver) {
  Eigen::MatrixXd p(3, 3);
  p << 0.5, 0.1, 0.2, 0.1, 0.4, 0.05, 0.2, 0.05, 0.6;
  const auto model = SbmModel::balanced(150, p);
  const Graph g = sample_adjacency(model, 2);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(150, 150);
  for (std::size_t i = 0; i < 150; ++i) {
    for (auto j : g.neighbors(i)) dense(static_cast<Eigen::Index>(i), j) = 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  std::vector<double> mags(es.eigenvalues().data(), es.eigenvalues().data() + 150);
  std::sort(mags.begin(), mags.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  const auto top = top_eigenpairs(g, 3, 5);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(top.values[c], mags[static_cast<std::size_t>(c)], 1e-8 * std::abs(mags[0]));
    const Eigen::VectorXd r = dense * top.vectors.col(c) - top.values[c] * top.vectors.col(c);
    EXPECT_LE(r.norm(), 1e-7 * std::abs(mags[0]));
  }
  EXPECT_LE(top.max_residual, 1e-8);
}

TEST(Lanczos, RepeatedEigenvaluesViaRestart) {
  const auto [g, z] = cliques({50, 50});
  const auto top = top_eigenpairs(g, 2, 1);
  EXPECT_NEAR(top.values[0], 49.0, 1e-9);
  EXPECT_NEAR(top.values[1], 49.0, 1e-9);
  EXPECT_NEAR(std::abs(top.vectors.col(0).dot(top.vectors.col(1))), 0.0, 1e-9);
}

TEST(KMeans, SeparatedBlobs) {
  Eigen::MatrixXd pts(60, 2);
  CounterRng rng(4);
  for (int i = 0; i < 60; ++i) {
    const double cx = (i % 3) * 10.0;
    pts(i, 0) = cx + rng.uniform();
    pts(i, 1) = -cx + rng.uniform();
  }
  const auto res = kmeans(pts, 3, 8);
  Labeling truth(60);
  for (int i = 0; i < 60; ++i) truth[i] = i % 3;
  EXPECT_EQ(mis(res.labels, truth, 3), 0.0);
  EXPECT_EQ(kmeans(pts, 3, 8).labels, res.labels);
  EXPECT_THROW(kmeans(pts, 61, 8), Error);
}

TEST(SpectralCluster, TwoCliques) {
  const auto [g, z] = cliques({50, 50});
  EXPECT_EQ(mis(spectral_cluster(g, 2, 3), z, 2), 0.0);
}

TEST(SpectralCluster, DegreeTruncationDropsHubs) {
  // Two cliques plus a hub joined to everything; the hub is truncated away.
  auto [g, z] = cliques({30, 30});
  auto edges = g.edges();
  std::vector<std::pair<std::int64_t, std::int64_t>> more(edges.begin(), edges.end());
  for (std::int64_t i = 0; i < 60; ++i) more.emplace_back(60, i);
  const Graph h = Graph::from_edges(61, more);
  SpectralOptions opt;
  opt.truncation_factor = 1.5;
  const auto labels = spectral_cluster(h, 2, 1, opt);
  Labeling first(labels.begin(), labels.begin() + 60);
  EXPECT_EQ(mis(first, z, 2), 0.0);
}

TEST(SpectralCluster, PlantedPartition) {
  const auto model = SbmModel::balanced(2000, two_block(0.55, 0.45));
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = sample_adjacency(model, 100 + seed);
    const auto labels = spectral_cluster(g, 2, seed);
    good += mis(labels, model.labels(), 2) <= 0.2;
    if (seed == 0) {
      EXPECT_EQ(spectral_cluster(g, 2, seed), labels);
    }
  }
  EXPECT_GE(good, 18);
}

TEST(Detect, TwoCliques) {
  const auto [g, z] = cliques({50, 50});
  for (auto mode : {LooMode::Fast, LooMode::Exact}) {
    DetectOptions opt;
    opt.mode = mode;
    const auto res = detect_communities(g, 2, 5, opt);
    EXPECT_EQ(mis(res.labels, z, 2), 0.0) << loo_mode_name(mode);
    EXPECT_EQ(res.trace.final_labels, res.labels);
    EXPECT_TRUE((res.trace.p_hat.array() >= 0.0).all() && (res.trace.p_hat.array() <= 1.0).all());
  }
}

TEST(Detect, ThreeCliques) {
  const auto [g, z] = cliques({40, 30, 35});
  EXPECT_EQ(mis(detect_communities(g, 3, 2).labels, z, 3), 0.0);
}

TEST(Detect, RequiresEnoughNodes) {
  const auto [g, z] = cliques({7, 8});
  try {
    detect_communities(g, 2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidInput);
  }
}

TEST(Detect, DeterministicAndThreadIndependent) {
  const auto model = SbmModel::balanced(300, two_block(0.6, 0.4));
  const Graph g = sample_adjacency(model, 3);
  const auto a = detect_communities(g, 2, 11);
  const auto b = detect_communities(g, 2, 11);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.trace.initial_labels, b.trace.initial_labels);
  DetectOptions threaded;
  threaded.threads = 3;
  EXPECT_EQ(detect_communities(g, 2, 11, threaded).labels, a.labels);
  EXPECT_LE(mis(a.labels, model.labels(), 2), 0.05);
}

TEST(Detect, TraceShapes) {
  const auto model = SbmModel::balanced(160, two_block(0.7, 0.2));
  const auto res = detect_communities(sample_adjacency(model, 1), 2, 4);
  const auto& t = res.trace;
  EXPECT_EQ(t.initial_labels.size(), 160u);
  EXPECT_EQ(std::count(t.in_first_half.begin(), t.in_first_half.end(), true), 80);
  EXPECT_EQ(t.p_tilde.rows(), 2);
  EXPECT_EQ(t.p_tilde, t.p_tilde.transpose());
  EXPECT_EQ(t.p_hat, t.p_hat.transpose());
  EXPECT_EQ(t.refined_labels.size(), 160u);
}

// fast_loo and exact_loo agree on nearly every node when the signal is clear.
TEST(Detect, FastMatchesExact) {
  const auto model = SbmModel::balanced(400, two_block(0.65, 0.35));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = sample_adjacency(model, 500 + seed);
    DetectOptions exact;
    exact.mode = LooMode::Exact;
    const auto f = detect_communities(g, 2, seed);
    const auto e = detect_communities(g, 2, seed, exact);
    EXPECT_EQ(f.trace.initial_labels, e.trace.initial_labels);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < 400; ++i) agree += f.labels[i] == e.labels[i];
    EXPECT_GE(agree, 392u) << seed;
  }
}

// Near the threshold individual nodes differ but the error rates stay close.
TEST(Detect, FastAndExactErrorRatesAgree) {
  const auto model = SbmModel::balanced(400, two_block(0.55, 0.45));
  double fast = 0.0;
  double exact_mis = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = sample_adjacency(model, 500 + seed);
    DetectOptions exact;
    exact.mode = LooMode::Exact;
    fast += mis(detect_communities(g, 2, seed).labels, model.labels(), 2) / 10;
    exact_mis += mis(detect_communities(g, 2, seed, exact).labels, model.labels(), 2) / 10;
  }
  EXPECT_NEAR(fast, exact_mis, 0.03);
}
