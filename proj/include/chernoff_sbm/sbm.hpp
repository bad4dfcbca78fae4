#pragma once

// Stochastic block model: representation, sampling, parameter-space checks,
// and the genie-test quantities (pairwise Chernoff information of row
// parameter vectors, worst-case affinity, minimax rate).

#include <chernoff_sbm/affinity.hpp>
#include <chernoff_sbm/chernoff.hpp>
#include <chernoff_sbm/dists.hpp>
#include <chernoff_sbm/error.hpp>
#include <chernoff_sbm/graph.hpp>
#include <chernoff_sbm/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace chernoff_sbm {

/// Labels are 0-based community indices.
class SbmModel {
 public:
  static SbmModel create(std::vector<int> labels, Eigen::MatrixXd connectivity) {
    const auto k = static_cast<std::size_t>(connectivity.rows());
    if (k == 0 || connectivity.cols() != connectivity.rows()) {
      throw Error(Errc::InvalidInput, "connectivity matrix must be square and non-empty");
    }
    if (labels.empty()) throw Error(Errc::InvalidInput, "model needs at least one node");
    for (Eigen::Index a = 0; a < connectivity.rows(); ++a) {
      for (Eigen::Index b = 0; b < connectivity.cols(); ++b) {
        const double p = connectivity(a, b);
        if (!(p > 0.0 && p < 1.0)) {
          throw Error(Errc::OutOfRange, "connectivity entries must lie in (0,1)");
        }
        if (p != connectivity(b, a)) throw Error(Errc::InvalidInput, "connectivity is not symmetric");
      }
    }
    std::vector<std::size_t> sizes(k, 0);
    for (int z : labels) {
      if (z < 0 || static_cast<std::size_t>(z) >= k) {
        throw Error(Errc::OutOfRange, "label " + std::to_string(z) + " outside [0, K)");
      }
      ++sizes[static_cast<std::size_t>(z)];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) throw Error(Errc::InvalidInput, "community " + std::to_string(c) + " is empty");
    }
    return SbmModel(std::move(labels), std::move(connectivity), std::move(sizes));
  }

  /// Contiguous communities whose sizes differ by at most one.
  static SbmModel balanced(std::size_t n, Eigen::MatrixXd connectivity) {
    const auto k = static_cast<std::size_t>(connectivity.rows());
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i * k / n);
    return create(std::move(labels), std::move(connectivity));
  }

  std::size_t n() const { return labels_.size(); }
  std::size_t communities() const { return static_cast<std::size_t>(p_.rows()); }
  std::span<const int> labels() const { return labels_; }
  const Eigen::MatrixXd& connectivity() const { return p_; }
  std::span<const std::size_t> community_sizes() const { return sizes_; }
  double p_star() const { return p_.maxCoeff(); }

 private:
  SbmModel(std::vector<int> labels, Eigen::MatrixXd p, std::vector<std::size_t> sizes)
      : labels_(std::move(labels)), p_(std::move(p)), sizes_(std::move(sizes)) {}

  std::vector<int> labels_;
  Eigen::MatrixXd p_;
  std::vector<std::size_t> sizes_;
};

/// A_ij = A_ji ~ Bern(P[z_i, z_j]) for i > j, zero diagonal. Row i draws from
/// counter stream (seed, i), so the result is independent of evaluation order.
inline Graph sample_adjacency(const SbmModel& model, std::uint64_t seed) {
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  const auto labels = model.labels();
  const auto& p = model.connectivity();
  for (std::size_t i = 1; i < model.n(); ++i) {
    CounterRng rng(seed, i);
    for (std::size_t j = 0; j < i; ++j) {
      if (rng.bernoulli(p(labels[i], labels[j]))) {
        edges.emplace_back(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j));
      }
    }
  }
  return Graph::from_edges(model.n(), edges);
}

/// p_k = (P[k, z_1], ..., P[k, z_n]).
inline std::vector<double> row_parameters(const SbmModel& model, std::size_t k) {
  std::vector<double> out;
  out.reserve(model.n());
  for (int z : model.labels()) out.push_back(model.connectivity()(static_cast<Eigen::Index>(k), z));
  return out;
}

/// Rows k and l as a grouped pair: one group per community of the column
/// node. Coordinates are all n nodes (the node being classified included).
inline GroupedPair row_pair(const SbmModel& model, std::size_t k, std::size_t l) {
  std::vector<Group> groups;
  const auto& p = model.connectivity();
  for (std::size_t r = 0; r < model.communities(); ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    groups.push_back({p(static_cast<Eigen::Index>(k), rr), p(static_cast<Eigen::Index>(l), rr),
                      static_cast<std::int64_t>(model.community_sizes()[r])});
  }
  return GroupedPair::from_groups(groups);
}

struct PairwiseChernoff {
  Eigen::MatrixXd d_star;      // symmetric; NaN diagonal
  Eigen::MatrixXd alpha_star;  // alpha_star(l, k) = 1 - alpha_star(k, l)
};

inline PairwiseChernoff pairwise_chernoff(const SbmModel& model) {
  const auto k = static_cast<Eigen::Index>(model.communities());
  PairwiseChernoff out{Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN()),
                       Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN())};
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const auto pair = row_pair(model, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      if (pair.degenerate()) {
        throw Error(Errc::IndistinguishableCommunities,
                    "communities " + std::to_string(a) + " and " + std::to_string(b) +
                        " have identical row parameters");
      }
      const auto info = chernoff_information(pair);
      out.d_star(a, b) = out.d_star(b, a) = info.d_star;
      out.alpha_star(a, b) = info.alpha_star;
      out.alpha_star(b, a) = 1.0 - info.alpha_star;
    }
  }
  return out;
}

/// Smallest off-diagonal Chernoff information.
inline double min_chernoff(const PairwiseChernoff& pc) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < pc.d_star.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < pc.d_star.cols(); ++b) best = std::min(best, pc.d_star(a, b));
  }
  return best;
}

struct EtaStar {
  double eta;
  double log_eta;
  std::size_t k;
  std::size_t l;
  bool exact;  // false when a pair exceeded the grid limit and was estimated
};

/// Worst-case pairwise affinity max_{k != l} eta(p_k, p_l).
inline EtaStar eta_star(const SbmModel& model, std::uint64_t mc_samples = 1'000'000,
                        std::uint64_t mc_seed = 0) {
  if (model.communities() < 2) {
    throw Error(Errc::IndistinguishableCommunities, "need at least two communities");
  }
  EtaStar best{0.0, -std::numeric_limits<double>::infinity(), 0, 1, true};
  for (std::size_t a = 0; a < model.communities(); ++a) {
    for (std::size_t b = a + 1; b < model.communities(); ++b) {
      const auto pair = row_pair(model, a, b);
      if (pair.degenerate()) {
        throw Error(Errc::IndistinguishableCommunities,
                    "communities " + std::to_string(a) + " and " + std::to_string(b) +
                        " have identical row parameters");
      }
      double log_eta = 0.0;
      bool exact = true;
      try {
        log_eta = affinity_grouped(pair).log_eta;
      } catch (const Error& e) {
        if (e.code() != Errc::GridTooLarge) throw;
        log_eta = tilted_mc_affinity(pair, mc_samples, mc_seed).log_estimate;
        exact = false;
      }
      if (log_eta > best.log_eta) best = {std::exp(log_eta), log_eta, a, b, exact};
      if (!exact) best.exact = false;
    }
  }
  return best;
}

struct MinimaxRate {
  double rate;      // e^{-D*} / sqrt(n p*), constant factor taken as 1
  double log_rate;
  double d_star;
  double p_star;
  bool lower_bound_in_scope;  // the lower-bound argument needs K >= 3
};

inline MinimaxRate minimax_rate(const SbmModel& model) {
  const double d = min_chernoff(pairwise_chernoff(model));
  const double ps = model.p_star();
  MinimaxRate r{};
  r.d_star = d;
  r.p_star = ps;
  r.log_rate = -d - 0.5 * std::log(static_cast<double>(model.n()) * ps);
  r.rate = std::exp(r.log_rate);
  r.lower_bound_in_scope = model.communities() >= 3;
  return r;
}

/// Chernoff information between Bin(m, p) and Bin(m, q), for checking the
/// existence-of-q condition of the minimax lower bound by hand.
inline ChernoffInformation binomial_chernoff(std::int64_t m, double p, double q) {
  return chernoff_information(GroupedPair::from_groups({Group{p, q, m}}));
}

struct SpaceReport {
  bool beta_ok;
  bool sparsity_ok;
  bool ratio_ok;
  bool separation_ok;
  double beta;         // smallest beta the community sizes satisfy
  double p_star;
  double omega;        // max entry / min entry
  double omega_prime;  // min_{k != l} max_r max(P_kr / P_lr, P_lr / P_kr)
  double d_star;       // min_{k != l} Chernoff information of row pairs
};

inline SpaceReport validate_space(const SbmModel& model, double beta, double epsilon, double omega,
                                  double omega_prime) {
  SpaceReport r{};
  const double n = static_cast<double>(model.n());
  const double k = static_cast<double>(model.communities());
  r.beta = 1.0;
  for (std::size_t size : model.community_sizes()) {
    const double s = static_cast<double>(size);
    r.beta = std::max({r.beta, s * k / n, n / (k * s)});
  }
  r.beta_ok = std::all_of(model.community_sizes().begin(), model.community_sizes().end(),
                          [&](std::size_t size) {
                            const double s = static_cast<double>(size);
                            return s >= n / (beta * k) && s <= beta * n / k;
                          });
  const auto& p = model.connectivity();
  r.p_star = p.maxCoeff();
  r.sparsity_ok = r.p_star <= 1.0 - epsilon;
  r.omega = r.p_star / p.minCoeff();
  r.ratio_ok = r.omega <= omega;
  r.omega_prime = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < p.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < p.rows(); ++b) {
      double worst = 1.0;
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        worst = std::max({worst, p(a, c) / p(b, c), p(b, c) / p(a, c)});
      }
      r.omega_prime = std::min(r.omega_prime, worst);
    }
  }
  r.separation_ok = r.omega_prime >= omega_prime;
  r.d_star = 0.0;
  if (model.communities() >= 2) {
    try {
      r.d_star = min_chernoff(pairwise_chernoff(model));
    } catch (const Error& e) {
      if (e.code() != Errc::IndistinguishableCommunities) throw;
    }
  }
  return r;
}

}  // namespace chernoff_sbm
