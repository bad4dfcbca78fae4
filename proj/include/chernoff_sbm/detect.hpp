#pragma once

// Community detection: block-frequency estimation of P, the likelihood-ratio
// label update, degree-truncated spectral clustering, label matching, and the
// split/leave-one-out refinement pipeline that ties them together.

#include <chernoff_sbm/assignment.hpp>
#include <chernoff_sbm/error.hpp>
#include <chernoff_sbm/graph.hpp>
#include <chernoff_sbm/parallel.hpp>
#include <chernoff_sbm/rng.hpp>
#include <chernoff_sbm/spectral.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chernoff_sbm {

/// 0-based community index per node. Communities may be empty mid-pipeline.
using Labeling = std::vector<int>;

namespace detail {

inline void check_labels(std::span<const int> labels, std::size_t k, const char* what) {
  for (int z : labels) {
    if (z < 0 || static_cast<std::size_t>(z) >= k) {
      throw Error(Errc::OutOfRange, std::string(what) + " contains label " + std::to_string(z) +
                                        " outside [0, " + std::to_string(k) + ")");
    }
  }
}

/// confusion(a, b) = #{i : candidate_i = a, reference_i = b}
inline Eigen::MatrixXd confusion(std::span<const int> candidate, std::span<const int> reference,
                                 std::size_t k) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < candidate.size(); ++i) c(candidate[i], reference[i]) += 1.0;
  return c;
}

}  // namespace detail

inline constexpr std::size_t kMisEnumerationMaxK = 8;

/// Permutation that best aligns `candidate` with `reference`:
/// result[a] = community in reference's naming for candidate's community a.
inline std::vector<int> best_permutation(std::span<const int> candidate,
                                         std::span<const int> reference, std::size_t k) {
  const Eigen::MatrixXd agree = detail::confusion(candidate, reference, k);
  return solve_assignment(-agree);
}

/// Fraction of disagreements minimized over all relabelings of z_hat.
/// Exhaustive over S_K for K <= 8, assignment on the confusion matrix above.
inline double mis(std::span<const int> z_hat, std::span<const int> z, std::size_t k) {
  if (z_hat.size() != z.size()) {
    throw Error(Errc::LengthMismatch, "label vectors differ in length");
  }
  if (z.empty()) return 0.0;
  detail::check_labels(z_hat, k, "z_hat");
  detail::check_labels(z, k, "z");
  const Eigen::MatrixXd agree = detail::confusion(z_hat, z, k);
  double best = 0.0;
  if (k <= kMisEnumerationMaxK) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0.0;
      for (std::size_t a = 0; a < k; ++a) total += agree(static_cast<Eigen::Index>(a), perm[a]);
      best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const auto perm = solve_assignment(-agree);
    for (std::size_t a = 0; a < k; ++a) best += agree(static_cast<Eigen::Index>(a), perm[a]);
  }
  return (static_cast<double>(z.size()) - best) / static_cast<double>(z.size());
}

/// Relabels `candidate` by the permutation that maximizes agreement with
/// `reference`.
inline Labeling match_labels(std::span<const int> reference, std::span<const int> candidate,
                             std::size_t k) {
  if (reference.size() != candidate.size()) {
    throw Error(Errc::LengthMismatch, "label vectors differ in length");
  }
  detail::check_labels(reference, k, "reference");
  detail::check_labels(candidate, k, "candidate");
  const auto perm = best_permutation(candidate, reference, k);
  Labeling out(candidate.size());
  for (std::size_t i = 0; i < candidate.size(); ++i) out[i] = perm[static_cast<std::size_t>(candidate[i])];
  return out;
}

struct BlockEstimate {
  Eigen::MatrixXd raw;      // edge frequency per community pair, in [0,1]
  Eigen::MatrixXd clipped;  // raw clipped to [1/n^2, 1 - 1/n^2]
  std::vector<std::pair<int, int>> empty_cells;  // filled with the global density
};

namespace detail {

/// Turns unordered edge counts and community sizes into the estimate.
inline BlockEstimate finish_block_estimate(const Eigen::MatrixXd& edges,
                                           std::span<const std::int64_t> sizes, std::size_t n,
                                           double total_edges) {
  const auto k = static_cast<Eigen::Index>(sizes.size());
  const double nd = static_cast<double>(n);
  const double all_pairs = nd * (nd - 1.0) / 2.0;
  const double density = all_pairs > 0 ? total_edges / all_pairs : 0.0;
  BlockEstimate out{Eigen::MatrixXd(k, k), Eigen::MatrixXd(k, k), {}};
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      const double sa = static_cast<double>(sizes[static_cast<std::size_t>(a)]);
      const double sb = static_cast<double>(sizes[static_cast<std::size_t>(b)]);
      const double pairs = (a == b) ? sa * (sa - 1.0) / 2.0 : sa * sb;
      double value;
      if (pairs > 0) {
        value = edges(a, b) / pairs;
      } else {
        value = density;
        out.empty_cells.emplace_back(static_cast<int>(a), static_cast<int>(b));
      }
      out.raw(a, b) = out.raw(b, a) = value;
    }
  }
  const double floor = 1.0 / (nd * nd);
  out.clipped = out.raw.cwiseMax(floor).cwiseMin(1.0 - floor);
  return out;
}

}  // namespace detail

/// Edge frequency between (and within) estimated communities, counted over
/// unordered node pairs so the result is exactly symmetric.
inline BlockEstimate estimate_p(const Graph& graph, std::span<const int> labels, std::size_t k) {
  if (labels.size() != graph.size()) throw Error(Errc::LengthMismatch, "one label per node required");
  detail::check_labels(labels, k, "labels");
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd edges = Eigen::MatrixXd::Zero(kk, kk);
  std::vector<std::int64_t> sizes(k, 0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    ++sizes[static_cast<std::size_t>(labels[i])];
    for (auto j : graph.neighbors(i)) {
      if (j < i) {
        const int a = std::min(labels[i], labels[j]);
        const int b = std::max(labels[i], labels[j]);
        edges(a, b) += 1.0;
      }
    }
  }
  return detail::finish_block_estimate(edges, sizes, graph.size(),
                                       static_cast<double>(graph.edge_count()));
}

/// log P and log(1 - P) tables for the likelihood-ratio scores.
struct LogProbabilities {
  Eigen::MatrixXd log_p;
  Eigen::MatrixXd log_q;

  explicit LogProbabilities(const Eigen::MatrixXd& p) {
    if ((p.array() <= 0.0).any() || (p.array() >= 1.0).any()) {
      throw Error(Errc::OutOfRange, "likelihood classifier needs P entries strictly inside (0,1)");
    }
    log_p = p.array().log().matrix();
    log_q = (1.0 - p.array()).log().matrix();
  }

  std::size_t communities() const { return static_cast<std::size_t>(log_p.rows()); }

  /// sum_r b_r log P_cr + (m_r - b_r) log(1 - P_cr) for edge counts b and
  /// member counts m per column community r.
  template <typename Counts>
  double score(Eigen::Index c, const Counts& edges_to, const Counts& members) const {
    double s = 0.0;
    for (Eigen::Index r = 0; r < log_p.rows(); ++r) {
      const auto b = static_cast<double>(edges_to[static_cast<std::size_t>(r)]);
      const auto m = static_cast<double>(members[static_cast<std::size_t>(r)]);
      s += b * log_p(c, r) + (m - b) * log_q(c, r);
    }
    return s;
  }

  /// argmax of score; ties go to the smallest community index.
  template <typename Counts>
  int classify(const Counts& edges_to, const Counts& members) const {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < log_p.rows(); ++c) {
      const double s = score(c, edges_to, members);
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(c);
      }
    }
    return best;
  }
};

/// Likelihood-ratio update on the block A[rows, cols]: each row node gets the
/// community maximizing its Bernoulli log-likelihood against the column
/// labels. A node appearing in both sets is not compared with itself.
inline Labeling lr_classify(const Graph& graph, std::span<const std::size_t> rows,
                            std::span<const std::size_t> cols, std::span<const int> col_labels,
                            const Eigen::MatrixXd& p_hat) {
  if (cols.size() != col_labels.size()) {
    throw Error(Errc::LengthMismatch, "one label per column node required");
  }
  const LogProbabilities logs(p_hat);
  const std::size_t k = logs.communities();
  detail::check_labels(col_labels, k, "column labels");
  std::vector<int> column_label(graph.size(), -1);
  std::vector<std::int64_t> members(k, 0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    column_label[cols[c]] = col_labels[c];
    ++members[static_cast<std::size_t>(col_labels[c])];
  }
  Labeling out(rows.size());
  std::vector<std::int64_t> edges_to(k);
  std::vector<std::int64_t> m(k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    std::fill(edges_to.begin(), edges_to.end(), 0);
    for (auto j : graph.neighbors(i)) {
      const int z = column_label[j];
      if (z >= 0) ++edges_to[static_cast<std::size_t>(z)];
    }
    m = members;
    if (column_label[i] >= 0) --m[static_cast<std::size_t>(column_label[i])];
    out[r] = logs.classify(edges_to, m);
  }
  return out;
}

struct SpectralOptions {
  double truncation_factor = 10.0;  // drop nodes with degree > factor * mean degree
  LanczosOptions lanczos{};
  KMeansOptions kmeans{};
};

/// Degree truncation, top-K eigenpairs by magnitude, then k-means on the rows
/// of U * |Lambda|.
inline Labeling spectral_cluster(const Graph& graph, std::size_t k, std::uint64_t seed,
                                 const SpectralOptions& opt = {}) {
  const std::size_t n = graph.size();
  if (k == 0 || k > n) throw Error(Errc::InvalidInput, "need 1 <= K <= n for spectral clustering");
  if (k == 1) return Labeling(n, 0);
  const double mean_degree = n > 0 ? 2.0 * static_cast<double>(graph.edge_count()) / static_cast<double>(n) : 0.0;
  const double threshold = opt.truncation_factor * mean_degree;
  std::vector<bool> removed(n, false);
  bool any_removed = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<double>(graph.degree(i)) > threshold) {
      removed[i] = true;
      any_removed = true;
    }
  }
  const Graph truncated = any_removed ? graph.without_nodes(removed) : graph;
  const auto eig = top_eigenpairs(truncated, k, derive_seed(seed, 0x5c), opt.lanczos);
  Eigen::MatrixXd embedding = eig.vectors * eig.values.cwiseAbs().asDiagonal();
  return kmeans(embedding, k, derive_seed(seed, 0x6b), opt.kmeans).labels;
}

enum class LooMode { Fast, Exact };

inline std::string_view loo_mode_name(LooMode mode) {
  return mode == LooMode::Fast ? "fast_loo" : "exact_loo";
}

struct DetectOptions {
  LooMode mode = LooMode::Fast;
  SpectralOptions spectral{};
  int max_split_retries = 5;
  unsigned threads = 1;
};

struct DetectionTrace {
  Labeling initial_labels;          // spectral clustering of the whole graph
  Eigen::MatrixXd p_tilde;          // block estimate from the initial labels (clipped)
  std::vector<bool> in_first_half;  // split membership
  int split_retries = 0;
  Labeling half_labels;             // matched spectral labels of each half
  Labeling refined_labels;          // first likelihood update with full halves
  Eigen::MatrixXd p_hat;            // block estimate from refined_labels (clipped)
  Labeling final_labels;
  double spectral_seconds = 0.0;
  double refine_seconds = 0.0;
};

struct DetectionResult {
  Labeling labels;
  DetectionTrace trace;
};

namespace detail {

/// Unordered edge counts between communities, updated as single nodes change
/// label; the fast leave-one-out path uses it to re-estimate P per node.
class BlockCounter {
 public:
  BlockCounter(const Graph& graph, Labeling labels, std::size_t k)
      : graph_(&graph), labels_(std::move(labels)), k_(k),
        edges_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))),
        sizes_(k, 0) {
    for (std::size_t i = 0; i < graph.size(); ++i) {
      ++sizes_[static_cast<std::size_t>(labels_[i])];
      for (auto j : graph.neighbors(i)) {
        if (j < i) bump(labels_[i], labels_[j], 1.0);
      }
    }
  }

  void relabel(std::size_t node, int to) {
    const int from = labels_[node];
    if (from == to) return;
    for (auto j : graph_->neighbors(node)) {
      const int other = labels_[j];
      bump(from, other, -1.0);
      bump(to, other, 1.0);
    }
    --sizes_[static_cast<std::size_t>(from)];
    ++sizes_[static_cast<std::size_t>(to)];
    labels_[node] = to;
  }

  int label(std::size_t node) const { return labels_[node]; }
  std::span<const std::int64_t> sizes() const { return sizes_; }

  BlockEstimate estimate() const {
    Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(edges_.rows(), edges_.cols());
    for (Eigen::Index a = 0; a < edges_.rows(); ++a) {
      for (Eigen::Index b = a; b < edges_.cols(); ++b) upper(a, b) = edges_(a, b);
    }
    return finish_block_estimate(upper, sizes_, graph_->size(),
                                 static_cast<double>(graph_->edge_count()));
  }

 private:
  void bump(int a, int b, double delta) {
    edges_(std::min(a, b), std::max(a, b)) += delta;
  }

  const Graph* graph_;
  Labeling labels_;
  std::size_t k_;
  Eigen::MatrixXd edges_;  // upper triangle used
  std::vector<std::int64_t> sizes_;
};

inline int classify_node(const Graph& graph, std::size_t node, const BlockCounter& counter,
                         const LogProbabilities& logs) {
  const std::size_t k = logs.communities();
  std::vector<std::int64_t> edges_to(k, 0);
  for (auto v : graph.neighbors(node)) ++edges_to[static_cast<std::size_t>(counter.label(v))];
  std::vector<std::int64_t> members(counter.sizes().begin(), counter.sizes().end());
  --members[static_cast<std::size_t>(counter.label(node))];
  return logs.classify(edges_to, members);
}

inline Labeling gather(std::span<const int> labels, std::span<const std::size_t> nodes) {
  Labeling out;
  out.reserve(nodes.size());
  for (auto v : nodes) out.push_back(labels[v]);
  return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Full pipeline: global spectral clustering and block estimate, random half
/// split, spectral clustering of each half matched to the global labels, a
/// cross-half likelihood update with the initial estimate, a re-estimate of P,
/// and a final likelihood update of each node from its own row.
///
/// Node j is left out of everything that feeds its final update: its half
/// excludes it, and in the assembled labeling it keeps its initial label.
/// In fast mode each half is clustered once; the only j-dependence kept is
/// the removal of j's column from the other half's likelihood sums. Exact
/// mode re-clusters j's half without j for every j.
inline DetectionResult detect_communities(const Graph& graph, std::size_t k, std::uint64_t seed,
                                          const DetectOptions& opt = {}) {
  const std::size_t n = graph.size();
  if (k < 1) throw Error(Errc::InvalidInput, "K must be positive");
  if (n < 8 * k) {
    throw Error(Errc::InvalidInput, "need n >= 8K nodes (n = " + std::to_string(n) +
                                        ", K = " + std::to_string(k) + ")");
  }
  DetectionResult result;
  DetectionTrace& trace = result.trace;
  const auto t_start = std::chrono::steady_clock::now();

  trace.initial_labels = spectral_cluster(graph, k, derive_seed(seed, 1), opt.spectral);
  const auto& initial = trace.initial_labels;
  trace.p_tilde = estimate_p(graph, initial, k).clipped;
  const LogProbabilities tilde_logs(trace.p_tilde);

  // Random split with |I| = floor(n / 2); both halves must see every
  // community of the initial labeling.
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  bool split_ok = false;
  for (int attempt = 0; attempt <= opt.max_split_retries && !split_ok; ++attempt) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    CounterRng rng(derive_seed(seed, 2), static_cast<std::uint64_t>(attempt));
    rng.shuffle(perm);
    first.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n / 2));
    second.assign(perm.begin() + static_cast<std::ptrdiff_t>(n / 2), perm.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    auto covers = [&](const std::vector<std::size_t>& half) {
      std::vector<bool> seen(k, false);
      for (auto v : half) seen[static_cast<std::size_t>(initial[v])] = true;
      return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    split_ok = covers(first) && covers(second);
    trace.split_retries = attempt;
  }
  if (!split_ok) {
    throw Error(Errc::DegenerateSplit, "every random split left a half without some community");
  }
  trace.in_first_half.assign(n, false);
  for (auto v : first) trace.in_first_half[v] = true;
  const std::vector<std::size_t>* halves[2] = {&first, &second};
  std::vector<std::size_t> position(n);
  for (const auto* half : halves) {
    for (std::size_t p = 0; p < half->size(); ++p) position[(*half)[p]] = p;
  }
  auto side_of = [&](std::size_t v) { return trace.in_first_half[v] ? 0 : 1; };
  const std::uint64_t half_seed[2] = {derive_seed(seed, 3), derive_seed(seed, 4)};

  // Spectral clustering of a half (optionally without one node), matched to
  // the initial labels on the same nodes.
  auto cluster_half = [&](const std::vector<std::size_t>& nodes, std::uint64_t s) {
    const Graph sub = graph.induced(nodes);
    const Labeling raw = spectral_cluster(sub, k, s, opt.spectral);
    return match_labels(detail::gather(initial, nodes), raw, k);
  };

  trace.half_labels.assign(n, 0);
  for (int h = 0; h < 2; ++h) {
    const Labeling lab = cluster_half(*halves[h], half_seed[h]);
    for (std::size_t p = 0; p < lab.size(); ++p) trace.half_labels[(*halves[h])[p]] = lab[p];
  }
  trace.spectral_seconds = detail::seconds_since(t_start);
  const auto t_refine = std::chrono::steady_clock::now();

  // First likelihood update with full halves: each half classified against
  // the other half's spectral labels, both reading the pre-update labels.
  trace.refined_labels.assign(n, 0);
  for (int h = 0; h < 2; ++h) {
    const auto& rows = *halves[h];
    const auto& cols = *halves[1 - h];
    const Labeling lab = lr_classify(graph, rows, cols, detail::gather(trace.half_labels, cols),
                                     trace.p_tilde);
    for (std::size_t p = 0; p < rows.size(); ++p) trace.refined_labels[rows[p]] = lab[p];
  }
  trace.p_hat = estimate_p(graph, trace.refined_labels, k).clipped;

  result.labels.assign(n, 0);

  if (opt.mode == LooMode::Fast) {
    // Per-row sufficient statistics against the other half's spectral labels.
    std::vector<std::int64_t> cross(n * k, 0);
    std::vector<std::int64_t> other_members[2] = {std::vector<std::int64_t>(k, 0),
                                                  std::vector<std::int64_t>(k, 0)};
    for (std::size_t v = 0; v < n; ++v) {
      ++other_members[1 - side_of(v)][static_cast<std::size_t>(trace.half_labels[v])];
      for (auto u : graph.neighbors(v)) {
        if (side_of(u) != side_of(v)) {
          ++cross[v * k + static_cast<std::size_t>(trace.half_labels[u])];
        }
      }
    }

    const unsigned workers = std::max(1u, opt.threads);
    const std::size_t chunks = std::min<std::size_t>(workers, n);
    parallel_for(chunks, workers, [&](std::size_t chunk) {
      detail::BlockCounter counter(graph, trace.refined_labels, k);
      std::vector<std::int64_t> edges_to(k);
      std::vector<std::int64_t> members(k);
      std::vector<std::pair<std::size_t, int>> undo;
      const std::size_t begin = n * chunk / chunks;
      const std::size_t end = n * (chunk + 1) / chunks;
      for (std::size_t j = begin; j < end; ++j) {
        undo.clear();
        auto relabel = [&](std::size_t v, int to) {
          const int from = counter.label(v);
          if (from == to) return;
          undo.emplace_back(v, from);
          counter.relabel(v, to);
        };
        relabel(j, initial[j]);
        // Rows of the other half lose column j from their likelihood sums.
        const int other = 1 - side_of(j);
        const auto zj = static_cast<std::size_t>(trace.half_labels[j]);
        members = other_members[other];
        --members[zj];
        const auto& nbrs = graph.neighbors(j);
        for (auto i : *halves[other]) {
          std::copy_n(cross.begin() + static_cast<std::ptrdiff_t>(i * k), k, edges_to.begin());
          if (std::binary_search(nbrs.begin(), nbrs.end(), static_cast<std::uint32_t>(i))) {
            --edges_to[zj];
          }
          relabel(i, tilde_logs.classify(edges_to, members));
        }
        const LogProbabilities hat_logs(counter.estimate().clipped);
        result.labels[j] = detail::classify_node(graph, j, counter, hat_logs);
        for (auto it = undo.rbegin(); it != undo.rend(); ++it) counter.relabel(it->first, it->second);
      }
    });
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      const int own = side_of(j);
      std::vector<std::size_t> reduced;
      reduced.reserve(halves[own]->size() - 1);
      for (auto v : *halves[own]) {
        if (v != j) reduced.push_back(v);
      }
      const auto& full = *halves[1 - own];
      const Labeling reduced_labels = cluster_half(reduced, half_seed[own]);
      const Labeling full_labels = detail::gather(trace.half_labels, full);
      Labeling assembled(n);
      assembled[j] = initial[j];
      const Labeling reduced_new = lr_classify(graph, reduced, full, full_labels, trace.p_tilde);
      const Labeling full_new = lr_classify(graph, full, reduced, reduced_labels, trace.p_tilde);
      for (std::size_t p = 0; p < reduced.size(); ++p) assembled[reduced[p]] = reduced_new[p];
      for (std::size_t p = 0; p < full.size(); ++p) assembled[full[p]] = full_new[p];
      const auto p_hat = estimate_p(graph, assembled, k).clipped;
      std::vector<std::size_t> others;
      others.reserve(n - 1);
      Labeling other_labels;
      other_labels.reserve(n - 1);
      for (std::size_t v = 0; v < n; ++v) {
        if (v == j) continue;
        others.push_back(v);
        other_labels.push_back(assembled[v]);
      }
      const std::size_t row[1] = {j};
      result.labels[j] = lr_classify(graph, row, others, other_labels, p_hat)[0];
    }
  }
  trace.final_labels = result.labels;
  trace.refine_seconds = detail::seconds_since(t_refine);
  return result;
}

}  // namespace chernoff_sbm
