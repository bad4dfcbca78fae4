#pragma once

// Truncated eigen-decomposition of a symmetric adjacency operator (Lanczos
// with full reorthogonalization) and seeded k-means, the two numerical
// pieces of spectral clustering.

#include <chernoff_sbm/error.hpp>
#include <chernoff_sbm/graph.hpp>
#include <chernoff_sbm/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace chernoff_sbm {

struct LanczosOptions {
  double residual_tolerance = 1e-8;  // relative to the largest |Ritz value|
  int max_iterations = 1000;         // Lanczos steps
  int check_every = 5;
};

struct TopEigen {
  Eigen::VectorXd values;   // ordered by decreasing |value|
  Eigen::MatrixXd vectors;  // n x K, orthonormal columns
  int iterations = 0;
  double max_residual = 0.0;  // max ||A u - value u|| / scale
};

inline Eigen::VectorXd adjacency_multiply(const Graph& graph, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(graph.size()));
  for (std::size_t i = 0; i < graph.size(); ++i) {
    double acc = 0.0;
    for (auto j : graph.neighbors(i)) acc += x[j];
    y[static_cast<Eigen::Index>(i)] = acc;
  }
  return y;
}

/// K eigenpairs of largest magnitude (equivalently the top-K singular
/// triplets of a symmetric matrix). On breakdown the Krylov basis is
/// extended with a fresh random direction, which recovers repeated
/// eigenvalues. Throws ConvergenceFailure when the Ritz residuals are not
/// below tolerance within the iteration cap.
inline TopEigen top_eigenpairs(const Graph& graph, std::size_t k, std::uint64_t seed,
                               const LanczosOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  const auto kk = static_cast<Eigen::Index>(k);
  if (kk > n) throw Error(Errc::InvalidInput, "more eigenpairs requested than nodes");
  const Eigen::Index cap = std::min<Eigen::Index>(n, opt.max_iterations);
  const Eigen::Index min_dim = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * kk + 20, 30));

  CounterRng rng(seed, 0);
  auto random_unit = [&](Eigen::Index cols_used, const Eigen::MatrixXd& basis) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform() - 0.5;
    for (int pass = 0; pass < 2; ++pass) {
      if (cols_used > 0) {
        v -= basis.leftCols(cols_used) * (basis.leftCols(cols_used).transpose() * v);
      }
    }
    return Eigen::VectorXd(v / v.norm());
  };

  Eigen::MatrixXd basis(n, cap);
  std::vector<double> diag;
  std::vector<double> off;  // off[j] couples basis j and j+1
  basis.col(0) = random_unit(0, basis);
  double scale = 0.0;

  TopEigen out;
  for (Eigen::Index j = 0; j < cap; ++j) {
    Eigen::VectorXd w = adjacency_multiply(graph, basis.col(j));
    const double a = basis.col(j).dot(w);
    diag.push_back(a);
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    }
    double b = w.norm();
    scale = std::max({scale, std::abs(a), b});
    const bool last = (j + 1 == cap);

    const bool check = (j + 1 >= min_dim) && (last || ((j + 1) % opt.check_every == 0));
    if (check) {
      const auto m = static_cast<Eigen::Index>(diag.size());
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        t(i, i) = diag[static_cast<std::size_t>(i)];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = off[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]);
      });
      const double top = std::max(std::abs(es.eigenvalues()[order[0]]), 1e-300);
      const double residual_norm = (m == n) ? 0.0 : b;
      double worst = 0.0;
      for (Eigen::Index c = 0; c < kk; ++c) {
        worst = std::max(worst, std::abs(residual_norm * es.eigenvectors()(m - 1, order[c])) / top);
      }
      if (worst <= opt.residual_tolerance || m == n) {
        out.values.resize(kk);
        out.vectors.resize(n, kk);
        for (Eigen::Index c = 0; c < kk; ++c) {
          out.values[c] = es.eigenvalues()[order[c]];
          Eigen::VectorXd u = basis.leftCols(m) * es.eigenvectors().col(order[c]);
          u.normalize();
          Eigen::Index arg = 0;
          u.cwiseAbs().maxCoeff(&arg);
          if (u[arg] < 0) u = -u;
          out.vectors.col(c) = u;
        }
        out.iterations = static_cast<int>(m);
        double explicit_worst = 0.0;
        for (Eigen::Index c = 0; c < kk; ++c) {
          const Eigen::VectorXd r =
              adjacency_multiply(graph, out.vectors.col(c)) - out.values[c] * out.vectors.col(c);
          explicit_worst = std::max(explicit_worst, r.norm() / top);
        }
        out.max_residual = explicit_worst;
        if (explicit_worst > opt.residual_tolerance && top > 1e-300 && scale > 0) {
          throw Error(Errc::ConvergenceFailure,
                      "Lanczos Ritz residual " + std::to_string(explicit_worst) +
                          " above tolerance after " + std::to_string(m) + " steps");
        }
        return out;
      }
    }
    if (last) break;
    if (b <= 1e-10 * std::max(scale, 1.0)) {
      // Invariant subspace reached: restart in the orthogonal complement.
      off.push_back(0.0);
      basis.col(j + 1) = random_unit(j + 1, basis);
    } else {
      off.push_back(b);
      basis.col(j + 1) = w / b;
    }
  }
  throw Error(Errc::ConvergenceFailure,
              "Lanczos did not reach residual tolerance within " + std::to_string(cap) + " steps");
}

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 100;
};

struct KMeansResult {
  std::vector<int> labels;
  double inertia = 0.0;
};

namespace detail {

inline double squared_distance(const Eigen::MatrixXd& points, Eigen::Index row,
                               const Eigen::MatrixXd& centers, Eigen::Index c) {
  return (points.row(row) - centers.row(c)).squaredNorm();
}

inline KMeansResult kmeans_once(const Eigen::MatrixXd& points, std::size_t k, CounterRng& rng,
                                int max_iterations) {
  const Eigen::Index n = points.rows();
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd centers(kk, points.cols());

  // k-means++ seeding.
  std::vector<double> closest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  for (Eigen::Index c = 1; c < kk; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = closest[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points, i, centers, c - 1));
      total += d;
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double run = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        run += closest[static_cast<std::size_t>(i)];
        if (run > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = points.row(pick);
  }

  KMeansResult result;
  result.labels.assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, centers, 0);
      for (Eigen::Index c = 1; c < kk; ++c) {
        const double d = squared_distance(points, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (result.labels[static_cast<std::size_t>(i)] != best) {
        result.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kk, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(kk), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = result.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      // An emptied cluster keeps its previous center.
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
  }
  result.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    result.inertia += squared_distance(points, i, centers, result.labels[static_cast<std::size_t>(i)]);
  }
  return result;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; best inertia over restarts.
/// Restart r draws from counter stream (seed, r).
inline KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& opt = {}) {
  if (points.rows() == 0) return {};
  if (static_cast<Eigen::Index>(k) > points.rows()) {
    throw Error(Errc::InvalidInput, "more clusters than points");
  }
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opt.restarts; ++r) {
    CounterRng rng(seed, static_cast<std::uint64_t>(r));
    auto candidate = detail::kmeans_once(points, k, rng, opt.max_iterations);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

}  // namespace chernoff_sbm
