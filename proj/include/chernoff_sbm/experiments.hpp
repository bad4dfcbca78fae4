#pragma once

// Experiment drivers shared by the command-line tool and the acceptance
// suite: bound sweeps over iid pairs, the symmetric two-community affinity
// and detection experiment, the 0.3/0.7 oscillation sweep, and CSV output.

#include <chernoff_sbm/affinity.hpp>
#include <chernoff_sbm/chernoff.hpp>
#include <chernoff_sbm/detect.hpp>
#include <chernoff_sbm/dists.hpp>
#include <chernoff_sbm/error.hpp>
#include <chernoff_sbm/parallel.hpp>
#include <chernoff_sbm/rng.hpp>
#include <chernoff_sbm/sbm.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace chernoff_sbm {

inline constexpr int kCsvSchema = 1;
inline constexpr std::uint64_t kFallbackMcSamples = 10'000'000;

/// Shortest round-trip form for finite values; nan, inf, -inf otherwise.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_number(std::int64_t x) { return std::to_string(x); }
inline std::string format_number(bool x) { return x ? "true" : "false"; }

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline void write_csv(std::ostream& out, const CsvTable& table, std::string_view description) {
  out << "# schema=" << kCsvSchema << '\n';
  out << "# " << description << '\n';
  out << "# all logarithms are natural\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
}

struct ExactOrEstimated {
  double log_eta;
  bool exact;
};

/// Exact log-affinity, or the tilted Monte-Carlo estimate when the grid is
/// too large.
inline ExactOrEstimated log_affinity_with_fallback(const GroupedPair& pair, std::uint64_t mc_seed,
                                                   unsigned threads = 1) {
  try {
    return {affinity_grouped(pair).log_eta, true};
  } catch (const Error& e) {
    if (e.code() != Errc::GridTooLarge) throw;
  }
  return {tilted_mc_affinity(pair, kFallbackMcSamples, mc_seed, threads).log_estimate, false};
}

inline std::string_view method_name(bool exact) { return exact ? "grouped" : "tilted_mc"; }

// ---------------------------------------------------------------------------
// Bound sweeps

struct BoundsRow {
  std::int64_t n;
  BoundReport report;
  double log_eta;
  bool exact;
  double log_shannon;
  double r_n;  // eta * scale * e^{D*}
};

inline BoundsRow bounds_row(const GroupedPair& pair, std::uint64_t mc_seed = 0) {
  BoundsRow row{};
  row.report = theorem1_bounds(pair);
  row.n = row.report.n;
  const auto eta = log_affinity_with_fallback(pair, mc_seed);
  row.log_eta = eta.log_eta;
  row.exact = eta.exact;
  row.log_shannon = shannon_log_lower_bound(pair);
  row.r_n = std::exp(row.log_eta + std::log(row.report.scale) + row.report.d_star);
  return row;
}

/// n iid coordinates of (p0, p1) for every n in the list.
inline std::vector<BoundsRow> iid_bounds_sweep(double p0, double p1,
                                               const std::vector<std::int64_t>& n_list,
                                               std::uint64_t mc_seed = 0) {
  std::vector<BoundsRow> rows;
  for (auto n : n_list) {
    if (n < 1) throw Error(Errc::InvalidInput, "n must be positive");
    rows.push_back(bounds_row(GroupedPair::from_groups({Group{p0, p1, n}}), mc_seed));
  }
  return rows;
}

inline CsvTable bounds_table(const std::vector<BoundsRow>& rows) {
  CsvTable t{{"n", "alpha_star", "d_star", "sigma_bar", "log_eta_exact", "log_lower", "log_upper",
              "lower_applicable", "log_shannon", "log_upper_c2", "method"},
             {}};
  for (const auto& r : rows) {
    t.rows.push_back({format_number(r.n), format_number(r.report.alpha_star),
                      format_number(r.report.d_star), format_number(r.report.sigma_bar),
                      format_number(r.log_eta), format_number(r.report.log_lower),
                      format_number(r.report.log_upper), format_number(r.report.lower_applicable),
                      format_number(r.log_shannon), format_number(r.report.log_upper_c2),
                      std::string(method_name(r.exact))});
  }
  return t;
}

inline CsvTable sandwich_table(const std::vector<BoundsRow>& rows) {
  CsvTable t{{"n", "alpha_star", "d_star", "sigma_bar", "scale", "log_eta", "r_n", "c3", "c4",
              "lower_applicable", "method"},
             {}};
  for (const auto& r : rows) {
    t.rows.push_back({format_number(r.n), format_number(r.report.alpha_star),
                      format_number(r.report.d_star), format_number(r.report.sigma_bar),
                      format_number(r.report.scale), format_number(r.log_eta), format_number(r.r_n),
                      format_number(r.report.constants.c3), format_number(r.report.constants.c4),
                      format_number(r.report.lower_applicable), std::string(method_name(r.exact))});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Symmetric two-community experiment: n coordinates at (0.55, 0.45) and n at
// (0.45, 0.55), which are also the row parameters of a balanced two-block
// model on 2n nodes.

inline constexpr double kSymmetricHigh = 0.55;
inline constexpr double kSymmetricLow = 0.45;

inline GroupedPair symmetric_pair(std::int64_t n) {
  return GroupedPair::from_groups(
      {Group{kSymmetricHigh, kSymmetricLow, n}, Group{kSymmetricLow, kSymmetricHigh, n}});
}

inline Eigen::MatrixXd symmetric_connectivity() {
  Eigen::MatrixXd p(2, 2);
  p << kSymmetricHigh, kSymmetricLow, kSymmetricLow, kSymmetricHigh;
  return p;
}

/// Per-coordinate Chernoff exponent -log(2 sqrt(0.55 * 0.45)).
inline double symmetric_rate() { return -std::log(2.0 * std::sqrt(kSymmetricHigh * kSymmetricLow)); }

struct SymmetricRow {
  std::int64_t n;
  double log_eta;
  bool exact;
  double a_n;        // log eta + 2n rate (all 2n coordinates)
  double a_n_literal;  // log eta + n rate
  double c_n;        // a_n + log(n) / 2, the quantity expected to settle
  std::int64_t trials = 0;
  double mean_mis = std::nan("");
  double mis_stderr = std::nan("");
  double b_n = std::nan("");  // log(2 mean mis) + 2n rate
  double b_n_stderr = std::nan("");
};

inline SymmetricRow symmetric_affinity_row(std::int64_t n, std::uint64_t mc_seed = 0,
                                           unsigned threads = 1) {
  SymmetricRow r{};
  r.n = n;
  const auto eta = log_affinity_with_fallback(symmetric_pair(n), mc_seed, threads);
  r.log_eta = eta.log_eta;
  r.exact = eta.exact;
  const double rate = symmetric_rate();
  r.a_n = r.log_eta + 2.0 * static_cast<double>(n) * rate;
  r.a_n_literal = r.log_eta + static_cast<double>(n) * rate;
  r.c_n = r.a_n + 0.5 * std::log(static_cast<double>(n));
  return r;
}

struct DetectionTrials {
  std::vector<double> mis;
  double mean = 0.0;
  double stderr_mean = 0.0;
};

/// Samples the model and runs detection for `trials` seeds; trial t uses
/// graph seed derive_seed(seed, 2t) and detection seed derive_seed(seed, 2t+1).
/// Results are stored per trial, so the output does not depend on `threads`.
inline DetectionTrials run_detection_trials(const SbmModel& model, std::int64_t trials,
                                            std::uint64_t seed, LooMode mode, unsigned threads = 1) {
  DetectionTrials out;
  out.mis.assign(static_cast<std::size_t>(trials), 0.0);
  DetectOptions opt;
  opt.mode = mode;
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    const Graph g = sample_adjacency(model, derive_seed(seed, 2 * t));
    const auto result = detect_communities(g, model.communities(), derive_seed(seed, 2 * t + 1), opt);
    out.mis[t] = mis(result.labels, model.labels(), model.communities());
  });
  CompensatedSum sum;
  for (double m : out.mis) sum.add(m);
  const double count = static_cast<double>(trials);
  out.mean = trials > 0 ? sum.value() / count : std::nan("");
  if (trials > 1) {
    CompensatedSum sq;
    for (double m : out.mis) sq.add((m - out.mean) * (m - out.mean));
    out.stderr_mean = std::sqrt(sq.value() / (count - 1.0) / count);
  } else {
    out.stderr_mean = std::nan("");
  }
  return out;
}

inline SymmetricRow symmetric_row(std::int64_t n, std::int64_t trials, std::uint64_t seed,
                                  LooMode mode, unsigned threads = 1) {
  SymmetricRow r = symmetric_affinity_row(n, derive_seed(seed, 0x6d63), threads);
  r.trials = trials;
  if (trials > 0) {
    const auto model =
        SbmModel::balanced(static_cast<std::size_t>(2 * n), symmetric_connectivity());
    const auto det = run_detection_trials(model, trials, derive_seed(seed, static_cast<std::uint64_t>(n)),
                                          mode, threads);
    r.mean_mis = det.mean;
    r.mis_stderr = det.stderr_mean;
    r.b_n = std::log(2.0 * det.mean) + 2.0 * static_cast<double>(n) * symmetric_rate();
    // Delta method on the log.
    r.b_n_stderr = det.mean > 0 ? det.stderr_mean / det.mean : std::nan("");
  }
  return r;
}

inline CsvTable symmetric_table(const std::vector<SymmetricRow>& rows) {
  CsvTable t{{"n", "nodes", "log_eta", "a_n", "a_n_literal", "a_n_plus_half_log_n", "b_n_mean",
              "b_n_stderr", "mean_mis", "mis_stderr", "trials", "method"},
             {}};
  for (const auto& r : rows) {
    t.rows.push_back({format_number(r.n), format_number(2 * r.n), format_number(r.log_eta),
                      format_number(r.a_n), format_number(r.a_n_literal), format_number(r.c_n),
                      format_number(r.b_n), format_number(r.b_n_stderr), format_number(r.mean_mis),
                      format_number(r.mis_stderr), format_number(r.trials),
                      std::string(method_name(r.exact))});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Oscillation experiment: n iid coordinates of (0.3, 0.7).

inline constexpr double kOscillationLow = 0.3;
inline constexpr double kOscillationHigh = 0.7;

struct OscillationRow {
  std::int64_t n;
  double log_eta;
  double a_n;        // log eta + n D*, D* = -log(2 sqrt(0.21))
  double a_n_literal;  // log eta - (n/2) log(0.21)
  double c_n;        // a_n + log(n) / 2
};

inline OscillationRow oscillation_row(std::int64_t n) {
  OscillationRow r{};
  r.n = n;
  r.log_eta =
      affinity_grouped(GroupedPair::from_groups({Group{kOscillationLow, kOscillationHigh, n}})).log_eta;
  const double nd = static_cast<double>(n);
  const double prod = kOscillationLow * kOscillationHigh;
  r.a_n = r.log_eta - nd * std::log(2.0 * std::sqrt(prod));
  r.a_n_literal = r.log_eta - 0.5 * nd * std::log(prod);
  r.c_n = r.a_n + 0.5 * std::log(nd);
  return r;
}

inline std::vector<OscillationRow> oscillation_sweep(std::int64_t n_min, std::int64_t n_max,
                                                     std::int64_t step = 1, unsigned threads = 1) {
  if (n_min < 1 || n_max < n_min || step < 1) {
    throw Error(Errc::InvalidInput, "need 1 <= n_min <= n_max and step >= 1");
  }
  const auto count = static_cast<std::size_t>((n_max - n_min) / step + 1);
  std::vector<OscillationRow> rows(count);
  parallel_for(count, threads, [&](std::size_t i) {
    rows[i] = oscillation_row(n_min + static_cast<std::int64_t>(i) * step);
  });
  return rows;
}

inline CsvTable oscillation_table(const std::vector<OscillationRow>& rows) {
  CsvTable t{{"n", "log_eta", "a_n", "a_n_literal", "a_n_plus_half_log_n", "a_n_minus_half_log_n",
              "method"},
             {}};
  for (const auto& r : rows) {
    const double half_log = 0.5 * std::log(static_cast<double>(r.n));
    t.rows.push_back({format_number(r.n), format_number(r.log_eta), format_number(r.a_n),
                      format_number(r.a_n_literal), format_number(r.c_n),
                      format_number(r.a_n - half_log), "grouped"});
  }
  return t;
}

}  // namespace chernoff_sbm
