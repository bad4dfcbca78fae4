#include <chernoff_sbm/chernoff_sbm.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace cs = chernoff_sbm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

// "100,200" or "100:3200:100" (inclusive), or any mix of both.
std::vector<std::int64_t> parse_n_list(const std::vector<std::string>& specs) {
  std::vector<std::int64_t> out;
  for (const auto& spec : specs) {
    std::vector<std::int64_t> parts;
    std::stringstream ss(spec);
    std::string piece;
    while (std::getline(ss, piece, ':')) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(piece, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != piece.size()) {
        throw cs::Error(cs::Errc::InvalidInput, "bad n specification `" + spec + "`");
      }
      parts.push_back(v);
    }
    if (parts.size() == 1) {
      out.push_back(parts[0]);
    } else if (parts.size() == 2 || parts.size() == 3) {
      const std::int64_t step = parts.size() == 3 ? parts[2] : 1;
      if (step < 1 || parts[1] < parts[0]) {
        throw cs::Error(cs::Errc::InvalidInput, "bad n range `" + spec + "`");
      }
      for (std::int64_t n = parts[0]; n <= parts[1]; n += step) out.push_back(n);
    } else {
      throw cs::Error(cs::Errc::InvalidInput, "bad n specification `" + spec + "`");
    }
  }
  for (auto n : out) {
    if (n < 1) throw cs::Error(cs::Errc::InvalidInput, "n must be positive");
  }
  return out;
}

cs::LooMode parse_mode(const std::string& mode) {
  if (mode == "fast_loo" || mode == "fast") return cs::LooMode::Fast;
  if (mode == "exact_loo" || mode == "exact") return cs::LooMode::Exact;
  throw cs::Error(cs::Errc::InvalidInput, "unknown mode `" + mode + "` (fast_loo | exact_loo)");
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cs::Error(cs::Errc::InvalidInput, "cannot open " + path);
  return in;
}

// "-" means stdout.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cs::Error(cs::Errc::InvalidInput, "cannot write " + path);
  out << text;
}

std::string csv_text(const cs::CsvTable& table, std::string_view description) {
  std::ostringstream os;
  cs::write_csv(os, table, description);
  return os.str();
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

struct Common {
  std::uint64_t seed = 0;
  std::string out = "-";
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool seeded) {
  if (seeded) cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out", c.out, "Output path, - for stdout");
  cmd->add_option("--threads", c.threads, "Worker threads (results do not depend on it)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chernoff-type Bayes error bounds and block-model community detection"};
  app.set_config("--config", "", "TOML config; [command] tables hold that command's keys");
  app.require_subcommand(1);
  app.fallthrough();

  // bounds
  Common bounds_c;
  std::string pair_path;
  double b_p0 = 0.55;
  double b_p1 = 0.45;
  std::vector<std::string> b_n{"200"};
  auto* bounds = app.add_subcommand("bounds", "Sandwich and Shannon bounds against the exact affinity");
  add_common(bounds, bounds_c, true);
  bounds->add_option("--pair", pair_path, "CSV file with header p0,p1 (overrides --p0/--p1/--n)");
  bounds->add_option("--p0", b_p0, "iid success probability under hypothesis 0");
  bounds->add_option("--p1", b_p1, "iid success probability under hypothesis 1");
  bounds->add_option("--n", b_n, "Coordinate counts: list or lo:hi:step")->delimiter(',');

  // sandwich
  Common sand_c;
  double s_p0 = 0.55;
  double s_p1 = 0.45;
  std::vector<std::string> s_n{"100:3200:100"};
  auto* sandwich = app.add_subcommand("sandwich", "r_n = eta * scale * e^{D*} over an iid sweep");
  add_common(sandwich, sand_c, false);
  sandwich->add_option("--p0", s_p0, "iid success probability under hypothesis 0");
  sandwich->add_option("--p1", s_p1, "iid success probability under hypothesis 1");
  sandwich->add_option("--n", s_n, "Coordinate counts: list or lo:hi:step")->delimiter(',');

  // section5-symmetric
  Common sym_c;
  std::vector<std::string> y_n{"50,100,250,500"};
  std::int64_t y_trials = 20;
  std::string y_mode = "fast_loo";
  auto* symmetric = app.add_subcommand(
      "section5-symmetric", "Two-community 0.55/0.45 model: exact a_n and detection b_n");
  add_common(symmetric, sym_c, true);
  symmetric->add_option("--n", y_n, "Nodes per community: list or lo:hi:step")->delimiter(',');
  symmetric->add_option("--trials", y_trials, "Detection trials per n (0 skips detection)")
      ->check(CLI::NonNegativeNumber);
  symmetric->add_option("--mode", y_mode, "fast_loo | exact_loo");

  // section5-oscillation
  Common osc_c;
  std::int64_t o_min = 5000;
  std::int64_t o_max = 10000;
  std::int64_t o_step = 1;
  auto* oscillation =
      app.add_subcommand("section5-oscillation", "iid 0.3/0.7 pair: a_n over a range of n");
  add_common(oscillation, osc_c, false);
  oscillation->add_option("--n-min", o_min, "First n");
  oscillation->add_option("--n-max", o_max, "Last n (inclusive)");
  oscillation->add_option("--step", o_step, "Stride in n");

  // detect
  Common det_c;
  std::string d_adjacency;
  std::string d_dense;
  std::string d_trace;
  std::string d_truth;
  std::string d_mode = "fast_loo";
  std::int64_t d_k = 0;
  double d_truncation = 10.0;
  auto* detect = app.add_subcommand("detect", "Community detection on an adjacency file");
  add_common(detect, det_c, true);
  auto* adj_opt = detect->add_option("--adjacency", d_adjacency, "Edge list: header `n K`, then `i j` lines");
  auto* dense_opt = detect->add_option("--dense", d_dense, "Dense 0/1 matrix, one row per line");
  adj_opt->excludes(dense_opt);
  detect->add_option("--k", d_k, "Community count (defaults to the edge-list header)");
  detect->add_option("--mode", d_mode, "fast_loo | exact_loo");
  detect->add_option("--trace", d_trace, "Write the per-stage trace as JSON");
  detect->add_option("--truth", d_truth, "Planted labels; reports mis in the trace and on stderr");
  detect->add_option("--truncation", d_truncation, "Degree truncation factor over the mean degree");

  // sample
  Common smp_c;
  std::int64_t m_n = 200;
  std::int64_t m_k = 2;
  double m_in = 0.55;
  double m_out = 0.45;
  std::string m_labels;
  auto* sample = app.add_subcommand("sample", "Balanced planted-partition sample as an edge list");
  add_common(sample, smp_c, true);
  sample->add_option("--n", m_n, "Node count")->check(CLI::PositiveNumber);
  sample->add_option("--k", m_k, "Community count")->check(CLI::PositiveNumber);
  sample->add_option("--p-in", m_in, "Within-community edge probability");
  sample->add_option("--p-out", m_out, "Between-community edge probability");
  sample->add_option("--labels-out", m_labels, "Write planted labels here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*bounds) {
      std::vector<cs::BoundsRow> rows;
      if (!pair_path.empty()) {
        auto in = open_input(pair_path);
        rows.push_back(cs::bounds_row(cs::group(cs::read_pair_csv(in)), bounds_c.seed));
      } else {
        rows = cs::iid_bounds_sweep(b_p0, b_p1, parse_n_list(b_n), bounds_c.seed);
      }
      emit(bounds_c.out, csv_text(cs::bounds_table(rows), "bounds: exact log affinity and its sandwich"));
    } else if (*sandwich) {
      const auto rows = cs::iid_bounds_sweep(s_p0, s_p1, parse_n_list(s_n));
      emit(sand_c.out, csv_text(cs::sandwich_table(rows), "sandwich: r_n = eta * scale * exp(D*)"));
    } else if (*symmetric) {
      const auto mode = parse_mode(y_mode);
      std::vector<cs::SymmetricRow> rows;
      for (auto n : parse_n_list(y_n)) {
        rows.push_back(cs::symmetric_row(n, y_trials, sym_c.seed, mode, sym_c.threads));
      }
      emit(sym_c.out, csv_text(cs::symmetric_table(rows),
                               "section5-symmetric: n nodes per community, 2n coordinates; "
                               "a_n = log eta + 2n r, a_n_literal = log eta + n r, "
                               "r = -log(2 sqrt(0.55*0.45))"));
    } else if (*oscillation) {
      const auto rows = cs::oscillation_sweep(o_min, o_max, o_step, osc_c.threads);
      emit(osc_c.out, csv_text(cs::oscillation_table(rows),
                               "section5-oscillation: a_n = log eta - n log(2 sqrt(0.21)), "
                               "a_n_literal = log eta - (n/2) log(0.21)"));
    } else if (*detect) {
      cs::Graph graph;
      std::size_t k = 0;
      if (!d_adjacency.empty()) {
        auto in = open_input(d_adjacency);
        auto file = cs::read_edge_list(in);
        graph = std::move(file.graph);
        k = file.communities;
      } else if (!d_dense.empty()) {
        auto in = open_input(d_dense);
        graph = cs::read_dense_adjacency(in);
      } else {
        throw cs::Error(cs::Errc::InvalidInput, "detect needs --adjacency or --dense");
      }
      if (d_k > 0) k = static_cast<std::size_t>(d_k);
      if (k == 0) throw cs::Error(cs::Errc::InvalidInput, "community count unknown; pass --k");
      cs::DetectOptions opt;
      opt.mode = parse_mode(d_mode);
      opt.spectral.truncation_factor = d_truncation;
      opt.threads = det_c.threads;
      const auto result = cs::detect_communities(graph, k, det_c.seed, opt);
      std::ostringstream labels;
      cs::write_labels(labels, result.labels);
      emit(det_c.out, labels.str());

      nlohmann::json trace;
      trace["n"] = graph.size();
      trace["K"] = k;
      trace["seed"] = det_c.seed;
      trace["mode"] = cs::loo_mode_name(opt.mode);
      trace["split_retries"] = result.trace.split_retries;
      trace["initial_labels"] = result.trace.initial_labels;
      trace["p_tilde"] = matrix_json(result.trace.p_tilde);
      trace["in_first_half"] = result.trace.in_first_half;
      trace["half_labels"] = result.trace.half_labels;
      trace["refined_labels"] = result.trace.refined_labels;
      trace["p_hat"] = matrix_json(result.trace.p_hat);
      trace["final_labels"] = result.trace.final_labels;
      trace["spectral_seconds"] = result.trace.spectral_seconds;
      trace["refine_seconds"] = result.trace.refine_seconds;
      if (!d_truth.empty()) {
        auto in = open_input(d_truth);
        const auto truth = cs::read_labels(in);
        const double m = cs::mis(result.labels, truth, k);
        trace["mis"] = m;
        std::cerr << "mis " << cs::format_number(m) << '\n';
      }
      if (!d_trace.empty()) emit(d_trace, trace.dump(2) + "\n");
    } else if (*sample) {
      const auto k = static_cast<Eigen::Index>(m_k);
      Eigen::MatrixXd p = Eigen::MatrixXd::Constant(k, k, m_out);
      p.diagonal().setConstant(m_in);
      const auto model = cs::SbmModel::balanced(static_cast<std::size_t>(m_n), p);
      std::ostringstream edges;
      cs::write_edge_list(edges, cs::sample_adjacency(model, smp_c.seed), model.communities());
      emit(smp_c.out, edges.str());
      if (!m_labels.empty()) {
        std::ostringstream labels;
        cs::write_labels(labels, model.labels());
        emit(m_labels, labels.str());
      }
    }
  } catch (const cs::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cs::is_numerical(e.code()) ? kExitNumerical : kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}
