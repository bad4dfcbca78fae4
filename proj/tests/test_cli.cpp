#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const std::string kCli = CHERNOFF_SBM_CLI;
const std::string kFixtures = CHERNOFF_SBM_FIXTURES;

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const fs::path tmp = fs::temp_directory_path() /
                       ("cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                        std::to_string(std::hash<std::string>{}(args)) + ".out");
  const std::string cmd = kCli + " " + args + " > " + tmp.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(tmp);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

int data_rows(const std::string& csv) {
  int rows = 0;
  std::istringstream in(csv);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST(Cli, BoundsFromPairFile) {
  const auto r = run("bounds --pair " + fixture("small_pair.csv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# schema=1\n", 0), 0u);
  EXPECT_NE(r.out.find("n,alpha_star,d_star,sigma_bar,log_eta_exact,log_lower,log_upper,"
                       "lower_applicable,log_shannon"),
            std::string::npos);
  EXPECT_EQ(data_rows(r.out), 1);
}

TEST(Cli, IdenticalPairIsInvalidInput) {
  EXPECT_EQ(run("bounds --pair " + fixture("identical_pair.csv")).code, 2);
  EXPECT_EQ(run("sandwich --p0 0.4 --p1 0.4 --n 10").code, 2);
  EXPECT_EQ(run("bounds --p0 1.5 --p1 0.4").code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("bounds --n 1:x").code, 2);
  EXPECT_EQ(run("detect --dense " + fixture("missing.txt")).code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const auto from_config = run("sandwich --config " + fixture("sandwich.toml"));
  ASSERT_EQ(from_config.code, 0);
  EXPECT_EQ(data_rows(from_config.out), 4);
  EXPECT_NE(from_config.out.find("\n100,"), std::string::npos);
  const auto overridden = run("sandwich --config " + fixture("sandwich.toml") + " --n 50");
  ASSERT_EQ(overridden.code, 0);
  EXPECT_EQ(data_rows(overridden.out), 1);
  EXPECT_NE(overridden.out.find("\n50,"), std::string::npos);
}

TEST(Cli, DetectTwoCliques) {
  for (const std::string mode : {"fast_loo", "exact_loo"}) {
    const auto trace = fs::temp_directory_path() / ("trace_" + mode + ".json");
    const auto r = run("detect --dense " + fixture("two_cliques_dense.txt") + " --k 2 --seed 3 --mode " +
                       mode + " --truth " + fixture("two_cliques_labels.txt") + " --trace " +
                       trace.string());
    ASSERT_EQ(r.code, 0) << mode;
    std::istringstream labels(r.out);
    std::vector<int> z;
    for (int v; labels >> v;) z.push_back(v);
    ASSERT_EQ(z.size(), 20u);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(z[i] == z[0], i < 10);
    std::ifstream tin(trace);
    std::stringstream ts;
    ts << tin.rdbuf();
    EXPECT_NE(ts.str().find("\"mis\": 0.0"), std::string::npos);
    EXPECT_NE(ts.str().find("\"mode\": \"" + mode + "\""), std::string::npos);
    fs::remove(trace);
  }
  const auto edges = run("detect --adjacency " + fixture("two_cliques_edges.txt") + " --seed 3");
  EXPECT_EQ(edges.code, 0);
}

TEST(Cli, DetectRejectsBadInput) {
  EXPECT_EQ(run("detect --dense " + fixture("asymmetric_dense.txt") + " --k 1").code, 2);
  EXPECT_EQ(run("detect --dense " + fixture("two_cliques_dense.txt")).code, 2);  // K unknown
  EXPECT_EQ(run("detect --dense " + fixture("two_cliques_dense.txt") + " --k 3").code, 2);  // n < 8K
  EXPECT_EQ(run("detect --dense " + fixture("two_cliques_dense.txt") + " --k 2 --mode slow").code, 2);
}

TEST(Cli, SampleRoundTrip) {
  const auto edges = fs::temp_directory_path() / "cli_sample_edges.txt";
  const auto labels = fs::temp_directory_path() / "cli_sample_labels.txt";
  ASSERT_EQ(run("sample --n 200 --k 2 --p-in 0.5 --p-out 0.1 --seed 4 --out " + edges.string() +
                " --labels-out " + labels.string())
                .code,
            0);
  const auto r = run("detect --adjacency " + edges.string() + " --seed 1 --truth " + labels.string());
  EXPECT_EQ(r.code, 0);
  fs::remove(edges);
  fs::remove(labels);
}

TEST(Cli, SeededCommandsAreByteIdentical) {
  for (const std::string args :
       {"section5-symmetric --n 30 --trials 2 --seed 5", "section5-oscillation --n-min 100 --n-max 120",
        "sandwich --n 100,200", "bounds --n 10:50:10"}) {
    const auto a = run(args);
    const auto b = run(args);
    ASSERT_EQ(a.code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
}
