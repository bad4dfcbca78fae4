#pragma once

// Product-Bernoulli hypothesis pairs: per-coordinate form, run-length grouped
// form, and the natural (log-odds) parameterization.

#include <chernoff_sbm/error.hpp>
#include <chernoff_sbm/numeric.hpp>

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace chernoff_sbm {

namespace detail {

inline void check_probability(double p, const char* which, std::size_t index) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << which << "[" << index << "] = " << p << " is not in the open interval (0,1)";
    throw Error(Errc::OutOfRange, msg.str());
  }
}

}  // namespace detail

/// Two product-Bernoulli hypotheses with per-coordinate success
/// probabilities. Entries are strictly inside (0,1) so both products share
/// the full support {0,1}^n.
class HypothesisPair {
 public:
  static HypothesisPair validate(std::vector<double> p0, std::vector<double> p1) {
    if (p0.empty() || p1.empty()) {
      throw Error(Errc::LengthMismatch, "probability vectors must be non-empty");
    }
    if (p0.size() != p1.size()) {
      throw Error(Errc::LengthMismatch, "p0 has " + std::to_string(p0.size()) +
                                            " entries but p1 has " + std::to_string(p1.size()));
    }
    for (std::size_t j = 0; j < p0.size(); ++j) {
      detail::check_probability(p0[j], "p0", j);
      detail::check_probability(p1[j], "p1", j);
    }
    return HypothesisPair(std::move(p0), std::move(p1));
  }

  std::size_t size() const { return p0_.size(); }
  std::span<const double> p0() const { return p0_; }
  std::span<const double> p1() const { return p1_; }

  /// True when the two hypotheses coincide on every coordinate.
  bool degenerate() const { return p0_ == p1_; }

  HypothesisPair swapped() const { return HypothesisPair(p1_, p0_); }

  /// k-fold concatenation of the coordinates.
  HypothesisPair repeated(std::size_t k) const {
    std::vector<double> a;
    std::vector<double> b;
    a.reserve(p0_.size() * k);
    b.reserve(p1_.size() * k);
    for (std::size_t r = 0; r < k; ++r) {
      a.insert(a.end(), p0_.begin(), p0_.end());
      b.insert(b.end(), p1_.begin(), p1_.end());
    }
    return HypothesisPair(std::move(a), std::move(b));
  }

  static HypothesisPair iid(double p0, double p1, std::size_t n) {
    return validate(std::vector<double>(n, p0), std::vector<double>(n, p1));
  }

 private:
  HypothesisPair(std::vector<double> p0, std::vector<double> p1)
      : p0_(std::move(p0)), p1_(std::move(p1)) {}

  std::vector<double> p0_;
  std::vector<double> p1_;
};

inline HypothesisPair validate_pair(std::vector<double> p0, std::vector<double> p1) {
  return HypothesisPair::validate(std::move(p0), std::move(p1));
}

struct Group {
  double p0;
  double p1;
  std::int64_t count;

  bool operator==(const Group&) const = default;
};

/// Run-length form of a HypothesisPair: coordinates with bit-identical
/// (p0, p1) share a group. Group order is by first occurrence.
class GroupedPair {
 public:
  /// Builds from arbitrary groups, merging entries with identical (p0, p1)
  /// into the first occurrence.
  static GroupedPair from_groups(std::span<const Group> groups) {
    std::vector<Group> merged;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const Group& in = groups[g];
      detail::check_probability(in.p0, "group.p0", g);
      detail::check_probability(in.p1, "group.p1", g);
      if (in.count <= 0) {
        throw Error(Errc::OutOfRange, "group " + std::to_string(g) + " has non-positive count");
      }
      auto it = std::find_if(merged.begin(), merged.end(), [&](const Group& m) {
        return m.p0 == in.p0 && m.p1 == in.p1;
      });
      if (it == merged.end()) {
        merged.push_back(in);
      } else {
        it->count += in.count;
      }
    }
    if (merged.empty()) throw Error(Errc::LengthMismatch, "grouped pair needs at least one group");
    return GroupedPair(std::move(merged));
  }

  static GroupedPair from_groups(std::initializer_list<Group> groups) {
    return from_groups(std::span<const Group>(groups.begin(), groups.size()));
  }

  std::span<const Group> groups() const { return groups_; }

  std::int64_t size() const {
    std::int64_t n = 0;
    for (const auto& g : groups_) n += g.count;
    return n;
  }

  bool degenerate() const {
    return std::all_of(groups_.begin(), groups_.end(),
                       [](const Group& g) { return g.p0 == g.p1; });
  }

  GroupedPair swapped() const {
    std::vector<Group> out;
    out.reserve(groups_.size());
    for (const auto& g : groups_) out.push_back({g.p1, g.p0, g.count});
    return GroupedPair(std::move(out));
  }

 private:
  explicit GroupedPair(std::vector<Group> groups) : groups_(std::move(groups)) {}

  std::vector<Group> groups_;
};

inline GroupedPair group(const HypothesisPair& pair) {
  std::vector<Group> groups;
  const auto p0 = pair.p0();
  const auto p1 = pair.p1();
  for (std::size_t j = 0; j < pair.size(); ++j) groups.push_back({p0[j], p1[j], 1});
  return GroupedPair::from_groups(groups);
}

inline HypothesisPair expand(const GroupedPair& grouped) {
  std::vector<double> p0;
  std::vector<double> p1;
  for (const auto& g : grouped.groups()) {
    p0.insert(p0.end(), static_cast<std::size_t>(g.count), g.p0);
    p1.insert(p1.end(), static_cast<std::size_t>(g.count), g.p1);
  }
  return HypothesisPair::validate(std::move(p0), std::move(p1));
}

/// Log-odds theta = log(p / (1 - p)) for each hypothesis.
struct NaturalParams {
  std::vector<double> theta0;
  std::vector<double> theta1;
};

inline NaturalParams to_natural(const HypothesisPair& pair) {
  NaturalParams out;
  out.theta0.reserve(pair.size());
  out.theta1.reserve(pair.size());
  for (double p : pair.p0()) out.theta0.push_back(logit(p));
  for (double p : pair.p1()) out.theta1.push_back(logit(p));
  return out;
}

inline HypothesisPair from_natural(const NaturalParams& params) {
  std::vector<double> p0;
  std::vector<double> p1;
  for (double t : params.theta0) p0.push_back(logistic(t));
  for (double t : params.theta1) p1.push_back(logistic(t));
  return HypothesisPair::validate(std::move(p0), std::move(p1));
}

/// Reads a `p0,p1` CSV (header required). Blank lines and `#` comments are
/// skipped.
inline HypothesisPair read_pair_csv(std::istream& in) {
  std::string line;
  bool header_seen = false;
  std::vector<double> p0;
  std::vector<double> p1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      std::string compact;
      for (char c : line) {
        if (c != ' ' && c != '\t') compact.push_back(c);
      }
      if (compact != "p0,p1") {
        throw Error(Errc::InvalidInput, "expected header `p0,p1`, got `" + line + "`");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(Errc::InvalidInput, "line " + std::to_string(line_no) + ": expected two columns");
    }
    try {
      std::size_t used0 = 0;
      std::size_t used1 = 0;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      p0.push_back(std::stod(a, &used0));
      p1.push_back(std::stod(b, &used1));
      auto trailing_ok = [](const std::string& s, std::size_t used) {
        return s.find_first_not_of(" \t", used) == std::string::npos;
      };
      if (!trailing_ok(a, used0) || !trailing_ok(b, used1)) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidInput, "line " + std::to_string(line_no) + ": malformed number");
    }
  }
  if (!header_seen) throw Error(Errc::InvalidInput, "missing `p0,p1` header");
  return HypothesisPair::validate(std::move(p0), std::move(p1));
}

inline void write_pair_csv(std::ostream& out, const HypothesisPair& pair) {
  out << "p0,p1\n";
  out.precision(17);
  for (std::size_t j = 0; j < pair.size(); ++j) out << pair.p0()[j] << ',' << pair.p1()[j] << '\n';
}

}  // namespace chernoff_sbm
