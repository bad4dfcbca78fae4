#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace chernoff_sbm {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

/// Streaming log-sum-exp: keeps a running maximum and a compensated sum of
/// exp(x - max), rescaling whenever a larger term arrives.
class LogSumExp {
 public:
  void add(double log_x) {
    if (log_x == -std::numeric_limits<double>::infinity()) return;
    if (log_x > max_) {
      if (max_ != -std::numeric_limits<double>::infinity()) {
        const double scale = std::exp(max_ - log_x);
        sum_ = sum_ * scale;
        comp_ = comp_ * scale;
      }
      max_ = log_x;
    }
    const double x = std::exp(log_x - max_);
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void merge(const LogSumExp& other) {
    if (other.max_ == -std::numeric_limits<double>::infinity()) return;
    // Fold the other accumulator in as a single pre-scaled term pair.
    const double other_total = other.sum_ + other.comp_;
    add(other.max_ + std::log(other_total));
  }

  double value() const {
    if (max_ == -std::numeric_limits<double>::infinity()) return max_;
    return max_ + std::log(sum_ + comp_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double logistic(double theta) {
  if (theta >= 0) return 1.0 / (1.0 + std::exp(-theta));
  const double e = std::exp(theta);
  return e / (1.0 + e);
}

/// log(1 + e^theta) without overflow.
inline double softplus(double theta) {
  if (theta > 0) return theta + std::log1p(std::exp(-theta));
  return std::log1p(std::exp(theta));
}

inline double log_binomial_coefficient(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

/// Table of log Binom(count, p)(x) for x = 0..count.
inline std::vector<double> binomial_log_pmf_table(std::int64_t count, double p) {
  std::vector<double> out(static_cast<std::size_t>(count) + 1);
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lgn = std::lgamma(static_cast<double>(count) + 1.0);
  for (std::int64_t x = 0; x <= count; ++x) {
    const double xd = static_cast<double>(x);
    out[static_cast<std::size_t>(x)] = lgn - std::lgamma(xd + 1.0) -
                                       std::lgamma(static_cast<double>(count - x) + 1.0) +
                                       xd * lp + static_cast<double>(count - x) * lq;
  }
  return out;
}

/// Scaled complementary error function exp(x^2) erfc(x).
inline double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series; at x >= 25 the terms shrink by at least 2k/1250 each.
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv2x2;
    sum += term;
  }
  return sum / (x * std::sqrt(std::numbers::pi));
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double sum_compensated(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

}  // namespace chernoff_sbm
