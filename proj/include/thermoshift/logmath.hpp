#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace thermoshift {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// log(e^a + e^b) with -inf as the additive identity.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

/// Streaming log-sum-exp. The result depends only on the order of add()
/// calls, so a fixed enumeration order gives bit-stable results.
class LogSumAccumulator {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (max_ == kNegInf) {
      max_ = x;
      sum_ = 1.0;
    } else if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  void merge(const LogSumAccumulator& other) {
    if (other.max_ == kNegInf) return;
    if (max_ == kNegInf) {
      *this = other;
    } else if (other.max_ <= max_) {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> values) {
  LogSumAccumulator acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

/// Pairwise reduction over partial accumulators with a tree shape fixed by
/// the number of parts only.
inline double pairwise_log_sum(std::vector<LogSumAccumulator> parts) {
  if (parts.empty()) return kNegInf;
  while (parts.size() > 1) {
    std::vector<LogSumAccumulator> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      LogSumAccumulator a = parts[i];
      a.merge(parts[i + 1]);
      next.push_back(a);
    }
    if (parts.size() % 2 == 1) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts.front().value();
}

}  // namespace thermoshift
