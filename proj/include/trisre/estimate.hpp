#pragma once

#include <cmath>
#include <cstdint>

namespace trisre {

/// Mean and variance accumulator (Welford), mergeable with Chan's formula.
class RunningStats {
 public:
  void add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other) noexcept {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double n_a = static_cast<double>(count_);
    const double n_b = static_cast<double>(other.count_);
    const double n = n_a + n_b;
    const double delta = other.mean_ - mean_;
    mean_ += delta * n_b / n;
    m2_ += other.m2_ + delta * delta * n_a * n_b / n;
    count_ += other.count_;
  }

  std::uint64_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  double standard_error() const noexcept {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// A Monte Carlo estimate together with where its randomness came from.
/// Closed-form values carry se = 0 and n_samples = 0.
struct EstimateWithError {
  double value = 0.0;
  double se = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_base = 0;

  static EstimateWithError exact(double v) noexcept { return {v, 0.0, 0, 0, 0}; }

  static EstimateWithError from(const RunningStats& stats, std::uint64_t seed,
                                std::uint64_t stream_base) noexcept {
    return {stats.mean(), stats.standard_error(), stats.count(), seed, stream_base};
  }

  EstimateWithError scaled(double factor) const noexcept {
    EstimateWithError out = *this;
    out.value *= factor;
    out.se *= std::abs(factor);
    return out;
  }
};

// First-order error propagation assuming the operands are independent.
inline EstimateWithError operator+(const EstimateWithError& a, const EstimateWithError& b) {
  EstimateWithError out = a;
  out.value = a.value + b.value;
  out.se = std::hypot(a.se, b.se);
  out.n_samples = a.n_samples + b.n_samples;
  return out;
}

inline EstimateWithError operator*(const EstimateWithError& a, const EstimateWithError& b) {
  EstimateWithError out = a;
  out.value = a.value * b.value;
  out.se = std::hypot(a.se * b.value, b.se * a.value);
  out.n_samples = a.n_samples + b.n_samples;
  return out;
}

/// |a - b| <= k * sqrt(se_a^2 + se_b^2)
inline bool agree_within(const EstimateWithError& a, const EstimateWithError& b, double k) {
  return std::abs(a.value - b.value) <= k * std::hypot(a.se, b.se);
}

}  // namespace trisre
