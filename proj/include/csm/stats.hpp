#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace csm {

/// Monte Carlo statistic: sample mean, its standard error and the sample size.
struct MCEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t count = 0;

  MCEstimate scaled(double factor) const { return {mean * factor, se * std::abs(factor), count}; }
};

/// Streaming first and second moments (Welford), mergeable with Chan's
/// pairwise update. No samples are stored.
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double total = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * (nb / total);
    m2_ += other.m2_ + delta * delta * (na * nb / total);
    count_ += other.count_;
  }

  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }

  MCEstimate estimate() const {
    const double se = count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    return {mean_, se, count_};
  }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Combine per-block moments with a fixed binary tree over block indices, so
/// the result depends only on the block contents and never on which worker
/// produced them.
RunningStats reduce_pairwise(std::span<const RunningStats> blocks);

/// Samples per leaf block of the reduction tree.
inline constexpr std::size_t kReductionBlock = 4096;

/// Mean and standard error of per-trial values indexed by trial number:
/// consecutive blocks of kReductionBlock values, then reduce_pairwise.
MCEstimate summarize(std::span<const double> values);

/// Combined standard error of a difference of two independent estimates.
inline double combined_se(const MCEstimate& a, const MCEstimate& b) {
  return std::sqrt(a.se * a.se + b.se * b.se);
}

/// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace csm
