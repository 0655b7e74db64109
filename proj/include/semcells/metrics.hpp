#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "semcells/core.hpp"

namespace semcells {

// Sum over dimensions of the variance of the g gene values.
inline double polysemy(const Cell& cell,
                       VarianceMode mode = VarianceMode::population) {
  const std::size_t g = cell.chromosome_count();
  if (mode == VarianceMode::sample && g < 2) {
    throw Error(ErrorCode::SampleVarianceUndefined,
                "sample variance needs at least two chromosomes");
  }
  const double divisor =
      static_cast<double>(mode == VarianceMode::population ? g : g - 1);
  double total = 0.0;
  for (std::size_t k = 0; k < cell.dimension(); ++k) {
    // Shifted by the first chromosome so identical genes give exactly 0.
    const double origin = cell.chromosome(0)[k];
    double mean = 0.0;
    for (const auto& chromosome : cell.chromosomes()) mean += chromosome[k] - origin;
    mean /= static_cast<double>(g);
    double squares = 0.0;
    for (const auto& chromosome : cell.chromosomes()) {
      const double dev = (chromosome[k] - origin) - mean;
      squares += dev * dev;
    }
    total += squares / divisor;
  }
  return total;
}

struct TrajectorySample {
  std::size_t step = 0;
  double polysemy = 0.0;

  friend bool operator==(const TrajectorySample&,
                         const TrajectorySample&) = default;
};

class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::string item) : item_(std::move(item)) {}

  void add(std::size_t step, double value) {
    if (!samples_.empty() && step <= samples_.back().step) {
      throw Error(ErrorCode::InvalidTrajectory,
                  "trajectory steps must be strictly increasing");
    }
    if (!(value >= 0.0)) {
      throw Error(ErrorCode::InvalidTrajectory,
                  "polysemy sample must be non-negative");
    }
    samples_.push_back({step, value});
  }

  const std::string& item() const noexcept { return item_; }
  const std::vector<TrajectorySample>& samples() const noexcept {
    return samples_;
  }
  std::size_t size() const noexcept { return samples_.size(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::string item_;
  std::vector<TrajectorySample> samples_;
};

struct TrajectorySummary {
  double initial = 0.0;
  double final = 0.0;
  std::size_t decrease_count = 0;
  double max_drawdown = 0.0;
  double monotonicity_ratio = 1.0;

  friend bool operator==(const TrajectorySummary&,
                         const TrajectorySummary&) = default;
};

// Drops smaller than this are float noise, not decreases.
inline constexpr double kDecreaseTolerance = 1e-12;

inline TrajectorySummary summarize(const Trajectory& trajectory) {
  const auto& samples = trajectory.samples();
  if (samples.size() < 2) {
    throw Error(ErrorCode::TooFewSamples,
                "summary needs at least two samples");
  }
  TrajectorySummary summary;
  summary.initial = samples.front().polysemy;
  summary.final = samples.back().polysemy;
  double peak = samples.front().polysemy;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double prev = samples[i - 1].polysemy;
    const double cur = samples[i].polysemy;
    if (cur < prev - kDecreaseTolerance) ++summary.decrease_count;
    peak = std::max(peak, cur);
    summary.max_drawdown = std::max(summary.max_drawdown, peak - cur);
  }
  const auto pairs = static_cast<double>(samples.size() - 1);
  summary.monotonicity_ratio =
      (pairs - static_cast<double>(summary.decrease_count)) / pairs;
  return summary;
}

}  // namespace semcells
