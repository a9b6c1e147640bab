#pragma once

#include <span>
#include <vector>

namespace v2x {

struct ObjectiveConfig {
  double tradeoff_lambda = 1.0;
  double rate_threshold_bps = 0.5e9;

  void validate() const;
};

// Per-vehicle cumulative and running-average effective rates.
struct RateHistory {
  std::vector<double> cumulative;  // sum of bits/s over elapsed slots
  std::vector<double> average;     // cumulative / slots
  long slots = 0;

  explicit RateHistory(int vehicles = 0)
      : cumulative(vehicles, 0.0), average(vehicles, 0.0) {}
  int vehicles() const { return static_cast<int>(cumulative.size()); }
};

// zeta_v(t) = 1 iff the running average is strictly below the threshold.
struct ViolationTracker {
  double threshold_bps = 0.5e9;
  std::vector<int> indicator;
  std::vector<long> count;
  std::vector<double> probability;  // count / slots

  ViolationTracker(int vehicles = 0, double threshold = 0.5e9)
      : threshold_bps(threshold), indicator(vehicles, 0), count(vehicles, 0),
        probability(vehicles, 0.0) {}
};

void update_history(RateHistory& hist, ViolationTracker& tracker, std::span<const double> rates);

// f_b = mean running average (Gbps) - lambda * number of violating vehicles.
double local_reward(const RateHistory& hist, const ViolationTracker& tracker,
                    const ObjectiveConfig& cfg);

// Reward aggregator: sums the per-RSU rewards; the sum is broadcast to all agents.
double aggregate_global_reward(std::span<const double> locals);

// Finite-horizon objective: mean running average (Gbps) minus lambda times
// the mean empirical violation probability.
double objective_estimate(const RateHistory& hist, const ViolationTracker& tracker,
                          const ObjectiveConfig& cfg);

inline constexpr double kBitsPerGbit = 1e9;

}  // namespace v2x
