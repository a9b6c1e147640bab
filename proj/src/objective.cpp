#include "v2x/objective.hpp"

#include <cmath>

#include "v2x/error.hpp"

namespace v2x {

void ObjectiveConfig::validate() const {
  require(tradeoff_lambda >= 0.0 && std::isfinite(tradeoff_lambda), ErrorKind::kConfigInvalid,
          "objective: lambda must be >= 0");
  require(rate_threshold_bps > 0.0, ErrorKind::kConfigInvalid, "objective: R_th must be > 0");
}

void update_history(RateHistory& hist, ViolationTracker& tracker, std::span<const double> rates) {
  const auto V = static_cast<std::size_t>(hist.vehicles());
  require(rates.size() == V && tracker.indicator.size() == V, ErrorKind::kInvalidArgument,
          "update_history: rate vector length mismatch");
  ++hist.slots;
  const double t = static_cast<double>(hist.slots);
  for (std::size_t v = 0; v < V; ++v) {
    require(rates[v] >= 0.0, ErrorKind::kInvalidArgument, "update_history: negative rate");
    hist.cumulative[v] += rates[v];
    hist.average[v] = hist.cumulative[v] / t;
    tracker.indicator[v] = hist.average[v] < tracker.threshold_bps ? 1 : 0;
    tracker.count[v] += tracker.indicator[v];
    tracker.probability[v] = static_cast<double>(tracker.count[v]) / t;
  }
}

double local_reward(const RateHistory& hist, const ViolationTracker& tracker,
                    const ObjectiveConfig& cfg) {
  const int V = hist.vehicles();
  double mean_rate = 0.0;
  int violations = 0;
  for (int v = 0; v < V; ++v) {
    mean_rate += hist.average[v];
    violations += tracker.indicator[v];
  }
  mean_rate /= V * kBitsPerGbit;
  return mean_rate - cfg.tradeoff_lambda * violations;
}

double aggregate_global_reward(std::span<const double> locals) {
  double sum = 0.0;
  for (double x : locals) sum += x;
  return sum;
}

double objective_estimate(const RateHistory& hist, const ViolationTracker& tracker,
                          const ObjectiveConfig& cfg) {
  const int V = hist.vehicles();
  double mean_rate = 0.0, mean_prob = 0.0;
  for (int v = 0; v < V; ++v) {
    mean_rate += hist.average[v];
    mean_prob += tracker.probability[v];
  }
  return mean_rate / (V * kBitsPerGbit) - cfg.tradeoff_lambda * mean_prob / V;
}

}  // namespace v2x
