#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "v2x/mdp.hpp"
#include "v2x/network.hpp"
#include "v2x/objective.hpp"

namespace v2x {

enum class BaselineKind { kMaxRssi, kProportionalFair, kMyopic, kRandom, kFixed };

BaselineKind parse_baseline(const std::string& name);
std::string to_string(BaselineKind kind);

// Argmax with ties to the lowest index.
int argmax_first(std::span<const double> values);

// Received power p |f_bv h_bv|^2 for every vehicle, post-beamforming.
std::vector<double> rssi(int b, const LinkGains& gains, const LinkBudget& lb);
int max_rssi_action(int b, const LinkGains& gains, const LinkBudget& lb);

// Network-wide exponentially smoothed experienced rates, coefficient 1/W,
// floored at `floor_bps`.
struct PfState {
  int window = 50;
  double floor_bps = 1.0;
  std::vector<double> average;

  PfState(int vehicles = 0, int window = 50, double floor_bps = 1.0);
  void update(std::span<const double> rates);
};

// Interference-free effective rate RSU b would deliver to each vehicle.
std::vector<double> solo_rate_estimate(int b, const LinkGains& gains, const LinkBudget& lb,
                                       const SlotTiming& timing);
int proportional_fair_action(int b, const LinkGains& gains, const PfState& pf,
                             const LinkBudget& lb, const SlotTiming& timing);

// Global reward the network would receive after applying `joint` this slot,
// given the histories before the slot.
double instantaneous_reward(std::span<const int> joint, const LinkGains& gains,
                            const RateHistory& hist, const ObjectiveConfig& obj,
                            const LinkBudget& lb, const SlotTiming& timing);

struct MyopicResult {
  JointAction action;
  double reward = 0.0;
  long evaluated = 0;
  bool fallback = false;  // budget exceeded, greedy result
};

inline constexpr double kMyopicBudget = 1e7;

// Exhaustive search over all V^B joint actions, lexicographic order with ties
// to the smallest. Falls back to sequential per-RSU greedy when V^B exceeds
// the budget, or throws budget-exceeded if `allow_fallback` is false.
MyopicResult myopic_optimal_joint(const LinkGains& gains, const RateHistory& hist,
                                  const ObjectiveConfig& obj, const LinkBudget& lb,
                                  const SlotTiming& timing, double budget = kMyopicBudget,
                                  bool allow_fallback = true);

// Plain-data copy of everything the per-slot reward depends on.
struct Snapshot {
  int rsus = 0;
  int vehicles = 0;
  std::vector<double> gains;       // [b][served][rx]
  std::vector<double> cumulative;  // bits/s summed over past slots
  long slots = 0;
  double lambda = 1.0;
  double threshold_bps = 0.5e9;
  double tx_power_w = 1.0;
  double noise_w = 1.0;
  double bandwidth_hz = 1.0;
  double overhead = 0.0;  // T_tr / T_B
};

Snapshot make_snapshot(const LinkGains& gains, const RateHistory& hist, const ObjectiveConfig& obj,
                       const LinkBudget& lb, const SlotTiming& timing);

struct OracleResult {
  std::vector<int> action;
  double reward = 0.0;
};

// Independent scalar exhaustive search for tests; V^B <= 1e5.
OracleResult brute_force_oracle(const Snapshot& s);

// Per-slot baseline policy over an Environment.
class BaselinePolicy {
 public:
  BaselinePolicy(BaselineKind kind, int rsus, int vehicles, std::uint64_t seed, int pf_window = 50);

  JointAction act(const Environment& env);
  void observe(const StepResult& r);
  BaselineKind kind() const { return kind_; }
  long fallbacks() const { return fallbacks_; }

 private:
  BaselineKind kind_;
  int rsus_;
  int vehicles_;
  Rng rng_;
  PfState pf_;
  long fallbacks_ = 0;
};

}  // namespace v2x
