#pragma once

#include <memory>
#include <vector>

#include "v2x/network.hpp"
#include "v2x/objective.hpp"
#include "v2x/scenario.hpp"

namespace v2x {

enum class ChannelFeatureMode {
  kBeamformedGain,  // |f_bv h_bv|^2 per vehicle (one channel)
  kRawVector,       // Re/Im of the raw N_t-element vector (2 N_t channels)
};

struct EnvConfig {
  int history = 8;
  MobilityMode mobility = MobilityMode::kTerminal;
  int max_episode_slots = 400;  // 0 disables the cap
  ChannelFeatureMode features = ChannelFeatureMode::kBeamformedGain;
  ObjectiveConfig objective;
  // Share of each slot spent on on-line computation, charged like T_tr.
  double compute_fraction = 0.0;

  void validate() const;
};

// Observation of one RSU. channel_features is a history x vehicles x channels
// tensor, row 0 being the current slot; rows before the episode start are zero.
struct LocalState {
  int rsu_id = 0;
  int slot = 0;
  int history = 0;
  int vehicles = 0;
  int channels = 1;
  std::vector<double> channel_features;
  std::vector<double> experienced_rates;  // bits/s of the previous slot
  std::vector<int> violation_flags;       // instantaneous indicators

  double feature(int row, int v, int c = 0) const {
    return channel_features[(static_cast<std::size_t>(row) * vehicles + v) * channels + c];
  }
};

using JointAction = std::vector<int>;

struct Transition {
  LocalState state;
  int action = 0;
  double global_reward = 0.0;
  LocalState next_state;
  bool terminal = false;
};

struct StepResult {
  std::vector<Transition> transitions;  // one per RSU
  std::vector<double> rates;            // effective rates of the slot
  std::vector<double> local_rewards;
  double global_reward = 0.0;
  bool terminal = false;
  int slot = 0;  // trace slot the actions were applied in
};

// Per-RSU MDP over a precomputed scenario. Actions never influence channels
// or mobility, so the environment replays the scenario from `reset(start)`.
class Environment {
 public:
  Environment(std::shared_ptr<const Scenario> scenario, EnvConfig cfg);

  void reset(int start_slot = 0);

  LocalState observe(int b) const { return observe(b, cfg_.history); }
  LocalState observe(int b, int k) const;
  StepResult step(const JointAction& joint);

  int rsus() const { return scenario_->rsus(); }
  int vehicles() const { return scenario_->vehicles(); }
  int slot() const { return slot_; }
  int episode_start() const { return start_; }
  int elapsed() const { return elapsed_; }
  bool done() const { return done_; }
  int channel_dims() const;

  const Scenario& scenario() const { return *scenario_; }
  const EnvConfig& config() const { return cfg_; }
  const LinkGains& current_gains() const { return scenario_->gains[slot_]; }
  const RateHistory& history() const { return history_; }
  const ViolationTracker& tracker() const { return tracker_; }
  const std::vector<double>& last_rates() const { return last_rates_; }
  const SlotTiming& timing() const { return timing_; }

 private:
  std::shared_ptr<const Scenario> scenario_;
  EnvConfig cfg_;
  int start_ = 0;
  int slot_ = 0;
  int elapsed_ = 0;
  bool done_ = false;
  RateHistory history_;
  ViolationTracker tracker_;
  std::vector<double> last_rates_;
  SlotTiming timing_{1.0, 0.0};
};

struct EncodeConfig {
  double epsilon = 1e-15;
  double db_center = -100.0;
  double db_half_range = 10.0;
  double floor = -3.0;
  double raw_scale = 1e-6;
};

// Flat network input: [vehicle][channel][history] channel block, then rates
// in Gbps, then violation flags. The channel block is 10 log10(x + eps)
// mapped affinely (about -1..1 over the usable link range) and clamped from
// below at `floor`, where an all-zero state lands. Raw-vector entries use
// asinh(x / raw_scale) / 10.
std::vector<double> encode_state(const LocalState& s, const EncodeConfig& enc = {},
                                 ChannelFeatureMode mode = ChannelFeatureMode::kBeamformedGain);

std::size_t encoded_size(int vehicles, int history, int channels);

}  // namespace v2x
