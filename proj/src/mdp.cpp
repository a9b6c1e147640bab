#include "v2x/mdp.hpp"

#include <algorithm>
#include <cmath>

#include "v2x/error.hpp"

namespace v2x {

void EnvConfig::validate() const {
  require(history >= 1, ErrorKind::kConfigInvalid, "mdp: history must be >= 1");
  require(max_episode_slots >= 0, ErrorKind::kConfigInvalid, "mdp: negative episode cap");
  require(compute_fraction >= 0.0 && compute_fraction < 1.0, ErrorKind::kConfigInvalid,
          "mdp: compute fraction outside [0, 1)");
  objective.validate();
}

Environment::Environment(std::shared_ptr<const Scenario> scenario, EnvConfig cfg)
    : scenario_(std::move(scenario)), cfg_(std::move(cfg)) {
  require(scenario_ != nullptr && scenario_->slots() >= 1, ErrorKind::kMissingTrace,
          "environment: empty scenario");
  cfg_.validate();
  if (cfg_.features == ChannelFeatureMode::kRawVector)
    require(scenario_->trace != nullptr, ErrorKind::kMissingTrace,
            "environment: raw-vector features need the channel trace");
  const SlotTiming& base = scenario_->timing;
  timing_ = SlotTiming(base.beam_coherence(),
                       base.training() + cfg_.compute_fraction * base.beam_coherence());
  reset(0);
}

int Environment::channel_dims() const {
  return cfg_.features == ChannelFeatureMode::kRawVector
             ? 2 * scenario_->cfg.channel.antenna_elements
             : 1;
}

void Environment::reset(int start_slot) {
  require(start_slot >= 0 && start_slot < scenario_->slots(), ErrorKind::kInvalidArgument,
          "environment: start slot outside the trace");
  start_ = slot_ = start_slot;
  elapsed_ = 0;
  done_ = false;
  const int V = vehicles();
  history_ = RateHistory(V);
  tracker_ = ViolationTracker(V, cfg_.objective.rate_threshold_bps);
  last_rates_.assign(V, 0.0);
}

LocalState Environment::observe(int b, int k) const {
  require(b >= 0 && b < rsus(), ErrorKind::kInvalidArgument, "observe: RSU out of range");
  require(k >= 1, ErrorKind::kInvalidArgument, "observe: history must be >= 1");
  LocalState s;
  s.rsu_id = b;
  s.slot = slot_;
  s.history = k;
  s.vehicles = vehicles();
  s.channels = channel_dims();
  s.channel_features.assign(static_cast<std::size_t>(k) * s.vehicles * s.channels, 0.0);
  for (int i = 0; i < k; ++i) {
    const int t = slot_ - i;
    if (t < start_) break;
    for (int v = 0; v < s.vehicles; ++v) {
      double* dst = &s.channel_features[(static_cast<std::size_t>(i) * s.vehicles + v) * s.channels];
      if (cfg_.features == ChannelFeatureMode::kBeamformedGain) {
        dst[0] = scenario_->gains[t].own(b, v);
      } else {
        const auto h = scenario_->trace->channel(t, b, v);
        for (std::size_t n = 0; n < h.size(); ++n) {
          dst[2 * n] = h[n].real();
          dst[2 * n + 1] = h[n].imag();
        }
      }
    }
  }
  s.experienced_rates = last_rates_;
  s.violation_flags = tracker_.indicator;
  return s;
}

StepResult Environment::step(const JointAction& joint) {
  require(!done_, ErrorKind::kInvalidArgument, "environment: step after terminal state");
  const int B = rsus();
  const int V = vehicles();
  require(static_cast<int>(joint.size()) == B, ErrorKind::kInvalidAction,
          "environment: one action per RSU required");
  for (int a : joint)
    require(a >= 0 && a < V, ErrorKind::kInvalidAction, "environment: vehicle index out of range");

  StepResult out;
  out.slot = slot_;
  std::vector<LocalState> before;
  before.reserve(B);
  for (int b = 0; b < B; ++b) before.push_back(observe(b));

  out.rates = slot_rates(joint, current_gains(), scenario_->budget, timing_);
  update_history(history_, tracker_, out.rates);
  last_rates_ = out.rates;
  out.local_rewards.resize(B);
  for (int b = 0; b < B; ++b) out.local_rewards[b] = local_reward(history_, tracker_, cfg_.objective);
  out.global_reward = aggregate_global_reward(out.local_rewards);

  ++elapsed_;
  const int T = scenario_->slots();
  bool terminal = slot_ + 1 >= T;
  if (!terminal) {
    ++slot_;
    if (cfg_.mobility == MobilityMode::kTerminal && scenario_->mobility.boundary_crossing[slot_])
      terminal = true;
  }
  if (cfg_.max_episode_slots > 0 && elapsed_ >= cfg_.max_episode_slots) terminal = true;
  done_ = terminal;
  out.terminal = terminal;

  out.transitions.reserve(B);
  for (int b = 0; b < B; ++b) {
    Transition tr;
    tr.state = std::move(before[b]);
    tr.action = joint[b];
    tr.global_reward = out.global_reward;
    tr.next_state = observe(b);
    tr.terminal = terminal;
    out.transitions.push_back(std::move(tr));
  }
  return out;
}

std::size_t encoded_size(int vehicles, int history, int channels) {
  return static_cast<std::size_t>(vehicles) * channels * history + 2u * vehicles;
}

std::vector<double> encode_state(const LocalState& s, const EncodeConfig& enc,
                                 ChannelFeatureMode mode) {
  const int V = s.vehicles, k = s.history, C = s.channels;
  std::vector<double> x(encoded_size(V, k, C));
  std::size_t pos = 0;
  for (int v = 0; v < V; ++v)
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < k; ++i) {
        const double f = s.feature(i, v, c);
        if (mode == ChannelFeatureMode::kBeamformedGain)
          x[pos++] = std::max(
              enc.floor, (10.0 * std::log10(f + enc.epsilon) - enc.db_center) / enc.db_half_range);
        else
          x[pos++] = std::asinh(f / enc.raw_scale) / 10.0;
      }
  for (int v = 0; v < V; ++v) x[pos++] = s.experienced_rates[v] / kBitsPerGbit;
  for (int v = 0; v < V; ++v) x[pos++] = static_cast<double>(s.violation_flags[v]);
  return x;
}

}  // namespace v2x
