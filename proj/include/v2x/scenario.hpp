#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "v2x/channel.hpp"
#include "v2x/network.hpp"

namespace v2x {

struct ScenarioConfig {
  Geometry geometry;
  ChannelConfig channel;
  int slots = 2000;
  double slot_duration_s = 0.1;  // one slot = one beam coherence block T_B
  // T_tr / T_B at the reference vehicle count.
  double training_fraction = 0.1;
  // When set, pilots are sent one vehicle after another so T_tr grows
  // linearly with V and equals training_fraction at reference_vehicles.
  bool training_per_vehicle = false;
  int reference_vehicles = 8;

  SlotTiming timing() const;
  void validate() const;
};

struct MobilityTimeline {
  PositionTimeline positions;
  // boundary_crossing[t] = 1 when some vehicle left the segment while moving
  // from slot t-1 to slot t (always 0 at t = 0).
  std::vector<std::uint8_t> boundary_crossing;
};

// Wrap-mode mobility for `slots` slots; terminal semantics are recovered
// from boundary_crossing.
MobilityTimeline generate_mobility(const Geometry& geo, int slots, double dt, std::uint64_t seed);

// Everything the environment needs, precomputed once per (config, seed).
struct Scenario {
  ScenarioConfig cfg;
  std::uint64_t seed = 0;
  MobilityTimeline mobility;
  LinkBudget budget;
  SlotTiming timing{1.0, 0.0};
  std::vector<LinkGains> gains;                // [slot]
  std::shared_ptr<const ChannelTrace> trace;   // retained on request

  int rsus() const { return cfg.geometry.rsu_count; }
  int vehicles() const { return cfg.geometry.vehicle_count; }
  int slots() const { return static_cast<int>(gains.size()); }
};

// Channel and mobility streams are derived from `seed`.
std::shared_ptr<const Scenario> build_scenario(const ScenarioConfig& cfg, std::uint64_t seed,
                                               bool keep_trace = false);

// Uses a previously generated trace; mobility is regenerated from `seed` and
// the trace dimensions must agree with the config.
std::shared_ptr<const Scenario> build_scenario_from_trace(const ScenarioConfig& cfg,
                                                          std::uint64_t seed,
                                                          std::shared_ptr<const ChannelTrace> trace,
                                                          bool keep_trace = false);

std::vector<LinkGains> compute_gain_tensors(const ChannelTrace& trace);

}  // namespace v2x
