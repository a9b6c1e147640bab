#include "v2x/scenario.hpp"

#include "v2x/error.hpp"

namespace v2x {

SlotTiming ScenarioConfig::timing() const {
  double fraction = training_fraction;
  if (training_per_vehicle)
    fraction *= static_cast<double>(geometry.vehicle_count) / reference_vehicles;
  return SlotTiming(slot_duration_s, fraction * slot_duration_s);
}

void ScenarioConfig::validate() const {
  geometry.validate();
  channel.validate();
  require(slots >= 1, ErrorKind::kConfigInvalid, "scenario: slots must be >= 1");
  require(reference_vehicles >= 1, ErrorKind::kConfigInvalid,
          "scenario: reference_vehicles must be >= 1");
  (void)timing();
}

MobilityTimeline generate_mobility(const Geometry& geo, int slots, double dt, std::uint64_t seed) {
  geo.validate();
  Rng rng = make_rng(seed);
  MobilityTimeline out;
  out.positions.rsus = geo.rsu_positions();
  out.positions.vehicles.reserve(slots);
  out.boundary_crossing.assign(slots, 0);
  auto vehicles = spawn_vehicles(geo, rng);
  for (int t = 0; t < slots; ++t) {
    if (t > 0) {
      vehicles = step_mobility(vehicles, dt, geo, MobilityMode::kWrap);
      for (const auto& s : vehicles)
        if (s.crossed_boundary) out.boundary_crossing[t] = 1;
    }
    std::vector<Vec3> row;
    row.reserve(vehicles.size());
    for (const auto& s : vehicles) row.push_back(s.position);
    out.positions.vehicles.push_back(std::move(row));
  }
  return out;
}

std::vector<LinkGains> compute_gain_tensors(const ChannelTrace& trace) {
  std::vector<LinkGains> out;
  out.reserve(trace.slots());
  for (int t = 0; t < trace.slots(); ++t)
    out.push_back(LinkGains::from_slot(make_slot_channels(trace, t)));
  return out;
}

namespace {

std::shared_ptr<Scenario> skeleton(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto s = std::make_shared<Scenario>();
  s->cfg = cfg;
  s->seed = seed;
  s->mobility = generate_mobility(cfg.geometry, cfg.slots, cfg.slot_duration_s,
                                  derive_seed(seed, Stream::kMobility));
  s->budget = LinkBudget::from(cfg.channel);
  s->timing = cfg.timing();
  return s;
}

}  // namespace

std::shared_ptr<const Scenario> build_scenario(const ScenarioConfig& cfg, std::uint64_t seed,
                                               bool keep_trace) {
  auto s = skeleton(cfg, seed);
  auto trace = std::make_shared<ChannelTrace>(
      evolve_trace(s->mobility.positions, cfg.channel, derive_seed(seed, Stream::kChannel)));
  s->gains = compute_gain_tensors(*trace);
  if (keep_trace) s->trace = std::move(trace);
  return s;
}

std::shared_ptr<const Scenario> build_scenario_from_trace(const ScenarioConfig& cfg,
                                                          std::uint64_t seed,
                                                          std::shared_ptr<const ChannelTrace> trace,
                                                          bool keep_trace) {
  require(trace != nullptr, ErrorKind::kMissingTrace, "scenario: no channel trace supplied");
  require(trace->rsus() == cfg.geometry.rsu_count &&
              trace->vehicles() == cfg.geometry.vehicle_count && trace->slots() == cfg.slots &&
              trace->antennas() == cfg.channel.antenna_elements,
          ErrorKind::kFormatMismatch, "scenario: trace dimensions disagree with config");
  auto s = skeleton(cfg, seed);
  s->cfg.channel = trace->config();
  s->budget = LinkBudget::from(trace->config());
  s->gains = compute_gain_tensors(*trace);
  if (keep_trace) s->trace = std::move(trace);
  return s;
}

}  // namespace v2x
