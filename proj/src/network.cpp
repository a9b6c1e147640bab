#include "v2x/network.hpp"

#include <cmath>

#include "v2x/error.hpp"

namespace v2x {

std::vector<Vec3> Geometry::rsu_positions() const {
  std::vector<Vec3> out;
  out.reserve(rsu_count);
  const int per_side[2] = {(rsu_count + 1) / 2, rsu_count / 2};
  int index_on_side[2] = {0, 0};
  for (int b = 0; b < rsu_count; ++b) {
    const int side = b % 2;
    const int n = per_side[side];
    const double span = (n - 1) * rsu_spacing;
    const double x0 = 0.5 * (road_length - span);
    const double x = x0 + index_on_side[side]++ * rsu_spacing;
    out.push_back({x, side == 0 ? 0.0 : road_width, rsu_height});
  }
  return out;
}

double Geometry::lane_center(int lane) const { return (lane + 0.5) * road_width / lanes; }

void Geometry::validate() const {
  require(rsu_count >= 1 && vehicle_count >= 1, ErrorKind::kConfigInvalid,
          "geometry: need at least one RSU and one vehicle");
  require(road_length > 0 && road_width > 0 && lanes >= 1, ErrorKind::kConfigInvalid,
          "geometry: invalid road dimensions");
  require(rsu_height > 0 && vue_antenna_height > 0, ErrorKind::kConfigInvalid,
          "geometry: heights must be positive");
  require(mean_speed_kmh >= 0 && speed_jitter >= 0 && speed_jitter <= 1,
          ErrorKind::kConfigInvalid, "geometry: invalid speed parameters");
  for (const auto& p : rsu_positions())
    require(p.x >= 0 && p.x <= road_length && p.y >= 0 && p.y <= road_width,
            ErrorKind::kConfigInvalid, "geometry: RSU outside the service area");
}

std::vector<VehicleState> spawn_vehicles(const Geometry& geo, Rng& rng) {
  std::uniform_real_distribution<double> along(0.0, geo.road_length);
  std::uniform_real_distribution<double> jitter(1.0 - geo.speed_jitter, 1.0 + geo.speed_jitter);
  const double mean_speed = geo.mean_speed_kmh / 3.6;
  std::vector<VehicleState> out(geo.vehicle_count);
  for (int v = 0; v < geo.vehicle_count; ++v) {
    auto& s = out[v];
    s.lane = v % geo.lanes;
    s.direction_x = (s.lane % 2 == 0) ? 1.0 : -1.0;
    s.direction_y = 0.0;
    s.position = {along(rng), geo.lane_center(s.lane), geo.vue_antenna_height};
    s.speed = mean_speed * jitter(rng);
  }
  return out;
}

std::vector<VehicleState> step_mobility(const std::vector<VehicleState>& vehicles, double dt,
                                        const Geometry& geo, MobilityMode mode) {
  require(dt > 0.0, ErrorKind::kInvalidArgument, "step_mobility: dt <= 0");
  std::vector<VehicleState> out = vehicles;
  const double L = geo.road_length;
  for (auto& s : out) {
    s.crossed_boundary = false;
    if (s.departed) continue;
    s.position.x += s.speed * dt * s.direction_x;
    s.position.y += s.speed * dt * s.direction_y;
    if (s.position.x < 0.0 || s.position.x >= L) {
      s.crossed_boundary = true;
      if (mode == MobilityMode::kWrap) {
        s.position.x = std::fmod(s.position.x, L);
        if (s.position.x < 0.0) s.position.x += L;
      } else {
        s.departed = true;
      }
    }
  }
  return out;
}

SlotTiming::SlotTiming(double beam_coherence_s, double training_s)
    : beam_coherence_(beam_coherence_s), training_(training_s) {
  require(beam_coherence_s > 0.0, ErrorKind::kConfigInvalid, "timing: T_B must be positive");
  require(training_s >= 0.0 && training_s < beam_coherence_s, ErrorKind::kConfigInvalid,
          "timing: require 0 <= T_tr < T_B");
}

AssociationMatrix::AssociationMatrix(int rsus, int vehicles)
    : rsus_(rsus), vehicles_(vehicles), z_(static_cast<std::size_t>(rsus) * vehicles, 0) {
  require(rsus >= 1 && vehicles >= 1, ErrorKind::kInvalidArgument,
          "AssociationMatrix: empty dimensions");
}

AssociationMatrix AssociationMatrix::from_actions(std::span<const int> actions, int vehicles) {
  AssociationMatrix z(static_cast<int>(actions.size()), vehicles);
  for (std::size_t b = 0; b < actions.size(); ++b) {
    require(actions[b] >= 0 && actions[b] < vehicles, ErrorKind::kInvalidAction,
            "association: vehicle index out of range");
    z(static_cast<int>(b), actions[b]) = 1;
  }
  return z;
}

std::optional<AssociationViolation> validate_association(const AssociationMatrix& z) {
  for (int b = 0; b < z.rsus(); ++b) {
    int sum = 0;
    for (int v = 0; v < z.vehicles(); ++v) {
      const auto e = z(b, v);
      if (e > 1) return AssociationViolation{b, "non-binary entry"};
      sum += e;
    }
    if (sum != 1)
      return AssociationViolation{b, "row sum " + std::to_string(sum) + " != 1"};
  }
  return std::nullopt;
}

namespace {

template <typename T>
Beamformer conjugate_impl(std::span<const std::complex<T>> h) {
  const std::size_t n = h.size();
  require(n >= 1, ErrorKind::kInvalidArgument, "conjugate_beamformer: empty channel");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Beamformer f;
  f.weights.resize(n);
  double energy = 0.0;
  for (const auto& x : h) energy += std::norm(std::complex<double>(x));
  if (energy == 0.0) {
    f.degenerate = true;
    for (auto& w : f.weights) w = cplx(scale, 0.0);
    return f;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> x(h[i]);
    f.weights[i] = std::polar(scale, -std::arg(x));
  }
  return f;
}

}  // namespace

Beamformer conjugate_beamformer(std::span<const cplx> h) { return conjugate_impl(h); }

Beamformer conjugate_beamformer(std::span<const std::complex<float>> h) {
  return conjugate_impl(h);
}

cplx beam_product(std::span<const cplx> f, std::span<const cplx> h) {
  require(f.size() == h.size(), ErrorKind::kShapeMismatch, "beam_product: length mismatch");
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * h[i];
  return acc;
}

SlotChannelSet make_slot_channels(const ChannelTrace& trace, int t) {
  SlotChannelSet s;
  s.rsus = trace.rsus();
  s.vehicles = trace.vehicles();
  s.h.reserve(static_cast<std::size_t>(s.rsus) * s.vehicles);
  s.f.reserve(s.h.capacity());
  for (int b = 0; b < s.rsus; ++b)
    for (int v = 0; v < s.vehicles; ++v) {
      s.h.push_back(trace.vector_at(t, b, v).gains);
      s.f.push_back(conjugate_beamformer(std::span<const cplx>(s.h.back())).weights);
    }
  return s;
}

LinkBudget LinkBudget::from(const ChannelConfig& cfg) {
  return {cfg.tx_power_w(), cfg.noise_power_w(), cfg.bandwidth_hz};
}

double sinr(int v, const AssociationMatrix& z, const SlotChannelSet& slot, const LinkBudget& lb) {
  require(z.rsus() == slot.rsus && z.vehicles() == slot.vehicles &&
              slot.h.size() == static_cast<std::size_t>(slot.rsus) * slot.vehicles &&
              slot.f.size() == slot.h.size(),
          ErrorKind::kInvalidArgument, "sinr: inconsistent dimensions");
  require(v >= 0 && v < slot.vehicles, ErrorKind::kInvalidArgument, "sinr: vehicle out of range");
  double signal = 0.0;
  for (int b = 0; b < slot.rsus; ++b)
    if (z(b, v)) signal += lb.tx_power_w * std::norm(beam_product(slot.beam(b, v), slot.channel(b, v)));
  if (signal == 0.0) return 0.0;
  double interference = 0.0;
  for (int other = 0; other < slot.vehicles; ++other) {
    if (other == v) continue;
    for (int b = 0; b < slot.rsus; ++b) {
      if (!z(b, other) || z(b, v)) continue;
      interference +=
          lb.tx_power_w * std::norm(beam_product(slot.beam(b, other), slot.channel(b, v)));
    }
  }
  return signal / (lb.noise_w + interference);
}

double achievable_rate(int v, const AssociationMatrix& z, const SlotChannelSet& slot,
                       const LinkBudget& lb) {
  return lb.bandwidth_hz * std::log2(1.0 + sinr(v, z, slot, lb));
}

double effective_rate(double rate, const SlotTiming& timing) {
  return (1.0 - timing.overhead_fraction()) * rate;
}

LinkGains::LinkGains(int rsus, int vehicles)
    : rsus_(rsus),
      vehicles_(vehicles),
      g_(static_cast<std::size_t>(rsus) * vehicles * vehicles, 0.0) {}

LinkGains LinkGains::from_slot(const SlotChannelSet& slot) {
  LinkGains g(slot.rsus, slot.vehicles);
  for (int b = 0; b < slot.rsus; ++b)
    for (int s = 0; s < slot.vehicles; ++s)
      for (int r = 0; r < slot.vehicles; ++r)
        g(b, s, r) = std::norm(beam_product(slot.beam(b, s), slot.channel(b, r)));
  return g;
}

std::vector<double> slot_rates(std::span<const int> actions, const LinkGains& gains,
                               const LinkBudget& lb, const SlotTiming& timing) {
  const int B = gains.rsus();
  const int V = gains.vehicles();
  require(static_cast<int>(actions.size()) == B, ErrorKind::kShapeMismatch,
          "slot_rates: one action per RSU required");
  std::vector<double> signal(V, 0.0), interference(V, 0.0);
  for (int b = 0; b < B; ++b) {
    const int s = actions[b];
    require(s >= 0 && s < V, ErrorKind::kInvalidAction, "slot_rates: vehicle out of range");
    for (int r = 0; r < V; ++r) {
      const double p = lb.tx_power_w * gains(b, s, r);
      if (r == s)
        signal[r] += p;
      else
        interference[r] += p;
    }
  }
  const double scale = 1.0 - timing.overhead_fraction();
  std::vector<double> rates(V);
  for (int v = 0; v < V; ++v) {
    const double x = signal[v] == 0.0 ? 0.0 : signal[v] / (lb.noise_w + interference[v]);
    rates[v] = scale * lb.bandwidth_hz * std::log2(1.0 + x);
  }
  return rates;
}

}  // namespace v2x
