#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "v2x/channel.hpp"

namespace v2x {

// Road segment with RSUs on rooftops along both sides. Lane l is centred at
// y = (l + 0.5) * road_width / lanes; even lanes drive towards +x.
struct Geometry {
  double road_length = 160.0;
  double road_width = 10.0;
  int lanes = 2;
  double rsu_height = 30.0;
  double rsu_spacing = 60.0;
  int rsu_count = 6;
  int vehicle_count = 8;
  double vue_antenna_height = 1.5;
  double mean_speed_kmh = 25.0;
  double speed_jitter = 0.1;  // per-vehicle speed ~ mean * U(1 - j, 1 + j)

  // Alternating sides (y = 0, y = road_width); each side spaced rsu_spacing
  // apart and centred on the segment.
  std::vector<Vec3> rsu_positions() const;
  double lane_center(int lane) const;
  void validate() const;
};

enum class MobilityMode { kWrap, kTerminal };

struct VehicleState {
  Vec3 position;
  int lane = 0;
  double speed = 0.0;        // m/s
  double direction_x = 1.0;  // unit 2D heading (x, y)
  double direction_y = 0.0;
  bool departed = false;         // terminal mode: left the segment
  bool crossed_boundary = false;  // left (and possibly re-entered) on the last step
};

std::vector<VehicleState> spawn_vehicles(const Geometry& geo, Rng& rng);

// Advances every vehicle speed*dt along its heading. Speeds are fixed at
// spawn time, so the step itself consumes no randomness.
std::vector<VehicleState> step_mobility(const std::vector<VehicleState>& vehicles, double dt,
                                        const Geometry& geo, MobilityMode mode);

class SlotTiming {
 public:
  SlotTiming(double beam_coherence_s, double training_s);

  double beam_coherence() const { return beam_coherence_; }
  double training() const { return training_; }
  double data() const { return beam_coherence_ - training_; }
  double overhead_fraction() const { return training_ / beam_coherence_; }

 private:
  double beam_coherence_;
  double training_;
};

// Binary B x V association for one slot.
class AssociationMatrix {
 public:
  AssociationMatrix(int rsus, int vehicles);

  static AssociationMatrix from_actions(std::span<const int> actions, int vehicles);

  int rsus() const { return rsus_; }
  int vehicles() const { return vehicles_; }
  std::uint8_t operator()(int b, int v) const { return z_[b * vehicles_ + v]; }
  std::uint8_t& operator()(int b, int v) { return z_[b * vehicles_ + v]; }

 private:
  int rsus_;
  int vehicles_;
  std::vector<std::uint8_t> z_;
};

struct AssociationViolation {
  int row = 0;
  std::string reason;
};

// Checks binary entries and unit row sums; reports the first offending row.
std::optional<AssociationViolation> validate_association(const AssociationMatrix& z);

struct Beamformer {
  CVec weights;
  bool degenerate = false;
};

// Phase-only matched beam: f_n = exp(-j arg h_n) / sqrt(N_t). A zero channel
// yields the broadside beam with the degenerate flag set.
Beamformer conjugate_beamformer(std::span<const cplx> h);
Beamformer conjugate_beamformer(std::span<const std::complex<float>> h);

// f . h without conjugation (f already carries the conjugate phases).
cplx beam_product(std::span<const cplx> f, std::span<const cplx> h);

// Channels and beams of one slot, indexed [b * V + v]; f[b*V+v] is the beam
// RSU b would use towards vehicle v.
struct SlotChannelSet {
  int rsus = 0;
  int vehicles = 0;
  std::vector<CVec> h;
  std::vector<CVec> f;

  const CVec& channel(int b, int v) const { return h[b * vehicles + v]; }
  const CVec& beam(int b, int v) const { return f[b * vehicles + v]; }
};

SlotChannelSet make_slot_channels(const ChannelTrace& trace, int t);

struct LinkBudget {
  double tx_power_w = 1.0;
  double noise_w = 1.0;
  double bandwidth_hz = 1.0;

  static LinkBudget from(const ChannelConfig& cfg);
};

double sinr(int v, const AssociationMatrix& z, const SlotChannelSet& slot, const LinkBudget& lb);
double achievable_rate(int v, const AssociationMatrix& z, const SlotChannelSet& slot,
                       const LinkBudget& lb);
double effective_rate(double rate, const SlotTiming& timing);

// Post-beamforming gain tensor |f_{b,s} h_{b,r}|^2 of one slot: RSU b beaming
// towards served vehicle s, observed at receiver r.
class LinkGains {
 public:
  LinkGains() = default;
  LinkGains(int rsus, int vehicles);

  static LinkGains from_slot(const SlotChannelSet& slot);

  int rsus() const { return rsus_; }
  int vehicles() const { return vehicles_; }
  double operator()(int b, int served, int rx) const {
    return g_[(static_cast<std::size_t>(b) * vehicles_ + served) * vehicles_ + rx];
  }
  double& operator()(int b, int served, int rx) {
    return g_[(static_cast<std::size_t>(b) * vehicles_ + served) * vehicles_ + rx];
  }
  // Serving-beam gain |f_bv h_bv|^2.
  double own(int b, int v) const { return (*this)(b, v, v); }

 private:
  int rsus_ = 0;
  int vehicles_ = 0;
  std::vector<double> g_;
};

// Effective rates (bits/s) of all vehicles when RSU b serves actions[b].
std::vector<double> slot_rates(std::span<const int> actions, const LinkGains& gains,
                               const LinkBudget& lb, const SlotTiming& timing);

}  // namespace v2x
