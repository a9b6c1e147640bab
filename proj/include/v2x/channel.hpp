#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "v2x/rng.hpp"

namespace v2x {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// Link-budget and multipath-statistics parameters for trace generation.
// Atmospheric fields are carried for provenance only; they are not modelled.
struct ChannelConfig {
  double carrier_hz = 28e9;
  double bandwidth_hz = 800e6;
  double path_loss_exponent = 2.0;
  double tx_power_dbm = 30.0;
  int antenna_elements = 128;
  double element_spacing = 0.5;  // wavelengths
  double noise_figure_db = 10.0;
  double shadowing_std_db = 4.0;
  double reference_distance_m = 1.0;
  // Elevation pattern of the Tx elements folded into a fixed amplitude gain.
  double element_gain_db = -20.0;
  double cluster_persistence = 0.9;
  double lobe_spread_deg = 5.0;
  double max_cluster_delay_ns = 200.0;
  double cluster_decay_ns = 50.0;
  double subpath_decay_ns = 10.0;

  double pressure_mbar = 1013.25;
  double humidity_pct = 50.0;
  double temperature_c = 20.0;

  double wavelength_m() const;
  // Thermal noise: -174 dBm/Hz + 10 log10(bandwidth) + noise figure.
  double noise_power_dbm() const;
  double noise_power_w() const;
  double tx_power_w() const;
  void validate() const;
};

inline constexpr int kMaxTimeClusters = 6;
inline constexpr int kMaxSpatialLobes = 5;
inline constexpr int kMaxPathsPerCluster = 5;
inline constexpr double kClusterWindowS = 25e-9;

struct PathComponent {
  cplx amplitude_gain;
  double aod_azimuth = 0.0;
  double aod_elevation = 0.0;
  double aoa_azimuth = 0.0;
  double aoa_elevation = 0.0;
  double excess_delay = 0.0;  // seconds
  int cluster = 0;
  int lobe = 0;
};

struct PathSet {
  std::vector<PathComponent> paths;  // paths[0] is the LOS component
  int time_cluster_count = 1;
  int spatial_lobe_count = 1;
};

// Large-scale multipath structure that persists across slots. Angles are
// offsets relative to the geometric LOS direction so the layout follows the
// vehicle as it moves.
struct ClusterLayout {
  struct PathTemplate {
    int cluster = 0;
    int lobe = 0;
    double excess_delay = 0.0;
    double aod_offset = 0.0;
    double aod_elevation_offset = 0.0;
    double aoa_offset = 0.0;
    double aoa_elevation_offset = 0.0;
    double power_fraction = 0.0;
  };

  int time_cluster_count = 1;
  int spatial_lobe_count = 1;
  double shadowing_db = 0.0;
  std::vector<PathTemplate> paths;
};

struct ChannelVector {
  CVec gains;
  int rsu_id = 0;
  int vehicle_id = 0;
  int slot = 0;
};

// Uniform-linear-array steering vector with unit Euclidean norm.
CVec ula_response(double azimuth, int elements, double spacing);

double path_loss_db(double distance_m, const ChannelConfig& cfg);

// Azimuth off array broadside (array axis along x) and elevation from tx to rx.
double los_azimuth(const Vec3& tx, const Vec3& rx);
double los_elevation(const Vec3& tx, const Vec3& rx);

ClusterLayout draw_layout(Rng& rng, const ChannelConfig& cfg);
PathSet realize_paths(const ClusterLayout& layout, const Vec3& tx, const Vec3& rx,
                      Rng& rng, const ChannelConfig& cfg);
PathSet sample_path_set(const Vec3& tx, const Vec3& rx, Rng& rng,
                        const ChannelConfig& cfg);

ChannelVector assemble_channel(const PathSet& paths, const ChannelConfig& cfg);

// Time evolution of one RSU-vehicle link: the cluster layout persists from
// slot to slot with probability cfg.cluster_persistence, small-scale fading is
// redrawn every slot, and the LOS geometry follows the supplied positions.
class LinkProcess {
 public:
  LinkProcess(std::uint64_t seed, const ChannelConfig& cfg);

  PathSet next(const Vec3& tx, const Vec3& rx);
  const ClusterLayout& layout() const { return layout_; }

 private:
  const ChannelConfig* cfg_;
  Rng rng_;
  ClusterLayout layout_;
  bool first_ = true;
};

// Per-slot positions of every RSU (static) and every vehicle.
struct PositionTimeline {
  std::vector<Vec3> rsus;
  std::vector<std::vector<Vec3>> vehicles;  // [slot][vehicle]

  int slots() const { return static_cast<int>(vehicles.size()); }
};

// Dense (t, b, v, antenna) store of complex64 channel gains.
class ChannelTrace {
 public:
  ChannelTrace() = default;
  ChannelTrace(int rsus, int vehicles, int slots, std::uint64_t seed, ChannelConfig cfg);

  int rsus() const { return rsus_; }
  int vehicles() const { return vehicles_; }
  int slots() const { return slots_; }
  int antennas() const { return antennas_; }
  std::uint64_t rng_seed() const { return seed_; }
  const ChannelConfig& config() const { return cfg_; }

  std::span<const std::complex<float>> channel(int t, int b, int v) const;
  std::span<std::complex<float>> channel(int t, int b, int v);
  ChannelVector vector_at(int t, int b, int v) const;

  const std::vector<std::complex<float>>& raw() const { return data_; }
  std::vector<std::complex<float>>& raw() { return data_; }

 private:
  std::size_t offset(int t, int b, int v) const;

  int rsus_ = 0;
  int vehicles_ = 0;
  int slots_ = 0;
  int antennas_ = 0;
  std::uint64_t seed_ = 0;
  ChannelConfig cfg_;
  std::vector<std::complex<float>> data_;
};

// Block-fading trace: one channel draw per (b, v, slot). Each (b, v) link
// owns a substream derived from `seed`, so links are independent of the
// order in which they are generated.
ChannelTrace evolve_trace(const PositionTimeline& timeline, const ChannelConfig& cfg,
                          std::uint64_t seed);

}  // namespace v2x
