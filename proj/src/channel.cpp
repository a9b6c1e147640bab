#include "v2x/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "v2x/error.hpp"

namespace v2x {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kPi = std::numbers::pi;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace

double ChannelConfig::wavelength_m() const { return kSpeedOfLight / carrier_hz; }

double ChannelConfig::noise_power_dbm() const {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double ChannelConfig::noise_power_w() const { return db_to_linear(noise_power_dbm() - 30.0); }

double ChannelConfig::tx_power_w() const { return db_to_linear(tx_power_dbm - 30.0); }

void ChannelConfig::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  require(positive(carrier_hz) && positive(bandwidth_hz) && positive(path_loss_exponent) &&
              positive(element_spacing) && positive(reference_distance_m),
          ErrorKind::kConfigInvalid, "channel: physical quantities must be positive");
  require(antenna_elements >= 1, ErrorKind::kConfigInvalid, "channel: antenna_elements < 1");
  require(shadowing_std_db >= 0.0, ErrorKind::kConfigInvalid, "channel: negative shadowing std");
  require(cluster_persistence >= 0.0 && cluster_persistence <= 1.0, ErrorKind::kConfigInvalid,
          "channel: cluster_persistence outside [0, 1]");
  require(positive(cluster_decay_ns) && positive(subpath_decay_ns) && max_cluster_delay_ns >= 0.0,
          ErrorKind::kConfigInvalid, "channel: delay statistics must be positive");
}

CVec ula_response(double azimuth, int elements, double spacing) {
  require(elements >= 1, ErrorKind::kInvalidArgument, "ula_response: elements < 1");
  require(spacing > 0.0, ErrorKind::kInvalidArgument, "ula_response: spacing <= 0");
  const double scale = 1.0 / std::sqrt(static_cast<double>(elements));
  const double phase_step = 2.0 * kPi * spacing * std::sin(azimuth);
  CVec a(static_cast<std::size_t>(elements));
  for (int n = 0; n < elements; ++n) a[n] = std::polar(scale, phase_step * n);
  return a;
}

double path_loss_db(double distance_m, const ChannelConfig& cfg) {
  require(distance_m > 0.0, ErrorKind::kInvalidArgument, "path_loss_db: distance <= 0");
  const double d0 = cfg.reference_distance_m;
  const double fspl_d0 = 20.0 * std::log10(4.0 * kPi * d0 / cfg.wavelength_m());
  return fspl_d0 + 10.0 * cfg.path_loss_exponent * std::log10(distance_m / d0);
}

double los_azimuth(const Vec3& tx, const Vec3& rx) {
  const double along = rx.x - tx.x;
  const double across = std::abs(rx.y - tx.y);
  if (along == 0.0 && across == 0.0) return 0.0;
  return std::atan2(along, across);
}

double los_elevation(const Vec3& tx, const Vec3& rx) {
  const double horizontal = std::hypot(rx.x - tx.x, rx.y - tx.y);
  return std::atan2(rx.z - tx.z, horizontal);
}

ClusterLayout draw_layout(Rng& rng, const ChannelConfig& cfg) {
  ClusterLayout layout;
  std::uniform_int_distribution<int> cluster_count(1, kMaxTimeClusters);
  std::poisson_distribution<int> extra_lobes(1.0);
  std::uniform_int_distribution<int> paths_per_cluster(1, kMaxPathsPerCluster);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  layout.time_cluster_count = cluster_count(rng);
  layout.spatial_lobe_count = std::min(1 + extra_lobes(rng), kMaxSpatialLobes);
  layout.shadowing_db = cfg.shadowing_std_db * normal(rng);

  // Lobe 0 carries the LOS direction; the others sit at random offsets.
  std::vector<double> lobe_az(layout.spatial_lobe_count, 0.0);
  std::vector<double> lobe_el(layout.spatial_lobe_count, 0.0);
  for (int k = 1; k < layout.spatial_lobe_count; ++k) {
    lobe_az[k] = (unit(rng) - 0.5) * kPi * (2.0 / 3.0);
    lobe_el[k] = (unit(rng) - 0.5) * deg_to_rad(20.0);
  }

  std::vector<double> anchors(layout.time_cluster_count, 0.0);
  for (int c = 1; c < layout.time_cluster_count; ++c)
    anchors[c] = unit(rng) * cfg.max_cluster_delay_ns * 1e-9;
  std::sort(anchors.begin(), anchors.end());

  const double spread = deg_to_rad(cfg.lobe_spread_deg);
  std::uniform_int_distribution<int> pick_lobe(0, layout.spatial_lobe_count - 1);
  for (int c = 0; c < layout.time_cluster_count; ++c) {
    const double cluster_power = std::exp(-anchors[c] / (cfg.cluster_decay_ns * 1e-9)) *
                                 db_to_linear(3.0 * normal(rng));
    const int n = paths_per_cluster(rng);
    for (int i = 0; i < n; ++i) {
      ClusterLayout::PathTemplate p;
      p.cluster = c;
      const bool los = (c == 0 && i == 0);
      const double intra = los ? 0.0 : unit(rng) * kClusterWindowS;
      p.excess_delay = anchors[c] + intra;
      p.lobe = los ? 0 : pick_lobe(rng);
      p.aod_offset = los ? 0.0 : lobe_az[p.lobe] + spread * normal(rng);
      p.aod_elevation_offset = los ? 0.0 : lobe_el[p.lobe] + spread * normal(rng);
      p.aoa_offset = los ? 0.0 : (unit(rng) - 0.5) * 2.0 * kPi;
      p.aoa_elevation_offset = los ? 0.0 : spread * normal(rng);
      p.power_fraction = cluster_power * std::exp(-intra / (cfg.subpath_decay_ns * 1e-9));
      layout.paths.push_back(p);
    }
  }

  // The LOS template takes the largest mean power, then fractions sum to one.
  auto strongest = std::max_element(
      layout.paths.begin(), layout.paths.end(),
      [](const auto& a, const auto& b) { return a.power_fraction < b.power_fraction; });
  std::swap(layout.paths.front().power_fraction, strongest->power_fraction);
  double total = 0.0;
  for (const auto& p : layout.paths) total += p.power_fraction;
  for (auto& p : layout.paths) p.power_fraction /= total;
  return layout;
}

PathSet realize_paths(const ClusterLayout& layout, const Vec3& tx, const Vec3& rx, Rng& rng,
                      const ChannelConfig& cfg) {
  require(!(tx == rx), ErrorKind::kInvalidArgument, "sample_path_set: coincident positions");
  require(!layout.paths.empty(), ErrorKind::kInvalidArgument, "realize_paths: empty layout");

  const double dx = rx.x - tx.x, dy = rx.y - tx.y, dz = rx.z - tx.z;
  const double distance = std::sqrt(dx * dx + dy * dy + dz * dz);
  const double large_scale = db_to_linear(cfg.element_gain_db - path_loss_db(distance, cfg) -
                                          layout.shadowing_db);
  const double az = los_azimuth(tx, rx);
  const double el = los_elevation(tx, rx);

  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

  PathSet set;
  set.time_cluster_count = layout.time_cluster_count;
  set.spatial_lobe_count = layout.spatial_lobe_count;
  set.paths.reserve(layout.paths.size());
  double los_magnitude = 0.0;
  for (std::size_t l = 0; l < layout.paths.size(); ++l) {
    const auto& tpl = layout.paths[l];
    PathComponent p;
    const double mean_amp = std::sqrt(tpl.power_fraction);
    if (l == 0) {
      p.amplitude_gain = std::polar(mean_amp, phase(rng));
      los_magnitude = mean_amp;
    } else {
      cplx g(normal(rng), normal(rng));
      g *= mean_amp;
      // Small-scale fading never lifts a scattered path above the LOS path.
      if (std::abs(g) > los_magnitude) g *= los_magnitude / std::abs(g);
      p.amplitude_gain = g;
    }
    p.aod_azimuth = az + tpl.aod_offset;
    p.aod_elevation = el + tpl.aod_elevation_offset;
    p.aoa_azimuth = az + kPi + tpl.aoa_offset;
    p.aoa_elevation = -el + tpl.aoa_elevation_offset;
    p.excess_delay = tpl.excess_delay;
    p.cluster = tpl.cluster;
    p.lobe = tpl.lobe;
    set.paths.push_back(p);
  }

  double total = 0.0;
  for (const auto& p : set.paths) total += std::norm(p.amplitude_gain);
  const double scale = std::sqrt(large_scale / total);
  for (auto& p : set.paths) p.amplitude_gain *= scale;
  return set;
}

PathSet sample_path_set(const Vec3& tx, const Vec3& rx, Rng& rng, const ChannelConfig& cfg) {
  require(!(tx == rx), ErrorKind::kInvalidArgument, "sample_path_set: coincident positions");
  const ClusterLayout layout = draw_layout(rng, cfg);
  return realize_paths(layout, tx, rx, rng, cfg);
}

ChannelVector assemble_channel(const PathSet& paths, const ChannelConfig& cfg) {
  require(!paths.paths.empty(), ErrorKind::kInvalidArgument, "assemble_channel: empty path set");
  const int n_t = cfg.antenna_elements;
  const double L = static_cast<double>(paths.paths.size());
  const double prefactor = std::sqrt(static_cast<double>(n_t) / L);
  ChannelVector h;
  h.gains.assign(static_cast<std::size_t>(n_t), cplx(0.0, 0.0));
  for (const auto& p : paths.paths) {
    // Single omni receive element: the Rx response is identically 1.
    const CVec a = ula_response(p.aod_azimuth, n_t, cfg.element_spacing);
    const cplx w = prefactor * p.amplitude_gain;
    for (int n = 0; n < n_t; ++n) h.gains[n] += w * a[n];
  }
  return h;
}

LinkProcess::LinkProcess(std::uint64_t seed, const ChannelConfig& cfg)
    : cfg_(&cfg), rng_(make_rng(seed)) {
  layout_ = draw_layout(rng_, cfg);
}

PathSet LinkProcess::next(const Vec3& tx, const Vec3& rx) {
  if (!first_) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng_) >= cfg_->cluster_persistence) layout_ = draw_layout(rng_, *cfg_);
  }
  first_ = false;
  return realize_paths(layout_, tx, rx, rng_, *cfg_);
}

ChannelTrace::ChannelTrace(int rsus, int vehicles, int slots, std::uint64_t seed,
                           ChannelConfig cfg)
    : rsus_(rsus),
      vehicles_(vehicles),
      slots_(slots),
      antennas_(cfg.antenna_elements),
      seed_(seed),
      cfg_(cfg) {
  require(rsus >= 1 && vehicles >= 1 && slots >= 0 && antennas_ >= 1,
          ErrorKind::kInvalidArgument, "ChannelTrace: invalid dimensions");
  data_.assign(static_cast<std::size_t>(rsus) * vehicles * slots * antennas_, {0.0f, 0.0f});
}

std::size_t ChannelTrace::offset(int t, int b, int v) const {
  return ((static_cast<std::size_t>(t) * rsus_ + b) * vehicles_ + v) * antennas_;
}

std::span<const std::complex<float>> ChannelTrace::channel(int t, int b, int v) const {
  return {data_.data() + offset(t, b, v), static_cast<std::size_t>(antennas_)};
}

std::span<std::complex<float>> ChannelTrace::channel(int t, int b, int v) {
  return {data_.data() + offset(t, b, v), static_cast<std::size_t>(antennas_)};
}

ChannelVector ChannelTrace::vector_at(int t, int b, int v) const {
  ChannelVector h;
  h.rsu_id = b;
  h.vehicle_id = v;
  h.slot = t;
  const auto src = channel(t, b, v);
  h.gains.assign(src.begin(), src.end());
  return h;
}

ChannelTrace evolve_trace(const PositionTimeline& timeline, const ChannelConfig& cfg,
                          std::uint64_t seed) {
  cfg.validate();
  const int B = static_cast<int>(timeline.rsus.size());
  const int T = timeline.slots();
  require(B >= 1 && T >= 1, ErrorKind::kInvalidArgument, "evolve_trace: empty timeline");
  const int V = static_cast<int>(timeline.vehicles.front().size());
  require(V >= 1, ErrorKind::kInvalidArgument, "evolve_trace: no vehicles");
  for (const auto& slot : timeline.vehicles)
    require(static_cast<int>(slot.size()) == V, ErrorKind::kInvalidArgument,
            "evolve_trace: incomplete timeline");

  ChannelTrace trace(B, V, T, seed, cfg);
  for (int b = 0; b < B; ++b) {
    for (int v = 0; v < V; ++v) {
      LinkProcess link(derive_seed(seed, static_cast<std::uint64_t>(b) * V + v), cfg);
      for (int t = 0; t < T; ++t) {
        const PathSet paths = link.next(timeline.rsus[b], timeline.vehicles[t][v]);
        const ChannelVector h = assemble_channel(paths, cfg);
        auto dst = trace.channel(t, b, v);
        for (int n = 0; n < trace.antennas(); ++n)
          dst[n] = std::complex<float>(static_cast<float>(h.gains[n].real()),
                                       static_cast<float>(h.gains[n].imag()));
      }
    }
  }
  return trace;
}

}  // namespace v2x
