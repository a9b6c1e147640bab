#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "v2x/channel.hpp"
#include "v2x/error.hpp"
#include "v2x/trace_io.hpp"

using namespace v2x;

namespace {

double norm2(const CVec& a) {
  double s = 0.0;
  for (const auto& x : a) s += std::norm(x);
  return std::sqrt(s);
}

ChannelConfig small_cfg(int n) {
  ChannelConfig c;
  c.antenna_elements = n;
  return c;
}

}  // namespace

TEST(Ula, BroadsideIsFlat) {
  const auto a = ula_response(0.0, 4, 0.5);
  ASSERT_EQ(a.size(), 4u);
  for (const auto& x : a) {
    EXPECT_NEAR(x.real(), 0.5, 1e-15);
    EXPECT_NEAR(x.imag(), 0.0, 1e-15);
  }
}

TEST(Ula, EndfireHalfWavelength) {
  const auto a = ula_response(std::numbers::pi / 2, 2, 0.5);
  EXPECT_NEAR(a[0].real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(a[1].real(), -1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(a[1].imag(), 0.0, 1e-15);
}

TEST(Ula, MatchesOracleAndUnitNorm) {
  const auto a = ula_response(0.3, 128, 0.5);
  const auto o = oracle::steering(0.3, 128, 0.5);
  double s = 0.0;
  for (int i = 0; i < 128; ++i) {
    s += std::norm(a[i]);
    EXPECT_NEAR(std::abs(a[i] - o[i]), 0.0, 1e-12);
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Ula, UnitNormProperty) {
  Rng rng(7);
  std::uniform_real_distribution<double> az(-std::numbers::pi, std::numbers::pi);
  for (int n = 1; n <= 256; ++n) EXPECT_NEAR(norm2(ula_response(az(rng), n, 0.5)), 1.0, 1e-12);
}

TEST(Ula, RejectsZeroElements) {
  try {
    ula_response(0.0, 0, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(PathLoss, ExponentTwoAtSixtyMetres) {
  ChannelConfig c;
  EXPECT_NEAR(path_loss_db(60.0, c) - path_loss_db(1.0, c), 20 * std::log10(60.0), 1e-12);
}

TEST(PathSet, TotalPowerFollowsLinkBudget) {
  ChannelConfig c;
  c.shadowing_std_db = 0.0;
  const double lambda = 299792458.0 / c.carrier_hz;
  const double fspl0 = 20 * std::log10(4 * std::numbers::pi / lambda);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const auto ps = sample_path_set({0, 0, 0}, {60, 0, 0}, rng, c);
    double total = 0.0;
    for (const auto& p : ps.paths) total += std::norm(p.amplitude_gain);
    const double expect_db = c.element_gain_db - fspl0 - 20 * std::log10(60.0);
    EXPECT_NEAR(10 * std::log10(total), expect_db, 1e-9);
  }
}

TEST(PathSet, CountsWithinBoundsAndLobeMean) {
  ChannelConfig c;
  long lobes = 0;
  const int n = 10000;
  for (int s = 0; s < n; ++s) {
    Rng rng(1000 + s);
    const auto ps = sample_path_set({0, 0, 30}, {20, 5, 1.5}, rng, c);
    ASSERT_GE(ps.time_cluster_count, 1);
    ASSERT_LE(ps.time_cluster_count, 6);
    ASSERT_GE(ps.spatial_lobe_count, 1);
    ASSERT_LE(ps.spatial_lobe_count, 5);
    lobes += ps.spatial_lobe_count;
    // Excess delays within the cluster window of the cluster anchor.
    std::vector<double> anchor(ps.time_cluster_count, 1e9);
    for (const auto& p : ps.paths) anchor[p.cluster] = std::min(anchor[p.cluster], p.excess_delay);
    for (const auto& p : ps.paths) ASSERT_LE(p.excess_delay - anchor[p.cluster], 25e-9);
  }
  EXPECT_NEAR(double(lobes) / n, 2.0, 0.1);
}

TEST(PathSet, LosIsStrongestAndGeometric) {
  ChannelConfig c;
  for (int s = 0; s < 200; ++s) {
    Rng rng(s);
    const Vec3 tx{0, 0, 30}, rx{25, 10, 1.5};
    const auto ps = sample_path_set(tx, rx, rng, c);
    EXPECT_NEAR(ps.paths[0].aod_azimuth, los_azimuth(tx, rx), 1e-15);
    for (const auto& p : ps.paths)
      EXPECT_LE(std::abs(p.amplitude_gain), std::abs(ps.paths[0].amplitude_gain) * (1 + 1e-12));
  }
}

TEST(PathSet, CoincidentPositionsRejected) {
  Rng rng(1);
  ChannelConfig c;
  try {
    sample_path_set({1, 2, 3}, {1, 2, 3}, rng, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(Assemble, SingleBroadsidePath) {
  PathSet ps;
  ps.paths.resize(1);
  ps.paths[0].amplitude_gain = 1.0;
  const auto h = assemble_channel(ps, small_cfg(4));
  for (const auto& x : h.gains) EXPECT_NEAR(std::abs(x - cplx(1.0)), 0.0, 1e-15);
}

TEST(Assemble, ZeroAmplitudes) {
  PathSet ps;
  ps.paths.resize(3);
  ps.paths[1].aod_azimuth = 0.4;
  const auto h = assemble_channel(ps, small_cfg(8));
  for (const auto& x : h.gains) EXPECT_EQ(std::abs(x), 0.0);
}

TEST(Assemble, EmptyRejected) {
  EXPECT_THROW(assemble_channel(PathSet{}, small_cfg(4)), Error);
}

TEST(Assemble, MatchesSuperpositionOracle) {
  Rng rng(3);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> az(-1.5, 1.5);
  for (int rep = 0; rep < 50; ++rep) {
    PathSet ps;
    std::vector<oracle::cd> alpha;
    std::vector<double> angles;
    for (int l = 0; l < 3; ++l) {
      PathComponent p;
      p.amplitude_gain = {g(rng), g(rng)};
      p.aod_azimuth = az(rng);
      ps.paths.push_back(p);
      alpha.push_back(p.amplitude_gain);
      angles.push_back(p.aod_azimuth);
    }
    const auto h = assemble_channel(ps, small_cfg(8));
    const auto o = oracle::superpose(alpha, angles, 8, 0.5);
    for (int i = 0; i < 8; ++i) EXPECT_LE(std::abs(h.gains[i] - o[i]), 1e-12);
  }
}

TEST(Assemble, LinearInAmplitudes) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ps = sample_path_set({0, 0, 30}, {40, 3, 1.5}, rng, small_cfg(32));
    auto doubled = ps;
    for (auto& p : doubled.paths) p.amplitude_gain *= 2.0;
    const auto h = assemble_channel(ps, small_cfg(32));
    const auto h2 = assemble_channel(doubled, small_cfg(32));
    for (int i = 0; i < 32; ++i) EXPECT_LE(std::abs(h2.gains[i] - 2.0 * h.gains[i]), 1e-12);
  }
}

TEST(Assemble, IdenticalPathsNorm) {
  Rng rng(11);
  std::uniform_int_distribution<int> pick(1, 6);
  std::uniform_real_distribution<double> az(-1.5, 1.5);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 4 * pick(rng), L = pick(rng);
    const double angle = az(rng);
    PathSet ps;
    for (int l = 0; l < L; ++l) {
      PathComponent p;
      p.amplitude_gain = 1.0;
      p.aod_azimuth = angle;
      ps.paths.push_back(p);
    }
    const auto h = assemble_channel(ps, small_cfg(n));
    // sqrt(N/L) * L * a with unit-norm a.
    EXPECT_NEAR(norm2(h.gains), std::sqrt(double(n) / L) * L, 1e-10);
  }
}

namespace {

PositionTimeline timeline(int B, int V, int T, bool moving) {
  PositionTimeline tl;
  for (int b = 0; b < B; ++b) tl.rsus.push_back({30.0 + 60.0 * b, b % 2 ? 10.0 : 0.0, 30.0});
  for (int t = 0; t < T; ++t) {
    std::vector<Vec3> vs;
    for (int v = 0; v < V; ++v) vs.push_back({10.0 + 7.0 * v + (moving ? 0.7 * t : 0.0), 2.5, 1.5});
    tl.vehicles.push_back(vs);
  }
  return tl;
}

}  // namespace

TEST(Trace, DeskDimensions) {
  ChannelConfig c = small_cfg(4);
  const auto tr = evolve_trace(timeline(6, 8, 2000, true), c, 9);
  EXPECT_EQ(tr.rsus() * tr.vehicles() * tr.slots(), 96000);
  EXPECT_EQ(tr.raw().size(), 96000u * 4);
}

TEST(Trace, Reproducible) {
  ChannelConfig c = small_cfg(16);
  const auto a = evolve_trace(timeline(2, 3, 40, true), c, 42);
  const auto b = evolve_trace(timeline(2, 3, 40, true), c, 42);
  ASSERT_EQ(a.raw().size(), b.raw().size());
  EXPECT_EQ(0, std::memcmp(a.raw().data(), b.raw().data(), a.raw().size() * sizeof(a.raw()[0])));
  const auto d = evolve_trace(timeline(2, 3, 40, true), c, 43);
  EXPECT_NE(0, std::memcmp(a.raw().data(), d.raw().data(), a.raw().size() * sizeof(a.raw()[0])));

  const auto dir = std::filesystem::temp_directory_path();
  write_trace(dir / "v2x_a.v2xt", a);
  write_trace(dir / "v2x_b.v2xt", b);
  std::ifstream fa(dir / "v2x_a.v2xt", std::ios::binary), fb(dir / "v2x_b.v2xt", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, sb);
  const auto back = read_trace(dir / "v2x_a.v2xt");
  EXPECT_EQ(back.raw(), a.raw());
  EXPECT_EQ(back.rng_seed(), 42u);
}

TEST(Trace, StationaryFullPersistenceKeepsLayout) {
  ChannelConfig c = small_cfg(8);
  c.cluster_persistence = 1.0;
  const auto tl = timeline(1, 1, 30, false);
  LinkProcess link(5, c);
  const auto first = link.next(tl.rsus[0], tl.vehicles[0][0]);
  for (int t = 1; t < 30; ++t) {
    const auto ps = link.next(tl.rsus[0], tl.vehicles[t][0]);
    ASSERT_EQ(ps.paths.size(), first.paths.size());
    EXPECT_EQ(ps.paths[0].aod_azimuth, first.paths[0].aod_azimuth);
    for (std::size_t l = 0; l < ps.paths.size(); ++l)
      EXPECT_EQ(ps.paths[l].aod_azimuth, first.paths[l].aod_azimuth);
  }
}

TEST(Trace, LinksIndependentOfGenerationOrder) {
  ChannelConfig c = small_cfg(8);
  const auto big = evolve_trace(timeline(2, 3, 10, true), c, 77);
  // Link (b=1, v=2) reproduced alone from its derived substream.
  const auto tl = timeline(2, 3, 10, true);
  LinkProcess link(derive_seed(77, 1 * 3 + 2), c);
  for (int t = 0; t < 10; ++t) {
    const auto h = assemble_channel(link.next(tl.rsus[1], tl.vehicles[t][2]), c);
    const auto s = big.channel(t, 1, 2);
    for (int n = 0; n < 8; ++n) {
      EXPECT_EQ(s[n].real(), static_cast<float>(h.gains[n].real()));
      EXPECT_EQ(s[n].imag(), static_cast<float>(h.gains[n].imag()));
    }
  }
}

TEST(Trace, IncompleteTimelineRejected) {
  auto tl = timeline(2, 3, 5, true);
  tl.vehicles[3].pop_back();
  EXPECT_THROW(evolve_trace(tl, small_cfg(4), 1), Error);
}

TEST(ChannelConfig, NoiseFloor) {
  ChannelConfig c;
  EXPECT_NEAR(c.noise_power_dbm(), -174 + 10 * std::log10(800e6) + 10, 1e-12);
  EXPECT_NEAR(c.noise_power_dbm(), -74.97, 0.01);
  c.antenna_elements = 0;
  EXPECT_THROW(c.validate(), Error);
}
