#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "v2x/error.hpp"
#include "v2x/network.hpp"

using namespace v2x;

namespace {

CVec random_channel(Rng& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g;
  CVec h(n);
  for (auto& x : h) x = scale * cplx(g(rng), g(rng));
  return h;
}

SlotChannelSet make_set(const std::vector<std::vector<CVec>>& h) {
  SlotChannelSet s;
  s.rsus = static_cast<int>(h.size());
  s.vehicles = static_cast<int>(h[0].size());
  for (const auto& row : h)
    for (const auto& hv : row) {
      s.h.push_back(hv);
      s.f.push_back(conjugate_beamformer(std::span<const cplx>(hv)).weights);
    }
  return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Mobility, Kinematics) {
  Geometry g;
  VehicleState s;
  s.position = {10.0, 2.5, 1.5};
  s.speed = 25.0 / 3.6;
  const auto out = step_mobility({s}, 1.0, g, MobilityMode::kWrap);
  EXPECT_NEAR(out[0].position.x - 10.0, 6.944, 1e-3);
  EXPECT_FALSE(out[0].crossed_boundary);
}

TEST(Mobility, WrapAndTerminal) {
  Geometry g;
  VehicleState s;
  s.position = {159.0, 2.5, 1.5};
  s.speed = 25.0 / 3.6;
  const auto w = step_mobility({s}, 1.0, g, MobilityMode::kWrap);
  EXPECT_NEAR(w[0].position.x, 5.944, 1e-3);
  EXPECT_TRUE(w[0].crossed_boundary);
  EXPECT_FALSE(w[0].departed);
  const auto t = step_mobility({s}, 1.0, g, MobilityMode::kTerminal);
  EXPECT_TRUE(t[0].departed);

  s.direction_x = -1.0;
  s.position.x = 1.0;
  const auto back = step_mobility({s}, 1.0, g, MobilityMode::kWrap);
  EXPECT_NEAR(back[0].position.x, 160.0 - 5.944, 1e-3);
  EXPECT_THROW(step_mobility({s}, 0.0, g, MobilityMode::kWrap), Error);
}

TEST(Mobility, SpawnSpeedJitter) {
  Geometry g;
  g.vehicle_count = 200;
  Rng rng(3);
  for (const auto& s : spawn_vehicles(g, rng)) {
    EXPECT_GE(s.speed, 0.9 * 25 / 3.6);
    EXPECT_LE(s.speed, 1.1 * 25 / 3.6);
    EXPECT_GE(s.position.x, 0.0);
    EXPECT_LT(s.position.x, g.road_length);
  }
}

TEST(Geometry, RsusAlternateSidesInsideSegment) {
  Geometry g;
  const auto p = g.rsu_positions();
  ASSERT_EQ(p.size(), 6u);
  for (int b = 0; b < 6; ++b) {
    EXPECT_EQ(p[b].y, b % 2 ? g.road_width : 0.0);
    EXPECT_GE(p[b].x, 0.0);
    EXPECT_LE(p[b].x, g.road_length);
  }
  EXPECT_NO_THROW(g.validate());
}

TEST(Beamformer, EqualPhases) {
  const CVec h{1, 1, 1, 1};
  const auto f = conjugate_beamformer(std::span<const cplx>(h));
  for (const auto& w : f.weights) EXPECT_NEAR(std::abs(w - cplx(0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(beam_product(f.weights, h) - cplx(2.0)), 0.0, 1e-15);
  EXPECT_FALSE(f.degenerate);
}

TEST(Beamformer, PhaseConjugation) {
  const CVec h{1, cplx(0, 1)};
  const auto f = conjugate_beamformer(std::span<const cplx>(h));
  EXPECT_NEAR(std::abs(f.weights[1] - cplx(0, -1) / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(beam_product(f.weights, h)), std::sqrt(2.0), 1e-15);
}

TEST(Beamformer, ZeroChannelIsDegenerate) {
  const CVec h(4, 0.0);
  const auto f = conjugate_beamformer(std::span<const cplx>(h));
  EXPECT_TRUE(f.degenerate);
  for (const auto& w : f.weights) EXPECT_NEAR(std::abs(w - cplx(0.5)), 0.0, 1e-15);
}

TEST(Beamformer, DominatesRandomConstantModulus) {
  Rng rng(12);
  const auto h = random_channel(rng, 8);
  const auto f = conjugate_beamformer(std::span<const cplx>(h));
  const double best = std::abs(beam_product(f.weights, h));
  std::uniform_real_distribution<double> ph(0, 2 * std::numbers::pi);
  for (int i = 0; i < 100000; ++i) {
    CVec g(8);
    for (auto& x : g) x = std::polar(1 / std::sqrt(8.0), ph(rng));
    ASSERT_LE(std::abs(beam_product(g, h)), best * (1 + 1e-12));
  }
}

TEST(Sinr, UnitAnchor) {
  // One RSU, one vehicle, p |f h|^2 = sigma^2.
  const CVec h{1, 1, 1, 1};  // |f h|^2 = 4
  const auto set = make_set({{h}});
  const LinkBudget lb{1.0, 4.0, 800e6};
  const int a[] = {0};
  const auto z = AssociationMatrix::from_actions(a, 1);
  EXPECT_NEAR(sinr(0, z, set, lb), 1.0, 1e-15);
  EXPECT_NEAR(achievable_rate(0, z, set, lb), 800e6, 1e-3);
}

TEST(Sinr, UnservedVehicleIsZero) {
  Rng rng(1);
  const auto set = make_set({{random_channel(rng, 4), random_channel(rng, 4)}});
  const int a[] = {0};
  const auto z = AssociationMatrix::from_actions(a, 2);
  const LinkBudget lb{1.0, 1.0, 800e6};
  EXPECT_EQ(sinr(1, z, set, lb), 0.0);
  EXPECT_EQ(achievable_rate(1, z, set, lb), 0.0);
}

TEST(Sinr, RateAnchors) {
  EXPECT_NEAR(oracle::rate(3.0, 800e6), 1.6e9, 1e-3);
  const CVec h{1, 1, 1, 1};
  const auto set = make_set({{h}});
  const int a[] = {0};
  const auto z = AssociationMatrix::from_actions(a, 1);
  EXPECT_NEAR(achievable_rate(0, z, set, LinkBudget{3.0, 4.0, 800e6}), 1.6e9, 1e-3);
}

TEST(Sinr, MatchesScalarOracle) {
  Rng rng(21);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int rep = 0; rep < 200; ++rep) {
    const int B = rep == 0 ? 2 : dim(rng), V = rep == 0 ? 2 : dim(rng);
    std::vector<std::vector<CVec>> h(B, std::vector<CVec>(V));
    std::vector<std::vector<std::vector<oracle::cd>>> ho(B, std::vector<std::vector<oracle::cd>>(V));
    for (int b = 0; b < B; ++b)
      for (int v = 0; v < V; ++v) ho[b][v] = h[b][v] = random_channel(rng, 6, 1e-4);
    const auto set = make_set(h);
    std::vector<int> act(B);
    std::uniform_int_distribution<int> pick(0, V - 1);
    for (auto& x : act) x = pick(rng);
    const auto z = AssociationMatrix::from_actions(act, V);
    const LinkBudget lb{1.0, 1e-8, 800e6};
    for (int v = 0; v < V; ++v) {
      const double o = oracle::sinr(v, act, ho, lb.tx_power_w, lb.noise_w);
      const double s = sinr(v, z, set, lb);
      if (o == 0.0) {
        EXPECT_EQ(s, 0.0);
      } else {
        EXPECT_LE(rel(s, o), 1e-12);
        EXPECT_LE(rel(achievable_rate(v, z, set, lb), oracle::rate(o, lb.bandwidth_hz)), 1e-12);
      }
      // LinkGains path agrees with the matrix path.
      const auto gains = LinkGains::from_slot(set);
      const SlotTiming none(1.0, 0.0);
      const auto r = slot_rates(act, gains, lb, none);
      EXPECT_LE(std::abs(r[v] - achievable_rate(v, z, set, lb)),
                1e-12 * std::max(1.0, r[v]));
    }
  }
}

TEST(Sinr, SingleVehicleHasNoInterference) {
  Rng rng(4);
  const auto set = make_set({{random_channel(rng, 4)}, {random_channel(rng, 4)}});
  const int a[] = {0, 0};
  const auto z = AssociationMatrix::from_actions(a, 1);
  const LinkBudget lb{2.0, 0.5, 1.0};
  double expect = 0.0;
  for (int b = 0; b < 2; ++b) expect += lb.tx_power_w * std::norm(beam_product(set.beam(b, 0), set.channel(b, 0)));
  EXPECT_LE(rel(sinr(0, z, set, lb), expect / lb.noise_w), 1e-12);
}

TEST(Sinr, RatioInvariance) {
  Rng rng(8);
  const auto set = make_set({{random_channel(rng, 4), random_channel(rng, 4)},
                             {random_channel(rng, 4), random_channel(rng, 4)}});
  const int a[] = {0, 1};
  const auto z = AssociationMatrix::from_actions(a, 2);
  for (double c : {1e-6, 0.3, 7.0, 1e5}) {
    const LinkBudget base{1.0, 0.2, 1.0}, scaled{c, 0.2 * c, 1.0};
    for (int v = 0; v < 2; ++v) EXPECT_LE(rel(sinr(v, z, set, scaled), sinr(v, z, set, base)), 1e-12);
  }
}

TEST(Sinr, MonotoneInSignalAndInterference) {
  Rng rng(9);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const LinkBudget lb{1.0, 0.5, 1.0};
  const SlotTiming timing(1.0, 0.0);
  for (int rep = 0; rep < 100; ++rep) {
    LinkGains g(2, 2);
    for (int b = 0; b < 2; ++b)
      for (int s = 0; s < 2; ++s)
        for (int r = 0; r < 2; ++r) g(b, s, r) = u(rng);
    const int a[] = {0, 1};
    const double base = slot_rates(a, g, lb, timing)[0];
    auto up = g;
    up(0, 0, 0) *= 1.5;
    EXPECT_GE(slot_rates(a, up, lb, timing)[0], base);
    auto noisy = g;
    noisy(1, 1, 0) *= 1.5;  // RSU 1 beaming at vehicle 1, leaking into vehicle 0
    EXPECT_LE(slot_rates(a, noisy, lb, timing)[0], base);
  }
}

TEST(Timing, EffectiveRate) {
  EXPECT_EQ(effective_rate(1e9, SlotTiming(0.1, 0.0)), 1e9);
  EXPECT_NEAR(effective_rate(1e9, SlotTiming(0.1, 0.01)), 0.9e9, 1e-3);
  try {
    SlotTiming(0.1, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfigInvalid);
  }
  Rng rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const double r = 1e9 * u(rng), tr = 0.099 * u(rng);
    EXPECT_LE(effective_rate(r, SlotTiming(0.1, tr)), r);
  }
}

TEST(Association, Validation) {
  const int id[] = {0, 1, 2};
  EXPECT_FALSE(validate_association(AssociationMatrix::from_actions(id, 3)).has_value());

  AssociationMatrix zero(3, 3);
  zero(0, 0) = 1;
  zero(2, 2) = 1;
  const auto v1 = validate_association(zero);
  ASSERT_TRUE(v1.has_value());
  EXPECT_EQ(v1->row, 1);

  auto twice = AssociationMatrix::from_actions(id, 3);
  twice(2, 0) = 1;
  const auto v2 = validate_association(twice);
  ASSERT_TRUE(v2.has_value());
  EXPECT_EQ(v2->row, 2);

  auto nonbinary = AssociationMatrix::from_actions(id, 3);
  nonbinary(0, 0) = 2;
  EXPECT_EQ(validate_association(nonbinary)->row, 0);

  const int bad[] = {0, 3};
  try {
    AssociationMatrix::from_actions(bad, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidAction);
  }
}

TEST(Association, EveryJointActionIsValid) {
  for (int a0 = 0; a0 < 4; ++a0)
    for (int a1 = 0; a1 < 4; ++a1)
      for (int a2 = 0; a2 < 4; ++a2) {
        const int a[] = {a0, a1, a2};
        EXPECT_FALSE(validate_association(AssociationMatrix::from_actions(a, 4)).has_value());
      }
}
