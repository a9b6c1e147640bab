#include <gtest/gtest.h>

#include <cmath>

#include "v2x/baselines.hpp"
#include "v2x/error.hpp"

using namespace v2x;

namespace {

LinkGains random_gains(Rng& rng, int B, int V, double lo_db = -125, double hi_db = -85) {
  std::uniform_real_distribution<double> db(lo_db, hi_db);
  LinkGains g(B, V);
  for (int b = 0; b < B; ++b)
    for (int s = 0; s < V; ++s)
      for (int r = 0; r < V; ++r) g(b, s, r) = std::pow(10.0, db(rng) / 10);
  return g;
}

// Random history with t slots of past rates.
RateHistory random_history(Rng& rng, int V, int t) {
  std::uniform_real_distribution<double> u(0, 1.5e9);
  RateHistory h(V);
  h.slots = t;
  for (int v = 0; v < V; ++v) {
    h.cumulative[v] = t * u(rng);
    h.average[v] = t ? h.cumulative[v] / t : 0.0;
  }
  return h;
}

const LinkBudget kBudget{1.0, 1e-11, 800e6};
const SlotTiming kTiming(0.1, 0.01);

}  // namespace

TEST(MaxRssi, Cases) {
  LinkGains g(1, 3);
  g(0, 0, 0) = 1;
  g(0, 1, 1) = 3;
  g(0, 2, 2) = 2;
  EXPECT_EQ(max_rssi_action(0, g, kBudget), 1);
  for (double c : {1e-6, 2.0, 1e9}) EXPECT_EQ(max_rssi_action(0, g, LinkBudget{c, 1, 1}), 1);
  LinkGains eq(1, 3);
  for (int v = 0; v < 3; ++v) eq(0, v, v) = 0.5;
  EXPECT_EQ(max_rssi_action(0, eq, kBudget), 0);
}

TEST(MaxRssi, MonotoneTransformInvariance) {
  Rng rng(1);
  for (int rep = 0; rep < 200; ++rep) {
    const auto g = random_gains(rng, 2, 5);
    const auto r = rssi(1, g, kBudget);
    std::vector<double> t(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) t[i] = std::log(r[i]) * 3 + 7;
    EXPECT_EQ(max_rssi_action(1, g, kBudget), argmax_first(t));
  }
}

TEST(Pf, EqualAveragesReduceToMaxRate) {
  Rng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const auto g = random_gains(rng, 1, 4);
    PfState pf(4, 50);
    for (auto& a : pf.average) a = 1e9;
    EXPECT_EQ(proportional_fair_action(0, g, pf, kBudget, kTiming),
              argmax_first(solo_rate_estimate(0, g, kBudget, kTiming)));
    // Fresh state starts every average at the floor.
    EXPECT_EQ(proportional_fair_action(0, g, PfState(4, 1000000), kBudget, kTiming),
              max_rssi_action(0, g, kBudget));
  }
}

TEST(Pf, StarvedVehicleChosen) {
  LinkGains g(1, 2);
  g(0, 0, 0) = 1e-9;
  g(0, 1, 1) = 1e-11;
  PfState pf(2, 50);
  pf.average = {2e9, 1e3};
  EXPECT_EQ(proportional_fair_action(0, g, pf, kBudget, kTiming), 1);
}

TEST(Pf, HandSimulatedTrace) {
  // One RSU, two vehicles, window 2. own gains per slot; no interference.
  const double gains[5][2] = {{1e-9, 1e-10}, {1e-9, 1e-10}, {1e-9, 1e-10}, {1e-10, 1e-9}, {1e-9, 1e-9}};
  const double noise = 1e-11, bw = 800e6, keep = 0.9;
  double avg[2] = {1.0, 1.0};
  std::vector<int> expect;
  for (const auto& slot : gains) {
    double m[2];
    for (int v = 0; v < 2; ++v) m[v] = keep * bw * std::log2(1 + slot[v] / noise) / avg[v];
    const int pick = m[1] > m[0] ? 1 : 0;
    expect.push_back(pick);
    for (int v = 0; v < 2; ++v) {
      const double r = v == pick ? keep * bw * std::log2(1 + slot[v] / noise) : 0.0;
      avg[v] = std::max(1.0, 0.5 * avg[v] + 0.5 * r);
    }
  }
  // Picks: 0 (both at floor), 1 (vehicle 1 starved), 0, 1 (swapped gains), 0 (lower average).
  EXPECT_EQ(expect, (std::vector<int>{0, 1, 0, 1, 0}));

  PfState pf(2, 2);
  std::vector<int> got;
  for (const auto& slot : gains) {
    LinkGains g(1, 2);
    g(0, 0, 0) = slot[0];
    g(0, 1, 1) = slot[1];
    const int a = proportional_fair_action(0, g, pf, LinkBudget{1.0, noise, bw}, kTiming);
    got.push_back(a);
    const int joint[] = {a};
    pf.update(slot_rates(joint, g, LinkBudget{1.0, noise, bw}, kTiming));
  }
  EXPECT_EQ(got, expect);
  for (double a : pf.average) EXPECT_GT(a, 0.0);
}

TEST(Myopic, SingleRsuIsArgmaxOfReward) {
  Rng rng(3);
  const ObjectiveConfig obj;
  for (int rep = 0; rep < 100; ++rep) {
    const auto g = random_gains(rng, 1, 5);
    const auto h = random_history(rng, 5, rep % 10);
    std::vector<double> r(5);
    for (int v = 0; v < 5; ++v) {
      const int a[] = {v};
      r[v] = instantaneous_reward(a, g, h, obj, kBudget, kTiming);
    }
    const auto m = myopic_optimal_joint(g, h, obj, kBudget, kTiming);
    EXPECT_EQ(m.action[0], argmax_first(r));
    EXPECT_EQ(m.reward, r[argmax_first(r)]);
    EXPECT_EQ(m.evaluated, 5);
  }
}

TEST(Myopic, FourCaseEnumerationNoInterference) {
  // lambda = 0, disjoint beams: maximise the sum rate.
  LinkGains g(2, 2);
  g(0, 0, 0) = 4e-11;
  g(0, 1, 1) = 1e-11;
  g(1, 0, 0) = 2e-11;
  g(1, 1, 1) = 8e-11;
  const ObjectiveConfig obj{0.0, 0.5e9};
  const LinkBudget lb{1.0, 1e-11, 1.0};
  const SlotTiming none(1.0, 0.0);
  const RateHistory h(2);
  // Sum rate (bits/s, bandwidth 1) of each joint action.
  const double cases[4] = {std::log2(1 + 4.0 + 2.0), std::log2(1 + 4.0) + std::log2(1 + 8.0),
                           std::log2(1 + 2.0) + std::log2(1 + 1.0), std::log2(1 + 1.0 + 8.0)};
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (cases[i] > cases[best]) best = i;
  const auto m = myopic_optimal_joint(g, h, obj, lb, none);
  EXPECT_EQ(m.action, (JointAction{best / 2, best % 2}));
  EXPECT_EQ(m.action, (JointAction{0, 1}));
}

TEST(Myopic, DeskDimensionsWithinBudget) {
  Rng rng(4);
  const auto g = random_gains(rng, 6, 8);
  const auto h = random_history(rng, 8, 5);
  const auto m = myopic_optimal_joint(g, h, ObjectiveConfig{}, kBudget, kTiming);
  EXPECT_EQ(m.evaluated, 262144);
  EXPECT_FALSE(m.fallback);
}

TEST(Myopic, BudgetFallbackAndError) {
  Rng rng(5);
  const auto g = random_gains(rng, 3, 4);
  const auto h = random_history(rng, 4, 3);
  const auto m = myopic_optimal_joint(g, h, ObjectiveConfig{}, kBudget, kTiming, 10.0, true);
  EXPECT_TRUE(m.fallback);
  EXPECT_EQ(m.evaluated, 12);
  EXPECT_NEAR(m.reward, instantaneous_reward(m.action, g, h, ObjectiveConfig{}, kBudget, kTiming), 1e-12);
  try {
    myopic_optimal_joint(g, h, ObjectiveConfig{}, kBudget, kTiming, 10.0, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBudgetExceeded);
  }
}

TEST(Oracle, AgreesWithMyopic) {
  Rng rng(6);
  std::uniform_int_distribution<int> dim(1, 4);
  for (int rep = 0; rep < 500; ++rep) {
    const int B = dim(rng), V = dim(rng);
    const auto g = random_gains(rng, B, V);
    const auto h = random_history(rng, V, rep % 20);
    const ObjectiveConfig obj{rep % 3 == 0 ? 0.0 : 1.0, 0.5e9};
    const auto m = myopic_optimal_joint(g, h, obj, kBudget, kTiming);
    const auto o = brute_force_oracle(make_snapshot(g, h, obj, kBudget, kTiming));
    EXPECT_EQ(m.action, o.action);
    EXPECT_EQ(m.reward, o.reward);
    EXPECT_NEAR(m.reward, instantaneous_reward(m.action, g, h, obj, kBudget, kTiming), 1e-12);
  }
}

TEST(Oracle, SingleFeasibleAction) {
  Rng rng(7);
  const auto g = random_gains(rng, 3, 1);
  const auto o = brute_force_oracle(make_snapshot(g, RateHistory(1), ObjectiveConfig{}, kBudget, kTiming));
  EXPECT_EQ(o.action, (std::vector<int>{0, 0, 0}));
}

TEST(Oracle, BudgetGuard) {
  Snapshot s;
  s.rsus = 6;
  s.vehicles = 8;
  s.gains.assign(6 * 64, 1.0);
  s.cumulative.assign(8, 0.0);
  try {
    brute_force_oracle(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBudgetExceeded);
  }
}

TEST(Oracle, HugeLambdaMinimisesViolationsFirst) {
  Rng rng(8);
  const ObjectiveConfig obj{1e6, 0.5e9};
  for (int rep = 0; rep < 100; ++rep) {
    const auto g = random_gains(rng, 2, 3, -115, -95);
    const auto h = random_history(rng, 3, 4);
    const auto s = make_snapshot(g, h, obj, kBudget, kTiming);
    const auto o = brute_force_oracle(s);
    auto violations = [&](const std::vector<int>& a) {
      const auto r = slot_rates(a, g, kBudget, kTiming);
      int n = 0;
      for (int v = 0; v < 3; ++v) n += (h.cumulative[v] + r[v]) / (h.slots + 1) < 0.5e9;
      return n;
    };
    int fewest = 99;
    for (int a0 = 0; a0 < 3; ++a0)
      for (int a1 = 0; a1 < 3; ++a1) fewest = std::min(fewest, violations({a0, a1}));
    EXPECT_EQ(violations(o.action), fewest);
  }
}

TEST(Myopic, DominatesOtherPolicies) {
  Rng rng(9);
  const ObjectiveConfig obj;
  for (int rep = 0; rep < 300; ++rep) {
    const auto g = random_gains(rng, 3, 3);
    const auto h = random_history(rng, 3, rep % 8);
    const double best = myopic_optimal_joint(g, h, obj, kBudget, kTiming).reward;
    PfState pf(3, 50);
    std::uniform_real_distribution<double> u(1e8, 2e9);
    for (auto& a : pf.average) a = u(rng);
    JointAction mr(3), pfa(3), rnd(3);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int b = 0; b < 3; ++b) {
      mr[b] = max_rssi_action(b, g, kBudget);
      pfa[b] = proportional_fair_action(b, g, pf, kBudget, kTiming);
      rnd[b] = pick(rng);
    }
    for (const auto& a : {mr, pfa, rnd}) EXPECT_GE(best, instantaneous_reward(a, g, h, obj, kBudget, kTiming));
  }
}

TEST(Myopic, LambdaZeroMatchesMeanRateArgmax) {
  Rng rng(10);
  const ObjectiveConfig obj{0.0, 0.5e9};
  for (int rep = 0; rep < 100; ++rep) {
    const auto g = random_gains(rng, 2, 3);
    const RateHistory h = random_history(rng, 3, 2);
    double best = -1;
    JointAction arg;
    for (int a0 = 0; a0 < 3; ++a0)
      for (int a1 = 0; a1 < 3; ++a1) {
        const auto r = slot_rates(JointAction{a0, a1}, g, kBudget, kTiming);
        const double s = r[0] + r[1] + r[2];
        if (s > best) {
          best = s;
          arg = {a0, a1};
        }
      }
    EXPECT_EQ(myopic_optimal_joint(g, h, obj, kBudget, kTiming).action, arg);
  }
}

TEST(Baseline, ParseNames) {
  EXPECT_EQ(parse_baseline("max_rssi"), BaselineKind::kMaxRssi);
  EXPECT_EQ(parse_baseline("proportional_fair"), BaselineKind::kProportionalFair);
  EXPECT_EQ(parse_baseline("myopic"), BaselineKind::kMyopic);
  EXPECT_THROW(parse_baseline("nope"), Error);
  EXPECT_EQ(argmax_first(std::vector<double>{2, 5, 5, 1}), 1);
}
