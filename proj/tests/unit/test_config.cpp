#include <gtest/gtest.h>

#include "v2x/config.hpp"
#include "v2x/error.hpp"

using namespace v2x;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST(Config, DeskDefaults) {
  const auto c = parse_config("");
  EXPECT_EQ(c.scenario.geometry.rsu_count, 6);
  EXPECT_EQ(c.scenario.geometry.vehicle_count, 8);
  EXPECT_EQ(c.scenario.slots, 2000);
  EXPECT_DOUBLE_EQ(c.env.objective.tradeoff_lambda, 1.0);
  EXPECT_DOUBLE_EQ(c.env.objective.rate_threshold_bps, 0.5e9);
  EXPECT_DOUBLE_EQ(c.train.actor_lr, 1e-4);
  EXPECT_DOUBLE_EQ(c.train.critic_lr, 1e-3);
  EXPECT_DOUBLE_EQ(c.train.gamma, 0.99);
}

TEST(Config, ProfileAppliedFirst) {
  const auto c = parse_config("geometry.vehicles = 5\nprofile = tiny  # late\n");
  EXPECT_EQ(c.scenario.geometry.rsu_count, 2);
  EXPECT_EQ(c.scenario.geometry.vehicle_count, 5);
  EXPECT_EQ(c.scenario.slots, 200);
  EXPECT_EQ(c.train.episodes, 100);
}

TEST(Config, ParsesValues) {
  const auto c = parse_config(
      "profile=tiny\ntrain.hidden = 32x16\nexperiment.policies = max_rssi,myopic\n"
      "timing.training_per_vehicle = true\nmdp.features = raw\n");
  EXPECT_EQ(c.train.hidden, (std::vector<int>{32, 16}));
  EXPECT_EQ(c.policies, (std::vector<std::string>{"max_rssi", "myopic"}));
  EXPECT_TRUE(c.scenario.training_per_vehicle);
  EXPECT_EQ(c.env.features, ChannelFeatureMode::kRawVector);
}

TEST(Config, SerializeRoundTrip) {
  auto c = tiny_profile();
  set_config_value(c, "objective.lambda", "0.25");
  set_config_value(c, "train.hidden", "7,9");
  const auto text = serialize_config(c);
  EXPECT_EQ(serialize_config(parse_config(text)), text);
  for (const auto& k : config_keys()) EXPECT_NE(text.find(k + " = "), std::string::npos) << k;
}

TEST(Config, Rejections) {
  EXPECT_EQ(kind_of("no.such.key = 1"), ErrorKind::kConfigInvalid);
  EXPECT_EQ(kind_of("profile = huge"), ErrorKind::kConfigInvalid);
  EXPECT_EQ(kind_of("just a line"), ErrorKind::kConfigInvalid);
  EXPECT_EQ(kind_of("geometry.vehicles = many"), ErrorKind::kConfigInvalid);
  EXPECT_EQ(kind_of("experiment.policies = max_rssi,oracle"), ErrorKind::kConfigInvalid);
  EXPECT_EQ(kind_of("experiment.seeds = 0"), ErrorKind::kConfigInvalid);
  EXPECT_EQ(kind_of("timing.online_compute_fraction = 0.95"), ErrorKind::kConfigInvalid);
}

TEST(Config, SweepAxes) {
  EXPECT_EQ(sweep_axis_key("vehicles"), "geometry.vehicles");
  EXPECT_EQ(sweep_axis_key("rsus"), "geometry.rsus");
  EXPECT_EQ(sweep_axis_key("history_k"), "mdp.history");
  EXPECT_EQ(sweep_axis_key("episodes"), "train.episodes");
  EXPECT_EQ(sweep_axis_key("hidden_layers"), "train.hidden");
  EXPECT_THROW(sweep_axis_key("speed"), Error);
  EXPECT_EQ(split(" a,b,,c ", ','), (std::vector<std::string>{"a", "b", "c"}));
}
