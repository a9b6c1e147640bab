#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "v2x/a3c.hpp"
#include "v2x/mdp.hpp"
#include "v2x/scenario.hpp"

namespace v2x {

struct ExperimentConfig {
  ScenarioConfig scenario;
  EnvConfig env;
  TrainConfig train;
  std::vector<std::string> policies{"max_rssi", "proportional_fair", "myopic", "drl_offline",
                                    "drl_online"};
  std::uint64_t seed = 1;
  int seeds = 1;  // evaluation seeds seed, seed+1, ...
  int pf_window = 50;
  bool eval_greedy = true;
  double online_compute_fraction = 0.01;
  std::string trace_path;  // optional pre-generated trace (single seed)

  void validate() const;
};

// Desk: B=6, V=8, T=2000. Tiny: B=2, V=3, T=200, 100 episodes.
ExperimentConfig desk_profile();
ExperimentConfig tiny_profile();

// Flat key=value text; '#' starts a comment. A `profile` key (desk|tiny) is
// applied before all other keys regardless of position.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& cfg);

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

// Sweep axis name (vehicles, rsus, history_k, episodes, hidden_layers) to
// config key.
std::string sweep_axis_key(const std::string& axis);

std::vector<std::string> split(const std::string& s, char sep);

}  // namespace v2x
