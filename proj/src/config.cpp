#include "v2x/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "v2x/error.hpp"

namespace v2x {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  require(r.ec == std::errc() && r.ptr == v.data() + v.size(), ErrorKind::kConfigInvalid,
          "config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  require(r.ec == std::errc() && r.ptr == v.data() + v.size(), ErrorKind::kConfigInvalid,
          "config: '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::kConfigInvalid, "config: '" + key + "' expects true/false, got '" + v + "'");
}

std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : "") + v[i];
  return out;
}

struct Entry {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define V2X_REAL(name, field)                                                                 \
  Entry {                                                                                     \
    name, [](ExperimentConfig& c, const std::string& v) { c.field = to_double(name, v); },   \
        [](const ExperimentConfig& c) { return fmt(c.field); }                                \
  }
#define V2X_INT(name, field)                                                                  \
  Entry {                                                                                     \
    name,                                                                                     \
        [](ExperimentConfig& c, const std::string& v) {                                       \
          c.field = static_cast<decltype(c.field)>(to_int(name, v));                          \
        },                                                                                    \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }                     \
  }
#define V2X_BOOL(name, field)                                                                 \
  Entry {                                                                                     \
    name, [](ExperimentConfig& c, const std::string& v) { c.field = to_bool(name, v); },     \
        [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); }     \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      V2X_REAL("channel.carrier_hz", scenario.channel.carrier_hz),
      V2X_REAL("channel.bandwidth_hz", scenario.channel.bandwidth_hz),
      V2X_REAL("channel.path_loss_exponent", scenario.channel.path_loss_exponent),
      V2X_REAL("channel.tx_power_dbm", scenario.channel.tx_power_dbm),
      V2X_INT("channel.antenna_elements", scenario.channel.antenna_elements),
      V2X_REAL("channel.element_spacing", scenario.channel.element_spacing),
      V2X_REAL("channel.noise_figure_db", scenario.channel.noise_figure_db),
      V2X_REAL("channel.shadowing_std_db", scenario.channel.shadowing_std_db),
      V2X_REAL("channel.reference_distance_m", scenario.channel.reference_distance_m),
      V2X_REAL("channel.element_gain_db", scenario.channel.element_gain_db),
      V2X_REAL("channel.cluster_persistence", scenario.channel.cluster_persistence),
      V2X_REAL("channel.lobe_spread_deg", scenario.channel.lobe_spread_deg),
      V2X_REAL("channel.max_cluster_delay_ns", scenario.channel.max_cluster_delay_ns),
      V2X_REAL("channel.cluster_decay_ns", scenario.channel.cluster_decay_ns),
      V2X_REAL("channel.subpath_decay_ns", scenario.channel.subpath_decay_ns),
      V2X_REAL("channel.pressure_mbar", scenario.channel.pressure_mbar),
      V2X_REAL("channel.humidity_pct", scenario.channel.humidity_pct),
      V2X_REAL("channel.temperature_c", scenario.channel.temperature_c),
      V2X_REAL("geometry.road_length", scenario.geometry.road_length),
      V2X_REAL("geometry.road_width", scenario.geometry.road_width),
      V2X_INT("geometry.lanes", scenario.geometry.lanes),
      V2X_REAL("geometry.rsu_height", scenario.geometry.rsu_height),
      V2X_REAL("geometry.rsu_spacing", scenario.geometry.rsu_spacing),
      V2X_INT("geometry.rsus", scenario.geometry.rsu_count),
      V2X_INT("geometry.vehicles", scenario.geometry.vehicle_count),
      V2X_REAL("geometry.vehicle_height", scenario.geometry.vue_antenna_height),
      V2X_REAL("geometry.speed_kmh", scenario.geometry.mean_speed_kmh),
      V2X_REAL("geometry.speed_jitter", scenario.geometry.speed_jitter),
      V2X_INT("timing.slots", scenario.slots),
      V2X_REAL("timing.slot_duration_s", scenario.slot_duration_s),
      V2X_REAL("timing.training_fraction", scenario.training_fraction),
      V2X_BOOL("timing.training_per_vehicle", scenario.training_per_vehicle),
      V2X_INT("timing.reference_vehicles", scenario.reference_vehicles),
      V2X_REAL("timing.online_compute_fraction", online_compute_fraction),
      V2X_REAL("objective.lambda", env.objective.tradeoff_lambda),
      V2X_REAL("objective.rate_threshold_bps", env.objective.rate_threshold_bps),
      V2X_INT("mdp.history", env.history),
      V2X_INT("mdp.max_episode_slots", env.max_episode_slots),
      Entry{"mdp.features",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "beamformed")
                c.env.features = ChannelFeatureMode::kBeamformedGain;
              else if (v == "raw")
                c.env.features = ChannelFeatureMode::kRawVector;
              else
                fail(ErrorKind::kConfigInvalid, "config: mdp.features must be beamformed|raw");
            },
            [](const ExperimentConfig& c) {
              return std::string(c.env.features == ChannelFeatureMode::kRawVector ? "raw"
                                                                                  : "beamformed");
            }},
      V2X_REAL("train.actor_lr", train.actor_lr),
      V2X_REAL("train.critic_lr", train.critic_lr),
      V2X_REAL("train.gamma", train.gamma),
      V2X_REAL("train.entropy_start", train.entropy_start),
      V2X_REAL("train.entropy_end", train.entropy_end),
      V2X_REAL("train.rmsprop_decay", train.rmsprop_decay),
      V2X_REAL("train.rmsprop_eps", train.rmsprop_eps),
      V2X_INT("train.n_step", train.n_step),
      V2X_INT("train.workers", train.workers),
      V2X_INT("train.episodes", train.episodes),
      V2X_INT("train.conv_kernel", train.conv.kernel),
      V2X_INT("train.conv_filters", train.conv.filters),
      V2X_INT("train.conv_stride", train.conv.stride),
      V2X_REAL("train.reward_scale", train.reward_scale),
      V2X_BOOL("train.normalize_advantages", train.normalize_advantages),
      Entry{"train.hidden",
            [](ExperimentConfig& c, const std::string& v) {
              std::string s = v;
              for (char& ch : s)
                if (ch == 'x' || ch == ':') ch = ',';
              c.train.hidden.clear();
              for (const auto& w : split(s, ','))
                c.train.hidden.push_back(static_cast<int>(to_int("train.hidden", w)));
            },
            [](const ExperimentConfig& c) {
              std::vector<std::string> parts;
              for (int h : c.train.hidden) parts.push_back(std::to_string(h));
              return join(parts, ',');
            }},
      V2X_INT("experiment.seed", seed),
      V2X_INT("experiment.seeds", seeds),
      V2X_INT("experiment.pf_window", pf_window),
      V2X_BOOL("experiment.eval_greedy", eval_greedy),
      Entry{"experiment.policies",
            [](ExperimentConfig& c, const std::string& v) { c.policies = split(v, ','); },
            [](const ExperimentConfig& c) { return join(c.policies, ','); }},
      Entry{"experiment.trace", [](ExperimentConfig& c, const std::string& v) { c.trace_path = v; },
            [](const ExperimentConfig& c) { return c.trace_path; }},
  };
  return table;
}

#undef V2X_REAL
#undef V2X_INT
#undef V2X_BOOL

const std::vector<std::string> kPolicies = {"max_rssi", "proportional_fair", "myopic", "random",
                                            "fixed",    "drl_offline",       "drl_online"};

}  // namespace

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

void ExperimentConfig::validate() const {
  scenario.validate();
  env.validate();
  train.validate();
  require(seeds >= 1, ErrorKind::kConfigInvalid, "config: experiment.seeds must be >= 1");
  require(pf_window >= 1, ErrorKind::kConfigInvalid, "config: experiment.pf_window must be >= 1");
  require(online_compute_fraction >= 0 &&
              online_compute_fraction + scenario.timing().overhead_fraction() < 1.0,
          ErrorKind::kConfigInvalid, "config: training plus compute overhead must stay below 1");
  require(!policies.empty(), ErrorKind::kConfigInvalid, "config: no policies selected");
  for (const auto& p : policies)
    require(std::find(kPolicies.begin(), kPolicies.end(), p) != kPolicies.end(),
            ErrorKind::kConfigInvalid, "config: unknown policy '" + p + "'");
  require(trace_path.empty() || seeds == 1, ErrorKind::kConfigInvalid,
          "config: a fixed trace supports a single seed only");
}

ExperimentConfig desk_profile() { return ExperimentConfig{}; }

ExperimentConfig tiny_profile() {
  ExperimentConfig c;
  c.scenario.geometry.rsu_count = 2;
  c.scenario.geometry.vehicle_count = 3;
  c.scenario.slots = 200;
  c.train.episodes = 100;
  return c;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : entries())
    if (e.key == key) {
      e.set(cfg, value);
      return;
    }
  fail(ErrorKind::kConfigInvalid, "config: unknown key '" + key + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.push_back(e.key);
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  std::string profile = "desk";
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::kConfigInvalid,
            "config: line " + std::to_string(lineno) + " is not key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "profile")
      profile = value;
    else
      kv.emplace_back(key, value);
  }
  ExperimentConfig cfg;
  if (profile == "tiny")
    cfg = tiny_profile();
  else if (profile == "desk")
    cfg = desk_profile();
  else
    fail(ErrorKind::kConfigInvalid, "config: unknown profile '" + profile + "'");
  for (const auto& [k, v] : kv) set_config_value(cfg, k, v);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIoFailure, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) out += e.key + " = " + e.get(cfg) + "\n";
  return out;
}

std::string sweep_axis_key(const std::string& axis) {
  if (axis == "vehicles") return "geometry.vehicles";
  if (axis == "rsus") return "geometry.rsus";
  if (axis == "history_k") return "mdp.history";
  if (axis == "episodes") return "train.episodes";
  if (axis == "hidden_layers") return "train.hidden";
  fail(ErrorKind::kConfigInvalid, "sweep: unknown axis '" + axis + "'");
}

}  // namespace v2x
