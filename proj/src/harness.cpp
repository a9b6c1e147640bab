#include "v2x/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "v2x/baselines.hpp"
#include "v2x/checkpoint.hpp"
#include "v2x/error.hpp"
#include "v2x/trace_io.hpp"

namespace v2x {

namespace fs = std::filesystem;

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

std::vector<CdfPoint> emit_cdf(std::vector<double> samples) {
  require(!samples.empty(), ErrorKind::kDegenerateInput, "emit_cdf: empty input");
  std::sort(samples.begin(), samples.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    out.push_back({samples[i], i + 1 == samples.size() ? 1.0 : static_cast<double>(i + 1) / n});
  }
  return out;
}

std::shared_ptr<const Scenario> make_scenario(const ExperimentConfig& cfg, std::uint64_t seed,
                                              bool keep_trace) {
  if (cfg.trace_path.empty()) return build_scenario(cfg.scenario, seed, keep_trace);
  auto trace = std::make_shared<const ChannelTrace>(read_trace(cfg.trace_path));
  return build_scenario_from_trace(cfg.scenario, seed, trace, keep_trace);
}

TrainResult train_offline(const ExperimentConfig& cfg, std::shared_ptr<const Scenario> scenario,
                          std::uint64_t seed) {
  auto res = train_rsu_agents(cfg.train, std::move(scenario), cfg.env, TrainMode::kOffline, seed);
  quantize_to_float(res.agents);
  return res;
}

namespace {

bool is_drl(const std::string& p) { return p == "drl_offline" || p == "drl_online"; }

struct RunRecorder {
  PolicyRun run;
  bool keep;
  long slots = 0;
  double reward = 0.0, sum_rate = 0.0, violations = 0.0;

  void add(const JointAction& joint, const StepResult& r, const Environment& env) {
    const int V = env.vehicles();
    if (validate_association(AssociationMatrix::from_actions(joint, V)))
      ++run.summary.invalid_associations;
    MetricsRecord m;
    m.slot = r.slot;
    m.rates = r.rates;
    m.actions = joint;
    m.global_reward = r.global_reward;
    m.violations = env.tracker().indicator;
    m.sum_rate = std::accumulate(r.rates.begin(), r.rates.end(), 0.0);
    ++slots;
    reward += m.global_reward;
    sum_rate += m.sum_rate;
    violations += std::accumulate(m.violations.begin(), m.violations.end(), 0);
    if (keep) run.records.push_back(std::move(m));
  }

  void finish(const Environment& env) {
    auto& s = run.summary;
    s.slots = static_cast<int>(slots);
    if (slots == 0) return;
    const int V = env.vehicles();
    s.mean_reward = reward / slots;
    s.mean_sum_rate = sum_rate / slots;
    s.mean_rate = s.mean_sum_rate / V;
    s.mean_violations = violations / slots;
    const auto& p = env.tracker().probability;
    s.violation_probability = std::accumulate(p.begin(), p.end(), 0.0) / V;
    s.objective = objective_estimate(env.history(), env.tracker(), env.config().objective);
  }
};

EnvConfig evaluation_env(const ExperimentConfig& cfg) {
  EnvConfig ec = cfg.env;
  ec.mobility = MobilityMode::kWrap;
  ec.max_episode_slots = 0;
  return ec;
}

}  // namespace

PolicyRun evaluate_policy(const std::string& policy, std::shared_ptr<const Scenario> scenario,
                          const ExperimentConfig& cfg, std::uint64_t seed,
                          const std::vector<ActorCriticParams>* agents, bool keep_records) {
  EnvConfig ec = evaluation_env(cfg);
  if (policy == "drl_online") ec.compute_fraction = cfg.online_compute_fraction;
  Environment env(scenario, ec);
  RunRecorder rec;
  rec.keep = keep_records;
  rec.run.summary.policy = policy;
  rec.run.summary.seed = seed;

  if (is_drl(policy)) {
    auto cb = [&](const JointAction& j, const StepResult& r) { rec.add(j, r, env); };
    if (policy == "drl_offline") {
      require(agents != nullptr && static_cast<int>(agents->size()) == env.rsus(),
              ErrorKind::kMissingTrace, "drl_offline: no trained agents available");
      run_online(env, *agents, cfg.train, seed, false, cfg.eval_greedy, cb);
    } else {
      run_online(env, make_agents(env, cfg.train, seed), cfg.train, seed, true, false, cb);
    }
  } else {
    BaselinePolicy pol(parse_baseline(policy), env.rsus(), env.vehicles(), seed, cfg.pf_window);
    while (!env.done()) {
      const auto joint = pol.act(env);
      const auto r = env.step(joint);
      pol.observe(r);
      rec.add(joint, r, env);
    }
    rec.run.summary.fallbacks = pol.fallbacks();
    if (pol.fallbacks() > 0)
      std::cerr << "warning: myopic search exceeded its budget on " << pol.fallbacks()
                << " slots; used per-RSU greedy\n";
  }
  rec.finish(env);
  return std::move(rec.run);
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRecord>& recs) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "cannot open " + path.string());
  const std::size_t V = recs.empty() ? 0 : recs[0].rates.size();
  const std::size_t B = recs.empty() ? 0 : recs[0].actions.size();
  out << "slot,global_reward,sum_rate_bps";
  for (std::size_t v = 0; v < V; ++v) out << ",rate_" << v;
  for (std::size_t b = 0; b < B; ++b) out << ",action_" << b;
  for (std::size_t v = 0; v < V; ++v) out << ",violation_" << v;
  out << "\n";
  for (const auto& m : recs) {
    out << m.slot << ',' << format_number(m.global_reward) << ',' << format_number(m.sum_rate);
    for (double r : m.rates) out << ',' << format_number(r);
    for (int a : m.actions) out << ',' << a;
    for (int z : m.violations) out << ',' << z;
    out << "\n";
  }
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "write failed: " + path.string());
}

void write_summary_csv(const fs::path& path, const std::vector<RunSummary>& rows) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "cannot open " + path.string());
  out << "policy,seed,slots,mean_reward,mean_sum_rate_bps,mean_rate_bps,violation_probability,"
         "mean_violations,objective,invalid_associations,fallbacks\n";
  for (const auto& s : rows)
    out << s.policy << ',' << s.seed << ',' << s.slots << ',' << format_number(s.mean_reward) << ','
        << format_number(s.mean_sum_rate) << ',' << format_number(s.mean_rate) << ','
        << format_number(s.violation_probability) << ',' << format_number(s.mean_violations)
        << ',' << format_number(s.objective) << ',' << s.invalid_associations << ','
        << s.fallbacks << "\n";
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "write failed: " + path.string());
}

std::vector<RunSummary> read_summary_csv(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIoFailure, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  require(line.rfind("policy,seed,", 0) == 0, ErrorKind::kFormatMismatch,
          "summary: unexpected header in " + path.string());
  std::vector<RunSummary> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    require(f.size() == 11, ErrorKind::kFormatMismatch, "summary: bad row in " + path.string());
    RunSummary s;
    try {
      s.policy = f[0];
      s.seed = std::stoull(f[1]);
      s.slots = std::stoi(f[2]);
      s.mean_reward = std::stod(f[3]);
      s.mean_sum_rate = std::stod(f[4]);
      s.mean_rate = std::stod(f[5]);
      s.violation_probability = std::stod(f[6]);
      s.mean_violations = std::stod(f[7]);
      s.objective = std::stod(f[8]);
      s.invalid_associations = std::stol(f[9]);
      s.fallbacks = std::stol(f[10]);
    } catch (const std::exception&) {
      fail(ErrorKind::kFormatMismatch, "summary: unparsable row in " + path.string());
    }
    rows.push_back(s);
  }
  return rows;
}

void write_cdf_csv(const fs::path& path, const std::vector<CdfPoint>& cdf) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "cannot open " + path.string());
  out << "value,probability\n";
  for (const auto& p : cdf) out << format_number(p.value) << ',' << format_number(p.probability) << "\n";
}

void write_training_csv(const fs::path& path, const std::vector<EpisodeStats>& curve) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "cannot open " + path.string());
  out << "episode,worker,start_slot,length,mean_reward,mean_violations,mean_sum_rate_bps,"
         "entropy_weight\n";
  for (const auto& e : curve)
    out << e.episode << ',' << e.worker << ',' << e.start_slot << ',' << e.length << ','
        << format_number(e.mean_reward) << ',' << format_number(e.mean_violations) << ','
        << format_number(e.mean_sum_rate) << ',' << format_number(e.entropy_weight) << "\n";
}

ReportBundle run_experiment(const ExperimentConfig& cfg, const std::optional<fs::path>& out,
                            const std::optional<fs::path>& checkpoint) {
  cfg.validate();
  if (out) {
    fs::create_directories(*out);
    std::ofstream(*out / "config.txt") << serialize_config(cfg);
  }
  std::optional<Checkpoint> loaded;
  if (checkpoint) loaded = load_checkpoint(*checkpoint);

  ReportBundle bundle;
  bundle.policies = cfg.policies;
  const std::size_t P = cfg.policies.size();
  bundle.reward_series.assign(P, {});
  std::vector<std::vector<double>> rates(P), sums(P);
  const bool need_training =
      std::find(cfg.policies.begin(), cfg.policies.end(), "drl_offline") != cfg.policies.end();

  for (int i = 0; i < cfg.seeds; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    const auto scenario = make_scenario(cfg, seed);
    const fs::path dir = out ? *out / ("seed_" + std::to_string(seed)) : fs::path();
    if (out) fs::create_directories(dir);

    std::vector<ActorCriticParams> agents;
    if (need_training) {
      if (loaded) {
        Environment probe(scenario, evaluation_env(cfg));
        const auto fresh = make_agents(probe, cfg.train, seed);
        check_compatible(*loaded, probe.rsus(), fresh[0].actor_arch, fresh[0].critic_arch);
        agents = loaded->agents;
      } else {
        auto trained = train_offline(cfg, scenario, seed);
        agents = std::move(trained.agents);
        if (out) {
          save_checkpoint(dir / "agents.ckpt", Checkpoint{seed, agents});
          write_training_csv(dir / "training.csv", trained.curve);
        }
        bundle.training_curves.push_back(std::move(trained.curve));
      }
    }

    for (std::size_t p = 0; p < P; ++p) {
      const auto& name = cfg.policies[p];
      auto run = evaluate_policy(name, scenario, cfg, seed, &agents, true);
      if (out) write_metrics_csv(dir / ("metrics_" + name + ".csv"), run.records);
      auto& series = bundle.reward_series[p];
      if (series.size() < run.records.size()) series.resize(run.records.size(), 0.0);
      for (const auto& m : run.records) {
        series[m.slot] += m.global_reward / cfg.seeds;
        rates[p].insert(rates[p].end(), m.rates.begin(), m.rates.end());
        sums[p].push_back(m.sum_rate);
      }
      bundle.summaries.push_back(run.summary);
    }
  }

  for (std::size_t p = 0; p < P; ++p) {
    bundle.rate_cdf.push_back(emit_cdf(rates[p]));
    bundle.sum_rate_cdf.push_back(emit_cdf(sums[p]));
  }
  if (out) {
    write_summary_csv(*out / "summary.csv", bundle.summaries);
    for (std::size_t p = 0; p < P; ++p) {
      write_cdf_csv(*out / ("cdf_rate_" + cfg.policies[p] + ".csv"), bundle.rate_cdf[p]);
      write_cdf_csv(*out / ("cdf_sum_rate_" + cfg.policies[p] + ".csv"), bundle.sum_rate_cdf[p]);
    }
    std::ofstream rs(*out / "reward_series.csv");
    rs << "slot";
    for (const auto& name : cfg.policies) rs << ',' << name;
    rs << "\n";
    const std::size_t T = bundle.reward_series.empty() ? 0 : bundle.reward_series[0].size();
    for (std::size_t t = 0; t < T; ++t) {
      rs << t;
      for (std::size_t p = 0; p < P; ++p)
        rs << ',' << format_number(t < bundle.reward_series[p].size() ? bundle.reward_series[p][t] : 0.0);
      rs << "\n";
    }
  }
  return bundle;
}

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const std::string& axis,
                            const std::vector<std::string>& values,
                            const std::optional<fs::path>& out) {
  require(!values.empty(), ErrorKind::kInvalidArgument, "sweep: no values given");
  const std::string key = sweep_axis_key(axis);
  std::vector<SweepRow> rows;
  for (const auto& value : values) {
    ExperimentConfig c = cfg;
    set_config_value(c, key, value);
    c.validate();
    std::optional<fs::path> sub;
    if (out) sub = *out / (axis + "_" + value);
    const auto bundle = run_experiment(c, sub);
    for (const auto& policy : c.policies) {
      SweepRow row;
      row.value = value;
      row.policy = policy;
      int n = 0;
      for (const auto& s : bundle.summaries) {
        if (s.policy != policy) continue;
        row.mean_sum_rate += s.mean_sum_rate;
        row.violation_probability += s.violation_probability;
        row.mean_violations += s.mean_violations;
        row.mean_reward += s.mean_reward;
        ++n;
      }
      if (n > 0) {
        row.mean_sum_rate /= n;
        row.violation_probability /= n;
        row.mean_violations /= n;
        row.mean_reward /= n;
      }
      rows.push_back(row);
    }
  }
  if (out) {
    fs::create_directories(*out);
    std::ofstream f(*out / ("sweep_" + axis + ".csv"));
    f << axis << ",policy,mean_sum_rate_bps,violation_probability,mean_violations,mean_reward\n";
    for (const auto& r : rows)
      f << r.value << ',' << r.policy << ',' << format_number(r.mean_sum_rate) << ','
        << format_number(r.violation_probability) << ',' << format_number(r.mean_violations) << ','
        << format_number(r.mean_reward) << "\n";
  }
  return rows;
}

Interval bootstrap_mean(const std::vector<double>& xs, std::uint64_t seed, int resamples) {
  require(!xs.empty(), ErrorKind::kDegenerateInput, "bootstrap: empty sample");
  Interval iv;
  iv.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  Rng rng = make_rng(derive_seed(seed, Stream::kBootstrap));
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += xs[pick(rng)];
    m = s / xs.size();
  }
  std::sort(means.begin(), means.end());
  const auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(q * (resamples - 1) + 0.5);
    return means[std::min(idx, means.size() - 1)];
  };
  iv.lo = at(0.025);
  iv.hi = at(0.975);
  return iv;
}

std::vector<RunSummary> report(const fs::path& dir, const fs::path& out_dir) {
  require(fs::is_directory(dir), ErrorKind::kIoFailure, "report: not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "summary.csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorKind::kIoFailure, "report: no summary.csv under " + dir.string());

  std::map<std::string, std::vector<RunSummary>> by_policy;
  std::vector<std::string> order;
  for (const auto& f : files)
    for (const auto& s : read_summary_csv(f)) {
      if (!by_policy.count(s.policy)) order.push_back(s.policy);
      by_policy[s.policy].push_back(s);
    }

  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "report.csv");
  require(static_cast<bool>(out), ErrorKind::kIoFailure,
          "cannot write report in " + out_dir.string());
  out << "policy,runs,mean_reward,reward_lo,reward_hi,mean_sum_rate_bps,sum_rate_lo,sum_rate_hi,"
         "violation_probability,violation_lo,violation_hi\n";
  std::vector<RunSummary> merged;
  for (const auto& policy : order) {
    const auto& rows = by_policy[policy];
    std::vector<double> r, s, v;
    for (const auto& x : rows) {
      r.push_back(x.mean_reward);
      s.push_back(x.mean_sum_rate);
      v.push_back(x.violation_probability);
    }
    const auto ir = bootstrap_mean(r, 0), is = bootstrap_mean(s, 0), iv = bootstrap_mean(v, 0);
    out << policy << ',' << rows.size() << ',' << format_number(ir.mean) << ','
        << format_number(ir.lo) << ',' << format_number(ir.hi) << ',' << format_number(is.mean)
        << ',' << format_number(is.lo) << ',' << format_number(is.hi) << ','
        << format_number(iv.mean) << ',' << format_number(iv.lo) << ',' << format_number(iv.hi)
        << "\n";
    RunSummary m;
    m.policy = policy;
    m.mean_reward = ir.mean;
    m.mean_sum_rate = is.mean;
    m.violation_probability = iv.mean;
    merged.push_back(m);
  }
  return merged;
}

}  // namespace v2x
