// v2xsim: trace generation, training, evaluation, sweeps and reports for the
// multi-RSU mmWave association simulator.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "v2x/checkpoint.hpp"
#include "v2x/config.hpp"
#include "v2x/error.hpp"
#include "v2x/harness.hpp"
#include "v2x/trace_io.hpp"

namespace fs = std::filesystem;
using namespace v2x;

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

void print_summaries(const std::vector<RunSummary>& rows) {
  for (const auto& s : rows)
    std::cout << s.policy << " seed=" << s.seed << " reward=" << format_number(s.mean_reward)
              << " sum_rate_gbps=" << format_number(s.mean_sum_rate / 1e9)
              << " violation_prob=" << format_number(s.violation_probability) << "\n";
}

int generate_traces(const ExperimentConfig& cfg, const fs::path& out, bool csv) {
  fs::create_directories(out);
  for (int i = 0; i < cfg.seeds; ++i) {
    const auto seed = cfg.seed + static_cast<std::uint64_t>(i);
    const auto sc = make_scenario(cfg, seed, true);
    const auto base = out / ("trace_seed_" + std::to_string(seed));
    write_trace(base.string() + ".v2xt", *sc->trace);
    write_trace_metadata(base.string() + ".meta", *sc->trace);
    if (csv) write_trace_csv(base.string() + ".csv", *sc->trace);
    std::cout << "wrote " << base.string() << ".v2xt\n";
  }
  return 0;
}

int train(const ExperimentConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  std::ofstream(out / "config.txt") << serialize_config(cfg);
  for (int i = 0; i < cfg.seeds; ++i) {
    const auto seed = cfg.seed + static_cast<std::uint64_t>(i);
    const auto sc = make_scenario(cfg, seed);
    const auto res = train_offline(cfg, sc, seed);
    const auto dir = out / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    save_checkpoint(dir / "agents.ckpt", Checkpoint{seed, res.agents});
    write_training_csv(dir / "training.csv", res.curve);
    std::cout << "seed " << seed << ": " << res.curve.size() << " episodes, " << res.updates
              << " updates -> " << (dir / "agents.ckpt").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-RSU mmWave vehicular association simulator"};
  app.require_subcommand(1);
  std::string out = "out";
  app.add_option("--out", out, "Output directory")->capture_default_str();

  std::string cfg_path, policy, checkpoint, axis, values, dir;
  bool csv = false;

  auto* gen = app.add_subcommand("generate-traces", "Generate channel traces");
  gen->add_option("config", cfg_path, "Config file")->required();
  gen->add_flag("--csv", csv, "Also write the trace as CSV");

  auto* tr = app.add_subcommand("train", "Offline A3C training");
  tr->add_option("config", cfg_path)->required();

  auto* ev = app.add_subcommand("evaluate", "Evaluate a policy");
  ev->add_option("config", cfg_path)->required();
  ev->add_option("--policy", policy, "Policy name")->required();
  ev->add_option("--checkpoint", checkpoint, "Agent checkpoint for drl_offline");

  auto* bl = app.add_subcommand("baseline", "Evaluate a baseline policy");
  bl->add_option("config", cfg_path)->required();
  bl->add_option("--policy", policy)->required();

  auto* sw = app.add_subcommand("sweep", "Sweep one configuration axis");
  sw->add_option("config", cfg_path)->required();
  sw->add_option("--axis", axis, "vehicles|rsus|history_k|episodes|hidden_layers")->required();
  sw->add_option("--values", values, "Comma-separated values")->required();

  auto* rp = app.add_subcommand("report", "Merge summary CSVs into a report");
  rp->add_option("dir", dir, "Directory with run outputs")->required();

  for (auto* sub : {gen, tr, ev, bl, sw, rp}) sub->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0)
      std::cerr << "error: kind=usage message=\"" << escape(e.what()) << "\"\n";
    return app.exit(e);
  }

  try {
    if (*rp) {
      const auto rows = report(dir, out);
      print_summaries(rows);
      return 0;
    }
    ExperimentConfig cfg = load_config(cfg_path);
    if (*gen) return generate_traces(cfg, out, csv);
    if (*tr) return train(cfg, out);
    if (*ev || *bl) {
      if (*bl)
        require(policy != "drl_offline" && policy != "drl_online", ErrorKind::kConfigInvalid,
                "baseline: '" + policy + "' is not a baseline policy");
      cfg.policies = {policy};
      cfg.validate();
      std::optional<fs::path> ck;
      if (!checkpoint.empty()) ck = checkpoint;
      const auto bundle = run_experiment(cfg, fs::path(out), ck);
      print_summaries(bundle.summaries);
      return 0;
    }
    if (*sw) {
      const auto rows = sweep(cfg, axis, split(values, ','), fs::path(out));
      for (const auto& r : rows)
        std::cout << axis << "=" << r.value << " " << r.policy
                  << " sum_rate_gbps=" << format_number(r.mean_sum_rate / 1e9)
                  << " violation_prob=" << format_number(r.violation_probability) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: kind=" << to_string(e.kind()) << " message=\"" << escape(e.what())
              << "\"\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: kind=internal message=\"" << escape(e.what()) << "\"\n";
    return 3;
  }
  return 1;
}
