#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "v2x/a3c.hpp"
#include "v2x/config.hpp"
#include "v2x/scenario.hpp"

namespace v2x {

struct MetricsRecord {
  int slot = 0;
  std::vector<double> rates;  // effective, bits/s
  JointAction actions;
  double global_reward = 0.0;
  std::vector<int> violations;
  double sum_rate = 0.0;
};

struct RunSummary {
  std::string policy;
  std::uint64_t seed = 0;
  int slots = 0;
  double mean_reward = 0.0;
  double mean_sum_rate = 0.0;         // bits/s
  double mean_rate = 0.0;             // per vehicle, bits/s
  double violation_probability = 0.0; // mean over vehicles of the empirical probability
  double mean_violations = 0.0;       // violating vehicles per slot
  double objective = 0.0;
  long invalid_associations = 0;
  long fallbacks = 0;
};

struct PolicyRun {
  RunSummary summary;
  std::vector<MetricsRecord> records;
};

struct CdfPoint {
  double value = 0.0;
  double probability = 0.0;
};

// Empirical CDF at the sorted distinct sample values.
std::vector<CdfPoint> emit_cdf(std::vector<double> samples);

struct ReportBundle {
  std::vector<RunSummary> summaries;
  // Per policy, pooled over seeds.
  std::vector<std::string> policies;
  std::vector<std::vector<double>> reward_series;  // mean over seeds per slot
  std::vector<std::vector<CdfPoint>> rate_cdf;
  std::vector<std::vector<CdfPoint>> sum_rate_cdf;
  std::vector<std::vector<EpisodeStats>> training_curves;  // per seed
};

std::shared_ptr<const Scenario> make_scenario(const ExperimentConfig& cfg, std::uint64_t seed,
                                              bool keep_trace = false);

// Offline A3C training on the scenario.
TrainResult train_offline(const ExperimentConfig& cfg, std::shared_ptr<const Scenario> scenario,
                          std::uint64_t seed);

// One wrap-mode pass over all slots of the scenario. drl_offline needs
// `agents`; drl_online starts from fresh agents and learns while it acts.
PolicyRun evaluate_policy(const std::string& policy, std::shared_ptr<const Scenario> scenario,
                          const ExperimentConfig& cfg, std::uint64_t seed,
                          const std::vector<ActorCriticParams>* agents = nullptr,
                          bool keep_records = true);

// Generates traces, trains when a DRL policy is requested (or loads
// `checkpoint` for drl_offline), evaluates every policy on every seed and,
// when `out` is set, writes metrics, checkpoints and report CSVs there.
ReportBundle run_experiment(const ExperimentConfig& cfg,
                            const std::optional<std::filesystem::path>& out = std::nullopt,
                            const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

struct SweepRow {
  std::string value;
  std::string policy;
  double mean_sum_rate = 0.0;
  double violation_probability = 0.0;
  double mean_violations = 0.0;
  double mean_reward = 0.0;
};

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const std::string& axis,
                            const std::vector<std::string>& values,
                            const std::optional<std::filesystem::path>& out = std::nullopt);

struct Interval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of the mean (95%).
Interval bootstrap_mean(const std::vector<double>& xs, std::uint64_t seed, int resamples = 2000);

// CSV writers; numbers use the shortest round-trip representation.
std::string format_number(double x);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& recs);
void write_summary_csv(const std::filesystem::path& path, const std::vector<RunSummary>& rows);
void write_cdf_csv(const std::filesystem::path& path, const std::vector<CdfPoint>& cdf);
void write_training_csv(const std::filesystem::path& path, const std::vector<EpisodeStats>& curve);
std::vector<RunSummary> read_summary_csv(const std::filesystem::path& path);

// Merges every summary.csv below `dir` into `out`/report.csv (per-policy means
// with bootstrap intervals over runs). Returns the merged rows.
std::vector<RunSummary> report(const std::filesystem::path& dir, const std::filesystem::path& out);

}  // namespace v2x
