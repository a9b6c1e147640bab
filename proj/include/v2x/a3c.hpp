#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "v2x/mdp.hpp"
#include "v2x/nn.hpp"
#include "v2x/rng.hpp"

namespace v2x {

struct TrainConfig {
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  double entropy_start = 0.1;
  double entropy_end = 0.001;
  double rmsprop_decay = 0.99;
  double rmsprop_eps = 1e-8;
  int n_step = 20;
  int workers = 1;
  long episodes = 2000;
  ConvSpec conv;
  std::vector<int> hidden{64};
  double reward_scale = 1.0;  // multiplies the global reward seen by the learner
  bool normalize_advantages = false;  // per segment: zero mean, unit variance

  void validate() const;
  // Linear decay from entropy_start (first episode) to entropy_end (last).
  double entropy_weight(long episode) const;
};

struct ActorCriticParams {
  NetworkArchitecture actor_arch;
  NetworkArchitecture critic_arch;
  std::vector<double> actor;
  std::vector<double> critic;
  std::vector<double> actor_acc;  // RMSprop accumulators
  std::vector<double> critic_acc;

  bool finite() const;
};

// Actor has V softmax outputs, critic one linear output; both read the same
// encoded state.
NetworkArchitecture make_architecture(int vehicles, int history, int channels, const ConvSpec& conv,
                                      const std::vector<int>& hidden, int outputs);
ActorCriticParams init_agent(const NetworkArchitecture& actor_arch,
                             const NetworkArchitecture& critic_arch, Rng& rng);

std::vector<double> softmax(std::span<const double> logits);
double entropy(std::span<const double> p);

std::vector<double> actor_forward(const ActorCriticParams& p, std::span<const double> x);
double critic_forward(const ActorCriticParams& p, std::span<const double> x);

// Draws index i with probability policy[i]; greedy returns the argmax with
// ties to the lowest index.
int sample_action(std::span<const double> policy, Rng& rng, bool greedy = false);

// One segment of one agent's experience, oldest first. bootstrap_state is the
// encoded state after the last step; it is ignored when terminal.
struct RolloutBuffer {
  std::vector<std::vector<double>> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<std::vector<double>> policies;
  std::vector<double> values;
  std::vector<double> bootstrap_state;
  bool terminal = false;

  std::size_t size() const { return actions.size(); }
  void clear();
};

struct AdvantageEstimate {
  std::vector<double> returns;
  std::vector<double> advantages;
  std::vector<double> values;
};

// G_t = r_t + gamma G_{t+1}, seeded with V(bootstrap) or 0 at a terminal;
// A_t = G_t - V(s_t).
AdvantageEstimate compute_advantages(const RolloutBuffer& buf, const ActorCriticParams& p,
                                     double gamma);

// Gradient of sum_t [log pi(a_t|s_t) A_t + eta H(pi(.|s_t))] w.r.t. the actor.
std::vector<double> actor_gradient(const RolloutBuffer& buf, std::span<const double> advantages,
                                   const ActorCriticParams& p, double eta);

// Gradient of sum_t (G_t - V(s_t))^2 w.r.t. the critic.
std::vector<double> critic_gradient(const RolloutBuffer& buf, std::span<const double> returns,
                                    const ActorCriticParams& p);

// acc <- rho acc + (1 - rho) g^2; param <- param +- lr g / sqrt(acc + eps)
// (+ for ascent). Nothing is written if any input or result is non-finite.
void rmsprop_update(std::span<double> params, std::span<double> acc, std::span<const double> grad,
                    double lr, double rho, double eps, bool ascent);

struct AgentGradient {
  std::vector<double> actor;   // ascent direction
  std::vector<double> critic;  // loss gradient
};

// Parameters of all RSU agents behind one lock. apply() is all-or-nothing
// and returns its position in the serial order of applies.
class SharedAgents {
 public:
  explicit SharedAgents(std::vector<ActorCriticParams> agents);

  // Weights only (accumulators left empty).
  std::vector<ActorCriticParams> snapshot() const;
  std::uint64_t apply(const std::vector<AgentGradient>& grads, double actor_lr, double critic_lr,
                      double rho, double eps);
  std::vector<ActorCriticParams> release();
  std::uint64_t applied() const;
  int agents() const { return static_cast<int>(agents_.size()); }

 private:
  mutable std::mutex mu_;
  std::vector<ActorCriticParams> agents_;
  std::uint64_t seq_ = 0;
};

// Collects one segment for every RSU of a shared environment.
class SegmentCollector {
 public:
  SegmentCollector(int rsus, EncodeConfig enc = {}, bool normalize_advantages = false);

  JointAction act(const Environment& env, const std::vector<ActorCriticParams>& params, Rng& rng,
                  bool greedy);
  void record(const StepResult& r, double reward_scale);
  std::size_t size() const { return buffers_.empty() ? 0 : buffers_[0].size(); }
  void discard();
  // Bootstraps from the environment's current observation unless terminal
  // and returns per-RSU gradients; the buffers are cleared afterwards.
  std::vector<AgentGradient> finish(const Environment& env,
                                    const std::vector<ActorCriticParams>& params, double gamma,
                                    double eta, bool terminal);

 private:
  std::vector<RolloutBuffer> buffers_;
  EncodeConfig enc_;
  bool normalize_ = false;
};

struct EpisodeStats {
  long episode = 0;
  int worker = 0;
  int start_slot = 0;
  int length = 0;
  double mean_reward = 0.0;      // global reward per slot
  double mean_violations = 0.0;  // violating vehicles per slot
  double mean_sum_rate = 0.0;    // bits/s
  double entropy_weight = 0.0;
};

struct WorkerStats {
  int worker = 0;
  long updates = 0;
  std::vector<EpisodeStats> episodes;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

// Claims episode indices from `next_episode` until cfg.episodes is reached.
// Episode e starts at a slot drawn from the episode-start stream of `seed`;
// actions use the worker's own stream.
WorkerStats worker_loop(int worker_id, SharedAgents& shared, const EnvFactory& make_env,
                        const TrainConfig& cfg, std::atomic<long>& next_episode, std::uint64_t seed);

enum class TrainMode { kOffline, kOnline };

struct TrainResult {
  std::vector<ActorCriticParams> agents;
  std::vector<EpisodeStats> curve;  // ordered by episode index
  long updates = 0;
};

// Fresh per-RSU agents for the environment's dimensions, seeded from the
// network-init stream.
std::vector<ActorCriticParams> make_agents(const Environment& env, const TrainConfig& cfg,
                                           std::uint64_t seed);

// Offline: A3C over episodes of the scenario (terminal mobility) with
// cfg.workers threads. Online: a single wrap-mode pass from slot 0 with
// updates every n steps. `initial` defaults to fresh agents.
TrainResult train_rsu_agents(const TrainConfig& cfg, std::shared_ptr<const Scenario> scenario,
                             const EnvConfig& env_cfg, TrainMode mode, std::uint64_t seed,
                             std::vector<ActorCriticParams> initial = {});

using StepCallback = std::function<void(const JointAction&, const StepResult&)>;

// Runs the agents over `env` from its current state until it is done. With
// `learn`, segments of cfg.n_step slots are turned into RMSprop updates of
// `agents` (entropy weight cfg.entropy_end). The callback sees every slot.
TrainResult run_online(Environment& env, std::vector<ActorCriticParams> agents,
                       const TrainConfig& cfg, std::uint64_t seed, bool learn, bool greedy,
                       const StepCallback& on_step = {});

// Rounds every parameter through float32 so in-memory agents equal their
// checkpointed form.
void quantize_to_float(std::vector<ActorCriticParams>& agents);

}  // namespace v2x
