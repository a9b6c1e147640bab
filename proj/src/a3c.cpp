#include "v2x/a3c.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "v2x/error.hpp"

namespace v2x {

void TrainConfig::validate() const {
  require(actor_lr > 0 && critic_lr > 0, ErrorKind::kConfigInvalid,
          "train: learning rates must be positive");
  require(gamma > 0 && gamma <= 1, ErrorKind::kConfigInvalid, "train: gamma must be in (0, 1]");
  require(entropy_start >= 0 && entropy_end >= 0, ErrorKind::kConfigInvalid,
          "train: entropy weights must be >= 0");
  require(rmsprop_decay >= 0 && rmsprop_decay < 1 && rmsprop_eps > 0, ErrorKind::kConfigInvalid,
          "train: invalid RMSprop constants");
  require(n_step >= 1 && workers >= 1 && episodes >= 0, ErrorKind::kConfigInvalid,
          "train: n_step and workers must be >= 1, episodes >= 0");
  require(conv.kernel >= 1 && conv.filters >= 1 && conv.stride >= 1, ErrorKind::kConfigInvalid,
          "train: invalid conv shape");
  for (int h : hidden) require(h >= 1, ErrorKind::kConfigInvalid, "train: hidden widths must be >= 1");
  require(std::isfinite(reward_scale) && reward_scale > 0, ErrorKind::kConfigInvalid,
          "train: reward scale must be positive");
}

double TrainConfig::entropy_weight(long episode) const {
  if (episodes <= 1) return entropy_start;
  const double f = std::clamp(static_cast<double>(episode) / (episodes - 1), 0.0, 1.0);
  return entropy_start + (entropy_end - entropy_start) * f;
}

bool ActorCriticParams::finite() const {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(actor) && ok(critic) && ok(actor_acc) && ok(critic_acc);
}

NetworkArchitecture make_architecture(int vehicles, int history, int channels, const ConvSpec& conv,
                                      const std::vector<int>& hidden, int outputs) {
  NetworkArchitecture a;
  a.vehicles = vehicles;
  a.history = history;
  a.channels = channels;
  a.extra_per_vehicle = 2;
  a.conv = conv;
  a.hidden = hidden;
  a.outputs = outputs;
  a.validate();
  return a;
}

ActorCriticParams init_agent(const NetworkArchitecture& actor_arch,
                             const NetworkArchitecture& critic_arch, Rng& rng) {
  require(actor_arch.outputs == actor_arch.vehicles, ErrorKind::kShapeMismatch,
          "agent: actor output width must equal V");
  require(critic_arch.outputs == 1, ErrorKind::kShapeMismatch, "agent: critic output width must be 1");
  ActorCriticParams p;
  p.actor_arch = actor_arch;
  p.critic_arch = critic_arch;
  p.actor = Network(actor_arch).init(rng);
  p.critic = Network(critic_arch).init(rng);
  p.actor_acc.assign(p.actor.size(), 0.0);
  p.critic_acc.assign(p.critic.size(), 0.0);
  return p;
}

std::vector<double> softmax(std::span<const double> logits) {
  require(!logits.empty(), ErrorKind::kShapeMismatch, "softmax: empty input");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) z += p[i] = std::exp(logits[i] - m);
  for (double& x : p) x /= z;
  return p;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

std::vector<double> actor_forward(const ActorCriticParams& p, std::span<const double> x) {
  return softmax(Network(p.actor_arch).forward(p.actor, x));
}

double critic_forward(const ActorCriticParams& p, std::span<const double> x) {
  return Network(p.critic_arch).forward(p.critic, x)[0];
}

int sample_action(std::span<const double> policy, Rng& rng, bool greedy) {
  require(!policy.empty(), ErrorKind::kInvalidDistribution, "sample_action: empty distribution");
  double sum = 0.0;
  for (double x : policy) {
    require(std::isfinite(x) && x >= 0.0, ErrorKind::kInvalidDistribution,
            "sample_action: negative or non-finite probability");
    sum += x;
  }
  require(std::abs(sum - 1.0) <= 1e-6, ErrorKind::kInvalidDistribution,
          "sample_action: probabilities do not sum to 1");
  if (greedy)
    return static_cast<int>(std::max_element(policy.begin(), policy.end()) - policy.begin());
  const double u = std::uniform_real_distribution<double>(0.0, sum)(rng);
  double c = 0.0;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    c += policy[i];
    if (u < c && policy[i] > 0.0) return static_cast<int>(i);
  }
  for (std::size_t i = policy.size(); i-- > 0;)
    if (policy[i] > 0.0) return static_cast<int>(i);
  return 0;
}

void RolloutBuffer::clear() {
  states.clear();
  actions.clear();
  rewards.clear();
  policies.clear();
  values.clear();
  bootstrap_state.clear();
  terminal = false;
}

AdvantageEstimate compute_advantages(const RolloutBuffer& buf, const ActorCriticParams& p,
                                     double gamma) {
  require(buf.states.size() == buf.size() && buf.rewards.size() == buf.size(),
          ErrorKind::kShapeMismatch, "advantages: inconsistent buffer");
  const Network critic(p.critic_arch);
  AdvantageEstimate out;
  const std::size_t n = buf.size();
  out.values.resize(n);
  out.returns.resize(n);
  out.advantages.resize(n);
  for (std::size_t t = 0; t < n; ++t) out.values[t] = critic.forward(p.critic, buf.states[t])[0];
  double g = buf.terminal || buf.bootstrap_state.empty()
                 ? 0.0
                 : critic.forward(p.critic, buf.bootstrap_state)[0];
  for (std::size_t t = n; t-- > 0;) {
    g = buf.rewards[t] + gamma * g;
    out.returns[t] = g;
    out.advantages[t] = g - out.values[t];
  }
  return out;
}

std::vector<double> actor_gradient(const RolloutBuffer& buf, std::span<const double> advantages,
                                   const ActorCriticParams& p, double eta) {
  require(advantages.size() == buf.size() && buf.states.size() == buf.size(),
          ErrorKind::kShapeMismatch, "actor_gradient: advantages not aligned with the buffer");
  const Network net(p.actor_arch);
  std::vector<double> grad(p.actor.size(), 0.0);
  ForwardCache cache;
  std::vector<double> dz(p.actor_arch.outputs);
  for (std::size_t t = 0; t < buf.size(); ++t) {
    const auto logits = net.forward(p.actor, buf.states[t], &cache);
    const auto pi = softmax(logits);
    const double h = entropy(pi);
    const int a = buf.actions[t];
    require(a >= 0 && a < static_cast<int>(pi.size()), ErrorKind::kInvalidAction,
            "actor_gradient: action out of range");
    for (std::size_t j = 0; j < pi.size(); ++j) {
      const double score = (static_cast<int>(j) == a ? 1.0 : 0.0) - pi[j];
      const double dh = pi[j] > 0.0 ? -pi[j] * (std::log(pi[j]) + h) : 0.0;
      dz[j] = advantages[t] * score + eta * dh;
    }
    net.backward(p.actor, cache, dz, grad);
  }
  return grad;
}

std::vector<double> critic_gradient(const RolloutBuffer& buf, std::span<const double> returns,
                                    const ActorCriticParams& p) {
  require(returns.size() == buf.size() && buf.states.size() == buf.size(),
          ErrorKind::kShapeMismatch, "critic_gradient: returns not aligned with the buffer");
  const Network net(p.critic_arch);
  std::vector<double> grad(p.critic.size(), 0.0);
  ForwardCache cache;
  for (std::size_t t = 0; t < buf.size(); ++t) {
    const double v = net.forward(p.critic, buf.states[t], &cache)[0];
    const double d = -2.0 * (returns[t] - v);
    net.backward(p.critic, cache, std::span<const double>(&d, 1), grad);
  }
  return grad;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Computes the RMSprop result into new_params/new_acc without touching inputs.
bool rmsprop_stage(std::span<const double> params, std::span<const double> acc,
                   std::span<const double> grad, double lr, double rho, double eps, bool ascent,
                   std::vector<double>& new_params, std::vector<double>& new_acc) {
  new_params.resize(params.size());
  new_acc.resize(acc.size());
  const double sign = ascent ? 1.0 : -1.0;
  bool ok = true;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double a = rho * acc[i] + (1.0 - rho) * grad[i] * grad[i];
    const double x = params[i] + sign * lr * grad[i] / std::sqrt(a + eps);
    new_acc[i] = a;
    new_params[i] = x;
    ok = ok && std::isfinite(a) && std::isfinite(x);
  }
  return ok;
}

}  // namespace

void rmsprop_update(std::span<double> params, std::span<double> acc, std::span<const double> grad,
                    double lr, double rho, double eps, bool ascent) {
  require(params.size() == acc.size() && params.size() == grad.size(), ErrorKind::kShapeMismatch,
          "rmsprop: size mismatch");
  require(all_finite(grad), ErrorKind::kNanDetected, "rmsprop: non-finite gradient");
  std::vector<double> np, na;
  require(rmsprop_stage(params, acc, grad, lr, rho, eps, ascent, np, na), ErrorKind::kNanDetected,
          "rmsprop: non-finite update");
  std::copy(np.begin(), np.end(), params.begin());
  std::copy(na.begin(), na.end(), acc.begin());
}

SharedAgents::SharedAgents(std::vector<ActorCriticParams> agents) : agents_(std::move(agents)) {
  for (auto& a : agents_) {
    if (a.actor_acc.size() != a.actor.size()) a.actor_acc.assign(a.actor.size(), 0.0);
    if (a.critic_acc.size() != a.critic.size()) a.critic_acc.assign(a.critic.size(), 0.0);
  }
}

std::vector<ActorCriticParams> SharedAgents::snapshot() const {
  std::lock_guard lock(mu_);
  std::vector<ActorCriticParams> out;
  out.reserve(agents_.size());
  for (const auto& a : agents_) {
    ActorCriticParams s;
    s.actor_arch = a.actor_arch;
    s.critic_arch = a.critic_arch;
    s.actor = a.actor;
    s.critic = a.critic;
    out.push_back(std::move(s));
  }
  return out;
}

std::uint64_t SharedAgents::apply(const std::vector<AgentGradient>& grads, double actor_lr,
                                  double critic_lr, double rho, double eps) {
  require(grads.size() == agents_.size(), ErrorKind::kShapeMismatch,
          "apply: one gradient per agent required");
  for (const auto& g : grads)
    require(all_finite(g.actor) && all_finite(g.critic), ErrorKind::kNanDetected,
            "apply: non-finite gradient");
  std::lock_guard lock(mu_);
  struct Staged {
    std::vector<double> actor, actor_acc, critic, critic_acc;
  };
  std::vector<Staged> staged(agents_.size());
  for (std::size_t b = 0; b < agents_.size(); ++b) {
    const auto& a = agents_[b];
    require(grads[b].actor.size() == a.actor.size() && grads[b].critic.size() == a.critic.size(),
            ErrorKind::kShapeMismatch, "apply: gradient shape mismatch");
    const bool ok =
        rmsprop_stage(a.actor, a.actor_acc, grads[b].actor, actor_lr, rho, eps, true,
                      staged[b].actor, staged[b].actor_acc) &&
        rmsprop_stage(a.critic, a.critic_acc, grads[b].critic, critic_lr, rho, eps, false,
                      staged[b].critic, staged[b].critic_acc);
    require(ok, ErrorKind::kNanDetected, "apply: update produced non-finite parameters");
  }
  for (std::size_t b = 0; b < agents_.size(); ++b) {
    auto& a = agents_[b];
    a.actor.swap(staged[b].actor);
    a.actor_acc.swap(staged[b].actor_acc);
    a.critic.swap(staged[b].critic);
    a.critic_acc.swap(staged[b].critic_acc);
  }
  return seq_++;
}

std::vector<ActorCriticParams> SharedAgents::release() {
  std::lock_guard lock(mu_);
  return std::move(agents_);
}

std::uint64_t SharedAgents::applied() const {
  std::lock_guard lock(mu_);
  return seq_;
}

namespace {

void normalize(std::vector<double>& xs) {
  if (xs.size() < 2) return;
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  for (double& x : xs) x = sd > 1e-8 ? (x - mean) / sd : 0.0;
}

}  // namespace

SegmentCollector::SegmentCollector(int rsus, EncodeConfig enc, bool normalize_advantages)
    : buffers_(rsus), enc_(enc), normalize_(normalize_advantages) {}

JointAction SegmentCollector::act(const Environment& env,
                                  const std::vector<ActorCriticParams>& params, Rng& rng,
                                  bool greedy) {
  const int B = env.rsus();
  require(static_cast<int>(params.size()) == B && static_cast<int>(buffers_.size()) == B,
          ErrorKind::kShapeMismatch, "collector: one agent per RSU required");
  JointAction joint(B);
  for (int b = 0; b < B; ++b) {
    auto x = encode_state(env.observe(b), enc_, env.config().features);
    auto pi = actor_forward(params[b], x);
    joint[b] = sample_action(pi, rng, greedy);
    auto& buf = buffers_[b];
    buf.states.push_back(std::move(x));
    buf.actions.push_back(joint[b]);
    buf.policies.push_back(std::move(pi));
  }
  return joint;
}

void SegmentCollector::record(const StepResult& r, double reward_scale) {
  for (auto& buf : buffers_) buf.rewards.push_back(r.global_reward * reward_scale);
}

void SegmentCollector::discard() {
  for (auto& buf : buffers_) buf.clear();
}

std::vector<AgentGradient> SegmentCollector::finish(const Environment& env,
                                                    const std::vector<ActorCriticParams>& params,
                                                    double gamma, double eta, bool terminal) {
  std::vector<AgentGradient> grads(buffers_.size());
  for (std::size_t b = 0; b < buffers_.size(); ++b) {
    auto& buf = buffers_[b];
    buf.terminal = terminal;
    if (!terminal)
      buf.bootstrap_state =
          encode_state(env.observe(static_cast<int>(b)), enc_, env.config().features);
    auto est = compute_advantages(buf, params[b], gamma);
    buf.values = est.values;
    if (normalize_) normalize(est.advantages);
    grads[b].actor = actor_gradient(buf, est.advantages, params[b], eta);
    grads[b].critic = critic_gradient(buf, est.returns, params[b]);
    buf.clear();
  }
  return grads;
}

namespace {

struct EpisodeAccumulator {
  int length = 0;
  double reward = 0.0;
  double violations = 0.0;
  double sum_rate = 0.0;

  void add(const StepResult& r, const Environment& env) {
    ++length;
    reward += r.global_reward;
    const auto& ind = env.tracker().indicator;
    violations += std::accumulate(ind.begin(), ind.end(), 0);
    sum_rate += std::accumulate(r.rates.begin(), r.rates.end(), 0.0);
  }
  void store(EpisodeStats& s) const {
    s.length = length;
    if (length == 0) return;
    s.mean_reward = reward / length;
    s.mean_violations = violations / length;
    s.mean_sum_rate = sum_rate / length;
  }
};

}  // namespace

WorkerStats worker_loop(int worker_id, SharedAgents& shared, const EnvFactory& make_env,
                        const TrainConfig& cfg, std::atomic<long>& next_episode,
                        std::uint64_t seed) {
  WorkerStats stats;
  stats.worker = worker_id;
  if (next_episode.load() >= cfg.episodes) return stats;
  auto env = make_env();
  require(env != nullptr, ErrorKind::kMissingTrace, "worker: environment factory returned null");
  Rng act_rng = make_rng(derive_seed(seed, Stream::kWorker, static_cast<std::uint64_t>(worker_id)));
  SegmentCollector collector(env->rsus(), {}, cfg.normalize_advantages);
  const int T = env->scenario().slots();

  for (;;) {
    const long e = next_episode.fetch_add(1);
    if (e >= cfg.episodes) break;
    Rng start_rng = make_rng(derive_seed(seed, Stream::kEpisodeStart, static_cast<std::uint64_t>(e)));
    const int start = std::uniform_int_distribution<int>(0, T - 1)(start_rng);
    env->reset(start);
    const double eta = cfg.entropy_weight(e);
    EpisodeStats es;
    es.episode = e;
    es.worker = worker_id;
    es.start_slot = start;
    es.entropy_weight = eta;
    EpisodeAccumulator acc;
    while (!env->done()) {
      const auto params = shared.snapshot();
      bool terminal = false;
      for (int n = 0; n < cfg.n_step && !terminal; ++n) {
        const auto joint = collector.act(*env, params, act_rng, false);
        const auto r = env->step(joint);
        collector.record(r, cfg.reward_scale);
        acc.add(r, *env);
        terminal = r.terminal;
      }
      auto grads = collector.finish(*env, params, cfg.gamma, eta, terminal);
      shared.apply(grads, cfg.actor_lr, cfg.critic_lr, cfg.rmsprop_decay, cfg.rmsprop_eps);
      ++stats.updates;
    }
    acc.store(es);
    stats.episodes.push_back(es);
  }
  return stats;
}

std::vector<ActorCriticParams> make_agents(const Environment& env, const TrainConfig& cfg,
                                           std::uint64_t seed) {
  const int V = env.vehicles();
  const int k = env.config().history;
  const int C = env.channel_dims();
  const auto actor = make_architecture(V, k, C, cfg.conv, cfg.hidden, V);
  const auto critic = make_architecture(V, k, C, cfg.conv, cfg.hidden, 1);
  std::vector<ActorCriticParams> out;
  for (int b = 0; b < env.rsus(); ++b) {
    Rng rng = make_rng(derive_seed(seed, Stream::kNetworkInit, static_cast<std::uint64_t>(b)));
    out.push_back(init_agent(actor, critic, rng));
  }
  return out;
}

TrainResult run_online(Environment& env, std::vector<ActorCriticParams> agents,
                       const TrainConfig& cfg, std::uint64_t seed, bool learn, bool greedy,
                       const StepCallback& on_step) {
  cfg.validate();
  require(static_cast<int>(agents.size()) == env.rsus(), ErrorKind::kShapeMismatch,
          "run_online: one agent per RSU required");
  Rng act_rng = make_rng(derive_seed(seed, Stream::kActionSampling));
  SharedAgents shared(std::move(agents));
  SegmentCollector collector(env.rsus(), {}, cfg.normalize_advantages);
  TrainResult out;
  EpisodeStats es;
  es.start_slot = env.slot();
  es.entropy_weight = cfg.entropy_end;
  EpisodeAccumulator acc;
  auto params = shared.snapshot();
  while (!env.done()) {
    const auto joint = collector.act(env, params, act_rng, greedy);
    const auto r = env.step(joint);
    collector.record(r, cfg.reward_scale);
    acc.add(r, env);
    if (on_step) on_step(joint, r);
    if (!learn) {
      collector.discard();
      continue;
    }
    if (r.terminal || static_cast<int>(collector.size()) >= cfg.n_step) {
      auto grads = collector.finish(env, params, cfg.gamma, cfg.entropy_end, r.terminal);
      shared.apply(grads, cfg.actor_lr, cfg.critic_lr, cfg.rmsprop_decay, cfg.rmsprop_eps);
      params = shared.snapshot();
      ++out.updates;
    }
  }
  acc.store(es);
  out.curve.push_back(es);
  out.agents = shared.release();
  return out;
}

TrainResult train_rsu_agents(const TrainConfig& cfg, std::shared_ptr<const Scenario> scenario,
                             const EnvConfig& env_cfg, TrainMode mode, std::uint64_t seed,
                             std::vector<ActorCriticParams> initial) {
  cfg.validate();
  require(scenario != nullptr && scenario->slots() > 0, ErrorKind::kMissingTrace,
          "train: no channel trace available");

  if (mode == TrainMode::kOnline) {
    EnvConfig ec = env_cfg;
    ec.mobility = MobilityMode::kWrap;
    ec.max_episode_slots = 0;
    Environment env(scenario, ec);
    if (initial.empty()) initial = make_agents(env, cfg, seed);
    return run_online(env, std::move(initial), cfg, seed, true, false);
  }

  EnvConfig ec = env_cfg;
  ec.mobility = MobilityMode::kTerminal;
  if (initial.empty()) initial = make_agents(Environment(scenario, ec), cfg, seed);
  SharedAgents shared(std::move(initial));
  std::atomic<long> next{0};
  EnvFactory factory = [&] { return std::make_unique<Environment>(scenario, ec); };

  std::vector<WorkerStats> stats(cfg.workers);
  if (cfg.workers == 1) {
    stats[0] = worker_loop(0, shared, factory, cfg, next, seed);
  } else {
    std::vector<std::exception_ptr> errors(cfg.workers);
    std::vector<std::thread> threads;
    for (int w = 0; w < cfg.workers; ++w)
      threads.emplace_back([&, w] {
        try {
          stats[w] = worker_loop(w, shared, factory, cfg, next, seed);
        } catch (...) {
          errors[w] = std::current_exception();
          next.store(cfg.episodes);
        }
      });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  TrainResult out;
  for (auto& s : stats) {
    out.updates += s.updates;
    out.curve.insert(out.curve.end(), s.episodes.begin(), s.episodes.end());
  }
  std::sort(out.curve.begin(), out.curve.end(),
            [](const EpisodeStats& a, const EpisodeStats& b) { return a.episode < b.episode; });
  out.agents = shared.release();
  return out;
}

void quantize_to_float(std::vector<ActorCriticParams>& agents) {
  auto q = [](std::vector<double>& v) {
    for (double& x : v) x = static_cast<double>(static_cast<float>(x));
  };
  for (auto& a : agents) {
    q(a.actor);
    q(a.critic);
  }
}

}  // namespace v2x
