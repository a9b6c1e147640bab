#include "v2x/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "v2x/error.hpp"

namespace v2x {

BaselineKind parse_baseline(const std::string& name) {
  if (name == "max_rssi") return BaselineKind::kMaxRssi;
  if (name == "proportional_fair" || name == "pf") return BaselineKind::kProportionalFair;
  if (name == "myopic" || name == "myopic_opt") return BaselineKind::kMyopic;
  if (name == "random") return BaselineKind::kRandom;
  if (name == "fixed") return BaselineKind::kFixed;
  fail(ErrorKind::kConfigInvalid, "unknown baseline policy '" + name + "'");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kMaxRssi: return "max_rssi";
    case BaselineKind::kProportionalFair: return "proportional_fair";
    case BaselineKind::kMyopic: return "myopic";
    case BaselineKind::kRandom: return "random";
    case BaselineKind::kFixed: return "fixed";
  }
  return "unknown";
}

int argmax_first(std::span<const double> values) {
  require(!values.empty(), ErrorKind::kInvalidArgument, "argmax: empty input");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::vector<double> rssi(int b, const LinkGains& gains, const LinkBudget& lb) {
  std::vector<double> out(gains.vehicles());
  for (int v = 0; v < gains.vehicles(); ++v) out[v] = lb.tx_power_w * gains.own(b, v);
  return out;
}

int max_rssi_action(int b, const LinkGains& gains, const LinkBudget& lb) {
  require(b >= 0 && b < gains.rsus(), ErrorKind::kInvalidArgument, "max_rssi: RSU out of range");
  return argmax_first(rssi(b, gains, lb));
}

PfState::PfState(int vehicles, int window_slots, double floor)
    : window(window_slots), floor_bps(floor), average(vehicles, floor) {
  require(window_slots >= 1 && floor > 0.0, ErrorKind::kConfigInvalid,
          "pf: window must be >= 1 and floor > 0");
}

void PfState::update(std::span<const double> rates) {
  require(rates.size() == average.size(), ErrorKind::kShapeMismatch, "pf: rate vector length");
  const double beta = 1.0 / window;
  for (std::size_t v = 0; v < average.size(); ++v)
    average[v] = std::max(floor_bps, (1.0 - beta) * average[v] + beta * rates[v]);
}

std::vector<double> solo_rate_estimate(int b, const LinkGains& gains, const LinkBudget& lb,
                                       const SlotTiming& timing) {
  std::vector<double> out(gains.vehicles());
  const double scale = 1.0 - timing.overhead_fraction();
  for (int v = 0; v < gains.vehicles(); ++v)
    out[v] = scale * lb.bandwidth_hz * std::log2(1.0 + lb.tx_power_w * gains.own(b, v) / lb.noise_w);
  return out;
}

int proportional_fair_action(int b, const LinkGains& gains, const PfState& pf,
                             const LinkBudget& lb, const SlotTiming& timing) {
  require(static_cast<int>(pf.average.size()) == gains.vehicles(), ErrorKind::kShapeMismatch,
          "pf: state size mismatch");
  auto metric = solo_rate_estimate(b, gains, lb, timing);
  for (std::size_t v = 0; v < metric.size(); ++v) metric[v] /= pf.average[v];
  return argmax_first(metric);
}

namespace {

// Shared leaf evaluation: rates from accumulated signal/interference, then
// the global reward with the same arithmetic as the environment.
struct RewardEval {
  const RateHistory& hist;
  const ObjectiveConfig& obj;
  const LinkBudget& lb;
  double scale;
  int rsus;

  double operator()(const double* signal, const double* interference) const {
    const int V = hist.vehicles();
    const double t = static_cast<double>(hist.slots + 1);
    double mean_rate = 0.0;
    int violations = 0;
    for (int v = 0; v < V; ++v) {
      const double x = signal[v] == 0.0 ? 0.0 : signal[v] / (lb.noise_w + interference[v]);
      const double r = scale * lb.bandwidth_hz * std::log2(1.0 + x);
      const double avg = (hist.cumulative[v] + r) / t;
      mean_rate += avg;
      violations += avg < obj.rate_threshold_bps ? 1 : 0;
    }
    mean_rate /= V * kBitsPerGbit;
    const double local = mean_rate - obj.tradeoff_lambda * violations;
    double global = 0.0;
    for (int b = 0; b < rsus; ++b) global += local;
    return global;
  }
};

}  // namespace

double instantaneous_reward(std::span<const int> joint, const LinkGains& gains,
                            const RateHistory& hist, const ObjectiveConfig& obj,
                            const LinkBudget& lb, const SlotTiming& timing) {
  const int B = gains.rsus(), V = gains.vehicles();
  require(static_cast<int>(joint.size()) == B && hist.vehicles() == V, ErrorKind::kShapeMismatch,
          "reward: dimension mismatch");
  std::vector<double> signal(V, 0.0), interference(V, 0.0);
  for (int b = 0; b < B; ++b) {
    const int s = joint[b];
    require(s >= 0 && s < V, ErrorKind::kInvalidAction, "reward: vehicle out of range");
    for (int r = 0; r < V; ++r) {
      const double p = lb.tx_power_w * gains(b, s, r);
      (r == s ? signal : interference)[r] += p;
    }
  }
  RewardEval eval{hist, obj, lb, 1.0 - timing.overhead_fraction(), B};
  return eval(signal.data(), interference.data());
}

MyopicResult myopic_optimal_joint(const LinkGains& gains, const RateHistory& hist,
                                  const ObjectiveConfig& obj, const LinkBudget& lb,
                                  const SlotTiming& timing, double budget, bool allow_fallback) {
  const int B = gains.rsus(), V = gains.vehicles();
  require(hist.vehicles() == V, ErrorKind::kShapeMismatch, "myopic: history size mismatch");
  const double space = std::pow(static_cast<double>(V), B);
  RewardEval eval{hist, obj, lb, 1.0 - timing.overhead_fraction(), B};
  MyopicResult out;

  if (space > budget) {
    if (!allow_fallback)
      fail(ErrorKind::kBudgetExceeded, "myopic: V^B = " + std::to_string(space) + " exceeds budget");
    // Sequential greedy: RSU b picks its best vehicle given RSUs 0..b-1.
    out.fallback = true;
    out.action.assign(B, 0);
    std::vector<double> sig(V, 0.0), itf(V, 0.0);
    for (int b = 0; b < B; ++b) {
      double best = -INFINITY;
      int best_s = 0;
      for (int s = 0; s < V; ++s) {
        auto ts = sig, ti = itf;
        for (int r = 0; r < V; ++r) (r == s ? ts : ti)[r] += lb.tx_power_w * gains(b, s, r);
        const double val = eval(ts.data(), ti.data());
        ++out.evaluated;
        if (val > best) {
          best = val;
          best_s = s;
        }
      }
      out.action[b] = best_s;
      for (int r = 0; r < V; ++r) (r == best_s ? sig : itf)[r] += lb.tx_power_w * gains(b, best_s, r);
    }
    out.reward = eval(sig.data(), itf.data());
    return out;
  }

  // Depth-first enumeration; level b holds the accumulated powers of RSUs < b.
  std::vector<double> sig(static_cast<std::size_t>(B + 1) * V, 0.0);
  std::vector<double> itf(sig.size(), 0.0);
  std::vector<int> choice(B, -1);
  out.action.assign(B, 0);
  double best = -INFINITY;
  int depth = 0;
  while (depth >= 0) {
    if (++choice[depth] >= V) {
      choice[depth] = -1;
      --depth;
      continue;
    }
    const int s = choice[depth];
    const double* ps = &sig[static_cast<std::size_t>(depth) * V];
    const double* pi = &itf[static_cast<std::size_t>(depth) * V];
    double* ns = &sig[static_cast<std::size_t>(depth + 1) * V];
    double* ni = &itf[static_cast<std::size_t>(depth + 1) * V];
    for (int r = 0; r < V; ++r) {
      const double p = lb.tx_power_w * gains(depth, s, r);
      ns[r] = ps[r];
      ni[r] = pi[r];
      if (r == s)
        ns[r] += p;
      else
        ni[r] += p;
    }
    if (depth + 1 < B) {
      ++depth;
      continue;
    }
    const double val = eval(ns, ni);
    ++out.evaluated;
    if (val > best) {
      best = val;
      std::copy(choice.begin(), choice.end(), out.action.begin());
    }
  }
  out.reward = best;
  return out;
}

Snapshot make_snapshot(const LinkGains& gains, const RateHistory& hist, const ObjectiveConfig& obj,
                       const LinkBudget& lb, const SlotTiming& timing) {
  Snapshot s;
  s.rsus = gains.rsus();
  s.vehicles = gains.vehicles();
  for (int b = 0; b < s.rsus; ++b)
    for (int a = 0; a < s.vehicles; ++a)
      for (int r = 0; r < s.vehicles; ++r) s.gains.push_back(gains(b, a, r));
  s.cumulative = hist.cumulative;
  s.slots = hist.slots;
  s.lambda = obj.tradeoff_lambda;
  s.threshold_bps = obj.rate_threshold_bps;
  s.tx_power_w = lb.tx_power_w;
  s.noise_w = lb.noise_w;
  s.bandwidth_hz = lb.bandwidth_hz;
  s.overhead = timing.overhead_fraction();
  return s;
}

OracleResult brute_force_oracle(const Snapshot& s) {
  const int B = s.rsus, V = s.vehicles;
  require(B >= 1 && V >= 1, ErrorKind::kInvalidArgument, "oracle: empty snapshot");
  long total = 1;
  for (int b = 0; b < B; ++b) {
    total *= V;
    require(total <= 100000, ErrorKind::kBudgetExceeded, "oracle: V^B exceeds 1e5");
  }
  OracleResult best;
  best.reward = -INFINITY;
  std::vector<int> a(B);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int b = B - 1; b >= 0; --b) {
      a[b] = static_cast<int>(rem % V);
      rem /= V;
    }
    double mean_rate = 0.0;
    int violations = 0;
    for (int v = 0; v < V; ++v) {
      double signal = 0.0, interference = 0.0;
      for (int b = 0; b < B; ++b) {
        const double p = s.tx_power_w * s.gains[(static_cast<std::size_t>(b) * V + a[b]) * V + v];
        if (a[b] == v)
          signal += p;
        else
          interference += p;
      }
      const double sinr_v = signal == 0.0 ? 0.0 : signal / (s.noise_w + interference);
      const double rate = (1.0 - s.overhead) * s.bandwidth_hz * std::log2(1.0 + sinr_v);
      const double avg = (s.cumulative[v] + rate) / static_cast<double>(s.slots + 1);
      mean_rate += avg;
      if (avg < s.threshold_bps) ++violations;
    }
    mean_rate /= V * 1e9;
    const double local = mean_rate - s.lambda * violations;
    double reward = 0.0;
    for (int b = 0; b < B; ++b) reward += local;
    if (reward > best.reward) {
      best.reward = reward;
      best.action = a;
    }
  }
  return best;
}

BaselinePolicy::BaselinePolicy(BaselineKind kind, int rsus, int vehicles, std::uint64_t seed,
                               int pf_window)
    : kind_(kind),
      rsus_(rsus),
      vehicles_(vehicles),
      rng_(make_rng(derive_seed(seed, Stream::kActionSampling))),
      pf_(vehicles, pf_window) {}

JointAction BaselinePolicy::act(const Environment& env) {
  const auto& g = env.current_gains();
  const auto& sc = env.scenario();
  JointAction joint(rsus_);
  switch (kind_) {
    case BaselineKind::kMaxRssi:
      for (int b = 0; b < rsus_; ++b) joint[b] = max_rssi_action(b, g, sc.budget);
      break;
    case BaselineKind::kProportionalFair:
      for (int b = 0; b < rsus_; ++b)
        joint[b] = proportional_fair_action(b, g, pf_, sc.budget, env.timing());
      break;
    case BaselineKind::kMyopic: {
      auto res = myopic_optimal_joint(g, env.history(), env.config().objective, sc.budget,
                                      env.timing());
      if (res.fallback) ++fallbacks_;
      joint = std::move(res.action);
      break;
    }
    case BaselineKind::kRandom: {
      std::uniform_int_distribution<int> u(0, vehicles_ - 1);
      for (int b = 0; b < rsus_; ++b) joint[b] = u(rng_);
      break;
    }
    case BaselineKind::kFixed:
      for (int b = 0; b < rsus_; ++b) joint[b] = b % vehicles_;
      break;
  }
  return joint;
}

void BaselinePolicy::observe(const StepResult& r) {
  if (kind_ == BaselineKind::kProportionalFair) pf_.update(r.rates);
}

}  // namespace v2x
