#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsnet/common.hpp"
#include "epsnet/reward_model.hpp"
#include "epsnet/select.hpp"

namespace epsnet {

// Gaussian posterior with prior N(0,1) and assumed unit observation
// variance: mean = sum_obs/(1+pulls), variance = 1/(1+pulls).
struct GaussianArmPosterior {
  double obs_sum = 0.0;
  long pulls = 0;

  double mean() const { return obs_sum / (1.0 + static_cast<double>(pulls)); }
  double variance() const { return 1.0 / (1.0 + static_cast<double>(pulls)); }
  void observe(double value) {
    obs_sum += value;
    ++pulls;
  }
};

// K-subset of base actions treated as a single arm; payoff is the max
// member reward.
struct SuperArm {
  std::vector<int> members;  // sorted, distinct
};

inline long long binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long c = 1;
  for (int i = 1; i <= k; ++i) {
    if (c > (1LL << 52))  // already far past any sensible cap
      return std::numeric_limits<long long>::max();
    c = c * (n - k + i) / i;
  }
  return c;
}

// All C(N,K) subsets in lexicographic order.
inline std::vector<SuperArm> enumerate_super_arms(int n, int k,
                                                  long long cap = 1000000) {
  if (k < 1 || k > n) throw std::invalid_argument("need 1 <= K <= N");
  const long long count = binomial_coefficient(n, k);
  if (count > cap)
    throw std::invalid_argument("C(N,K) = " + std::to_string(count) +
                                " exceeds cap " + std::to_string(cap));
  std::vector<SuperArm> arms;
  arms.reserve(static_cast<std::size_t>(count));
  std::vector<int> cur(static_cast<std::size_t>(k));
  std::iota(cur.begin(), cur.end(), 0);
  for (;;) {
    arms.push_back({cur});
    int i = k - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return arms;
}

inline double superarm_payoff(const RewardModel& model, const BanditInstance& inst,
                              const SuperArm& arm) {
  if (arm.members.empty()) throw std::invalid_argument("empty super-arm");
  double best = -std::numeric_limits<double>::infinity();
  for (int a : arm.members) best = std::max(best, model.expected_reward(a, inst));
  return best;
}

struct PolicyTraceRow {
  long round = 0;
  std::vector<int> selection;  // arm id (size 1) or base-arm subset
  double payoff = 0.0;
};

// CSV: round,arm_or_subset,payoff with subsets encoded as i|j|k.
inline void write_policy_trace_csv(std::ostream& os,
                                   const std::vector<PolicyTraceRow>& trace) {
  os << "round,arm_or_subset,payoff\n";
  char buf[40];
  for (const auto& row : trace) {
    os << row.round << ',';
    for (std::size_t i = 0; i < row.selection.size(); ++i) {
      if (i) os << '|';
      os << row.selection[i];
    }
    std::snprintf(buf, sizeof(buf), "%.12g", row.payoff);
    os << ',' << buf << "\n";
  }
}

struct SuperArmRunResult {
  int best_arm = 0;
  std::vector<GaussianArmPosterior> posteriors;
  long total_pulls = 0;
  std::vector<PolicyTraceRow> trace;
};

inline int best_posterior_mean_arm(const std::vector<GaussianArmPosterior>& post) {
  int best = 0;
  for (std::size_t i = 1; i < post.size(); ++i)
    if (post[i].mean() > post[static_cast<std::size_t>(best)].mean())
      best = static_cast<int>(i);
  return best;
}

// Super-arm Thompson sampling under bandit feedback: each round draws a
// fresh instance, samples every arm's posterior, pulls the argmax arm and
// observes its max-member payoff.
inline SuperArmRunResult run_superarm_ts(const RewardModel& model,
                                         const std::vector<SuperArm>& arms,
                                         const InstanceDistribution& dist,
                                         long rounds, Rng& rng,
                                         bool record_trace = false) {
  if (arms.empty()) throw std::invalid_argument("no super-arms");
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  SuperArmRunResult res;
  res.posteriors.assign(arms.size(), {});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (long t = 1; t <= rounds; ++t) {
    const BanditInstance inst = dist.sample(rng);
    int chosen = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const auto& p = res.posteriors[i];
      const double s = p.mean() + std::sqrt(p.variance()) * normal(rng);
      if (s > best) {
        best = s;
        chosen = static_cast<int>(i);
      }
    }
    const double payoff =
        superarm_payoff(model, inst, arms[static_cast<std::size_t>(chosen)]);
    res.posteriors[static_cast<std::size_t>(chosen)].observe(payoff);
    ++res.total_pulls;
    if (record_trace) res.trace.push_back({t, {chosen}, payoff});
  }
  res.best_arm = best_posterior_mean_arm(res.posteriors);
  return res;
}

// UCB over super-arms; untried arms carry an infinite index so every arm is
// tried before any second pull. Index: mean + scale * sqrt(2 ln t / (1+pulls)).
inline SuperArmRunResult run_superarm_ucb(const RewardModel& model,
                                          const std::vector<SuperArm>& arms,
                                          const InstanceDistribution& dist,
                                          long rounds, double exploration_scale,
                                          Rng& rng, bool record_trace = false) {
  if (arms.empty()) throw std::invalid_argument("no super-arms");
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  SuperArmRunResult res;
  res.posteriors.assign(arms.size(), {});
  for (long t = 1; t <= rounds; ++t) {
    const BanditInstance inst = dist.sample(rng);
    int chosen = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const auto& p = res.posteriors[i];
      if (p.pulls == 0) {
        chosen = static_cast<int>(i);
        break;
      }
      const double idx =
          p.mean() + exploration_scale *
                         std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                                   (1.0 + static_cast<double>(p.pulls)));
      if (idx > best) {
        best = idx;
        chosen = static_cast<int>(i);
      }
    }
    const double payoff =
        superarm_payoff(model, inst, arms[static_cast<std::size_t>(chosen)]);
    res.posteriors[static_cast<std::size_t>(chosen)].observe(payoff);
    ++res.total_pulls;
    if (record_trace) res.trace.push_back({t, {chosen}, payoff});
  }
  res.best_arm = best_posterior_mean_arm(res.posteriors);
  return res;
}

struct HalvingRound {
  int survivors = 0;
  long pulls_per_arm = 0;
  long cumulative_pulls = 0;
  int current_best = 0;
};

struct HalvingResult {
  int best_arm = 0;
  bool complete = true;
  long total_pulls = 0;
  std::vector<HalvingRound> rounds;
};

inline long default_halving_budget(int num_arms) {
  const long ceil_log2 =
      static_cast<long>(std::ceil(std::log2(std::max(2, num_arms))));
  return static_cast<long>(num_arms) * ceil_log2;
}

// Successive Halving with a fixed pull budget: each round every survivor
// gets floor(budget / (|S| * ceil(log2 N))) fresh-instance pulls, then the
// top half by that round's empirical mean payoff survives.
inline HalvingResult run_successive_halving(const RewardModel& model,
                                            const std::vector<SuperArm>& arms,
                                            const InstanceDistribution& dist,
                                            long budget, Rng& rng) {
  if (arms.empty()) throw std::invalid_argument("no super-arms");
  if (budget < static_cast<long>(arms.size()))
    throw std::invalid_argument("budget must cover at least one pull per arm");
  const long ceil_log2 =
      static_cast<long>(std::ceil(std::log2(std::max(2, static_cast<int>(arms.size())))));
  HalvingResult res;
  std::vector<int> survivors(arms.size());
  std::iota(survivors.begin(), survivors.end(), 0);
  long spent = 0;
  int best_so_far = 0;
  while (survivors.size() > 1) {
    const long per_arm =
        budget / (static_cast<long>(survivors.size()) * ceil_log2);
    if (per_arm < 1 || spent + per_arm * static_cast<long>(survivors.size()) > budget) {
      res.complete = false;
      break;
    }
    std::vector<double> means(survivors.size(), 0.0);
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      double sum = 0.0;
      for (long p = 0; p < per_arm; ++p) {
        const BanditInstance inst = dist.sample(rng);
        sum += superarm_payoff(model, inst,
                               arms[static_cast<std::size_t>(survivors[i])]);
      }
      means[i] = sum / static_cast<double>(per_arm);
      spent += per_arm;
    }
    std::vector<std::size_t> order(survivors.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (means[a] != means[b]) return means[a] > means[b];
      return survivors[a] < survivors[b];
    });
    best_so_far = survivors[order[0]];
    const std::size_t keep = (survivors.size() + 1) / 2;
    std::vector<int> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i)
      next.push_back(survivors[order[i]]);
    std::sort(next.begin(), next.end());
    survivors.swap(next);
    res.rounds.push_back({static_cast<int>(survivors.size()), per_arm, spent,
                          best_so_far});
  }
  res.best_arm = survivors.size() == 1 ? survivors.front() : best_so_far;
  res.total_pulls = spent;
  return res;
}

struct SemiBanditResult {
  std::vector<int> final_subset;  // sorted
  std::vector<GaussianArmPosterior> posteriors;
  long total_base_pulls = 0;
  long initialization_rounds = 0;
  std::vector<PolicyTraceRow> trace;
};

// Lowest action index breaks ties; exact top-K for the monotone max payoff.
inline std::vector<int> top_k_indices(const Eigen::VectorXd& values, int k) {
  std::vector<int> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (values(a) != values(b)) return values(a) > values(b);
    return a < b;
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

// Combinatorial TS in the semi-bandit setting: sample every base arm's
// posterior, play the top-K sample, observe each selected arm's reward.
inline SemiBanditResult run_cts(const RewardModel& model,
                                const InstanceDistribution& dist, int k,
                                long rounds, Rng& rng,
                                bool record_trace = false) {
  const int n = model.num_actions();
  if (k < 1 || k > n) throw std::invalid_argument("need 1 <= K <= N");
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  SemiBanditResult res;
  res.posteriors.assign(static_cast<std::size_t>(n), {});
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd sample(n);
  for (long t = 1; t <= rounds; ++t) {
    const BanditInstance inst = dist.sample(rng);
    const Eigen::VectorXd mu = model.reward_vector(inst);
    for (int a = 0; a < n; ++a) {
      const auto& p = res.posteriors[static_cast<std::size_t>(a)];
      sample(a) = p.mean() + std::sqrt(p.variance()) * normal(rng);
    }
    const std::vector<int> subset = top_k_indices(sample, k);
    double best = -std::numeric_limits<double>::infinity();
    for (int a : subset) {
      res.posteriors[static_cast<std::size_t>(a)].observe(mu(a));
      best = std::max(best, mu(a));
      ++res.total_base_pulls;
    }
    if (record_trace) res.trace.push_back({t, subset, best});
    if (t == rounds) res.final_subset = subset;
  }
  return res;
}

// Combinatorial UCB: ceil(N/K) initialization rounds covering every base
// arm once (padded with the lowest indices), then top-K by UCB index.
inline SemiBanditResult run_cucb(const RewardModel& model,
                                 const InstanceDistribution& dist, int k,
                                 long rounds, double exploration_scale,
                                 Rng& rng, bool record_trace = false) {
  const int n = model.num_actions();
  if (k < 1 || k > n) throw std::invalid_argument("need 1 <= K <= N");
  const long init_rounds = (n + k - 1) / k;
  if (rounds < init_rounds)
    throw std::invalid_argument("rounds " + std::to_string(rounds) +
                                " cannot complete initialization (" +
                                std::to_string(init_rounds) + " rounds)");
  SemiBanditResult res;
  res.posteriors.assign(static_cast<std::size_t>(n), {});
  res.initialization_rounds = init_rounds;
  Eigen::VectorXd index(n);
  for (long t = 1; t <= rounds; ++t) {
    const BanditInstance inst = dist.sample(rng);
    const Eigen::VectorXd mu = model.reward_vector(inst);
    std::vector<int> subset;
    if (t <= init_rounds) {
      subset.reserve(static_cast<std::size_t>(k));
      const long base = (t - 1) * k;
      for (int j = 0; j < k; ++j) {
        const long a = base + j;
        subset.push_back(a < n ? static_cast<int>(a) : j);  // pad with first arms
      }
      std::sort(subset.begin(), subset.end());
      subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
      int pad = 0;
      while (static_cast<int>(subset.size()) < k) {
        if (std::find(subset.begin(), subset.end(), pad) == subset.end())
          subset.push_back(pad);
        ++pad;
      }
      std::sort(subset.begin(), subset.end());
    } else {
      for (int a = 0; a < n; ++a) {
        const auto& p = res.posteriors[static_cast<std::size_t>(a)];
        index(a) = p.pulls == 0
                       ? std::numeric_limits<double>::infinity()
                       : p.mean() + exploration_scale *
                                        std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                                                  (1.0 + static_cast<double>(p.pulls)));
      }
      subset = top_k_indices(index, k);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int a : subset) {
      res.posteriors[static_cast<std::size_t>(a)].observe(mu(a));
      best = std::max(best, mu(a));
      ++res.total_base_pulls;
    }
    if (record_trace) res.trace.push_back({t, subset, best});
    if (t == rounds) res.final_subset = subset;
  }
  return res;
}

}  // namespace epsnet
