#pragma once

#include <algorithm>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <random>
#include <stdexcept>
#include <vector>

#include "epsnet/common.hpp"
#include "epsnet/reward_model.hpp"

namespace epsnet {

// Inner argmax solver: exhaustive search or per-action Gaussian-posterior
// Thompson sampling run for a fixed number of rounds.
struct OracleSpec {
  enum class Kind { Exact, ThompsonApprox };

  Kind kind = Kind::Exact;
  int rounds = 300;  // ThompsonApprox

  static OracleSpec exact() { return {}; }
  static OracleSpec thompson(int rounds) {
    if (rounds < 1) throw std::invalid_argument("thompson rounds must be >= 1");
    OracleSpec s;
    s.kind = Kind::ThompsonApprox;
    s.rounds = rounds;
    return s;
  }
};

// Ties broken by lowest index everywhere, for reproducibility.
inline int argmax_lowest_index(const Eigen::VectorXd& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i)
    if (values(i) > values(best)) best = i;
  return best;
}

inline int exact_argmax(const RewardModel& model, const BanditInstance& inst) {
  if (model.num_actions() < 1) throw std::invalid_argument("empty action space");
  return argmax_lowest_index(model.reward_vector(inst));
}

// TS against noiseless observations of mu_a(theta): prior N(0,1), assumed
// unit observation variance, so after p pulls the posterior is
// N(sum_obs/(1+p), 1/(1+p)). Returns the arm picked in the final round.
inline int thompson_argmax(const RewardModel& model, const BanditInstance& inst,
                           const OracleSpec& spec, Rng& rng) {
  if (spec.kind != OracleSpec::Kind::ThompsonApprox)
    throw std::invalid_argument("thompson_argmax needs a ThompsonApprox spec");
  const int n = model.num_actions();
  const Eigen::VectorXd mu = model.reward_vector(inst);
  std::vector<double> obs_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<long> pulls(static_cast<std::size_t>(n), 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  int chosen = 0;
  Eigen::VectorXd sample(n);
  for (int round = 0; round < spec.rounds; ++round) {
    for (int a = 0; a < n; ++a) {
      const double denom = 1.0 + static_cast<double>(pulls[a]);
      sample(a) = obs_sum[a] / denom + normal(rng) / std::sqrt(denom);
    }
    chosen = argmax_lowest_index(sample);
    obs_sum[chosen] += mu(chosen);
    ++pulls[chosen];
  }
  return chosen;
}

struct TraceEntry {
  long iteration = 0;
  std::uint64_t seed = 0;
  int index = 0;
};

struct SelectionResult {
  std::vector<int> chosen;  // distinct indices in first-seen order
  std::vector<TraceEntry> trace;
  long iterations_used = 0;
  bool complete = true;  // false when DistinctCount hit max_iterations

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["chosen"] = chosen;
    j["iterations_used"] = iterations_used;
    j["complete"] = complete;
    auto& t = j["trace"] = nlohmann::json::array();
    for (const auto& e : trace)
      t.push_back({{"iter", e.iteration}, {"seed", e.seed}, {"index", e.index}});
    return j;
  }
};

// Stopping rule: a fixed K-iteration loop, or loop until K distinct actions
// are collected (capped by max_iterations).
struct StopRule {
  enum class Mode { Iterations, DistinctCount };

  Mode mode = Mode::Iterations;
  int k = 1;
  long max_iterations = 0;  // DistinctCount; 0 means 1000*k

  static StopRule iterations(int k) {
    if (k < 1) throw std::invalid_argument("K must be >= 1");
    StopRule r;
    r.mode = Mode::Iterations;
    r.k = k;
    return r;
  }
  static StopRule distinct_count(int k, long max_iterations = 0) {
    if (k < 1) throw std::invalid_argument("K must be >= 1");
    StopRule r;
    r.mode = Mode::DistinctCount;
    r.k = k;
    r.max_iterations = max_iterations > 0 ? max_iterations : 1000L * k;
    return r;
  }
};

// The Epsilon Net Algorithm: repeatedly sample an instance from dist, solve
// it with the oracle, and collect the returned action. Iteration i draws its
// instance and oracle randomness from a stream seeded with base_seed + i,
// recorded in the trace.
inline SelectionResult epsilon_net_select(const RewardModel& model,
                                          const InstanceDistribution& dist,
                                          const OracleSpec& oracle,
                                          const StopRule& stop,
                                          std::uint64_t base_seed) {
  if (dist.dim() != model.instance_dim())
    throw std::invalid_argument("instance distribution dimension mismatch");
  SelectionResult result;
  std::vector<char> seen(static_cast<std::size_t>(model.num_actions()), 0);
  const long limit = stop.mode == StopRule::Mode::Iterations
                         ? stop.k
                         : stop.max_iterations;
  for (long iter = 0; iter < limit; ++iter) {
    const std::uint64_t seed = repetition_seed(base_seed, static_cast<std::uint64_t>(iter));
    Rng rng = make_rng(seed);
    const BanditInstance inst = dist.sample(rng);
    const int idx = oracle.kind == OracleSpec::Kind::Exact
                        ? exact_argmax(model, inst)
                        : thompson_argmax(model, inst, oracle, rng);
    result.trace.push_back({iter, seed, idx});
    if (!seen[static_cast<std::size_t>(idx)]) {
      seen[static_cast<std::size_t>(idx)] = 1;
      result.chosen.push_back(idx);
    }
    result.iterations_used = iter + 1;
    if (stop.mode == StopRule::Mode::DistinctCount &&
        static_cast<int>(result.chosen.size()) >= stop.k)
      return result;
  }
  if (stop.mode == StopRule::Mode::DistinctCount &&
      static_cast<int>(result.chosen.size()) < stop.k)
    result.complete = false;
  return result;
}

}  // namespace epsnet
