#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsnet/common.hpp"
#include "epsnet/geometry.hpp"
#include "epsnet/policies.hpp"
#include "epsnet/reward_model.hpp"
#include "epsnet/select.hpp"

namespace epsnet {

// Monte-Carlo estimate of E[max_{full} mu - max_{subset} mu].
struct RegretEstimate {
  double mean = 0.0;
  double stddev = 0.0;
  double standard_error = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
};

// Per-sample regret; non-negative by construction since the subset max is
// dominated by the full max.
inline double sample_regret(const RewardModel& model, const BanditInstance& inst,
                            const std::vector<int>& subset) {
  const Eigen::VectorXd mu = model.reward_vector(inst);
  double best_subset = -std::numeric_limits<double>::infinity();
  for (int a : subset) {
    model.space().check_index(a);
    best_subset = std::max(best_subset, mu(a));
  }
  return mu.maxCoeff() - best_subset;
}

inline RegretEstimate estimate_regret(const RewardModel& model,
                                      const InstanceDistribution& dist,
                                      const std::vector<int>& subset,
                                      long samples, std::uint64_t seed,
                                      int workers = -1) {
  if (subset.empty()) throw std::invalid_argument("empty subset");
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  const int shards = static_cast<int>(std::min<long>(16, samples));
  std::vector<RunningMoments> moments(static_cast<std::size_t>(shards));
  parallel_shards(
      shards,
      [&](int s) {
        Rng rng = make_rng(derive_stream(seed, static_cast<std::uint64_t>(s)));
        const long lo = samples * s / shards;
        const long hi = samples * (s + 1) / shards;
        auto& acc = moments[static_cast<std::size_t>(s)];
        for (long i = lo; i < hi; ++i) {
          const BanditInstance inst = dist.sample(rng);
          acc.add(sample_regret(model, inst, subset));
        }
      },
      workers);
  RunningMoments total;
  for (const auto& m : moments) total.merge(m);
  return {total.mean, total.sample_stddev(), total.standard_error(),
          total.count, seed};
}

// Exact expectations by enumerating a finite-support instance distribution.
inline double exact_expected_max(const RewardModel& model,
                                 const InstanceDistribution& dist,
                                 const std::vector<int>& subset) {
  if (!dist.is_discrete())
    throw std::invalid_argument("exact evaluation needs a discrete distribution");
  if (subset.empty()) throw std::invalid_argument("empty subset");
  double total = 0.0;
  for (std::size_t i = 0; i < dist.support().size(); ++i) {
    const BanditInstance inst{dist.support()[i]};
    double best = -std::numeric_limits<double>::infinity();
    for (int a : subset) best = std::max(best, model.expected_reward(a, inst));
    total += dist.weights()[i] * best;
  }
  return total;
}

inline double exact_expected_regret(const RewardModel& model,
                                    const InstanceDistribution& dist,
                                    const std::vector<int>& subset) {
  std::vector<int> all(static_cast<std::size_t>(model.num_actions()));
  std::iota(all.begin(), all.end(), 0);
  return exact_expected_max(model, dist, all) -
         exact_expected_max(model, dist, subset);
}

// ---------------------------------------------------------------------------
// Experiment runners. Each emits rows with the stable schema
// method,param,rep,regret_mean,regret_std,pulls,wallclock_ms and a replay
// manifest. Eval-instance counts are the full defaults divided by `scale`.

struct ResultRow {
  std::string method;
  double param = 0.0;
  int rep = 0;
  double regret_mean = 0.0;
  double regret_std = 0.0;
  long pulls = 0;
  double wallclock_ms = 0.0;
};

// wallclock_ms is populated only when timings are requested; the default 0
// keeps reruns byte-identical.
inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "method,param,rep,regret_mean,regret_std,pulls,wallclock_ms\n";
  char buf[40];
  for (const auto& r : rows) {
    os << r.method << ',';
    std::snprintf(buf, sizeof(buf), "%.12g", r.param);
    os << buf << ',' << r.rep << ',';
    std::snprintf(buf, sizeof(buf), "%.12g", r.regret_mean);
    os << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.12g", r.regret_std);
    os << buf << ',' << r.pulls << ',';
    std::snprintf(buf, sizeof(buf), "%.12g", r.wallclock_ms);
    os << buf << "\n";
  }
}

class ScopedTimer {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Super-arm comparison: Epsilon Net vs super-arm TS, UCB and Successive
// Halving on kernel-sampled outcome functions over a 1-D grid.
struct SuperArmExperiment {
  double grid_lo = 0.0;
  double grid_hi = 2.0;
  int grid_count = 15;
  std::vector<double> length_scales{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  int subset_size = 5;
  long bandit_rounds = 3000;
  long sh_budget = 0;  // 0: N ceil(log2 N)
  double ucb_scale = 1.0;
  int reps = 50;
  long eval_samples = 100000;
  int scale = 1;
  std::uint64_t seed = 0;
  bool timings = false;
  int workers = -1;

  long scaled_eval() const { return std::max<long>(1, eval_samples / scale); }
};

inline std::vector<ResultRow> run_experiment_superarm(const SuperArmExperiment& cfg) {
  if (cfg.reps < 1 || cfg.scale < 1) throw std::invalid_argument("bad config");
  std::vector<ResultRow> rows;
  const ActionSpace grid = make_grid_space(cfg.grid_lo, cfg.grid_hi, cfg.grid_count);
  for (double l : cfg.length_scales) {
    const RewardModel model = build_kernel_model(grid, KernelSpec::rbf(l));
    const InstanceDistribution dist = model.default_instance_distribution();
    const auto arms = enumerate_super_arms(cfg.grid_count, cfg.subset_size);
    const long budget = cfg.sh_budget > 0
                            ? cfg.sh_budget
                            : default_halving_budget(static_cast<int>(arms.size()));
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const std::uint64_t rep_seed = repetition_seed(cfg.seed, static_cast<std::uint64_t>(rep));
      // one shared eval-instance stream per rep so method comparisons pair
      auto eval = [&](const std::vector<int>& subset) {
        return estimate_regret(model, dist, subset, cfg.scaled_eval(),
                               derive_stream(rep_seed, 100), cfg.workers);
      };
      {
        ScopedTimer t;
        const SelectionResult sel = epsilon_net_select(
            model, dist, OracleSpec::exact(),
            StopRule::distinct_count(cfg.subset_size), derive_stream(rep_seed, 0));
        const RegretEstimate re = eval(sel.chosen);
        rows.push_back({"EpsilonNet", l, rep, re.mean, re.stddev,
                        sel.iterations_used, cfg.timings ? t.elapsed_ms() : 0.0});
      }
      {
        ScopedTimer t;
        Rng rng = make_rng(derive_stream(rep_seed, 1));
        const auto ts = run_superarm_ts(model, arms, dist, cfg.bandit_rounds, rng);
        const RegretEstimate re =
            eval(arms[static_cast<std::size_t>(ts.best_arm)].members);
        rows.push_back({"TS", l, rep, re.mean, re.stddev, ts.total_pulls,
                        cfg.timings ? t.elapsed_ms() : 0.0});
      }
      {
        ScopedTimer t;
        Rng rng = make_rng(derive_stream(rep_seed, 2));
        const auto ucb = run_superarm_ucb(model, arms, dist, cfg.bandit_rounds,
                                          cfg.ucb_scale, rng);
        const RegretEstimate re =
            eval(arms[static_cast<std::size_t>(ucb.best_arm)].members);
        rows.push_back({"UCB", l, rep, re.mean, re.stddev, ucb.total_pulls,
                        cfg.timings ? t.elapsed_ms() : 0.0});
      }
      {
        ScopedTimer t;
        Rng rng = make_rng(derive_stream(rep_seed, 3));
        const auto sh = run_successive_halving(model, arms, dist, budget, rng);
        const RegretEstimate re =
            eval(arms[static_cast<std::size_t>(sh.best_arm)].members);
        rows.push_back({"SH", l, rep, re.mean, re.stddev, sh.total_pulls,
                        cfg.timings ? t.elapsed_ms() : 0.0});
      }
    }
  }
  return rows;
}

// Oracle-free comparison: EpsilonNet+TS vs CTS and CUCB in the semi-bandit
// setting. Pull accounting: every budget-consuming oracle call costs
// ts_rounds base-arm pulls; when duplicates_consume_budget is false only
// calls that produced a new distinct action are charged.
struct CombinatorialExperiment {
  double grid_lo = -5.0;
  double grid_hi = 5.0;
  int grid_count = 500;
  std::vector<double> length_scales{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  int subset_size = 10;
  long ts_rounds = 300;
  long semibandit_rounds = 3000;
  double ucb_scale = 1.0;
  bool duplicates_consume_budget = false;
  int reps = 30;
  long eval_samples = 100000;
  int scale = 1;
  std::uint64_t seed = 0;
  bool timings = false;
  int workers = -1;

  long scaled_eval() const { return std::max<long>(1, eval_samples / scale); }
};

inline std::vector<ResultRow> run_experiment_combinatorial(
    const CombinatorialExperiment& cfg) {
  if (cfg.reps < 1 || cfg.scale < 1) throw std::invalid_argument("bad config");
  std::vector<ResultRow> rows;
  const ActionSpace grid = make_grid_space(cfg.grid_lo, cfg.grid_hi, cfg.grid_count);
  for (double l : cfg.length_scales) {
    const RewardModel model = build_kernel_model(grid, KernelSpec::rbf(l));
    const InstanceDistribution dist = model.default_instance_distribution();
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const std::uint64_t rep_seed = repetition_seed(cfg.seed, static_cast<std::uint64_t>(rep));
      // one shared eval-instance stream per rep so method comparisons pair
      auto eval = [&](const std::vector<int>& subset) {
        return estimate_regret(model, dist, subset, cfg.scaled_eval(),
                               derive_stream(rep_seed, 100), cfg.workers);
      };
      {
        ScopedTimer t;
        const SelectionResult sel = epsilon_net_select(
            model, dist, OracleSpec::thompson(static_cast<int>(cfg.ts_rounds)),
            StopRule::distinct_count(cfg.subset_size), derive_stream(rep_seed, 0));
        const long charged_calls = cfg.duplicates_consume_budget
                                       ? sel.iterations_used
                                       : static_cast<long>(sel.chosen.size());
        const RegretEstimate re = eval(sel.chosen);
        rows.push_back({"EpsilonNetTS", l, rep, re.mean, re.stddev,
                        cfg.ts_rounds * charged_calls,
                        cfg.timings ? t.elapsed_ms() : 0.0});
      }
      {
        ScopedTimer t;
        Rng rng = make_rng(derive_stream(rep_seed, 1));
        const auto cts = run_cts(model, dist, cfg.subset_size,
                                 cfg.semibandit_rounds, rng);
        const RegretEstimate re = eval(cts.final_subset);
        rows.push_back({"CTS", l, rep, re.mean, re.stddev, cts.total_base_pulls,
                        cfg.timings ? t.elapsed_ms() : 0.0});
      }
      {
        ScopedTimer t;
        Rng rng = make_rng(derive_stream(rep_seed, 2));
        const auto cucb = run_cucb(model, dist, cfg.subset_size,
                                   cfg.semibandit_rounds, cfg.ucb_scale, rng);
        const RegretEstimate re = eval(cucb.final_subset);
        rows.push_back({"CUCB", l, rep, re.mean, re.stddev,
                        cucb.total_base_pulls, cfg.timings ? t.elapsed_ms() : 0.0});
      }
    }
  }
  return rows;
}

// Sphere-cluster spread sweep: the effect of cluster diameter on the regret
// of the algorithm's K-iteration output.
struct SphereExperiment {
  std::vector<double> spreads{0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  int num_centers = 5;
  int points_per = 200;
  int dim = 3;
  int iterations = 10;  // Algorithm-1 draws per rep
  int reps = 30;
  long eval_samples = 10000;
  int scale = 1;
  std::uint64_t seed = 0;
  bool timings = false;
  int workers = -1;

  long scaled_eval() const { return std::max<long>(1, eval_samples / scale); }
};

inline std::vector<ResultRow> run_experiment_sphere(const SphereExperiment& cfg) {
  if (cfg.reps < 1 || cfg.scale < 1) throw std::invalid_argument("bad config");
  std::vector<ResultRow> rows;
  for (double spread : cfg.spreads) {
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const std::uint64_t rep_seed = repetition_seed(cfg.seed, static_cast<std::uint64_t>(rep));
      ScopedTimer t;
      const SphereClusterSpace sphere = make_sphere_clusters(
          derive_stream(rep_seed, 7), spread, cfg.num_centers, cfg.points_per,
          cfg.dim);
      const RewardModel model = RewardModel::linear(sphere.space);
      const InstanceDistribution dist = model.default_instance_distribution();
      const SelectionResult sel = epsilon_net_select(
          model, dist, OracleSpec::exact(), StopRule::iterations(cfg.iterations),
          derive_stream(rep_seed, 0));
      const RegretEstimate re =
          estimate_regret(model, dist, sel.chosen, cfg.scaled_eval(),
                          derive_stream(rep_seed, 100), cfg.workers);
      rows.push_back({"EpsilonNet", spread, rep, re.mean, re.stddev,
                      sel.iterations_used, cfg.timings ? t.elapsed_ms() : 0.0});
    }
  }
  return rows;
}

// Gibbs-kernel selection histogram over a fixed grid.
struct GibbsExperiment {
  double grid_lo = 0.0;
  double grid_hi = 2.0;
  int grid_count = 1000;
  int iterations = 5000;
  int runs = 10;
  int smooth_window = 10;
  std::uint64_t seed = 0;
  int workers = -1;
};

struct GibbsResult {
  Eigen::VectorXd grid;                 // action coordinates
  std::vector<std::vector<long>> counts;  // per run, per action
  std::vector<long> total_counts;         // summed over runs
};

inline GibbsResult run_experiment_gibbs(const GibbsExperiment& cfg) {
  if (cfg.runs < 1 || cfg.iterations < 1) throw std::invalid_argument("bad config");
  const ActionSpace grid = make_grid_space(cfg.grid_lo, cfg.grid_hi, cfg.grid_count);
  const RewardModel model = build_kernel_model(grid, KernelSpec::gibbs());
  const InstanceDistribution dist = model.default_instance_distribution();
  GibbsResult out;
  out.grid = grid.actions.col(0);
  out.counts.assign(static_cast<std::size_t>(cfg.runs),
                    std::vector<long>(static_cast<std::size_t>(cfg.grid_count), 0));
  parallel_shards(
      cfg.runs,
      [&](int run) {
        const SelectionResult sel = epsilon_net_select(
            model, dist, OracleSpec::exact(), StopRule::iterations(cfg.iterations),
            derive_stream(repetition_seed(cfg.seed, static_cast<std::uint64_t>(run)), 0));
        for (const auto& e : sel.trace)
          ++out.counts[static_cast<std::size_t>(run)][static_cast<std::size_t>(e.index)];
      },
      cfg.workers);
  out.total_counts.assign(static_cast<std::size_t>(cfg.grid_count), 0);
  for (const auto& run : out.counts)
    for (std::size_t i = 0; i < run.size(); ++i)
      out.total_counts[i] += run[i];
  return out;
}

// Centered moving average, truncated at the boundaries.
inline std::vector<double> smoothed_histogram(const std::vector<long>& counts,
                                              int window) {
  const int n = static_cast<int>(counts.size());
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - window);
    const int hi = std::min(n - 1, i + window);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += static_cast<double>(counts[static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

inline void write_gibbs_csv(std::ostream& os, const GibbsResult& res) {
  os << "idx,x,count,frequency\n";
  long total = 0;
  for (long c : res.total_counts) total += c;
  char buf[40];
  for (std::size_t i = 0; i < res.total_counts.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g", res.grid(static_cast<int>(i)));
    os << i << ',' << buf << ',' << res.total_counts[i] << ',';
    std::snprintf(buf, sizeof(buf), "%.12g",
                  static_cast<double>(res.total_counts[i]) / static_cast<double>(total));
    os << buf << "\n";
  }
}

}  // namespace epsnet
