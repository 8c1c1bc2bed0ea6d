#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "epsnet/evaluation.hpp"
#include "epsnet/fixtures.hpp"
#include "epsnet/geometry.hpp"

namespace epsnet {

struct CheckResult {
  std::string name;
  bool passed = false;
  nlohmann::json details;
};

// Lemma coverage: over many algorithm runs, the output intersects every
// cluster of mass > eps at rate at least 1 - (1/eps) exp(-K eps), checked
// at three binomial standard errors.
inline CheckResult verify_lemma1(double eps, int k, int runs, std::uint64_t seed,
                                 std::vector<double> q = {0.4, 0.3, 0.2, 0.1}) {
  const SyntheticQFixture fix = make_synthetic_q(q);
  const ImportanceEstimate importance = ImportanceEstimate::from_exact(q);
  long passes = 0;
  for (int r = 0; r < runs; ++r) {
    const SelectionResult sel =
        epsilon_net_select(fix.model, fix.dist, OracleSpec::exact(),
                           StopRule::iterations(k),
                           derive_stream(seed, static_cast<std::uint64_t>(r)));
    if (check_measure_net(sel.chosen, fix.partition, importance, eps)) ++passes;
  }
  const double rate = static_cast<double>(passes) / static_cast<double>(runs);
  const double bound = 1.0 - std::exp(-k * eps) / eps;
  const double se = std::sqrt(std::max(0.0, bound * (1.0 - bound) /
                                                 static_cast<double>(runs)));
  CheckResult res;
  res.name = "lemma1";
  res.passed = rate >= bound - 3.0 * se;
  res.details = {{"pass_rate", rate},
                 {"bound", bound},
                 {"threshold", bound - 3.0 * se},
                 {"runs", runs},
                 {"eps", eps},
                 {"k", k}};
  return res;
}

// Grid search over the m-simplex (step 0.01) for the maximum of
// sum q (1-q)^K; for m >= K+1 the maximum sits at the uniform vector.
inline double simplex_grid_max_miss_mass(int m, int k, int steps = 100) {
  std::vector<double> q(static_cast<std::size_t>(m), 0.0);
  double best = 0.0;
  // enumerate compositions of `steps` into m parts
  std::vector<int> part(static_cast<std::size_t>(m), 0);
  const double inv = 1.0 / static_cast<double>(steps);
  auto recurse = [&](auto&& self, int idx, int remaining) -> void {
    if (idx == m - 1) {
      part[static_cast<std::size_t>(idx)] = remaining;
      for (int i = 0; i < m; ++i)
        q[static_cast<std::size_t>(i)] = part[static_cast<std::size_t>(i)] * inv;
      best = std::max(best, expected_miss_mass(q, k));
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      part[static_cast<std::size_t>(idx)] = v;
      self(self, idx + 1, remaining - v);
    }
  };
  recurse(recurse, 0, steps);
  return best;
}

inline CheckResult verify_lemma_maxq(int m, int k) {
  const double uniform = expected_miss_mass(
      std::vector<double>(static_cast<std::size_t>(m), 1.0 / m), k);
  const double grid_max = simplex_grid_max_miss_mass(m, k);
  CheckResult res;
  res.name = "lemma_maxq";
  // uniform is the true maximizer for m >= K+1; the grid scan may only sit
  // slightly below it when 1/m is off the grid.
  res.passed = grid_max <= uniform + 1e-12 && grid_max >= uniform - 1e-3;
  res.details = {{"m", m},
                 {"k", k},
                 {"uniform_value", uniform},
                 {"grid_max", grid_max}};
  return res;
}

// Expected-max band for the i.i.d. orthonormal case:
// sqrt(ln n)/sqrt(pi ln 2) <= E max <= sqrt(2 ln n), at 3 MC standard errors.
inline CheckResult verify_iid_band(const std::vector<int>& ns, long samples,
                                   std::uint64_t seed, int workers = -1) {
  CheckResult res;
  res.name = "iid_band";
  res.passed = true;
  res.details = nlohmann::json::array();
  for (int n : ns) {
    const RewardModel model = RewardModel::linear(make_orthonormal_space(n));
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const WidthEstimate w =
        gaussian_width_mc(model, model.default_instance_distribution(), all, -1,
                          samples, derive_stream(seed, static_cast<std::uint64_t>(n)),
                          workers);
    const double lower = std::sqrt(std::log(static_cast<double>(n))) /
                         std::sqrt(std::acos(-1.0) * std::log(2.0));
    const double upper = std::sqrt(2.0 * std::log(static_cast<double>(n)));
    bool ok = w.mean >= lower - 3.0 * w.standard_error &&
              w.mean <= upper + 3.0 * w.standard_error;
    if (n == 2)
      ok = ok && std::abs(w.mean - 1.0 / std::sqrt(std::acos(-1.0))) < 0.01;
    res.passed = res.passed && ok;
    res.details.push_back({{"n", n},
                           {"estimate", w.mean},
                           {"se", w.standard_error},
                           {"lower", lower},
                           {"upper", upper},
                           {"ok", ok}});
  }
  return res;
}

// Width estimates on random low-dimensional clusters respect both the
// sigma sqrt(2 ln N) bound (sigma = max distance to the reference, always
// valid) and the (diam/2) sqrt(2 ln N) form that applies on round clusters.
inline CheckResult verify_widths(int num_clusters, long samples,
                                 std::uint64_t seed, int workers = -1) {
  CheckResult res;
  res.name = "widths";
  res.passed = true;
  int sigma_violations = 0;
  int diam_violations = 0;
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> dim_pick(1, 3);
  std::uniform_int_distribution<int> size_pick(4, 30);
  std::uniform_real_distribution<double> scale_pick(0.2, 2.0);
  for (int c = 0; c < num_clusters; ++c) {
    const int dim = dim_pick(rng);
    const int n = size_pick(rng);
    const double scale = scale_pick(rng);
    Eigen::MatrixXd pts(n, dim);
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < dim; ++d) pts(i, d) = scale * normal(rng);
    const RewardModel model = RewardModel::linear(make_explicit_space(pts));
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    // medoid reference: min over members of the max distance to the rest
    int ref = 0;
    double best_radius = std::numeric_limits<double>::infinity();
    double diameter = 0.0;
    for (int i = 0; i < n; ++i) {
      double radius = 0.0;
      for (int j = 0; j < n; ++j) {
        const double d = (pts.row(i) - pts.row(j)).norm();
        radius = std::max(radius, d);
        diameter = std::max(diameter, d);
      }
      if (radius < best_radius) {
        best_radius = radius;
        ref = i;
      }
    }
    const WidthEstimate w = gaussian_width_mc(
        model, model.default_instance_distribution(), all, ref, samples,
        derive_stream(seed, 1000 + static_cast<std::uint64_t>(c)), workers);
    const double ln_term = std::sqrt(2.0 * std::log(static_cast<double>(n)));
    if (w.mean > best_radius * ln_term + 3.0 * w.standard_error)
      ++sigma_violations;
    if (w.mean > 0.5 * diameter * ln_term + 3.0 * w.standard_error)
      ++diam_violations;
  }
  res.passed = sigma_violations == 0 && diam_violations == 0;
  res.details = {{"clusters", num_clusters},
                 {"sigma_violations", sigma_violations},
                 {"diam_violations", diam_violations}};
  return res;
}

// Shared per-repetition evaluation for the sphere-cluster bound checks.
struct SphereBoundRep {
  BoundReport thm2;
  BoundReport thm1_reference;
  double assumption1_violation = 0.0;
};

inline SphereBoundRep sphere_bound_rep(double spread, int k_iterations, double C,
                                       long width_samples, long eval_samples,
                                       std::uint64_t rep_seed, int workers = -1) {
  const SphereClusterSpace sphere =
      make_sphere_clusters(derive_stream(rep_seed, 7), spread);
  const RewardModel model = RewardModel::linear(sphere.space);
  const InstanceDistribution dist = model.default_instance_distribution();
  const MetricFn metric = euclidean_metric(model.space());
  Partition partition = partition_from_labels(sphere.labels, metric);

  // reference set: nearest action to each true center
  partition.reference_points.clear();
  for (int c = 0; c < static_cast<int>(sphere.centers.rows()); ++c) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int a : partition.clusters[static_cast<std::size_t>(c)]) {
      const double d =
          (sphere.space.actions.row(a) - sphere.centers.row(c)).norm();
      if (d < best_dist) {
        best_dist = d;
        best = a;
      }
    }
    partition.reference_points.push_back(best);
  }

  const int m = partition.num_clusters();
  std::vector<double> widths;
  for (int l = 0; l < m; ++l) {
    const WidthEstimate w = gaussian_width_mc(
        model, dist, partition.clusters[static_cast<std::size_t>(l)],
        partition.reference_points[static_cast<std::size_t>(l)], width_samples,
        derive_stream(rep_seed, 20 + static_cast<std::uint64_t>(l)), workers);
    widths.push_back(w.mean);
  }
  const ImportanceEstimate q = estimate_importance(
      model, dist, partition, width_samples, derive_stream(rep_seed, 40), workers);
  const double correction = sampling_correction(q.frequencies, k_iterations);
  const WidthEstimate m2 = second_moment_mc(model, dist, width_samples,
                                            derive_stream(rep_seed, 41), workers);

  SphereBoundRep out;
  const SelectionResult sel =
      epsilon_net_select(model, dist, OracleSpec::exact(),
                         StopRule::iterations(k_iterations),
                         derive_stream(rep_seed, 0));
  const RegretEstimate alg_regret = estimate_regret(
      model, dist, sel.chosen, eval_samples, derive_stream(rep_seed, 100), workers);
  out.thm2 = theorem2_upper_bound(widths, partition.epsilon, correction,
                                  m2.mean, C);
  out.thm2.compare(alg_regret.mean, alg_regret.standard_error);

  const double eps_ref = reference_epsilon(partition, metric);
  const auto [upper, lower] = theorem1_bounds(widths, eps_ref, C);
  out.thm1_reference.name = "theorem1_upper";
  out.thm1_reference.kind = BoundKind::Upper;
  out.thm1_reference.value = upper;
  out.thm1_reference.components = {{"max_width",
                                    *std::max_element(widths.begin(), widths.end())},
                                   {"epsilon", eps_ref},
                                   {"C", C},
                                   {"lower_companion", lower}};
  const RegretEstimate ref_regret =
      estimate_regret(model, dist, partition.reference_points, eval_samples,
                      derive_stream(rep_seed, 101), workers);
  out.thm1_reference.compare(ref_regret.mean, ref_regret.standard_error);
  out.assumption1_violation = assumption1_violation_rate(
      model, dist, partition, std::max<long>(2000, width_samples / 5),
      derive_stream(rep_seed, 42));
  return out;
}

// Direction check for the reference-set and algorithm upper bounds on the
// sphere-cluster preset, at three standard errors.
inline CheckResult verify_thm12(double spread, int k_iterations, double C,
                                int reps, int scale, std::uint64_t seed,
                                bool check_thm2, int workers = -1) {
  const long width_samples = std::max<long>(200, 20000 / scale);
  const long eval_samples = std::max<long>(200, 10000 / scale);
  CheckResult res;
  res.name = check_thm2 ? "thm2" : "thm1";
  res.passed = true;
  res.details = nlohmann::json::array();
  for (int rep = 0; rep < reps; ++rep) {
    const SphereBoundRep r =
        sphere_bound_rep(spread, k_iterations, C, width_samples, eval_samples,
                         repetition_seed(seed, static_cast<std::uint64_t>(rep)),
                         workers);
    const BoundReport& b = check_thm2 ? r.thm2 : r.thm1_reference;
    const bool ok = b.regret_mean - 3.0 * b.regret_se <= b.value;
    res.passed = res.passed && ok;
    nlohmann::json d = b.to_json();
    d["rep"] = rep;
    d["ok"] = ok;
    res.details.push_back(d);
  }
  return res;
}

// Worst-case covering bound on the 500-point RBF grid: the bound must
// decrease strictly along the eps sequence and dominate the Monte-Carlo
// regret of the algorithm run at the threshold K.
inline CheckResult verify_thm3(const std::vector<double>& eps_list, double C,
                               int scale, std::uint64_t seed, int workers = -1) {
  const ActionSpace grid = make_grid_space(-5.0, 5.0, 500);
  const RewardModel model = build_kernel_model(grid, KernelSpec::rbf(1.0));
  const InstanceDistribution dist = model.default_instance_distribution();
  const MetricFn metric = process_metric(model);
  const long eval_samples = std::max<long>(200, 100000 / scale);
  CheckResult res;
  res.name = "thm3";
  res.passed = true;
  res.details = nlohmann::json::array();
  double prev_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double eps = eps_list[i];
    const Theorem3Report rep = theorem3_bound(model, eps, metric, C);
    const SelectionResult sel = epsilon_net_select(
        model, dist, OracleSpec::exact(),
        StopRule::iterations(static_cast<int>(rep.k_threshold)),
        derive_stream(seed, static_cast<std::uint64_t>(i)));
    const RegretEstimate re =
        estimate_regret(model, dist, sel.chosen, eval_samples,
                        derive_stream(seed, 100 + static_cast<std::uint64_t>(i)),
                        workers);
    const bool decreasing = rep.bound < prev_bound;
    const bool dominates = re.mean - 3.0 * re.standard_error <= rep.bound;
    res.passed = res.passed && decreasing && dominates;
    res.details.push_back({{"eps", eps},
                           {"covering_estimate", rep.covering_estimate},
                           {"diameter", rep.diameter},
                           {"k_threshold", rep.k_threshold},
                           {"bound", rep.bound},
                           {"regret_mean", re.mean},
                           {"regret_se", re.standard_error},
                           {"decreasing", decreasing},
                           {"dominates", dominates}});
    prev_bound = rep.bound;
  }
  return res;
}

// Algorithm lower bound on the well-separated two-cluster fixture. Runs
// only when the separation assumption holds empirically (violation < 1%).
inline CheckResult verify_thm5(double C, double c, std::uint64_t seed,
                               long samples = 100000, int workers = -1) {
  const TwoClusterFixture fix = make_two_cluster_fixture();
  const int k = 1;
  CheckResult res;
  res.name = "thm5";
  const double violation = assumption1_violation_rate(
      fix.model, fix.dist, fix.partition, samples / 2, derive_stream(seed, 1));
  std::vector<double> widths;
  for (std::size_t l = 0; l < fix.partition.clusters.size(); ++l) {
    const WidthEstimate w = gaussian_width_mc(
        fix.model, fix.dist, fix.partition.clusters[l],
        fix.partition.reference_points[l], samples,
        derive_stream(seed, 10 + static_cast<std::uint64_t>(l)), workers);
    widths.push_back(w.mean);
  }
  const ImportanceEstimate q =
      estimate_importance(fix.model, fix.dist, fix.partition, samples,
                          derive_stream(seed, 20), workers);
  const double correction = sampling_correction(q.frequencies, k);
  const double min_width = *std::min_element(widths.begin(), widths.end());
  const double value = theorem5_lower_bound(
      min_width, fix.partition.num_clusters(), fix.partition.epsilon,
      correction, C, c);

  // Monte-Carlo regret of the K=1 output over independent runs
  RunningMoments regret;
  Rng rng = make_rng(derive_stream(seed, 30));
  const long outer = 4000;
  for (long i = 0; i < outer; ++i) {
    const SelectionResult sel = epsilon_net_select(
        fix.model, fix.dist, OracleSpec::exact(), StopRule::iterations(k),
        derive_stream(seed, 1000 + static_cast<std::uint64_t>(i)));
    const BanditInstance inst = fix.dist.sample(rng);
    regret.add(sample_regret(fix.model, inst, sel.chosen));
  }
  const bool assumption_ok = violation < 0.01;
  const bool direction_ok =
      regret.mean + 3.0 * regret.standard_error() >= value;
  res.passed = assumption_ok && direction_ok;
  res.details = {{"violation_rate", violation},
                 {"min_width", min_width},
                 {"correction", correction},
                 {"value", value},
                 {"regret_mean", regret.mean},
                 {"regret_se", regret.standard_error()},
                 {"C", C},
                 {"c", c}};
  return res;
}

}  // namespace epsnet
