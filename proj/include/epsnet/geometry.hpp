#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsnet/common.hpp"
#include "epsnet/reward_model.hpp"
#include "epsnet/select.hpp"

namespace epsnet {

inline double l2_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  return (a - b).norm();
}

// Distance between action indices. Linear models use the Euclidean metric;
// kernel models use the process L2 distance sqrt(k(a,a)+k(a',a')-2k(a,a')),
// never raw grid coordinates.
using MetricFn = std::function<double(int, int)>;

inline MetricFn euclidean_metric(const ActionSpace& space) {
  return [&space](int i, int j) {
    return (space.actions.row(i) - space.actions.row(j)).norm();
  };
}

inline MetricFn process_metric(const RewardModel& model) {
  if (!model.is_kernel()) {
    const ActionSpace& space = model.space();
    return [&space](int i, int j) {
      return (space.actions.row(i) - space.actions.row(j)).norm();
    };
  }
  const Eigen::MatrixXd& k = model.kernel_gram();
  return [&k](int i, int j) {
    return std::sqrt(std::max(0.0, k(i, i) + k(j, j) - 2.0 * k(i, j)));
  };
}

inline double metric_diameter(int n_points, const MetricFn& metric) {
  double best = 0.0;
  for (int i = 0; i < n_points; ++i)
    for (int j = i + 1; j < n_points; ++j) best = std::max(best, metric(i, j));
  return best;
}

// Farthest-point greedy net: every point ends strictly within eps of some
// net point. A valid geometric eps-net; minimality is not claimed.
inline std::vector<int> greedy_epsilon_net(int n_points, double eps,
                                           const MetricFn& metric,
                                           int start_index = 0) {
  if (n_points < 1) throw std::invalid_argument("empty point set");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (start_index < 0 || start_index >= n_points)
    throw std::invalid_argument("start index out of range");
  std::vector<int> net{start_index};
  std::vector<double> min_dist(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i)
    min_dist[static_cast<std::size_t>(i)] = metric(i, start_index);
  for (;;) {
    int far = 0;
    for (int i = 1; i < n_points; ++i)
      if (min_dist[static_cast<std::size_t>(i)] >
          min_dist[static_cast<std::size_t>(far)])
        far = i;
    if (min_dist[static_cast<std::size_t>(far)] < eps) break;
    net.push_back(far);
    for (int i = 0; i < n_points; ++i)
      min_dist[static_cast<std::size_t>(i)] =
          std::min(min_dist[static_cast<std::size_t>(i)], metric(i, far));
  }
  return net;
}

// Exact minimal covering number by exhaustive search; intended for N <= 20.
inline int exact_covering_number(int n_points, double eps, const MetricFn& metric) {
  if (n_points < 1) throw std::invalid_argument("empty point set");
  if (n_points > 20)
    throw std::invalid_argument("exact covering number limited to N <= 20");
  std::vector<std::uint32_t> covers(static_cast<std::size_t>(n_points), 0);
  for (int c = 0; c < n_points; ++c)
    for (int j = 0; j < n_points; ++j)
      if (metric(c, j) < eps) covers[static_cast<std::size_t>(c)] |= 1u << j;
  const std::uint32_t all = n_points == 32 ? ~0u : (1u << n_points) - 1;
  for (int k = 1; k <= n_points; ++k) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      std::uint32_t mask = 0;
      for (int c : idx) mask |= covers[static_cast<std::size_t>(c)];
      if (mask == all) return k;
      int i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == n_points - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return n_points;
}

// Disjoint clusters covering 0..N-1 with per-cluster diameters. epsilon is
// the max diameter; reference points, when present, satisfy
// cluster within ball(reference, epsilon).
struct Partition {
  std::vector<std::vector<int>> clusters;
  std::vector<int> reference_points;  // empty or one per cluster
  std::vector<double> diameters;
  double epsilon = 0.0;

  int num_clusters() const { return static_cast<int>(clusters.size()); }

  int total_points() const {
    int n = 0;
    for (const auto& c : clusters) n += static_cast<int>(c.size());
    return n;
  }
};

inline double cluster_diameter(const std::vector<int>& cluster, const MetricFn& metric) {
  double best = 0.0;
  for (std::size_t i = 0; i < cluster.size(); ++i)
    for (std::size_t j = i + 1; j < cluster.size(); ++j)
      best = std::max(best, metric(cluster[i], cluster[j]));
  return best;
}

inline void recompute_partition_stats(Partition& p, const MetricFn& metric) {
  p.diameters.clear();
  p.epsilon = 0.0;
  for (const auto& c : p.clusters) {
    const double d = cluster_diameter(c, metric);
    p.diameters.push_back(d);
    p.epsilon = std::max(p.epsilon, d);
  }
}

// Radius needed so each cluster fits in the closed ball around its
// reference point; equals the Definition-3 epsilon of the reference set.
inline double reference_epsilon(const Partition& p, const MetricFn& metric) {
  if (p.reference_points.empty())
    throw std::invalid_argument("partition has no reference points");
  double eps = 0.0;
  for (std::size_t l = 0; l < p.clusters.size(); ++l)
    for (int a : p.clusters[l])
      eps = std::max(eps, metric(p.reference_points[l], a));
  return eps;
}

inline bool validate_partition(const Partition& p, const MetricFn& metric,
                               int n_points, double tol = 1e-12) {
  std::vector<char> seen(static_cast<std::size_t>(n_points), 0);
  for (const auto& c : p.clusters)
    for (int a : c) {
      if (a < 0 || a >= n_points) return false;
      if (seen[static_cast<std::size_t>(a)]) return false;
      seen[static_cast<std::size_t>(a)] = 1;
    }
  for (char s : seen)
    if (!s) return false;
  if (p.diameters.size() != p.clusters.size()) return false;
  double max_diam = 0.0;
  for (std::size_t l = 0; l < p.clusters.size(); ++l) {
    const double d = cluster_diameter(p.clusters[l], metric);
    if (std::abs(d - p.diameters[l]) > tol) return false;
    max_diam = std::max(max_diam, d);
  }
  if (std::abs(max_diam - p.epsilon) > tol) return false;
  if (!p.reference_points.empty()) {
    if (p.reference_points.size() != p.clusters.size()) return false;
    for (std::size_t l = 0; l < p.clusters.size(); ++l)
      for (int a : p.clusters[l])
        if (metric(p.reference_points[l], a) > p.epsilon + tol) return false;
  }
  return true;
}

// Voronoi assignment to the nearest net point; equal distances go to the
// net point with the lowest action index. Reference points are the net.
inline Partition partition_from_net(int n_points, const std::vector<int>& net,
                                    const MetricFn& metric) {
  if (net.empty()) throw std::invalid_argument("empty net");
  Partition p;
  p.clusters.assign(net.size(), {});
  p.reference_points = net;
  for (int a = 0; a < n_points; ++a) {
    std::size_t best = 0;
    double best_dist = metric(a, net[0]);
    for (std::size_t l = 1; l < net.size(); ++l) {
      const double d = metric(a, net[l]);
      if (d < best_dist || (d == best_dist && net[l] < net[best])) {
        best = l;
        best_dist = d;
      }
    }
    p.clusters[best].push_back(a);
  }
  // Drop net points whose cell ended up empty (duplicated net entries).
  Partition out;
  for (std::size_t l = 0; l < p.clusters.size(); ++l) {
    if (p.clusters[l].empty()) continue;
    out.clusters.push_back(p.clusters[l]);
    out.reference_points.push_back(p.reference_points[l]);
  }
  recompute_partition_stats(out, metric);
  return out;
}

inline Partition partition_from_labels(const std::vector<int>& labels,
                                       const MetricFn& metric) {
  if (labels.empty()) throw std::invalid_argument("empty labels");
  const int m = *std::max_element(labels.begin(), labels.end()) + 1;
  Partition p;
  p.clusters.assign(static_cast<std::size_t>(m), {});
  for (std::size_t a = 0; a < labels.size(); ++a) {
    if (labels[a] < 0) throw std::invalid_argument("negative label");
    p.clusters[static_cast<std::size_t>(labels[a])].push_back(static_cast<int>(a));
  }
  p.clusters.erase(std::remove_if(p.clusters.begin(), p.clusters.end(),
                                  [](const auto& c) { return c.empty(); }),
                   p.clusters.end());
  recompute_partition_stats(p, metric);
  return p;
}

// Per-cluster hit frequencies of the exact argmax over fresh instances,
// with binomial standard errors.
struct ImportanceEstimate {
  std::vector<double> frequencies;
  std::vector<double> standard_errors;
  long samples = 0;

  static ImportanceEstimate from_exact(std::vector<double> q) {
    ImportanceEstimate e;
    e.frequencies = std::move(q);
    e.standard_errors.assign(e.frequencies.size(), 0.0);
    e.samples = std::numeric_limits<long>::max();
    return e;
  }
};

inline ImportanceEstimate estimate_importance(const RewardModel& model,
                                              const InstanceDistribution& dist,
                                              const Partition& partition,
                                              long samples, std::uint64_t seed,
                                              int workers = -1) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  const int m = partition.num_clusters();
  std::vector<int> cluster_of(static_cast<std::size_t>(model.num_actions()), -1);
  for (int l = 0; l < m; ++l)
    for (int a : partition.clusters[static_cast<std::size_t>(l)])
      cluster_of[static_cast<std::size_t>(a)] = l;
  const int shards = static_cast<int>(std::min<long>(16, samples));
  std::vector<std::vector<long>> counts(
      static_cast<std::size_t>(shards),
      std::vector<long>(static_cast<std::size_t>(m), 0));
  parallel_shards(
      shards,
      [&](int s) {
        Rng rng = make_rng(derive_stream(seed, static_cast<std::uint64_t>(s)));
        const long lo = samples * s / shards;
        const long hi = samples * (s + 1) / shards;
        for (long i = lo; i < hi; ++i) {
          const BanditInstance inst = dist.sample(rng);
          const int a = exact_argmax(model, inst);
          const int l = cluster_of[static_cast<std::size_t>(a)];
          if (l >= 0) ++counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)];
        }
      },
      workers);
  ImportanceEstimate est;
  est.samples = samples;
  est.frequencies.assign(static_cast<std::size_t>(m), 0.0);
  est.standard_errors.assign(static_cast<std::size_t>(m), 0.0);
  for (int s = 0; s < shards; ++s)
    for (int l = 0; l < m; ++l)
      est.frequencies[static_cast<std::size_t>(l)] +=
          static_cast<double>(counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)]);
  for (int l = 0; l < m; ++l) {
    const double p = est.frequencies[static_cast<std::size_t>(l)] /
                     static_cast<double>(samples);
    est.frequencies[static_cast<std::size_t>(l)] = p;
    est.standard_errors[static_cast<std::size_t>(l)] =
        std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(samples)));
  }
  return est;
}

// Measure-theoretic eps-net test: every cluster with q(r) > eps must
// intersect the subset.
inline bool check_measure_net(const std::vector<int>& subset,
                              const Partition& partition,
                              const ImportanceEstimate& importance,
                              double eps) {
  if (importance.frequencies.size() != partition.clusters.size())
    throw std::invalid_argument("importance/partition size mismatch");
  std::vector<char> in_subset;
  int max_idx = -1;
  for (const auto& c : partition.clusters)
    for (int a : c) max_idx = std::max(max_idx, a);
  in_subset.assign(static_cast<std::size_t>(max_idx + 1), 0);
  for (int a : subset)
    if (a >= 0 && a <= max_idx) in_subset[static_cast<std::size_t>(a)] = 1;
  for (std::size_t l = 0; l < partition.clusters.size(); ++l) {
    if (importance.frequencies[l] <= eps) continue;
    bool hit = false;
    for (int a : partition.clusters[l])
      if (in_subset[static_cast<std::size_t>(a)]) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

struct WidthEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  long samples = 0;
};

// Monte-Carlo Gaussian width of a cluster: E max_{a in r} (mu_a - mu_ref),
// or plain E max when no reference is given.
inline WidthEstimate gaussian_width_mc(const RewardModel& model,
                                       const InstanceDistribution& dist,
                                       const std::vector<int>& cluster,
                                       int reference, long samples,
                                       std::uint64_t seed, int workers = -1) {
  if (cluster.empty()) throw std::invalid_argument("empty cluster");
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  std::vector<int> indices = cluster;
  const bool has_ref = reference >= 0;
  if (has_ref) indices.push_back(reference);
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
          const Eigen::VectorXd mu = model.rewards_at(indices, inst);
          const double ref = has_ref ? mu(mu.size() - 1) : 0.0;
          double best = -std::numeric_limits<double>::infinity();
          const int limit = has_ref ? static_cast<int>(indices.size()) - 1
                                    : static_cast<int>(indices.size());
          for (int j = 0; j < limit; ++j) best = std::max(best, mu(j) - ref);
          acc.add(best);
        }
      },
      workers);
  RunningMoments total;
  for (const auto& m : moments) total.merge(m);
  return {total.mean, total.standard_error(), total.count};
}

// Monte-Carlo estimate of E[max_a mu_a^2] over the full action space.
inline WidthEstimate second_moment_mc(const RewardModel& model,
                                      const InstanceDistribution& dist,
                                      long samples, std::uint64_t seed,
                                      int workers = -1) {
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
          const Eigen::VectorXd mu = model.reward_vector(inst);
          acc.add(mu.array().square().maxCoeff());
        }
      },
      workers);
  RunningMoments total;
  for (const auto& m : moments) total.merge(m);
  return {total.mean, total.standard_error(), total.count};
}

// Sum over clusters of q(r) * (1-q(r))^exponent.
inline double expected_miss_mass(const std::vector<double>& q, int exponent) {
  double total = 0.0;
  for (double p : q) {
    if (p < -1e-12 || p > 1.0 + 1e-12)
      throw std::invalid_argument("q is not a probability vector");
    double pw = 1.0;
    const double base = 1.0 - p;
    for (int e = 0; e < exponent; ++e) pw *= base;
    total += p * pw;
  }
  return total;
}

// Sampling-correction term of the algorithm bound: E_q[(1-q(r))^{2K}].
inline double sampling_correction(const std::vector<double>& q, int k) {
  if (k < 0) throw std::invalid_argument("K must be >= 0");
  return expected_miss_mass(q, 2 * k);
}

enum class BoundKind { Upper, Lower };

// One evaluated bound: its value, the pieces it is assembled from, and the
// verdict against a Monte-Carlo regret estimate (2 standard errors slack).
struct BoundReport {
  std::string name;
  BoundKind kind = BoundKind::Upper;
  double value = 0.0;
  nlohmann::json components;
  double regret_mean = std::numeric_limits<double>::quiet_NaN();
  double regret_se = std::numeric_limits<double>::quiet_NaN();
  bool holds = false;

  void compare(double mean, double se) {
    regret_mean = mean;
    regret_se = se;
    holds = kind == BoundKind::Upper ? mean - 2.0 * se <= value
                                     : mean + 2.0 * se >= value;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["kind"] = kind == BoundKind::Upper ? "upper" : "lower";
    j["value"] = value;
    j["components"] = components;
    if (!std::isnan(regret_mean)) {
      j["regret_mean"] = regret_mean;
      j["regret_se"] = regret_se;
      j["holds"] = holds;
    }
    return j;
  }
};

// Reference-set regret bounds: upper = max width + C eps sqrt(log m),
// lower = min width - C eps sqrt(log m). The lower bound presumes the
// separation assumption, which callers check separately.
inline std::pair<double, double> theorem1_bounds(const std::vector<double>& widths,
                                                 double eps, double C) {
  if (widths.empty()) throw std::invalid_argument("no widths");
  const double m = static_cast<double>(widths.size());
  const double log_term = C * eps * std::sqrt(std::log(m));
  const double max_w = *std::max_element(widths.begin(), widths.end());
  const double min_w = *std::min_element(widths.begin(), widths.end());
  return {max_w + log_term, min_w - log_term};
}

// Algorithm upper bound: reference-set bound plus the sampling-correction
// term sqrt(E_q[(1-q)^{2K}] * E[max mu^2]).
inline BoundReport theorem2_upper_bound(const std::vector<double>& widths,
                                        double eps, double correction,
                                        double second_moment, double C) {
  if (widths.empty()) throw std::invalid_argument("no widths");
  const double m = static_cast<double>(widths.size());
  const double max_w = *std::max_element(widths.begin(), widths.end());
  const double log_term = C * eps * std::sqrt(std::log(m));
  const double corr_term = std::sqrt(std::max(0.0, correction * second_moment));
  BoundReport r;
  r.name = "theorem2_upper";
  r.kind = BoundKind::Upper;
  r.value = max_w + log_term + corr_term;
  r.components = {{"max_width", max_w},
                  {"log_term", log_term},
                  {"correction_term", corr_term},
                  {"num_clusters", widths.size()},
                  {"epsilon", eps},
                  {"C", C}};
  return r;
}

struct Theorem3Report {
  std::vector<int> net;
  int covering_estimate = 0;
  double diameter = 0.0;
  long k_threshold = 0;
  double bound = 0.0;
};

// Worst-case bound from the greedy covering estimate:
//   bound = 2 eps min(sqrt(n), sqrt(log|A|/2) + 4) + C eps sqrt(log Nhat)
// with the K threshold K >= (M^2 Nhat / (eps^2 e) - 1) / 2.
inline Theorem3Report theorem3_bound(const RewardModel& model, double eps,
                                     const MetricFn& metric, double C) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  Theorem3Report rep;
  const int n_points = model.num_actions();
  rep.net = greedy_epsilon_net(n_points, eps, metric);
  rep.covering_estimate = static_cast<int>(rep.net.size());
  rep.diameter = metric_diameter(n_points, metric);
  const double raw = 0.5 * (rep.diameter * rep.diameter *
                                static_cast<double>(rep.covering_estimate) /
                                (eps * eps * std::exp(1.0)) -
                            1.0);
  rep.k_threshold = raw > 0.0 ? static_cast<long>(std::ceil(raw)) : 1;
  const double dim_term = std::sqrt(static_cast<double>(model.instance_dim()));
  const double card_term =
      std::sqrt(0.5 * std::log(static_cast<double>(n_points))) + 4.0;
  rep.bound = 2.0 * eps * std::min(dim_term, card_term) +
              C * eps * std::sqrt(std::log(static_cast<double>(rep.covering_estimate)));
  return rep;
}

// Algorithm lower bound, floored at zero:
//   c * sqrt(E_q[(1-q)^{2K}]) * (min width - C eps sqrt(log m)).
inline double theorem5_lower_bound(double min_width, int m, double eps,
                                   double correction, double C, double c) {
  if (m < 1) throw std::invalid_argument("need at least one cluster");
  const double inner =
      min_width - C * eps * std::sqrt(std::log(static_cast<double>(m)));
  return std::max(0.0, c * std::sqrt(std::max(0.0, correction)) * inner);
}

// Regret band for the i.i.d. orthonormal case (natural logs):
//   lower = sqrt(ln n)/sqrt(pi ln 2) - sqrt(2 ln s)
//   upper = sqrt(2 ln n) - sqrt(ln s)/sqrt(pi ln 2)
inline std::pair<double, double> iid_case_bounds(int n, int subset_size) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  if (subset_size < 1 || subset_size > n)
    throw std::invalid_argument("need 1 <= subset size <= n");
  const double pi_log2 = std::sqrt(std::acos(-1.0) * std::log(2.0));
  const double ln_n = std::log(static_cast<double>(n));
  const double ln_s = std::log(static_cast<double>(subset_size));
  const double lower = std::sqrt(ln_n) / pi_log2 - std::sqrt(2.0 * ln_s);
  const double upper = std::sqrt(2.0 * ln_n) - std::sqrt(ln_s) / pi_log2;
  return {lower, upper};
}

// Empirical violation rate of the separation assumption: when the optimal
// action lies in cluster r, every action in r must outperform all others.
inline double assumption1_violation_rate(const RewardModel& model,
                                         const InstanceDistribution& dist,
                                         const Partition& partition,
                                         long samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  std::vector<int> cluster_of(static_cast<std::size_t>(model.num_actions()), -1);
  for (int l = 0; l < partition.num_clusters(); ++l)
    for (int a : partition.clusters[static_cast<std::size_t>(l)])
      cluster_of[static_cast<std::size_t>(a)] = l;
  Rng rng = make_rng(seed);
  long violations = 0;
  for (long i = 0; i < samples; ++i) {
    const BanditInstance inst = dist.sample(rng);
    const Eigen::VectorXd mu = model.reward_vector(inst);
    const int best = argmax_lowest_index(mu);
    const int l = cluster_of[static_cast<std::size_t>(best)];
    if (l < 0) continue;
    double min_in = std::numeric_limits<double>::infinity();
    for (int a : partition.clusters[static_cast<std::size_t>(l)])
      min_in = std::min(min_in, mu(a));
    double max_out = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < model.num_actions(); ++a)
      if (cluster_of[static_cast<std::size_t>(a)] != l)
        max_out = std::max(max_out, mu(a));
    if (max_out > min_in) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(samples);
}

// CSV export: idx,cluster rows.
inline void write_partition_csv(std::ostream& os, const Partition& p) {
  std::vector<std::pair<int, int>> rows;
  for (int l = 0; l < p.num_clusters(); ++l)
    for (int a : p.clusters[static_cast<std::size_t>(l)]) rows.push_back({a, l});
  std::sort(rows.begin(), rows.end());
  os << "idx,cluster\n";
  for (const auto& [a, l] : rows) os << a << ',' << l << "\n";
}

}  // namespace epsnet
