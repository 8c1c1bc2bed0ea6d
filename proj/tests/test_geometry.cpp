#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "epsnet/fixtures.hpp"
#include "epsnet/geometry.hpp"
#include "epsnet/verify.hpp"

using namespace epsnet;

TEST_CASE("l2 distance basics and the process metric") {
  Eigen::VectorXd a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  REQUIRE(l2_distance(a, a) == 0.0);
  REQUIRE(l2_distance(a, b) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
  Eigen::VectorXd c(3);
  REQUIRE_THROWS_AS(l2_distance(a, c), std::invalid_argument);

  const RewardModel model =
      build_kernel_model(make_grid_space(0.0, 2.0, 3), KernelSpec::rbf(1.0));
  const MetricFn d = process_metric(model);
  REQUIRE(d(0, 2) == Catch::Approx(std::sqrt(2.0 - 2.0 * std::exp(-2.0))).epsilon(1e-12));
  REQUIRE(d(0, 0) == 0.0);
  REQUIRE(d(0, 1) == d(1, 0));
}

TEST_CASE("l2 distance satisfies the triangle inequality on random triples") {
  Rng rng = make_rng(12);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 10000; ++t) {
    Eigen::VectorXd a(3), b(3), c(3);
    for (int i = 0; i < 3; ++i) {
      a(i) = normal(rng);
      b(i) = normal(rng);
      c(i) = normal(rng);
    }
    REQUIRE(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-12);
  }
}

TEST_CASE("process metric satisfies the triangle inequality on a kernel grid") {
  const RewardModel model =
      build_kernel_model(make_grid_space(0.0, 2.0, 40), KernelSpec::gibbs());
  const MetricFn d = process_metric(model);
  Rng rng = make_rng(13);
  std::uniform_int_distribution<int> pick(0, 39);
  for (int t = 0; t < 10000; ++t) {
    const int i = pick(rng), j = pick(rng), k = pick(rng);
    REQUIRE(d(i, k) <= d(i, j) + d(j, k) + 1e-12);
  }
}

TEST_CASE("greedy net on three collinear points") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 1.0, 2.0;
  const ActionSpace space = make_explicit_space(pts);
  const MetricFn metric = euclidean_metric(space);
  REQUIRE(greedy_epsilon_net(3, 1.1, metric, 0) == std::vector<int>{0, 2});

  // brute-force oracle: {0,2} covers everything strictly within 1.1, and the
  // exhaustive minimum is the single point {1} (distance 1 to both ends)
  for (int p = 0; p < 3; ++p)
    REQUIRE((metric(p, 0) < 1.1 || metric(p, 2) < 1.1));
  REQUIRE(exact_covering_number(3, 1.1, metric) == 1);
  REQUIRE(exact_covering_number(3, 0.9, metric) == 3);

  REQUIRE(greedy_epsilon_net(3, 2.5, metric, 0).size() == 1);  // eps > diameter
  REQUIRE(greedy_epsilon_net(3, 1e-9, metric, 0).size() == 3);
}

TEST_CASE("greedy net always covers strictly within eps") {
  Rng rng = make_rng(19);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd pts(30, 2);
    for (int i = 0; i < 30; ++i)
      for (int d = 0; d < 2; ++d) pts(i, d) = normal(rng);
    const ActionSpace space = make_explicit_space(pts);
    const MetricFn metric = euclidean_metric(space);
    const double eps = 0.5 + 0.1 * rep;
    const auto net = greedy_epsilon_net(30, eps, metric);
    for (int p = 0; p < 30; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (int c : net) best = std::min(best, metric(p, c));
      REQUIRE(best < eps);
    }
  }
}

TEST_CASE("partition from net follows the tie-break and ball rules") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 1.0, 2.0;
  const ActionSpace space = make_explicit_space(pts);
  const MetricFn metric = euclidean_metric(space);

  const Partition all = partition_from_net(3, {0, 1, 2}, metric);
  REQUIRE(all.num_clusters() == 3);
  for (double d : all.diameters) REQUIRE(d == 0.0);

  const Partition two = partition_from_net(3, {0, 2}, metric);
  REQUIRE(two.clusters[0] == std::vector<int>{0, 1});  // tie at 1 goes to 0
  REQUIRE(two.clusters[1] == std::vector<int>{2});
  REQUIRE(validate_partition(two, metric, 3));
}

TEST_CASE("voronoi partition of tight sphere clusters recovers true labels") {
  const SphereClusterSpace sphere = make_sphere_clusters(21, 0.01);
  const RewardModel model = RewardModel::linear(sphere.space);
  const MetricFn metric = euclidean_metric(model.space());
  std::vector<int> net;
  for (int c = 0; c < 5; ++c) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int a = 0; a < sphere.space.size(); ++a) {
      const double d = (sphere.space.actions.row(a) - sphere.centers.row(c)).norm();
      if (d < best_dist) {
        best_dist = d;
        best = a;
      }
    }
    net.push_back(best);
  }
  const Partition p = partition_from_net(sphere.space.size(), net, metric);
  const Partition truth = partition_from_labels(sphere.labels, metric);
  REQUIRE(p.num_clusters() == 5);
  for (int l = 0; l < 5; ++l) {
    // same membership, possibly different cluster order; compare via sets
    bool matched = false;
    for (int t = 0; t < 5; ++t)
      if (p.clusters[static_cast<std::size_t>(l)] ==
          truth.clusters[static_cast<std::size_t>(t)])
        matched = true;
    REQUIRE(matched);
  }
}

TEST_CASE("partition invariants hold on random spaces") {
  Rng rng = make_rng(29);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> eps_pick(0.3, 2.0);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 10 + rep;
    Eigen::MatrixXd pts(n, 3);
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < 3; ++d) pts(i, d) = normal(rng);
    const ActionSpace space = make_explicit_space(pts);
    const MetricFn metric = euclidean_metric(space);
    const auto net = greedy_epsilon_net(n, eps_pick(rng), metric);
    const Partition p = partition_from_net(n, net, metric);
    REQUIRE(validate_partition(p, metric, n));
    REQUIRE(p.total_points() == n);
  }
}

TEST_CASE("importance estimates are frequencies with binomial errors") {
  const RewardModel model = RewardModel::linear(make_orthonormal_space(4));
  const auto dist = model.default_instance_distribution();
  const MetricFn metric = euclidean_metric(model.space());
  const Partition singles = partition_from_labels({0, 1, 2, 3}, metric);
  const ImportanceEstimate est =
      estimate_importance(model, dist, singles, 100000, 31);
  double total = 0.0;
  for (double f : est.frequencies) {
    REQUIRE(std::abs(f - 0.25) <= 0.01);
    total += f;
  }
  REQUIRE(std::abs(total - 1.0) <= 1e-12);

  const Partition one = partition_from_labels({0, 0, 0, 0}, metric);
  const ImportanceEstimate whole = estimate_importance(model, dist, one, 100, 5);
  REQUIRE(whole.frequencies[0] == 1.0);

  const RewardModel ex1 = example1_model();
  const Partition ex1_clusters =
      partition_from_labels({0, 0, 1}, euclidean_metric(ex1.space()));
  const ImportanceEstimate q =
      estimate_importance(ex1, example1_distribution(), ex1_clusters, 40000, 3);
  REQUIRE(q.frequencies[0] == Catch::Approx(0.5).margin(0.01));
  REQUIRE(q.frequencies[1] == Catch::Approx(0.5).margin(0.01));

  // worker count must not change the estimate
  const ImportanceEstimate serial =
      estimate_importance(ex1, example1_distribution(), ex1_clusters, 40000, 3, 1);
  REQUIRE(serial.frequencies == q.frequencies);
}

TEST_CASE("measure net checks only clusters above the threshold") {
  const SyntheticQFixture fix = make_synthetic_q({0.5, 0.3, 0.15, 0.05});
  const ImportanceEstimate q = ImportanceEstimate::from_exact(fix.q);
  REQUIRE(check_measure_net({0, 1, 2, 3}, fix.partition, q, 0.01));
  REQUIRE_FALSE(check_measure_net({}, fix.partition, q, 0.2));
  REQUIRE(check_measure_net({0, 1}, fix.partition, q, 0.2));   // 0.15 <= 0.2 skipped
  REQUIRE_FALSE(check_measure_net({0, 3}, fix.partition, q, 0.2));
}

TEST_CASE("lemma1 coverage holds at reduced size") {
  const CheckResult res = verify_lemma1(0.2, 30, 500, 77);
  REQUIRE(res.passed);
}

TEST_CASE("gaussian width estimates match closed forms") {
  const RewardModel model = RewardModel::linear(make_orthonormal_space(2));
  const auto dist = model.default_instance_distribution();
  const WidthEstimate self = gaussian_width_mc(model, dist, {1}, 1, 1000, 41);
  REQUIRE(self.mean == 0.0);

  const WidthEstimate emax = gaussian_width_mc(model, dist, {0, 1}, -1, 100000, 43);
  REQUIRE(emax.mean ==
          Catch::Approx(1.0 / std::sqrt(std::acos(-1.0))).margin(0.01));
}

TEST_CASE("width estimates respect the sigma sqrt(2 ln N) bound") {
  const CheckResult res = verify_widths(100, 4000, 47);
  INFO(res.details.dump());
  REQUIRE(res.passed);
}

TEST_CASE("sampling correction arithmetic") {
  REQUIRE(sampling_correction({0.5, 0.5}, 1) == Catch::Approx(0.25).margin(1e-15));
  // large K: value <= exp(-2K min q)
  const std::vector<double> q{0.3, 0.3, 0.4};
  for (int k : {10, 50, 200})
    REQUIRE(sampling_correction(q, k) <= std::exp(-2.0 * k * 0.3) + 1e-12);
  REQUIRE(expected_miss_mass({0.25, 0.25, 0.25, 0.25}, 3) ==
          Catch::Approx(0.421875).margin(1e-15));
}

TEST_CASE("uniform q maximizes the miss mass at m=4 K=3") {
  const CheckResult res = verify_lemma_maxq(4, 3);
  REQUIRE(res.passed);
  REQUIRE(res.details["uniform_value"].get<double>() ==
          Catch::Approx(0.421875).margin(1e-12));
}

TEST_CASE("theorem 2 bound arithmetic reduces as expected") {
  const BoundReport m1 = theorem2_upper_bound({0.7}, 0.3, 0.04, 4.0, 3.0);
  REQUIRE(m1.value == Catch::Approx(0.7 + std::sqrt(0.04 * 4.0)).margin(1e-12));

  // K = 0: correction is E_q[1] = 1, so the tail term is sqrt(second moment)
  const double corr0 = sampling_correction({0.2, 0.8}, 0);
  REQUIRE(corr0 == 1.0);
  const BoundReport k0 = theorem2_upper_bound({0.0}, 0.0, corr0, 9.0, 3.0);
  REQUIRE(k0.value == Catch::Approx(3.0).margin(1e-12));

  BoundReport verdict = theorem2_upper_bound({0.5}, 0.1, 0.0, 1.0, 3.0);
  verdict.compare(0.4, 0.01);
  REQUIRE(verdict.holds);
  verdict.compare(0.6, 0.01);
  REQUIRE_FALSE(verdict.holds);
}

TEST_CASE("theorem 1 bounds on degenerate partitions") {
  const auto [upper, lower] = theorem1_bounds({0.0, 0.0, 0.0}, 0.0, 3.0);
  REQUIRE(upper == 0.0);
  REQUIRE(lower == 0.0);

  // singleton clusters with the basis vector as its own reference: widths
  // are zero and the full reference set has exactly zero regret
  const RewardModel model = RewardModel::linear(make_orthonormal_space(4));
  const auto dist = model.default_instance_distribution();
  for (int l = 0; l < 4; ++l) {
    const WidthEstimate w = gaussian_width_mc(model, dist, {l}, l, 100, 51);
    REQUIRE(w.mean == 0.0);
  }
}

TEST_CASE("theorem 3 is benign when eps exceeds the diameter") {
  const RewardModel model = RewardModel::linear(make_orthonormal_space(6));
  const MetricFn metric = euclidean_metric(model.space());
  const Theorem3Report rep = theorem3_bound(model, 2.0, metric, 3.0);
  REQUIRE(rep.covering_estimate == 1);
  REQUIRE(rep.k_threshold <= 1);
}

TEST_CASE("theorem 3 verdict holds on sphere clusters at threshold K") {
  const SphereClusterSpace sphere = make_sphere_clusters(33, 0.05);
  const RewardModel model = RewardModel::linear(sphere.space);
  const auto dist = model.default_instance_distribution();
  const MetricFn metric = euclidean_metric(model.space());
  const Theorem3Report rep = theorem3_bound(model, 0.2, metric, 3.0);
  const SelectionResult sel = epsilon_net_select(
      model, dist, OracleSpec::exact(),
      StopRule::iterations(static_cast<int>(rep.k_threshold)), 35);
  const RegretEstimate re = estimate_regret(model, dist, sel.chosen, 4000, 37);
  REQUIRE(re.mean - 3.0 * re.standard_error <= rep.bound);
}

TEST_CASE("reference-set upper bound holds on tight sphere clusters") {
  const SphereBoundRep rep = sphere_bound_rep(0.01, 10, 3.0, 4000, 2000, 39);
  INFO(rep.thm1_reference.to_json().dump());
  REQUIRE(rep.thm1_reference.regret_mean - 3.0 * rep.thm1_reference.regret_se <=
          rep.thm1_reference.value);
}

TEST_CASE("orthonormal 4-subset regret falls inside the iid band") {
  const auto [lower, upper] = iid_case_bounds(16, 4);
  const RewardModel model = RewardModel::linear(make_orthonormal_space(16));
  const RegretEstimate re = estimate_regret(
      model, model.default_instance_distribution(), {0, 1, 2, 3}, 100000, 57);
  REQUIRE(re.mean >= lower - 3.0 * re.standard_error);
  REQUIRE(re.mean <= upper + 3.0 * re.standard_error);
}

TEST_CASE("theorem 5 trivial regimes and direction") {
  REQUIRE(theorem5_lower_bound(0.5, 2, 0.1, 0.0, 3.0, 0.1) == 0.0);
  REQUIRE(theorem5_lower_bound(0.1, 2, 0.5, 0.25, 3.0, 0.1) == 0.0);  // vacuous

  // non-vacuous direction check at a smaller C
  const CheckResult res = verify_thm5(0.2, 0.1, 61, 40000);
  INFO(res.details.dump());
  REQUIRE(res.passed);
  REQUIRE(res.details["value"].get<double>() > 0.0);
  REQUIRE(res.details["violation_rate"].get<double>() < 0.01);
}

TEST_CASE("iid band arithmetic") {
  const auto [l_full, u_full] = iid_case_bounds(16, 16);
  REQUIRE(l_full <= 0.0);
  REQUIRE(u_full >= 0.0);
  const auto [l21, u21] = iid_case_bounds(2, 1);
  const double exact = 1.0 / std::sqrt(std::acos(-1.0));
  REQUIRE(l21 <= exact + 1e-12);
  REQUIRE(u21 >= exact);
  REQUIRE(l21 == Catch::Approx(exact).margin(1e-12));  // lower bound is tight at n=2
}

TEST_CASE("separation assumption holds on the two-cluster fixture") {
  const TwoClusterFixture fix = make_two_cluster_fixture();
  const double rate = assumption1_violation_rate(fix.model, fix.dist,
                                                 fix.partition, 50000, 71);
  REQUIRE(rate < 0.01);
}

TEST_CASE("partitions export to idx,cluster CSV") {
  const SyntheticQFixture fix = make_synthetic_q({0.5, 0.5});
  std::ostringstream os;
  write_partition_csv(os, fix.partition);
  REQUIRE(os.str() == "idx,cluster\n0,0\n1,1\n");
}
