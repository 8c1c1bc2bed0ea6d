#pragma once

#include <Eigen/Dense>
#include <vector>

#include "epsnet/geometry.hpp"
#include "epsnet/reward_model.hpp"

namespace epsnet {

// Three-action fixture with two bandit instances drawn uniformly; the pair
// {a1, a3} is optimal even though a3 has the lowest mean reward.
inline RewardModel example1_model() {
  Eigen::MatrixXd a(3, 2);
  a << 1.0, 0.0, 0.9, 0.1, -0.1, 1.0;
  return RewardModel::linear(make_explicit_space(a));
}

inline InstanceDistribution example1_distribution() {
  Eigen::VectorXd t1(2), t2(2);
  t1 << 1.0, 0.0;
  t2 << 0.0, 1.0;
  return InstanceDistribution::discrete({t1, t2});
}

// Orthonormal actions with a point-mass instance per action, weighted by q:
// the importance measure over singleton clusters is exactly q.
struct SyntheticQFixture {
  RewardModel model;
  InstanceDistribution dist;
  Partition partition;  // singleton clusters
  std::vector<double> q;
};

inline SyntheticQFixture make_synthetic_q(const std::vector<double>& q) {
  const int m = static_cast<int>(q.size());
  SyntheticQFixture f{RewardModel::linear(make_orthonormal_space(m)),
                      InstanceDistribution::standard_normal(m),
                      {},
                      q};
  std::vector<Eigen::VectorXd> support;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    v(i) = 1.0;
    support.push_back(v);
  }
  f.dist = InstanceDistribution::discrete(support, q);
  const MetricFn metric = euclidean_metric(f.model.space());
  std::vector<int> labels(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) labels[static_cast<std::size_t>(i)] = i;
  f.partition = partition_from_labels(labels, metric);
  return f;
}

// Two well-separated two-action clusters; the within-cluster offset keeps
// the separation-assumption violation rate well under 1%.
struct TwoClusterFixture {
  RewardModel model;
  InstanceDistribution dist;
  Partition partition;
};

inline TwoClusterFixture make_two_cluster_fixture(double offset = 0.02) {
  Eigen::MatrixXd a(4, 2);
  a << 1.0, 0.0, 1.0, offset, -1.0, 0.0, -1.0, -offset;
  TwoClusterFixture f{RewardModel::linear(make_explicit_space(a)),
                      InstanceDistribution::standard_normal(2),
                      {}};
  const MetricFn metric = euclidean_metric(f.model.space());
  f.partition = partition_from_labels({0, 0, 1, 1}, metric);
  f.partition.reference_points = {0, 2};
  return f;
}

}  // namespace epsnet
