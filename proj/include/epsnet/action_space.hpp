#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsnet/common.hpp"

namespace epsnet {

enum class Provenance { Grid, SphereClusters, Orthonormal, Explicit };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Grid: return "grid";
    case Provenance::SphereClusters: return "sphere_clusters";
    case Provenance::Orthonormal: return "orthonormal";
    case Provenance::Explicit: return "explicit";
  }
  return "explicit";
}

// Finite indexed action set in R^n. Indices 0..N-1 are stable and used by
// every downstream module.
struct ActionSpace {
  Eigen::MatrixXd actions;  // one row per action
  std::vector<std::string> labels;  // optional, empty or size N
  Provenance provenance = Provenance::Explicit;

  int size() const { return static_cast<int>(actions.rows()); }
  int dim() const { return static_cast<int>(actions.cols()); }

  Eigen::VectorXd action(int i) const {
    check_index(i);
    return actions.row(i).transpose();
  }

  void check_index(int i) const {
    if (i < 0 || i >= size())
      throw std::out_of_range("action index " + std::to_string(i) +
                              " out of range [0," + std::to_string(size()) + ")");
  }

  double diameter() const {
    double best = 0.0;
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j)
        best = std::max(best, (actions.row(i) - actions.row(j)).norm());
    return best;
  }
};

inline ActionSpace make_explicit_space(const Eigen::MatrixXd& actions) {
  if (actions.rows() < 1 || actions.cols() < 1)
    throw std::invalid_argument("action space needs at least one action and dimension >= 1");
  ActionSpace s;
  s.actions = actions;
  s.provenance = Provenance::Explicit;
  return s;
}

// Evenly spaced 1-D grid with inclusive endpoints.
inline ActionSpace make_grid_space(double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("grid needs count >= 2");
  if (!(lo < hi)) throw std::invalid_argument("grid needs lo < hi");
  ActionSpace s;
  s.actions.resize(count, 1);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i) s.actions(i, 0) = lo + step * i;
  s.actions(count - 1, 0) = hi;
  s.provenance = Provenance::Grid;
  return s;
}

// Standard basis of R^n; the canonical i.i.d. reward construction.
inline ActionSpace make_orthonormal_space(int n) {
  if (n < 1) throw std::invalid_argument("orthonormal space needs n >= 1");
  ActionSpace s;
  s.actions = Eigen::MatrixXd::Identity(n, n);
  s.provenance = Provenance::Orthonormal;
  return s;
}

// Seed for the five fixed sphere-cluster center directions. Published so
// independent runs of the sphere experiments are comparable.
inline constexpr std::uint64_t kSphereCenterSeed = 987654321ULL;

struct SphereClusterSpace {
  ActionSpace space;
  std::vector<int> labels;   // true cluster id per action
  Eigen::MatrixXd centers;   // num_centers x dim, unit rows
};

// Cluster centers: fixed unit directions drawn once from kSphereCenterSeed.
inline Eigen::MatrixXd sphere_cluster_centers(int num_centers, int dim) {
  Rng rng = make_rng(kSphereCenterSeed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd centers(num_centers, dim);
  for (int c = 0; c < num_centers; ++c) {
    Eigen::VectorXd v(dim);
    do {
      for (int d = 0; d < dim; ++d) v(d) = normal(rng);
    } while (v.norm() < 1e-9);
    centers.row(c) = v.transpose() / v.norm();
  }
  return centers;
}

// Each point is center + spread * gaussian noise, projected back onto the
// unit sphere (noise first, then normalization).
inline SphereClusterSpace make_sphere_clusters(std::uint64_t seed,
                                               double spread,
                                               int num_centers = 5,
                                               int points_per = 200,
                                               int dim = 3) {
  if (!(spread > 0.0)) throw std::invalid_argument("spread must be > 0");
  if (num_centers < 1 || points_per < 1 || dim < 1)
    throw std::invalid_argument("sphere cluster sizes must be positive");
  SphereClusterSpace out;
  out.centers = sphere_cluster_centers(num_centers, dim);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int total = num_centers * points_per;
  out.space.actions.resize(total, dim);
  out.space.provenance = Provenance::SphereClusters;
  out.labels.resize(total);
  int row = 0;
  for (int c = 0; c < num_centers; ++c) {
    for (int p = 0; p < points_per; ++p, ++row) {
      Eigen::VectorXd v = out.centers.row(c).transpose();
      for (int d = 0; d < dim; ++d) v(d) += spread * normal(rng);
      const double norm = v.norm();
      if (norm < 1e-12)
        v = out.centers.row(c).transpose();  // degenerate draw, keep center
      else
        v /= norm;
      out.space.actions.row(row) = v.transpose();
      out.labels[row] = c;
    }
  }
  return out;
}

// CSV export: header idx,x0,x1,... then one row per action.
inline void write_actions_csv(std::ostream& os, const ActionSpace& space) {
  os << "idx";
  for (int d = 0; d < space.dim(); ++d) os << ",x" << d;
  os << "\n";
  char buf[40];
  for (int i = 0; i < space.size(); ++i) {
    os << i;
    for (int d = 0; d < space.dim(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.12g", space.actions(i, d));
      os << ',' << buf;
    }
    os << "\n";
  }
}

}  // namespace epsnet
