#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace epsnet {

// Stationary RBF and nonstationary Gibbs covariance functions. Both have
// unit variance at every input.
struct KernelSpec {
  enum class Kind { Rbf, Gibbs };

  Kind kind = Kind::Rbf;
  double length_scale = 1.0;  // RBF only
  double gibbs_base = 0.1;
  double gibbs_amp = 0.9;

  static KernelSpec rbf(double l) {
    if (!(l > 0.0)) throw std::invalid_argument("RBF length scale must be > 0");
    KernelSpec s;
    s.kind = Kind::Rbf;
    s.length_scale = l;
    return s;
  }

  static KernelSpec gibbs() {
    KernelSpec s;
    s.kind = Kind::Gibbs;
    return s;
  }

  std::string name() const {
    return kind == Kind::Rbf ? "rbf(" + std::to_string(length_scale) + ")"
                             : "gibbs";
  }
};

// Location-dependent length scale l(a) = base + amp * exp(-|a|^2).
inline double gibbs_length_scale(const KernelSpec& spec, const Eigen::VectorXd& a) {
  return spec.gibbs_base + spec.gibbs_amp * std::exp(-a.squaredNorm());
}

inline double kernel_value(const KernelSpec& spec, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("kernel inputs must share a dimension");
  const double sq = (a - b).squaredNorm();
  if (spec.kind == KernelSpec::Kind::Rbf) {
    const double l = spec.length_scale;
    if (!(l > 0.0)) throw std::invalid_argument("RBF length scale must be > 0");
    return std::exp(-sq / (2.0 * l * l));
  }
  const double la = gibbs_length_scale(spec, a);
  const double lb = gibbs_length_scale(spec, b);
  const double denom = la * la + lb * lb;
  return std::sqrt(2.0 * la * lb / denom) * std::exp(-sq / denom);
}

inline Eigen::MatrixXd kernel_matrix(const KernelSpec& spec,
                                     const Eigen::MatrixXd& grid) {
  const int n = static_cast<int>(grid.rows());
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = kernel_value(spec, grid.row(i).transpose(), grid.row(i).transpose());
    for (int j = i + 1; j < n; ++j) {
      const double v =
          kernel_value(spec, grid.row(i).transpose(), grid.row(j).transpose());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

// Cholesky with jitter escalation: start at 1e-10 * mean(diag), multiply by
// 10 on failure, at most 8 escalations, then hard error. RBF matrices at
// large length scales are numerically rank-deficient without this.
inline Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& k,
                                         double* jitter_used = nullptr) {
  const int n = static_cast<int>(k.rows());
  if (n == 0 || k.cols() != n)
    throw std::invalid_argument("cholesky needs a square non-empty matrix");
  const double mean_diag = k.diagonal().mean();
  double jitter = 1e-10 * mean_diag;
  for (int attempt = 0; attempt <= 8; ++attempt) {
    Eigen::MatrixXd shifted = k;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
    jitter *= 10.0;
  }
  throw std::runtime_error("cholesky failed after maximum jitter escalation");
}

}  // namespace epsnet
