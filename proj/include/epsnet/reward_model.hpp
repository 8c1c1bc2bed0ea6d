#pragma once

#include <Eigen/Dense>
#include <memory>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "epsnet/action_space.hpp"
#include "epsnet/common.hpp"
#include "epsnet/kernel.hpp"

namespace epsnet {

// One realization of the environment. For linear models theta lives in the
// action dimension; for kernel models it is the latent standard-normal
// vector z with rewards L*z.
struct BanditInstance {
  Eigen::VectorXd theta;
};

inline BanditInstance sample_theta(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("theta dimension must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  BanditInstance inst;
  inst.theta.resize(dim);
  for (int i = 0; i < dim; ++i) inst.theta(i) = normal(rng);
  return inst;
}

// Distribution over bandit instances: standard normal by default, or a
// finite-support distribution (Example-style fixtures, synthetic q).
class InstanceDistribution {
 public:
  static InstanceDistribution standard_normal(int dim) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    InstanceDistribution d;
    d.dim_ = dim;
    return d;
  }

  static InstanceDistribution discrete(std::vector<Eigen::VectorXd> support,
                                       std::vector<double> weights = {}) {
    if (support.empty()) throw std::invalid_argument("discrete support is empty");
    InstanceDistribution d;
    d.dim_ = static_cast<int>(support.front().size());
    for (const auto& v : support)
      if (v.size() != d.dim_)
        throw std::invalid_argument("discrete support dimensions differ");
    if (weights.empty()) weights.assign(support.size(), 1.0 / static_cast<double>(support.size()));
    if (weights.size() != support.size())
      throw std::invalid_argument("weights size mismatch");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("negative weight");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("weights sum to zero");
    for (double& w : weights) w /= total;
    d.support_ = std::move(support);
    d.weights_ = std::move(weights);
    return d;
  }

  bool is_discrete() const { return !support_.empty(); }
  int dim() const { return dim_; }
  const std::vector<Eigen::VectorXd>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }

  BanditInstance sample(Rng& rng) const {
    if (!is_discrete()) return sample_theta(dim_, rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    for (std::size_t i = 0; i < support_.size(); ++i) {
      u -= weights_[i];
      if (u <= 0.0) return BanditInstance{support_[i]};
    }
    return BanditInstance{support_.back()};
  }

 private:
  int dim_ = 1;
  std::vector<Eigen::VectorXd> support_;
  std::vector<double> weights_;
};

// Expected-reward rule. LinearCanonical: mu_a(theta) = <a, theta>.
// KernelSampled: rewards are f = L * z where L L^T ~= K over the grid.
class RewardModel {
 public:
  static RewardModel linear(ActionSpace space) {
    RewardModel m;
    m.kernel_ = false;
    m.space_ = std::make_shared<ActionSpace>(std::move(space));
    return m;
  }

  // Assembles the kernel matrix over the grid and stores its jittered
  // Cholesky factor; sampling z ~ N(0,I) then f = L z gives f ~ N(0, K).
  static RewardModel kernel_sampled(ActionSpace grid, KernelSpec spec) {
    if (grid.size() < 1) throw std::invalid_argument("kernel grid is empty");
    for (int i = 0; i < grid.size(); ++i)
      for (int j = i + 1; j < grid.size(); ++j)
        if ((grid.actions.row(i) - grid.actions.row(j)).norm() == 0.0)
          throw std::invalid_argument("kernel grid points must be distinct");
    RewardModel m;
    m.kernel_ = true;
    m.spec_ = spec;
    m.space_ = std::make_shared<ActionSpace>(std::move(grid));
    m.kernel_matrix_ = std::make_shared<Eigen::MatrixXd>(
        kernel_matrix(spec, m.space_->actions));
    m.cholesky_ = std::make_shared<Eigen::MatrixXd>(
        jittered_cholesky(*m.kernel_matrix_, &m.jitter_));
    return m;
  }

  bool is_kernel() const { return kernel_; }
  const ActionSpace& space() const { return *space_; }
  int num_actions() const { return space_->size(); }

  // Dimension of the canonical instance vector.
  int instance_dim() const { return kernel_ ? space_->size() : space_->dim(); }

  const KernelSpec& kernel_spec() const { return spec_; }
  const Eigen::MatrixXd& kernel_gram() const { return *kernel_matrix_; }
  const Eigen::MatrixXd& cholesky_factor() const { return *cholesky_; }
  double jitter() const { return jitter_; }

  InstanceDistribution default_instance_distribution() const {
    return InstanceDistribution::standard_normal(instance_dim());
  }

  void check_instance(const BanditInstance& inst) const {
    if (inst.theta.size() != instance_dim())
      throw std::invalid_argument("instance dimension mismatch");
  }

  double expected_reward(int index, const BanditInstance& inst) const {
    space_->check_index(index);
    check_instance(inst);
    if (!kernel_) return space_->actions.row(index).dot(inst.theta);
    return cholesky_->row(index).dot(inst.theta);
  }

  // All expected rewards for one instance.
  Eigen::VectorXd reward_vector(const BanditInstance& inst) const {
    check_instance(inst);
    if (!kernel_) return space_->actions * inst.theta;
    return *cholesky_ * inst.theta;
  }

  Eigen::VectorXd rewards_at(const std::vector<int>& indices,
                             const BanditInstance& inst) const {
    check_instance(inst);
    Eigen::VectorXd out(static_cast<int>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      space_->check_index(indices[i]);
      out(static_cast<int>(i)) =
          kernel_ ? cholesky_->row(indices[i]).dot(inst.theta)
                  : space_->actions.row(indices[i]).dot(inst.theta);
    }
    return out;
  }

 private:
  bool kernel_ = false;
  KernelSpec spec_;
  double jitter_ = 0.0;
  std::shared_ptr<ActionSpace> space_;
  std::shared_ptr<Eigen::MatrixXd> kernel_matrix_;
  std::shared_ptr<Eigen::MatrixXd> cholesky_;
};

inline RewardModel build_kernel_model(const ActionSpace& grid, const KernelSpec& spec) {
  return RewardModel::kernel_sampled(grid, spec);
}

}  // namespace epsnet
