#pragma once

#include "gpts/kernels.hpp"
#include "gpts/random.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpts {

/// Raised when a covariance matrix cannot be factorized.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relative jitter added to a prior covariance before factorization.
inline constexpr double kPriorJitter = 1e-8;

/// A GP prior realized over a finite arm set. `cov` already carries the
/// jitter, so environment draws, pathwise samples and posteriors all use the
/// same covariance.
struct MaterializedPrior {
  std::string id;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;   // input covariance + jitter * I
  Eigen::MatrixXd chol;  // lower factor of cov
  double jitter = 0.0;
  std::optional<KernelSpec> kernel;  // absent for empirical priors

  Eigen::Index num_arms() const { return mean.size(); }
  double max_variance() const { return cov.diagonal().maxCoeff(); }
};

using PriorPtr = std::shared_ptr<const MaterializedPrior>;

/// Factorizes `cov` with jitter kPriorJitter * max diagonal. If round-off
/// still defeats the factorization the jitter is raised tenfold, up to 1e-4
/// of the max diagonal, before giving up with NumericalError.
PriorPtr materialize_prior(std::string id, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                           std::optional<KernelSpec> kernel = std::nullopt);

/// Zero-mean prior with kernel `spec` over `arms`.
PriorPtr materialize_kernel_prior(std::string id, const KernelSpec& spec, const ArmMatrix& arms);

/// Exact GP posterior over the arms of one prior, conditioned incrementally.
///
/// Besides the Cholesky factor L of (K_obs + noise I) the state keeps
/// C = L^{-1} K(X, arms), one row per observation, and the whitened residual
/// a = L^{-1} (y - mu(X)). Then mean = mu + C^T a and var = diag(K) - colsum(C^2),
/// so each observation costs O(n t) and the per-arm mean and variance are
/// updated in place rather than recomputed.
class PosteriorState {
 public:
  PosteriorState(PriorPtr prior, double noise_var, Eigen::Index capacity = 16);

  void condition(Eigen::Index arm, double reward);

  const Eigen::VectorXd& mean() const { return mean_; }
  /// Clamped at zero.
  const Eigen::VectorXd& variance() const { return var_; }
  double mean(Eigen::Index arm) const { return mean_[arm]; }
  double variance(Eigen::Index arm) const { return var_[arm]; }
  double stddev(Eigen::Index arm) const;

  /// log N(reward; mean(arm), variance(arm) + noise_var).
  double predictive_loglik(Eigen::Index arm, double reward) const;

  /// Joint posterior draw over all arms by pathwise conditioning of a prior
  /// draw: f0 + K(., X) (K_XX + noise I)^{-1} (y - f0(X) - eps).
  Eigen::VectorXd sample(RandomStream& rng) const;
  /// Same update with caller-supplied standard normals (n for the prior draw,
  /// t for the observation noise).
  Eigen::VectorXd sample_from(const Eigen::Ref<const Eigen::VectorXd>& prior_normals,
                              const Eigen::Ref<const Eigen::VectorXd>& noise_normals) const;

  const MaterializedPrior& prior() const { return *prior_; }
  const PriorPtr& prior_ptr() const { return prior_; }
  double noise_var() const { return noise_var_; }
  Eigen::Index num_arms() const { return prior_->num_arms(); }
  Eigen::Index num_obs() const { return t_; }
  const std::vector<Eigen::Index>& observed_arms() const { return obs_idx_; }
  const std::vector<double>& observed_rewards() const { return obs_y_; }

  /// Lower factor of (K_obs + noise I), t x t.
  Eigen::MatrixXd obs_cholesky() const;
  /// Number of times the incremental update fell back to refactorization.
  int refactorizations() const { return refactorizations_; }

 private:
  void reserve(Eigen::Index capacity);
  void rebuild();

  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  PriorPtr prior_;
  double noise_var_;
  Eigen::Index t_ = 0;
  std::vector<Eigen::Index> obs_idx_;
  std::vector<double> obs_y_;
  Eigen::MatrixXd chol_;   // capacity x capacity, leading t x t block valid
  RowMatrix cross_;        // capacity x n, leading t rows valid
  Eigen::VectorXd white_;  // capacity, leading t entries valid
  Eigen::VectorXd mean_;
  Eigen::VectorXd var_;
  int refactorizations_ = 0;
};

}  // namespace gpts
