#include "gpts/gp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gpts {

PriorPtr materialize_prior(std::string id, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                           std::optional<KernelSpec> kernel) {
  const Eigen::Index n = mean.size();
  if (n < 1 || cov.rows() != n || cov.cols() != n)
    throw std::invalid_argument("prior '" + id + "': mean/covariance size mismatch");
  if (!mean.allFinite() || !cov.allFinite())
    throw std::invalid_argument("prior '" + id + "': non-finite entries");

  auto prior = std::make_shared<MaterializedPrior>();
  prior->id = std::move(id);
  const double scale = std::max(cov.diagonal().maxCoeff(), 1e-300);
  for (double rel = kPriorJitter; rel <= 1e-4 * (1 + 1e-12); rel *= 10.0) {
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += rel * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(jittered);
    if (llt.info() == Eigen::Success) {
      prior->chol = llt.matrixL();
      prior->jitter = rel * scale;
      prior->mean = std::move(mean);
      prior->cov = std::move(jittered);
      prior->kernel = std::move(kernel);
      return prior;
    }
  }
  throw NumericalError("prior '" + prior->id + "': covariance is not positive semidefinite");
}

PriorPtr materialize_kernel_prior(std::string id, const KernelSpec& spec, const ArmMatrix& arms) {
  return materialize_prior(std::move(id), Eigen::VectorXd::Zero(arms.rows()), gram_matrix(spec, arms),
                           spec);
}

PosteriorState::PosteriorState(PriorPtr prior, double noise_var, Eigen::Index capacity)
    : prior_(std::move(prior)), noise_var_(noise_var) {
  if (!prior_) throw std::invalid_argument("PosteriorState: null prior");
  if (!(noise_var_ > 0.0)) throw std::invalid_argument("PosteriorState: noise variance must be positive");
  mean_ = prior_->mean;
  var_ = prior_->cov.diagonal().cwiseMax(0.0);
  reserve(std::max<Eigen::Index>(capacity, 1));
}

void PosteriorState::reserve(Eigen::Index capacity) {
  const Eigen::Index n = num_arms();
  if (chol_.rows() >= capacity) return;
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(capacity, capacity);
  RowMatrix cross(capacity, n);
  Eigen::VectorXd white = Eigen::VectorXd::Zero(capacity);
  if (t_ > 0) {
    chol.topLeftCorner(t_, t_) = chol_.topLeftCorner(t_, t_);
    cross.topRows(t_) = cross_.topRows(t_);
    white.head(t_) = white_.head(t_);
  }
  chol_ = std::move(chol);
  cross_ = std::move(cross);
  white_ = std::move(white);
}

void PosteriorState::condition(Eigen::Index arm, double reward) {
  const Eigen::Index n = num_arms();
  if (arm < 0 || arm >= n) throw std::out_of_range("condition: arm index out of range");
  if (t_ == chol_.rows()) reserve(2 * chol_.rows());

  const Eigen::MatrixXd& cov = prior_->cov;
  obs_idx_.push_back(arm);
  obs_y_.push_back(reward);

  // New row of L: [l^T, d] with l = L^{-1} k(X, arm), d^2 = k(arm, arm) + noise - |l|^2.
  Eigen::VectorXd l(t_);
  for (Eigen::Index i = 0; i < t_; ++i) l[i] = cov(obs_idx_[i], arm);
  if (t_ > 0) chol_.topLeftCorner(t_, t_).triangularView<Eigen::Lower>().solveInPlace(l);
  const double pivot = cov(arm, arm) + noise_var_ - l.squaredNorm();
  if (!(pivot > 1e-12 * noise_var_)) {
    ++refactorizations_;
    rebuild();
    return;
  }
  const double d = std::sqrt(pivot);
  chol_.row(t_).head(t_) = l.transpose();
  chol_(t_, t_) = d;

  auto row = cross_.row(t_);
  row = cov.col(arm).transpose();  // symmetric; contiguous column
  if (t_ > 0) row.noalias() -= l.transpose() * cross_.topRows(t_);
  row /= d;

  const double resid = reward - prior_->mean[arm] - l.dot(white_.head(t_));
  const double w = resid / d;
  white_[t_] = w;
  ++t_;

  mean_.noalias() += w * row.transpose();
  var_.array() -= row.transpose().array().square();
  var_ = var_.cwiseMax(0.0);
}

void PosteriorState::rebuild() {
  // Full refactorization of (K_obs + noise I) from the stored history.
  const Eigen::Index t = static_cast<Eigen::Index>(obs_idx_.size());
  const Eigen::Index n = num_arms();
  const Eigen::MatrixXd& cov = prior_->cov;
  Eigen::MatrixXd k_obs(t, t);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < t; ++j) k_obs(i, j) = cov(obs_idx_[i], obs_idx_[j]);
  k_obs.diagonal().array() += noise_var_;
  Eigen::LLT<Eigen::MatrixXd> llt(k_obs);
  if (llt.info() != Eigen::Success)
    throw NumericalError("posterior of prior '" + prior_->id + "': observation covariance not factorizable");
  if (chol_.rows() < t) reserve(2 * t);
  chol_.setZero();
  chol_.topLeftCorner(t, t) = llt.matrixL();

  Eigen::MatrixXd k_cross(t, n);
  Eigen::VectorXd resid(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    k_cross.row(i) = cov.row(obs_idx_[i]);
    resid[i] = obs_y_[static_cast<std::size_t>(i)] - prior_->mean[obs_idx_[i]];
  }
  const auto lower = chol_.topLeftCorner(t, t).triangularView<Eigen::Lower>();
  lower.solveInPlace(k_cross);
  lower.solveInPlace(resid);
  cross_.topRows(t) = k_cross;
  white_.head(t) = resid;
  t_ = t;

  mean_ = prior_->mean + k_cross.transpose() * resid;
  var_ = (cov.diagonal() - k_cross.colwise().squaredNorm().transpose()).cwiseMax(0.0);
}

double PosteriorState::stddev(Eigen::Index arm) const { return std::sqrt(std::max(var_[arm], 0.0)); }

double PosteriorState::predictive_loglik(Eigen::Index arm, double reward) const {
  const double s2 = var_[arm] + noise_var_;
  const double r = reward - mean_[arm];
  return -0.5 * (std::log(2.0 * std::numbers::pi * s2) + r * r / s2);
}

Eigen::VectorXd PosteriorState::sample(RandomStream& rng) const {
  const Eigen::VectorXd z = rng.normals(num_arms());
  const Eigen::VectorXd e = rng.normals(t_);
  return sample_from(z, e);
}

Eigen::VectorXd PosteriorState::sample_from(const Eigen::Ref<const Eigen::VectorXd>& prior_normals,
                                            const Eigen::Ref<const Eigen::VectorXd>& noise_normals) const {
  if (prior_normals.size() != num_arms() || noise_normals.size() != t_)
    throw std::invalid_argument("sample_from: normal vector sizes do not match state");
  Eigen::VectorXd f = prior_->mean;
  f.noalias() += prior_->chol.triangularView<Eigen::Lower>() * prior_normals;
  if (t_ == 0) return f;

  const double noise_sd = std::sqrt(noise_var_);
  Eigen::VectorXd r(t_);
  for (Eigen::Index i = 0; i < t_; ++i)
    r[i] = obs_y_[static_cast<std::size_t>(i)] - f[obs_idx_[static_cast<std::size_t>(i)]] -
           noise_sd * noise_normals[i];
  chol_.topLeftCorner(t_, t_).triangularView<Eigen::Lower>().solveInPlace(r);
  f.noalias() += cross_.topRows(t_).transpose() * r;
  return f;
}

Eigen::MatrixXd PosteriorState::obs_cholesky() const { return chol_.topLeftCorner(t_, t_); }

}  // namespace gpts
