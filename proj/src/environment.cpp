#include "gpts/environment.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace gpts {

void Environment::set_function(Eigen::VectorXd values) {
  if (values.size() < 1) throw std::invalid_argument("environment needs at least one arm");
  f = std::move(values);
  x_star = argmax_lowest(f);
  f_star = f[x_star];
}

Environment sample_environment(const Hyperprior& hyperprior, double noise_var, RandomStream& rng) {
  hyperprior.validate();
  if (!(noise_var > 0.0)) throw std::invalid_argument("noise variance must be positive");
  Environment env;
  env.noise_var = noise_var;
  env.true_prior = hyperprior.size() == 1 ? 0 : rng.categorical(hyperprior.weights);
  const auto& prior = *hyperprior.priors[static_cast<std::size_t>(env.true_prior)];
  const Eigen::VectorXd z = rng.normals(prior.num_arms());
  Eigen::VectorXd f = prior.mean;
  f.noalias() += prior.chol.triangularView<Eigen::Lower>() * z;
  env.set_function(std::move(f));
  return env;
}

double EpisodeRecord::cumulative_regret() const {
  double r = 0.0;
  for (const auto& s : steps) r += s.instant_regret;
  return r;
}

std::vector<double> EpisodeRecord::cumulative_curve() const {
  std::vector<double> out;
  out.reserve(steps.size());
  double r = 0.0;
  for (const auto& s : steps) out.push_back(r += s.instant_regret);
  return out;
}

namespace {

// Posterior variance of one fixed arm under one prior, O(t^2) per observation.
class PointVarianceTracker {
 public:
  PointVarianceTracker(const MaterializedPrior& prior, double noise_var, Eigen::Index target, int capacity)
      : cov_(prior.cov), noise_var_(noise_var), target_(target), chol_(Eigen::MatrixXd::Zero(capacity, capacity)),
        proj_(Eigen::VectorXd::Zero(capacity)) {}

  double variance() const { return std::max(cov_(target_, target_) - proj_.head(t_).squaredNorm(), 0.0); }

  void condition(Eigen::Index arm) {
    if (t_ == chol_.rows()) return;
    Eigen::VectorXd l(t_);
    for (Eigen::Index i = 0; i < t_; ++i) l[i] = cov_(obs_[static_cast<std::size_t>(i)], arm);
    if (t_ > 0) chol_.topLeftCorner(t_, t_).triangularView<Eigen::Lower>().solveInPlace(l);
    const double d = std::sqrt(std::max(cov_(arm, arm) + noise_var_ - l.squaredNorm(), 1e-300));
    chol_.row(t_).head(t_) = l.transpose();
    chol_(t_, t_) = d;
    proj_[t_] = (cov_(arm, target_) - l.dot(proj_.head(t_))) / d;
    obs_.push_back(arm);
    ++t_;
  }

 private:
  const Eigen::MatrixXd& cov_;
  double noise_var_;
  Eigen::Index target_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd proj_;
  std::vector<Eigen::Index> obs_;
  Eigen::Index t_ = 0;
};

}  // namespace

EpisodeRecord run_episode(const Environment& env, Agent& agent, int horizon, RandomStream noise_rng,
                          RandomStream& agent_rng, const EpisodeOptions& options) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  EpisodeRecord rec;
  rec.agent = agent.kind();
  rec.true_prior = env.true_prior;
  rec.steps.reserve(static_cast<std::size_t>(horizon));
  const double noise_sd = std::sqrt(env.noise_var);

  auto* elimination = dynamic_cast<EliminationAgent*>(&agent);
  std::optional<PointVarianceTracker> tracker;
  if (options.track_var_at_opt && elimination != nullptr && env.true_prior >= 0) {
    tracker.emplace(elimination->posterior(env.true_prior).prior(), env.noise_var, env.x_star, horizon);
    rec.sum_var_at_opt = 0.0;
  }

  try {
    for (int t = 1; t <= horizon; ++t) {
      const Selection sel = agent.select(agent_rng);
      if (sel.arm < 0 || sel.arm >= env.f.size()) throw std::logic_error("agent selected an arm out of range");
      const double reward = env.f[sel.arm] + noise_sd * noise_rng.normal();
      if (tracker) rec.sum_var_at_opt += tracker->variance();
      agent.observe(reward);
      if (tracker) tracker->condition(sel.arm);

      Step step;
      step.arm = sel.arm;
      step.prior = sel.prior;
      step.reward = reward;
      step.instant_regret = env.f_star - env.f[sel.arm];
      if (auto c = agent.active_prior_count()) step.active_priors = *c;
      if (auto h = agent.hyperposterior_entropy()) step.entropy = *h;
      rec.steps.push_back(step);

      if (elimination != nullptr && env.true_prior >= 0 && !elimination->elimination().active(env.true_prior))
        rec.true_prior_eliminated = true;
      if (agent.aborted()) {
        rec.aborted = true;
        rec.abort_reason = agent.abort_reason();
        break;
      }
    }
  } catch (const NumericalError& e) {
    rec.aborted = true;
    rec.abort_reason = e.what();
  }
  return rec;
}

}  // namespace gpts
