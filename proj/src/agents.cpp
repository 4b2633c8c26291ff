#include "gpts/agents.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gpts {

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

void check_round(int t) {
  if (t < 1) throw std::invalid_argument("confidence schedule rounds start at t = 1");
}

}  // namespace

double ConfidenceSchedule::beta(int t) const {
  check_round(t);
  const double tt = static_cast<double>(t);
  return 2.0 * std::log(2.0 * num_arms * num_priors * kPi2 * tt * tt / (3.0 * delta));
}

double ConfidenceSchedule::xi(int t) const {
  check_round(t);
  const double tt = static_cast<double>(t);
  return 2.0 * noise_var * std::log(num_priors * kPi2 * tt * tt / (3.0 * delta));
}

double ConfidenceSchedule::beta_concentration(int t) const {
  check_round(t);
  const double tt = static_cast<double>(t);
  return 2.0 * std::log(static_cast<double>(num_arms) * num_priors * kPi2 * tt * tt / (3.0 * delta));
}

std::string_view agent_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::PeGpTs: return "pe-gp-ts";
    case AgentKind::PeGpUcb: return "pe-gp-ucb";
    case AgentKind::HpGpTs: return "hp-gp-ts";
    case AgentKind::MapGpTs: return "map-gp-ts";
    case AgentKind::OracleGpTs: return "oracle-gp-ts";
    case AgentKind::OracleGpUcb: return "oracle-gp-ucb";
  }
  return "unknown";
}

// Case-insensitive, so "PE-GP-UCB" and "pe-gp-ucb" both parse.
AgentKind parse_agent(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (AgentKind k : all_agents())
    if (agent_name(k) == lower) return k;
  throw std::invalid_argument("unknown agent '" + std::string(name) + "'");
}

const std::vector<AgentKind>& all_agents() {
  static const std::vector<AgentKind> kinds = {AgentKind::HpGpTs,  AgentKind::MapGpTs,    AgentKind::PeGpTs,
                                               AgentKind::PeGpUcb, AgentKind::OracleGpTs, AgentKind::OracleGpUcb};
  return kinds;
}

bool is_oracle(AgentKind kind) { return kind == AgentKind::OracleGpTs || kind == AgentKind::OracleGpUcb; }
bool is_elimination(AgentKind kind) { return kind == AgentKind::PeGpTs || kind == AgentKind::PeGpUcb; }
bool is_hyperposterior(AgentKind kind) { return kind == AgentKind::HpGpTs || kind == AgentKind::MapGpTs; }

Eigen::Index argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

// ---------------------------------------------------------------------------

EliminationState::EliminationState(int num_priors)
    : active_(static_cast<std::size_t>(num_priors), true),
      counts_(static_cast<std::size_t>(num_priors), 0),
      error_sums_(static_cast<std::size_t>(num_priors), 0.0),
      width_sums_(static_cast<std::size_t>(num_priors), 0.0),
      active_count_(num_priors) {
  if (num_priors < 1) throw std::invalid_argument("elimination needs at least one prior");
}

std::vector<int> EliminationState::active_priors() const {
  std::vector<int> out;
  for (std::size_t p = 0; p < active_.size(); ++p)
    if (active_[p]) out.push_back(static_cast<int>(p));
  return out;
}

bool EliminationState::record(int p, double eta, double width, double xi) {
  const auto i = static_cast<std::size_t>(p);
  if (!active_.at(i)) throw std::logic_error("elimination statistics of a removed prior must stay frozen");
  ++counts_[i];
  error_sums_[i] += eta;
  width_sums_[i] += width;
  const double threshold = std::sqrt(xi * counts_[i]) + width_sums_[i];
  if (std::abs(error_sums_[i]) > threshold) {
    active_[i] = false;
    --active_count_;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

HyperposteriorState::HyperposteriorState(const Eigen::VectorXd& weights) {
  if (weights.size() < 1 || (weights.array() < 0.0).any() || !(weights.sum() > 0.0))
    throw std::invalid_argument("hyperposterior needs a nonnegative weight vector with positive mass");
  log_weights_ = weights.array().log();
  normalize();
}

void HyperposteriorState::update(const Eigen::Ref<const Eigen::VectorXd>& log_likelihoods) {
  if (log_likelihoods.size() != log_weights_.size())
    throw std::invalid_argument("hyperposterior update: wrong likelihood count");
  if ((log_likelihoods.array().isNaN()).any() || (log_likelihoods.array() == std::numeric_limits<double>::infinity()).any())
    throw std::invalid_argument("hyperposterior update: invalid log-likelihood");
  const Eigen::VectorXd next = log_weights_ + log_likelihoods;
  if (!std::isfinite(next.maxCoeff()))
    throw std::invalid_argument("hyperposterior update: every prior has zero likelihood");
  log_weights_ = next;
  normalize();
}

void HyperposteriorState::normalize() {
  const double shift = log_weights_.maxCoeff();
  log_weights_.array() -= shift;
  weights_ = log_weights_.array().exp();
  const double total = weights_.sum();
  weights_ /= total;
  log_weights_.array() -= std::log(total);
}

double HyperposteriorState::entropy() const {
  double h = 0.0;
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    if (weights_[i] > 0.0) h -= weights_[i] * std::log(weights_[i]);
  return std::max(h, 0.0);
}

int HyperposteriorState::map_index() const { return static_cast<int>(argmax_lowest(weights_)); }

// ---------------------------------------------------------------------------

namespace {

std::vector<PosteriorState> make_bank(const Hyperprior& hyperprior, double noise_var, int horizon_hint) {
  hyperprior.validate();
  std::vector<PosteriorState> bank;
  bank.reserve(hyperprior.size());
  for (const auto& prior : hyperprior.priors) bank.emplace_back(prior, noise_var, horizon_hint);
  return bank;
}

// Joint argmax over (arm, prior): highest value, then lowest arm, then lowest prior.
struct JointArgmax {
  double value = -std::numeric_limits<double>::infinity();
  Selection best;
  bool any = false;

  void offer(const Eigen::VectorXd& scores, int prior) {
    const Eigen::Index arm = argmax_lowest(scores);
    const double v = scores[arm];
    if (!any || v > value || (v == value && (arm < best.arm || (arm == best.arm && prior < best.prior)))) {
      value = v;
      best = {arm, prior};
      any = true;
    }
  }
};

}  // namespace

EliminationAgent::EliminationAgent(const Hyperprior& hyperprior, double noise_var, double delta, Rule rule,
                                   int horizon_hint)
    : rule_(rule),
      schedule_{delta, static_cast<int>(hyperprior.num_arms()), static_cast<int>(hyperprior.size()), noise_var},
      bank_(make_bank(hyperprior, noise_var, horizon_hint)),
      elimination_(static_cast<int>(hyperprior.size())) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

Selection EliminationAgent::select(RandomStream& rng) {
  if (aborted()) throw std::logic_error("select called on an aborted agent");
  JointArgmax joint;
  const double root_beta = std::sqrt(schedule_.beta(t_));
  for (int p : elimination_.active_priors()) {
    const auto& post = bank_[static_cast<std::size_t>(p)];
    if (rule_ == Rule::ThompsonSampling) {
      joint.offer(post.sample(rng), p);
    } else {
      const Eigen::VectorXd ucb = post.mean() + root_beta * post.variance().cwiseSqrt();
      joint.offer(ucb, p);
    }
  }
  pending_ = joint.best;
  return joint.best;
}

void EliminationAgent::observe(double reward) {
  if (!pending_) throw std::logic_error("observe called without a pending selection");
  const auto [arm, p] = *pending_;
  pending_.reset();
  const auto& post = bank_[static_cast<std::size_t>(p)];
  const double eta = reward - post.mean(arm);
  const double width = std::sqrt(schedule_.beta(t_)) * post.stddev(arm);
  elimination_.record(p, eta, width, schedule_.xi(t_));

  // Removed priors are never sampled again, so their posteriors stay frozen.
  for (int q : elimination_.active_priors()) bank_[static_cast<std::size_t>(q)].condition(arm, reward);
  ++t_;
  if (elimination_.active_count() == 0)
    abort_reason_ = "all priors eliminated at round " + std::to_string(t_ - 1);
}

// ---------------------------------------------------------------------------

HyperposteriorAgent::HyperposteriorAgent(const Hyperprior& hyperprior, double noise_var, PriorChoice choice,
                                         int horizon_hint)
    : choice_(choice), bank_(make_bank(hyperprior, noise_var, horizon_hint)), hyper_(hyperprior.weights) {}

Selection HyperposteriorAgent::select(RandomStream& rng) {
  const int p = choice_ == PriorChoice::Map ? hyper_.map_index() : rng.categorical(hyper_.weights());
  const Eigen::VectorXd f = bank_[static_cast<std::size_t>(p)].sample(rng);
  pending_ = Selection{argmax_lowest(f), p};
  return *pending_;
}

void HyperposteriorAgent::observe(double reward) {
  if (!pending_) throw std::logic_error("observe called without a pending selection");
  const Eigen::Index arm = pending_->arm;
  pending_.reset();
  Eigen::VectorXd loglik(static_cast<Eigen::Index>(bank_.size()));
  for (std::size_t p = 0; p < bank_.size(); ++p)
    loglik[static_cast<Eigen::Index>(p)] = bank_[p].predictive_loglik(arm, reward);
  hyper_.update(loglik);
  for (auto& post : bank_) post.condition(arm, reward);
}

// ---------------------------------------------------------------------------

OracleAgent::OracleAgent(PriorPtr prior, double noise_var, double delta, Rule rule, int horizon_hint)
    : rule_(rule),
      schedule_{delta, static_cast<int>(prior->num_arms()), 1, noise_var},
      posterior_(std::move(prior), noise_var, horizon_hint) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

Selection OracleAgent::select(RandomStream& rng) {
  Eigen::Index arm = 0;
  if (rule_ == Rule::ThompsonSampling) {
    arm = argmax_lowest(posterior_.sample(rng));
  } else {
    const double root_beta = std::sqrt(schedule_.beta(t_));
    arm = argmax_lowest(posterior_.mean() + root_beta * posterior_.variance().cwiseSqrt());
  }
  pending_ = arm;
  return {arm, -1};
}

void OracleAgent::observe(double reward) {
  if (!pending_) throw std::logic_error("observe called without a pending selection");
  posterior_.condition(*pending_, reward);
  pending_.reset();
  ++t_;
}

std::unique_ptr<Agent> make_agent(AgentKind kind, const Hyperprior& hyperprior, int true_prior, double noise_var,
                                  double delta, int horizon_hint) {
  switch (kind) {
    case AgentKind::PeGpTs:
      return std::make_unique<EliminationAgent>(hyperprior, noise_var, delta,
                                                EliminationAgent::Rule::ThompsonSampling, horizon_hint);
    case AgentKind::PeGpUcb:
      return std::make_unique<EliminationAgent>(hyperprior, noise_var, delta, EliminationAgent::Rule::Ucb,
                                                horizon_hint);
    case AgentKind::HpGpTs:
      return std::make_unique<HyperposteriorAgent>(hyperprior, noise_var,
                                                   HyperposteriorAgent::PriorChoice::Sample, horizon_hint);
    case AgentKind::MapGpTs:
      return std::make_unique<HyperposteriorAgent>(hyperprior, noise_var, HyperposteriorAgent::PriorChoice::Map,
                                                   horizon_hint);
    case AgentKind::OracleGpTs:
    case AgentKind::OracleGpUcb: {
      if (true_prior < 0 || true_prior >= static_cast<int>(hyperprior.size()))
        throw std::invalid_argument("oracle agents need the index of the true prior");
      const auto rule = kind == AgentKind::OracleGpUcb ? OracleAgent::Rule::Ucb : OracleAgent::Rule::ThompsonSampling;
      return std::make_unique<OracleAgent>(hyperprior.priors[static_cast<std::size_t>(true_prior)], noise_var, delta,
                                           rule, horizon_hint);
    }
  }
  throw std::invalid_argument("unknown agent kind");
}

}  // namespace gpts
