#pragma once

#include "gpts/gp.hpp"
#include "gpts/priors.hpp"
#include "gpts/random.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gpts {

/// Confidence parameters of the elimination agents.
///
///   beta_t = 2 log(2 |X| |P| pi^2 t^2 / (3 delta))      (regret-bound version)
///   xi_t   = 2 sigma^2 log(|P| pi^2 t^2 / (3 delta))
///
/// The concentration-interval version of beta drops the leading 2 inside the
/// log; it is exposed separately for the coverage checks.
struct ConfidenceSchedule {
  double delta = 0.05;
  int num_arms = 1;
  int num_priors = 1;
  double noise_var = 0.0625;

  double beta(int t) const;
  double xi(int t) const;
  double beta_concentration(int t) const;
};

enum class AgentKind { PeGpTs, PeGpUcb, HpGpTs, MapGpTs, OracleGpTs, OracleGpUcb };

std::string_view agent_name(AgentKind kind);
AgentKind parse_agent(std::string_view name);
const std::vector<AgentKind>& all_agents();
bool is_oracle(AgentKind kind);
bool is_elimination(AgentKind kind);
bool is_hyperposterior(AgentKind kind);

struct Selection {
  Eigen::Index arm = 0;
  int prior = -1;  // -1 for oracle agents
};

/// Index of the largest entry; ties go to the lowest index.
Eigen::Index argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& v);

/// One decision policy over a shared arm set. `select` draws the next arm,
/// `observe` feeds back the reward of the arm just selected.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentKind kind() const = 0;
  virtual Selection select(RandomStream& rng) = 0;
  virtual void observe(double reward) = 0;

  /// Set once the active prior set has become empty; the episode must stop.
  bool aborted() const { return !abort_reason_.empty(); }
  const std::string& abort_reason() const { return abort_reason_; }

  /// |P_t| for elimination agents.
  virtual std::optional<int> active_prior_count() const { return std::nullopt; }
  /// Hyperposterior entropy (nats) for hyperposterior agents.
  virtual std::optional<double> hyperposterior_entropy() const { return std::nullopt; }

 protected:
  std::string abort_reason_;
};

/// Bookkeeping of prior elimination: active set, per-prior selection counts,
/// running prediction-error sums and running confidence-width sums.
class EliminationState {
 public:
  explicit EliminationState(int num_priors);

  bool active(int p) const { return active_[static_cast<std::size_t>(p)]; }
  int active_count() const { return active_count_; }
  std::vector<int> active_priors() const;
  int selections(int p) const { return counts_[static_cast<std::size_t>(p)]; }
  double error_sum(int p) const { return error_sums_[static_cast<std::size_t>(p)]; }
  double width_sum(int p) const { return width_sums_[static_cast<std::size_t>(p)]; }

  /// Records one round where prior p was selected: prediction error eta,
  /// confidence width sqrt(beta_t) sigma_{t,p}(x_t), and noise scale xi_t.
  /// Returns true when p is eliminated by this update.
  bool record(int p, double eta, double width, double xi);

 private:
  std::vector<bool> active_;
  std::vector<int> counts_;
  std::vector<double> error_sums_;
  std::vector<double> width_sums_;
  int active_count_;
};

/// Log-space weights over priors with max-shift normalization.
class HyperposteriorState {
 public:
  explicit HyperposteriorState(const Eigen::VectorXd& weights);

  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& log_weights() const { return log_weights_; }
  /// Adds a log-likelihood to every prior and renormalizes.
  void update(const Eigen::Ref<const Eigen::VectorXd>& log_likelihoods);
  double entropy() const;
  /// Largest weight, ties to the lowest index.
  int map_index() const;

 private:
  void normalize();
  Eigen::VectorXd log_weights_;
  Eigen::VectorXd weights_;
};

/// Prior elimination with Thompson sampling or with joint UCB maximization.
class EliminationAgent final : public Agent {
 public:
  enum class Rule { ThompsonSampling, Ucb };
  EliminationAgent(const Hyperprior& hyperprior, double noise_var, double delta, Rule rule, int horizon_hint = 16);

  AgentKind kind() const override { return rule_ == Rule::Ucb ? AgentKind::PeGpUcb : AgentKind::PeGpTs; }
  Selection select(RandomStream& rng) override;
  void observe(double reward) override;
  std::optional<int> active_prior_count() const override { return elimination_.active_count(); }

  const EliminationState& elimination() const { return elimination_; }
  const ConfidenceSchedule& schedule() const { return schedule_; }
  const PosteriorState& posterior(int p) const { return bank_[static_cast<std::size_t>(p)]; }
  int round() const { return t_; }

 private:
  Rule rule_;
  ConfidenceSchedule schedule_;
  std::vector<PosteriorState> bank_;
  EliminationState elimination_;
  int t_ = 1;
  std::optional<Selection> pending_;
};

/// Bi-level sampling from the hyperposterior (or its mode, for MAP).
class HyperposteriorAgent final : public Agent {
 public:
  enum class PriorChoice { Sample, Map };
  HyperposteriorAgent(const Hyperprior& hyperprior, double noise_var, PriorChoice choice, int horizon_hint = 16);

  AgentKind kind() const override { return choice_ == PriorChoice::Map ? AgentKind::MapGpTs : AgentKind::HpGpTs; }
  Selection select(RandomStream& rng) override;
  void observe(double reward) override;
  std::optional<double> hyperposterior_entropy() const override { return hyper_.entropy(); }

  const HyperposteriorState& hyperposterior() const { return hyper_; }
  const PosteriorState& posterior(int p) const { return bank_[static_cast<std::size_t>(p)]; }

 private:
  PriorChoice choice_;
  std::vector<PosteriorState> bank_;
  HyperposteriorState hyper_;
  std::optional<Selection> pending_;
};

/// GP-TS or GP-UCB that knows the true prior. UCB uses the regret-bound beta
/// with a single prior.
class OracleAgent final : public Agent {
 public:
  enum class Rule { ThompsonSampling, Ucb };
  OracleAgent(PriorPtr prior, double noise_var, double delta, Rule rule, int horizon_hint = 16);

  AgentKind kind() const override { return rule_ == Rule::Ucb ? AgentKind::OracleGpUcb : AgentKind::OracleGpTs; }
  Selection select(RandomStream& rng) override;
  void observe(double reward) override;

  const PosteriorState& posterior() const { return posterior_; }

 private:
  Rule rule_;
  ConfidenceSchedule schedule_;
  PosteriorState posterior_;
  int t_ = 1;
  std::optional<Eigen::Index> pending_;
};

/// Builds an agent of `kind`. Oracle agents receive `true_prior` only.
std::unique_ptr<Agent> make_agent(AgentKind kind, const Hyperprior& hyperprior, int true_prior, double noise_var,
                                  double delta, int horizon_hint);

}  // namespace gpts
