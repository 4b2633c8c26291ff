#pragma once

#include "gpts/agents.hpp"
#include "gpts/priors.hpp"
#include "gpts/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace gpts {

/// Ground truth of one episode.
struct Environment {
  int true_prior = -1;  // -1 when f did not come from a prior in the set
  Eigen::VectorXd f;
  double noise_var = 0.0625;
  Eigen::Index x_star = 0;
  double f_star = 0.0;

  /// Sets f, x_star (lowest index among maxima) and f_star.
  void set_function(Eigen::VectorXd values);
};

/// Draws p* from the hyperprior weights, then f ~ N(mean, cov + jitter I) of p*.
Environment sample_environment(const Hyperprior& hyperprior, double noise_var, RandomStream& rng);

struct Step {
  Eigen::Index arm = 0;
  int prior = -1;  // -1 for oracle agents
  double reward = 0.0;
  double instant_regret = 0.0;
  int active_priors = -1;  // elimination agents only
  double entropy = std::numeric_limits<double>::quiet_NaN();  // hyperposterior agents only
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  AgentKind agent = AgentKind::HpGpTs;
  std::string setup;
  int true_prior = -1;
  std::vector<Step> steps;
  bool aborted = false;
  std::string abort_reason;
  /// Sum over rounds of the true prior's posterior variance at x*, tracked for
  /// elimination agents when p* is known; NaN otherwise.
  double sum_var_at_opt = std::numeric_limits<double>::quiet_NaN();
  /// Whether p* was eliminated during the episode (elimination agents only).
  bool true_prior_eliminated = false;

  double cumulative_regret() const;
  std::vector<double> cumulative_curve() const;
};

struct EpisodeOptions {
  /// Track sum_t sigma^2_{t,p*}(x*) (elimination agents, p* known).
  bool track_var_at_opt = false;
};

/// Runs `horizon` rounds: select, reward f[x] + sqrt(noise_var) * N(0, 1) from
/// `noise_rng`, observe. Numerical failures and empty active sets end the
/// episode early with `aborted` set.
EpisodeRecord run_episode(const Environment& env, Agent& agent, int horizon, RandomStream noise_rng,
                          RandomStream& agent_rng, const EpisodeOptions& options = {});

}  // namespace gpts
