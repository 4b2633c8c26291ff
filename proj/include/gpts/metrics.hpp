#pragma once

#include "gpts/agents.hpp"
#include "gpts/environment.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace gpts {

/// Percent levels reported for the final-regret distribution.
inline constexpr std::array<double, 6> kRegretQuantiles = {5.0, 25.0, 50.0, 75.0, 90.0, 95.0};

/// Linear interpolation between order statistics (position q * (n - 1)).
double quantile_linear(std::vector<double> values, double q);
double sample_mean(const std::vector<double>& values);
/// Sample standard deviation / sqrt(n); 0 for a single value.
double standard_error(const std::vector<double>& values);

/// Entropy of a distribution putting q on one of `num_priors` choices and
/// spreading 1 - q evenly over the rest.
double reference_entropy(double q, int num_priors);

struct AgentRegret {
  AgentKind agent = AgentKind::HpGpTs;
  int episodes = 0;
  std::vector<double> mean_curve;
  std::vector<double> se_curve;
  double final_mean = 0.0;
  double final_se = 0.0;
  std::array<double, kRegretQuantiles.size()> quantiles{};
};

struct AgentSelection {
  AgentKind agent = AgentKind::HpGpTs;
  int episodes = 0;  // episodes with a known p*
  /// Row p*: percent of rounds spent on each p_t. Rows without any round are
  /// all zero and flagged in `empty_rows`.
  Eigen::MatrixXd confusion;
  std::vector<bool> empty_rows;
  double accuracy = 0.0;
  std::vector<double> mean_active_priors;  // elimination agents
  std::vector<double> mean_entropy;        // hyperposterior agents
};

struct Summary {
  int num_priors = 0;
  int horizon = 0;
  int total_episodes = 0;
  int aborted_episodes = 0;
  std::vector<AgentRegret> regret;       // one per agent, first-appearance order
  std::vector<AgentSelection> selection;  // non-oracle agents only
  double entropy_ref_80 = 0.0;
  double entropy_ref_90 = 0.0;
};

/// Aggregates episodes per agent. Cumulative curves of episodes that stopped
/// early are held at their last value up to the longest episode, and the
/// |P_t| and entropy curves average over the episodes still running at t.
/// Throws std::invalid_argument on empty input.
Summary summarize(const std::vector<EpisodeRecord>& records, int num_priors);

}  // namespace gpts
