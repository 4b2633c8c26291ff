#pragma once

#include "gpts/agents.hpp"
#include "gpts/environment.hpp"
#include "gpts/priors.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gpts {

/// Fully resolved experiment parameters. Defaults reproduce the synthetic
/// setups: 500 arms, horizon 500, noise variance 0.25^2, delta 0.05.
struct ExperimentConfig {
  std::string setup = "kernel";
  int horizon = 500;
  int num_arms = 500;
  int num_priors = 0;  // 0: the setup's default
  double delta = 0.05;
  double noise_var = 0.0625;
  int seeds = 100;
  std::uint64_t seed_base = 0;
  int workers = 0;  // 0: hardware concurrency
  std::vector<AgentKind> roster = all_agents();
  std::vector<double> lengthscales;  // lengthscale setup override
  double arm_range = 20.0;
  int subspace_dims = 16;

  // bucketed-data setup
  std::string prior_csv;
  std::string test_csv;
  bool log_transform = false;
  double ridge = kDefaultRidge;
  int oracle_prior = -1;  // prior index the oracle agents condition on

  /// Throws std::invalid_argument on any inconsistency.
  void validate() const;
  int resolved_workers() const;
};

const std::vector<std::string>& setup_names();

/// A runnable experiment: per-seed prior sets, environments and rosters.
class Experiment {
 public:
  struct Instance {
    std::shared_ptr<const Hyperprior> hyperprior;
    ArmMatrix arms;  // empty for bucketed data
    Environment env;
  };

  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  std::vector<std::uint64_t> seeds() const;
  /// Number of priors every instance carries.
  int num_priors() const { return num_priors_; }

  /// Root of all random streams of one seed.
  std::uint64_t root_seed(std::uint64_t seed) const;
  Instance instance(std::uint64_t seed) const;
  /// A hyperprior representative of the experiment (seed_base's for setups
  /// that draw arms per seed).
  std::shared_ptr<const Hyperprior> reference_hyperprior() const;

 private:
  ExperimentConfig config_;
  int num_priors_ = 0;
  std::shared_ptr<const Hyperprior> fixed_;  // shared by every seed when arms are fixed
  std::vector<Eigen::VectorXd> test_measurements_;
};

/// Evenly spaced 1-D arms on [0, range].
ArmMatrix equispaced_arms(int n, double range);
/// Arms drawn uniformly on [0, range]^dims.
ArmMatrix uniform_arms(int n, int dims, double range, RandomStream& rng);

/// Reads `config.test_csv`: each sample_id is one measurement of every arm.
std::vector<Eigen::VectorXd> read_test_measurements(const std::string& path, bool log_transform);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (seed, agent) episode. Records are ordered by seed, then roster
/// order; the result does not depend on the worker count.
std::vector<EpisodeRecord> run_experiment(const Experiment& experiment, const ProgressFn& progress = {});

/// Runs one seed for the whole roster with common random numbers.
std::vector<EpisodeRecord> run_seed(const Experiment& experiment, std::uint64_t seed);

}  // namespace gpts
