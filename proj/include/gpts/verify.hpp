#pragma once

#include "gpts/environment.hpp"
#include "gpts/experiment.hpp"
#include "gpts/gp.hpp"
#include "gpts/priors.hpp"
#include "gpts/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace gpts {

// ---- information gain ------------------------------------------------------

/// 1/2 log det(I + K_A / noise_var) for the multiset of arms A.
double gaussian_information(const MaterializedPrior& prior, const std::vector<Eigen::Index>& arms, double noise_var);

struct GreedyMig {
  std::vector<Eigen::Index> chosen;
  std::vector<double> gains;  // nonincreasing by submodularity
  double value = 0.0;         // lower bound on gamma_T; gamma_T <= value / (1 - 1/e)
};

/// Picks the distinct arm of largest posterior variance T times (ties to the
/// lowest index). Requires 0 <= T <= number of arms.
GreedyMig greedy_mig(const MaterializedPrior& prior, double noise_var, int horizon);

struct MigTable {
  int horizon = 0;
  std::vector<std::string> ids;
  std::vector<double> gamma;
  double gamma_max = 0.0;  // worst case over priors
  double gamma_avg = 0.0;  // hyperprior-weighted
};

MigTable mig_table(const Hyperprior& hyperprior, double noise_var, int horizon);

// ---- bounds ------------------------------------------------------------------

/// sqrt(2 |X| log|X| (sigma0^2 + sigma^2) t).
double theorem4_rhs(Eigen::Index num_arms, double sigma0_sq, double noise_var, int t);

struct Theorem4Check {
  std::vector<double> mean;
  std::vector<double> se;
  std::vector<double> rhs;
  int episodes = 0;
  double min_slack = 0.0;  // min over t of rhs - (mean + 3 se)
  int worst_t = 0;
  bool pass = false;
};

/// Mean cumulative regret + 3 SE <= rhs at every t, over the HP-GP-TS records.
Theorem4Check check_theorem4_bound(const std::vector<EpisodeRecord>& records, Eigen::Index num_arms,
                                   double sigma0_sq, double noise_var);

/// Terms of the PE-GP-TS high-probability bound evaluated at T. B uses the
/// worst prior; the last term uses the empirical mean of sum_t var_{t,p*}(x*).
struct Theorem1Terms {
  int horizon = 0;
  double beta_1 = 0.0;
  double beta_T = 0.0;
  double xi_T = 0.0;
  double B = 0.0;
  double C = 0.0;
  double gamma_hat = 0.0;
  double gamma_bar = 0.0;
  double term_priors = 0.0;       // 2 |P| B
  double term_noise = 0.0;        // 2 sqrt(xi_T |P| T)
  double term_information = 0.0;  // 2 sqrt(C T beta_T gamma_hat |P|)
  double term_optimum = 0.0;      // 2 sqrt(C T beta_T sum var), empirical
  double sum_var_at_opt = 0.0;
  double bound = 0.0;
  double empirical_regret = 0.0;  // PE-GP-TS mean final regret
  bool holds = false;
};

struct BoundReport {
  double sigma0_sq = 0.0;
  Eigen::Index num_arms = 0;
  MigTable mig;
  bool has_theorem4 = false;
  Theorem4Check theorem4;
  bool has_theorem1 = false;
  Theorem1Terms theorem1;
};

/// Bound terms for one experiment. Setups that draw arms per seed use the
/// reference hyperprior for the information-gain terms.
BoundReport bound_report(const Experiment& experiment, const std::vector<EpisodeRecord>& records);

// ---- confidence-band coverage ------------------------------------------------------

struct CoverageOptions {
  int num_arms = 50;
  int horizon = 50;
  int episodes = 500;
  double delta = 0.05;
  double noise_var = 0.0625;
  std::uint64_t seed_base = 0;
  AgentKind agent = AgentKind::HpGpTs;
};

struct CoverageReport {
  int episodes = 0;
  int violations = 0;            // episodes where either event failed
  int posterior_violations = 0;  // |f - mu_{t,p*}| > sqrt(beta_t) sigma_{t,p*}
  int sample_violations = 0;     // |f~_{t,p} - mu_{t,p}| > sqrt(beta_t) sigma_{t,p}
  double frequency = 0.0;
  double threshold = 0.0;  // delta + 2 sqrt(delta (1 - delta) / episodes)
  bool pass = false;
};

/// Kernel setup on `num_arms` arms. The checker keeps its own posterior bank
/// and draws fresh samples for every prior and round, independently of the
/// agent driving the arm sequence.
CoverageReport check_lemma1_coverage(const CoverageOptions& options);

// ---- hyperposterior concentration ----------------------------------------

double lemma3_rhs(double m, double p0);
/// Same bound with both Phi terms replaced by erfc bounds; never exceeds lemma3_rhs.
double lemma3_rhs_sharp(double m, double p0);

/// ||Sigma^{-1/2} mu|| with mu the prior-mean gap on `arms` and Sigma = K + noise I.
/// Throws std::invalid_argument unless the two priors share their covariance.
double whitened_mean_gap(const MaterializedPrior& truth, const MaterializedPrior& other,
                         const std::vector<Eigen::Index>& arms, double noise_var);

struct Lemma3Result {
  double p0 = 0.0;
  int t = 0;
  double gap = 0.0;
  double m = 0.0;
  double rhs = 0.0;
  double rhs_sharp = 0.0;
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double margin = 0.0;  // mc_mean - rhs
  bool pass = false;    // margin >= -3 mc_se
  bool sharp_ok = false;
};

/// Monte-Carlo estimate of E[P_{t+1}(p*)] over y | p* for a fixed arm
/// sequence, with the hyperposterior updated round by round.
Lemma3Result check_lemma3_bound(const PriorPtr& truth, const PriorPtr& other, const std::vector<Eigen::Index>& arms,
                                double noise_var, double p0, int draws, RandomStream& rng);

/// Five values of P0 times four (t, mean gap) scenarios on a shared RBF kernel.
std::vector<Lemma3Result> lemma3_sweep(int draws = 20000, std::uint64_t seed = 0);

// ---- dense reference posterior -------------------------------------------------

struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Direct LDLT solve of the posterior mean and covariance over every arm.
DensePosterior dense_posterior(const MaterializedPrior& prior, const std::vector<Eigen::Index>& arms,
                               const std::vector<double>& rewards, double noise_var);

// ---- suites --------------------------------------------------------------------

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // how value compares to limit when passing, e.g. "<="
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  bool pass() const;
};

struct SuiteOptions {
  std::string setup;       // theorem4 only; empty means kernel
  int seeds = 0;           // 0: the suite's default
  std::uint64_t seed_base = 0;
  int workers = 0;
};

const std::vector<std::string>& suite_names();

SuiteReport run_gp_oracle_suite(std::uint64_t seed = 0);
SuiteReport run_lemma1_suite(const SuiteOptions& options = {});
SuiteReport run_lemma3_suite(const SuiteOptions& options = {});
SuiteReport run_theorem4_suite(const SuiteOptions& options = {});
SuiteReport run_elimination_safety_suite(const SuiteOptions& options = {});

/// Dispatches by name; throws std::invalid_argument for an unknown suite.
SuiteReport run_suite(const std::string& name, const SuiteOptions& options = {});

}  // namespace gpts
