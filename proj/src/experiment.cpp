#include "gpts/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace gpts {

const std::vector<std::string>& setup_names() {
  static const std::vector<std::string> names = {"kernel",         "lengthscale",       "subspace",
                                                 "lengthscale-scaling", "subspace-scaling", "bucketed-data"};
  return names;
}

namespace {

bool subspace_setup(const std::string& setup) { return setup == "subspace" || setup == "subspace-scaling"; }

}  // namespace

void ExperimentConfig::validate() const {
  if (std::find(setup_names().begin(), setup_names().end(), setup) == setup_names().end())
    throw std::invalid_argument("unknown setup '" + setup + "'");
  if (horizon < 1) throw std::invalid_argument("T must be >= 1");
  if (setup != "bucketed-data" && num_arms < 1) throw std::invalid_argument("n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw std::invalid_argument("noise variance must be positive");
  if (seeds < 1) throw std::invalid_argument("seed count must be >= 1");
  if (workers < 0) throw std::invalid_argument("worker count must be >= 0");
  if (roster.empty()) throw std::invalid_argument("agent roster is empty");
  if (num_priors < 0) throw std::invalid_argument("prior count must be >= 0");
  if (!(arm_range > 0.0)) throw std::invalid_argument("arm range must be positive");
  if (setup == "kernel" && num_priors != 0 && num_priors != 6)
    throw std::invalid_argument("the kernel setup has exactly 6 priors");
  if (setup == "lengthscale") {
    const std::size_t m = lengthscales.empty() ? 4 : lengthscales.size();
    if (num_priors != 0 && static_cast<std::size_t>(num_priors) != m)
      throw std::invalid_argument("lengthscale setup: P does not match the lengthscale list");
    for (double l : lengthscales)
      if (!(l > 0.0)) throw std::invalid_argument("lengthscales must be positive");
  }
  if (setup == "subspace" && num_priors != 0 && num_priors != 5)
    throw std::invalid_argument("the subspace setup has 5 priors; use subspace-scaling for other counts");
  if (setup == "subspace-scaling") {
    const int p = num_priors == 0 ? 5 : num_priors;
    if (p < 5 || p > subspace_dims)
      throw std::invalid_argument("subspace-scaling supports P in [5, " + std::to_string(subspace_dims) + "]");
  }
  if (setup == "bucketed-data") {
    if (prior_csv.empty() || test_csv.empty())
      throw std::invalid_argument("bucketed-data needs both a prior CSV and a test CSV");
    if (!(ridge >= 0.0)) throw std::invalid_argument("ridge must be nonnegative");
    const bool has_oracle = std::any_of(roster.begin(), roster.end(), [](AgentKind k) { return is_oracle(k); });
    if (has_oracle && oracle_prior < 0)
      throw std::invalid_argument("bucketed-data: oracle agents need data.oracle_prior");
  }
}

int ExperimentConfig::resolved_workers() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

ArmMatrix equispaced_arms(int n, double range) {
  ArmMatrix arms(n, 1);
  for (int i = 0; i < n; ++i) arms(i, 0) = n == 1 ? 0.0 : range * i / (n - 1);
  return arms;
}

ArmMatrix uniform_arms(int n, int dims, double range, RandomStream& rng) {
  ArmMatrix arms(n, dims);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dims; ++j) arms(i, j) = range * rng.uniform();
  return arms;
}

std::vector<Eigen::VectorXd> read_test_measurements(const std::string& path, bool log_transform) {
  const auto data = read_bucketed_csv(path, log_transform);
  // bucket_id is ignored: sample_id alone identifies a measurement.
  BucketedDataset flat;
  flat.records = data.records;
  for (auto& r : flat.records) r.bucket = 0;
  auto grouped = flat.group();
  return std::move(grouped.samples.front());
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& s = config_.setup;
  if (s == "kernel") {
    fixed_ = std::make_shared<Hyperprior>(kernel_prior_set(equispaced_arms(config_.num_arms, config_.arm_range)));
  } else if (s == "lengthscale") {
    const auto ls = config_.lengthscales.empty() ? std::vector<double>{4.0, 2.0, 1.0, 0.5} : config_.lengthscales;
    fixed_ = std::make_shared<Hyperprior>(
        lengthscale_prior_set(equispaced_arms(config_.num_arms, config_.arm_range), ls));
  } else if (s == "lengthscale-scaling") {
    const int p = config_.num_priors == 0 ? 8 : config_.num_priors;
    fixed_ = std::make_shared<Hyperprior>(lengthscale_prior_set(equispaced_arms(config_.num_arms, config_.arm_range),
                                                                equidistant_lengthscales(p)));
  } else if (s == "bucketed-data") {
    fixed_ = std::make_shared<Hyperprior>(
        empirical_prior_set(read_bucketed_csv(config_.prior_csv, config_.log_transform), config_.ridge));
    test_measurements_ = read_test_measurements(config_.test_csv, config_.log_transform);
    if (test_measurements_.front().size() != fixed_->num_arms())
      throw std::invalid_argument("test data and prior data disagree on the number of arms");
    if (config_.oracle_prior >= static_cast<int>(fixed_->size()))
      throw std::invalid_argument("data.oracle_prior is out of range");
  }
  if (fixed_) {
    num_priors_ = static_cast<int>(fixed_->size());
  } else {
    num_priors_ = s == "subspace" ? 5 : (config_.num_priors == 0 ? 5 : config_.num_priors);
  }
}

std::vector<std::uint64_t> Experiment::seeds() const {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < config_.seeds; ++i) out.push_back(config_.seed_base + static_cast<std::uint64_t>(i));
  return out;
}

std::uint64_t Experiment::root_seed(std::uint64_t seed) const {
  return RandomStream::derive_seed(seed, "gpts/" + config_.setup);
}

Experiment::Instance Experiment::instance(std::uint64_t seed) const {
  const std::uint64_t root = root_seed(seed);
  RandomStream env_rng = RandomStream::derive(root, "environment");
  Instance inst;
  if (subspace_setup(config_.setup)) {
    RandomStream arm_rng = RandomStream::derive(root, "arms");
    inst.arms = uniform_arms(config_.num_arms, config_.subspace_dims, config_.arm_range, arm_rng);
    inst.hyperprior = std::make_shared<Hyperprior>(subspace_prior_set(inst.arms, num_priors_));
  } else {
    inst.hyperprior = fixed_;
  }
  if (config_.setup == "bucketed-data") {
    const auto count = test_measurements_.size();
    const auto pick = std::min(count - 1, static_cast<std::size_t>(env_rng.uniform() * static_cast<double>(count)));
    inst.env.noise_var = config_.noise_var;
    inst.env.set_function(test_measurements_[pick]);
  } else {
    inst.env = sample_environment(*inst.hyperprior, config_.noise_var, env_rng);
  }
  return inst;
}

std::shared_ptr<const Hyperprior> Experiment::reference_hyperprior() const {
  if (fixed_) return fixed_;
  return instance(config_.seed_base).hyperprior;
}

std::vector<EpisodeRecord> run_seed(const Experiment& experiment, std::uint64_t seed) {
  const auto& cfg = experiment.config();
  const auto inst = experiment.instance(seed);
  const std::uint64_t root = experiment.root_seed(seed);
  const std::uint64_t noise_seed = RandomStream::derive_seed(root, "noise");
  const int true_prior = inst.env.true_prior >= 0 ? inst.env.true_prior : cfg.oracle_prior;

  std::vector<EpisodeRecord> out;
  out.reserve(cfg.roster.size());
  for (AgentKind kind : cfg.roster) {
    RandomStream agent_rng = RandomStream::derive(root, "agent/" + std::string(agent_name(kind)));
    auto agent = make_agent(kind, *inst.hyperprior, true_prior, cfg.noise_var, cfg.delta, cfg.horizon);
    EpisodeOptions options;
    options.track_var_at_opt = is_elimination(kind);
    auto rec = run_episode(inst.env, *agent, cfg.horizon, RandomStream(noise_seed), agent_rng, options);
    rec.seed = seed;
    rec.setup = cfg.setup;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EpisodeRecord> run_experiment(const Experiment& experiment, const ProgressFn& progress) {
  const auto seeds = experiment.seeds();
  const std::size_t roster = experiment.config().roster.size();
  std::vector<EpisodeRecord> records(seeds.size() * roster);
  const int workers = std::min<int>(experiment.config().resolved_workers(), static_cast<int>(seeds.size()));

  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  // Static partition: worker w runs seeds w, w + W, w + 2W, ...
  auto work = [&](int w) {
    try {
      for (std::size_t i = static_cast<std::size_t>(w); i < seeds.size(); i += static_cast<std::size_t>(workers)) {
        auto recs = run_seed(experiment, seeds[i]);
        for (std::size_t a = 0; a < roster; ++a) records[i * roster + a] = std::move(recs[a]);
        const std::size_t d = ++done;
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(d, seeds.size());
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

}  // namespace gpts
