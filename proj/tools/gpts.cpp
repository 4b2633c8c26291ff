// Command-line driver: run experiments, verification suites, MIG tables and
// trace aggregation.
#include "gpts/experiment.hpp"
#include "gpts/io.hpp"
#include "gpts/metrics.hpp"
#include "gpts/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace gpts;

namespace {

// Flags that map one-to-one onto config keys. String-valued keys are passed
// through verbatim; the others are parsed as JSON scalars.
struct FlagBinding {
  const char* flag;
  const char* key;
  bool verbatim;
  const char* help;
};

const FlagBinding kBindings[] = {
    {"--setup", "experiment.setup", true, "kernel | lengthscale | subspace | lengthscale-scaling | subspace-scaling | bucketed-data"},
    {"--T", "experiment.T", false, "horizon"},
    {"--n", "experiment.n", false, "number of arms"},
    {"--P", "experiment.P", false, "number of priors (scaling setups)"},
    {"--delta", "experiment.delta", false, "confidence level of the elimination agents"},
    {"--noise-var", "experiment.noise_var", false, "observation noise variance"},
    {"--seeds", "experiment.seeds", false, "number of seeds"},
    {"--seed-base", "experiment.seed_base", false, "first seed"},
    {"--workers", "experiment.workers", false, "worker threads (0: all cores)"},
    {"--agents", "experiment.agents", true, "comma-separated roster"},
    {"--lengthscales", "experiment.lengthscales", true, "comma-separated lengthscales (lengthscale setup)"},
    {"--prior-csv", "data.prior_csv", true, "bucketed prior data"},
    {"--test-csv", "data.test_csv", true, "bucketed test data"},
    {"--oracle-prior", "data.oracle_prior", false, "prior index given to the oracle agents"},
    {"--out", "output.dir", true, "output directory"},
};

struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::optional<std::string>> values = std::vector<std::optional<std::string>>(std::size(kBindings));
  bool log_transform = false;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_file, "JSON file of flat dotted keys");
  for (std::size_t i = 0; i < std::size(kBindings); ++i)
    cmd->add_option(kBindings[i].flag, flags.values[i], kBindings[i].help);
  cmd->add_flag("--log-transform", flags.log_transform, "map bucketed values v to log(v / 10 + 0.1)");
  cmd->add_option("--set", flags.sets, "key=value override, repeatable");
}

// Precedence: defaults, then the config file, then flags, then --set.
RunConfig resolve(const ConfigFlags& flags) {
  RunConfig cfg;
  if (!flags.config_file.empty()) cfg = load_config_file(flags.config_file, cfg);
  for (std::size_t i = 0; i < std::size(kBindings); ++i) {
    if (!flags.values[i]) continue;
    const auto& b = kBindings[i];
    if (b.verbatim)
      apply_config_value(cfg, b.key, nlohmann::json(*flags.values[i]));
    else
      apply_override(cfg, std::string(b.key) + "=" + *flags.values[i]);
  }
  if (flags.log_transform) apply_config_value(cfg, "data.log_transform", true);
  for (const auto& s : flags.sets) apply_override(cfg, s);
  cfg.experiment.validate();
  return cfg;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> prior_ids(const Experiment& experiment) {
  std::vector<std::string> ids;
  for (const auto& p : experiment.reference_hyperprior()->priors) ids.push_back(p->id);
  return ids;
}

int finish_run(const Experiment& experiment, const RunConfig& cfg, const std::vector<EpisodeRecord>& records,
               const fs::path& out_dir, bool write_trace) {
  const auto summary = summarize(records, experiment.num_priors());
  const auto bounds = bound_report(experiment, records);
  if (write_trace) {
    std::ostringstream trace, episodes;
    write_trace_csv(trace, records);
    write_episodes_csv(episodes, records);
    write_text_file((out_dir / "trace.csv").string(), trace.str());
    write_text_file((out_dir / "episodes.csv").string(), episodes.str());
    write_text_file((out_dir / "config.echo.json").string(), dump(config_to_json(cfg)));
  }
  write_text_file((out_dir / "summary.json").string(),
                  dump(summary_to_json(summary, prior_ids(experiment), cfg, &bounds)));

  for (const auto& r : summary.regret)
    std::cerr << agent_name(r.agent) << ": final regret " << r.final_mean << " +- " << r.final_se << '\n';
  if (summary.aborted_episodes > 0) {
    std::cerr << "error: " << summary.aborted_episodes << " episode(s) aborted\n";
    for (const auto& r : records)
      if (r.aborted) std::cerr << "  seed " << r.seed << ' ' << agent_name(r.agent) << ": " << r.abort_reason << '\n';
    return 1;
  }
  return 0;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
  const fs::path probe = dir / ".write-probe";
  std::ofstream out(probe);
  if (!out) throw std::runtime_error("output directory '" + dir.string() + "' is not writable");
  out.close();
  fs::remove(probe, ec);
}

int cmd_run(const ConfigFlags& flags, bool quiet) {
  const RunConfig cfg = resolve(flags);
  const Experiment experiment(cfg.experiment);
  const fs::path out_dir(cfg.out_dir);
  ensure_dir(out_dir);
  ProgressFn progress;
  if (!quiet)
    progress = [](std::size_t done, std::size_t total) {
      std::cerr << "\rseeds " << done << "/" << total << std::flush;
      if (done == total) std::cerr << '\n';
    };
  const auto records = run_experiment(experiment, progress);
  return finish_run(experiment, cfg, records, out_dir, true);
}

int cmd_verify(const std::string& suite, const SuiteOptions& options, const std::string& out_file) {
  const auto report = run_suite(suite, options);
  const std::string text = dump(suite_to_json(report));
  std::cout << text;
  if (!out_file.empty()) write_text_file(out_file, text);
  if (!report.pass()) std::cerr << "verify " << suite << ": FAILED\n";
  return report.pass() ? 0 : 1;
}

int cmd_mig(const ConfigFlags& flags, const std::string& out_file) {
  const RunConfig cfg = resolve(flags);
  const Experiment experiment(cfg.experiment);
  const auto hyper = experiment.reference_hyperprior();
  const int horizon = std::min<int>(cfg.experiment.horizon, static_cast<int>(hyper->num_arms()));
  const auto table = mig_table(*hyper, cfg.experiment.noise_var, horizon);
  const std::string text = dump(mig_to_json(table, cfg.experiment.noise_var));
  std::cout << text;
  if (!out_file.empty()) write_text_file(out_file, text);
  return 0;
}

// Keys that may differ between runs merged by `report`.
bool mergeable_key(const std::string& key) {
  return key == "schema_version" || key == "experiment.seeds" || key == "experiment.seed_base" ||
         key == "experiment.workers" || key == "output.dir";
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out) {
  if (dirs.empty()) throw std::invalid_argument("report needs at least one run directory");
  std::optional<nlohmann::json> first_echo;
  std::vector<EpisodeRecord> records;
  for (const auto& d : dirs) {
    const fs::path dir(d);
    std::ifstream in(dir / "config.echo.json");
    if (!in) throw std::runtime_error("'" + d + "' has no config.echo.json");
    const auto echo = nlohmann::json::parse(in);
    if (echo.value("schema_version", -1) != kSchemaVersion)
      throw std::runtime_error("'" + d + "' was written with a different schema version");
    if (!first_echo) {
      first_echo = echo;
    } else {
      for (const auto& [key, value] : echo.items())
        if (!mergeable_key(key) && first_echo->value(key, nlohmann::json()) != value)
          throw std::runtime_error("runs disagree on '" + key + "'; only seeds may differ");
    }
    auto part = read_run_records((dir / "trace.csv").string(), (dir / "episodes.csv").string());
    records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  if (records.empty()) throw std::runtime_error("no episodes found");

  RunConfig cfg;
  nlohmann::json keys = *first_echo;
  keys.erase("schema_version");
  apply_config_object(cfg, keys);
  int total_seeds = 0;
  std::vector<std::uint64_t> seen;
  for (const auto& r : records)
    if (std::find(seen.begin(), seen.end(), r.seed) == seen.end()) seen.push_back(r.seed);
  total_seeds = static_cast<int>(seen.size());
  cfg.experiment.seeds = total_seeds;
  cfg.out_dir = out;
  const Experiment experiment(cfg.experiment);
  const fs::path out_dir(out);
  ensure_dir(out_dir);
  return finish_run(experiment, cfg, records, out_dir, false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process bandits with an unknown prior"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run an experiment and write trace.csv, summary.json, config.echo.json");
  add_config_flags(run, run_flags);
  run->add_flag("--quiet", quiet, "no progress output");

  std::string suite, verify_out, verify_setup;
  SuiteOptions suite_opts;
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite, "gp-oracle | lemma1 | lemma3 | theorem4 | elimination-safety")->required();
  verify->add_option("--setup", suite_opts.setup, "setup for theorem4 (default kernel)");
  verify->add_option("--seeds", suite_opts.seeds, "episode count (default: the suite's own)");
  verify->add_option("--seed-base", suite_opts.seed_base, "first seed");
  verify->add_option("--workers", suite_opts.workers, "worker threads (0: all cores)");
  verify->add_option("--out", verify_out, "also write the JSON report here");

  ConfigFlags mig_flags;
  std::string mig_out;
  auto* mig = app.add_subcommand("mig", "greedy information-gain table per prior");
  add_config_flags(mig, mig_flags);
  mig->add_option("--json", mig_out, "also write the JSON table here");

  std::vector<std::string> report_dirs;
  std::string report_out = "report";
  auto* report = app.add_subcommand("report", "aggregate run directories into one summary.json");
  report->add_option("dirs", report_dirs, "run directories (trace.csv, episodes.csv, config.echo.json)")->required();
  report->add_option("--out", report_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags, quiet);
    if (*verify) return cmd_verify(suite, suite_opts, verify_out);
    if (*mig) return cmd_mig(mig_flags, mig_out);
    if (*report) return cmd_report(report_dirs, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
