#pragma once

#include "gpts/environment.hpp"
#include "gpts/experiment.hpp"
#include "gpts/metrics.hpp"
#include "gpts/verify.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gpts {

using Json = nlohmann::ordered_json;

/// Version stamped into summary.json, config.echo.json and the verify/mig
/// documents. Bump on any column or key change.
inline constexpr int kSchemaVersion = 1;

inline constexpr std::string_view kTraceHeader =
    "seed,agent,t,arm,prior,reward,instant_regret,cum_regret,active_priors,entropy";
inline constexpr std::string_view kEpisodesHeader = "seed,agent,true_prior,aborted,true_prior_eliminated,sum_var_at_opt";

/// Shortest decimal text that parses back to the same double; empty for NaN.
std::string format_double(double v);

/// Experiment parameters plus where to write.
struct RunConfig {
  ExperimentConfig experiment;
  std::string out_dir = "out";
};

/// Flat dotted keys accepted in config files and by --set.
const std::vector<std::string>& config_keys();

/// Applies one key. Throws std::invalid_argument for unknown keys or values of
/// the wrong type.
void apply_config_value(RunConfig& config, const std::string& key, const nlohmann::json& value);
/// Applies every key of a flat JSON object.
void apply_config_object(RunConfig& config, const nlohmann::json& object);
RunConfig load_config_file(const std::string& path, RunConfig base = {});
/// Parses `key=value`; the value is read as JSON when it parses, else as a string.
void apply_override(RunConfig& config, const std::string& assignment);

Json config_to_json(const RunConfig& config);

void write_trace_csv(std::ostream& out, const std::vector<EpisodeRecord>& records);
void write_episodes_csv(std::ostream& out, const std::vector<EpisodeRecord>& records);

/// Rebuilds records from a trace.csv / episodes.csv pair. Steps keep arm,
/// prior, reward, instant regret, |P_t| and entropy.
std::vector<EpisodeRecord> read_run_records(const std::string& trace_path, const std::string& episodes_path);

Json summary_to_json(const Summary& summary, const std::vector<std::string>& prior_ids, const RunConfig& config,
                     const BoundReport* bounds);
Json mig_to_json(const MigTable& table, double noise_var);
Json suite_to_json(const SuiteReport& report);

/// Writes `text` to `path` via a temporary file and rename.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gpts
