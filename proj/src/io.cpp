#include "gpts/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace gpts {

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "experiment.setup",     "experiment.T",           "experiment.n",         "experiment.P",
      "experiment.delta",     "experiment.noise_var",   "experiment.seeds",     "experiment.seed_base",
      "experiment.workers",   "experiment.agents",      "experiment.lengthscales", "experiment.arm_range",
      "experiment.subspace_dims", "data.prior_csv",     "data.test_csv",        "data.log_transform",
      "data.ridge",           "data.oracle_prior",      "output.dir"};
  return keys;
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const char* expected) {
  throw std::invalid_argument("config key '" + key + "' expects " + expected);
}

int as_int(const std::string& key, const nlohmann::json& v) {
  if (!v.is_number_integer()) bad_value(key, "an integer");
  return v.get<int>();
}

double as_double(const std::string& key, const nlohmann::json& v) {
  if (!v.is_number()) bad_value(key, "a number");
  return v.get<double>();
}

std::string as_string(const std::string& key, const nlohmann::json& v) {
  if (!v.is_string()) bad_value(key, "a string");
  return v.get<std::string>();
}

// Arrays, or comma-separated strings as typed on a command line.
std::vector<std::string> as_list(const std::string& key, const nlohmann::json& v) {
  std::vector<std::string> out;
  if (v.is_string()) {
    std::istringstream in(v.get<std::string>());
    std::string item;
    while (std::getline(in, item, ','))
      if (!item.empty()) out.push_back(item);
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (e.is_string())
        out.push_back(e.get<std::string>());
      else if (e.is_number())
        out.push_back(e.dump());
      else
        bad_value(key, "a list");
    }
  } else {
    bad_value(key, "a list");
  }
  return out;
}

}  // namespace

void apply_config_value(RunConfig& config, const std::string& key, const nlohmann::json& value) {
  auto& e = config.experiment;
  if (key == "experiment.setup") {
    e.setup = as_string(key, value);
  } else if (key == "experiment.T") {
    e.horizon = as_int(key, value);
  } else if (key == "experiment.n") {
    e.num_arms = as_int(key, value);
  } else if (key == "experiment.P") {
    e.num_priors = as_int(key, value);
  } else if (key == "experiment.delta") {
    e.delta = as_double(key, value);
  } else if (key == "experiment.noise_var") {
    e.noise_var = as_double(key, value);
  } else if (key == "experiment.seeds") {
    e.seeds = as_int(key, value);
  } else if (key == "experiment.seed_base") {
    if (!value.is_number_unsigned()) bad_value(key, "a nonnegative integer");
    e.seed_base = value.get<std::uint64_t>();
  } else if (key == "experiment.workers") {
    e.workers = as_int(key, value);
  } else if (key == "experiment.agents") {
    e.roster.clear();
    for (const auto& name : as_list(key, value)) e.roster.push_back(parse_agent(name));
  } else if (key == "experiment.lengthscales") {
    e.lengthscales.clear();
    for (const auto& s : as_list(key, value)) {
      try {
        e.lengthscales.push_back(std::stod(s));
      } catch (const std::logic_error&) {
        bad_value(key, "a list of numbers");
      }
    }
  } else if (key == "experiment.arm_range") {
    e.arm_range = as_double(key, value);
  } else if (key == "experiment.subspace_dims") {
    e.subspace_dims = as_int(key, value);
  } else if (key == "data.prior_csv") {
    e.prior_csv = as_string(key, value);
  } else if (key == "data.test_csv") {
    e.test_csv = as_string(key, value);
  } else if (key == "data.log_transform") {
    if (!value.is_boolean()) bad_value(key, "true or false");
    e.log_transform = value.get<bool>();
  } else if (key == "data.ridge") {
    e.ridge = as_double(key, value);
  } else if (key == "data.oracle_prior") {
    e.oracle_prior = as_int(key, value);
  } else if (key == "output.dir") {
    config.out_dir = as_string(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

void apply_config_object(RunConfig& config, const nlohmann::json& object) {
  if (!object.is_object()) throw std::invalid_argument("config must be a JSON object of dotted keys");
  for (const auto& [key, value] : object.items()) apply_config_value(config, key, value);
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config '" + path + "' is not valid JSON: " + e.what());
  }
  apply_config_object(base, doc);
  return base;
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  auto value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  apply_config_value(config, key, value);
}

Json config_to_json(const RunConfig& config) {
  const auto& e = config.experiment;
  Json agents = Json::array();
  for (AgentKind k : e.roster) agents.push_back(std::string(agent_name(k)));
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["experiment.setup"] = e.setup;
  out["experiment.T"] = e.horizon;
  out["experiment.n"] = e.num_arms;
  out["experiment.P"] = e.num_priors;
  out["experiment.delta"] = e.delta;
  out["experiment.noise_var"] = e.noise_var;
  out["experiment.seeds"] = e.seeds;
  out["experiment.seed_base"] = e.seed_base;
  out["experiment.workers"] = e.workers;
  out["experiment.agents"] = agents;
  out["experiment.lengthscales"] = e.lengthscales;
  out["experiment.arm_range"] = e.arm_range;
  out["experiment.subspace_dims"] = e.subspace_dims;
  out["data.prior_csv"] = e.prior_csv;
  out["data.test_csv"] = e.test_csv;
  out["data.log_transform"] = e.log_transform;
  out["data.ridge"] = e.ridge;
  out["data.oracle_prior"] = e.oracle_prior;
  out["output.dir"] = config.out_dir;
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<EpisodeRecord>& records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    const std::string_view agent = agent_name(r.agent);
    double cum = 0.0;
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      const auto& s = r.steps[i];
      cum += s.instant_regret;
      out << r.seed << ',' << agent << ',' << i + 1 << ',' << s.arm << ',';
      if (s.prior >= 0) out << s.prior;
      out << ',' << format_double(s.reward) << ',' << format_double(s.instant_regret) << ',' << format_double(cum)
          << ',';
      if (s.active_priors >= 0) out << s.active_priors;
      out << ',' << format_double(s.entropy) << '\n';
    }
  }
}

void write_episodes_csv(std::ostream& out, const std::vector<EpisodeRecord>& records) {
  out << kEpisodesHeader << '\n';
  for (const auto& r : records) {
    out << r.seed << ',' << agent_name(r.agent) << ',';
    if (r.true_prior >= 0) out << r.true_prior;
    out << ',' << (r.aborted ? 1 : 0) << ',' << (r.true_prior_eliminated ? 1 : 0) << ','
        << format_double(r.sum_var_at_opt) << '\n';
  }
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r') cells.back().pop_back();
  return cells;
}

template <typename T>
T parse_cell(const std::string& cell, const std::string& where) {
  T v{};
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw std::runtime_error(where + ": cannot parse '" + cell + "'");
  return v;
}

double parse_optional_double(const std::string& cell, const std::string& where) {
  return cell.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_cell<double>(cell, where);
}

int parse_optional_int(const std::string& cell, const std::string& where) {
  return cell.empty() ? -1 : parse_cell<int>(cell, where);
}

std::ifstream open_with_header(const std::string& path, std::string_view header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw std::runtime_error("'" + path + "' must start with header " + std::string(header));
  return in;
}

}  // namespace

std::vector<EpisodeRecord> read_run_records(const std::string& trace_path, const std::string& episodes_path) {
  std::vector<EpisodeRecord> records;
  std::map<std::pair<std::uint64_t, AgentKind>, std::size_t> index;
  {
    auto in = open_with_header(episodes_path, kEpisodesHeader);
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const std::string where = episodes_path + ":" + std::to_string(line_no);
      const auto c = split_row(line);
      if (c.size() != 6) throw std::runtime_error(where + ": expected 6 columns");
      EpisodeRecord r;
      r.seed = parse_cell<std::uint64_t>(c[0], where);
      r.agent = parse_agent(c[1]);
      r.true_prior = parse_optional_int(c[2], where);
      r.aborted = parse_cell<int>(c[3], where) != 0;
      r.true_prior_eliminated = parse_cell<int>(c[4], where) != 0;
      r.sum_var_at_opt = parse_optional_double(c[5], where);
      if (!index.emplace(std::make_pair(r.seed, r.agent), records.size()).second)
        throw std::runtime_error(where + ": duplicate episode");
      records.push_back(std::move(r));
    }
  }
  auto in = open_with_header(trace_path, kTraceHeader);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = trace_path + ":" + std::to_string(line_no);
    const auto c = split_row(line);
    if (c.size() != 10) throw std::runtime_error(where + ": expected 10 columns");
    const auto seed = parse_cell<std::uint64_t>(c[0], where);
    const auto it = index.find({seed, parse_agent(c[1])});
    if (it == index.end()) throw std::runtime_error(where + ": episode missing from " + episodes_path);
    auto& rec = records[it->second];
    const int t = parse_cell<int>(c[2], where);
    if (t != static_cast<int>(rec.steps.size()) + 1) throw std::runtime_error(where + ": rounds out of order");
    Step s;
    s.arm = parse_cell<long>(c[3], where);
    s.prior = parse_optional_int(c[4], where);
    s.reward = parse_cell<double>(c[5], where);
    s.instant_regret = parse_cell<double>(c[6], where);
    s.active_priors = parse_optional_int(c[8], where);
    s.entropy = parse_optional_double(c[9], where);
    rec.steps.push_back(s);
  }
  return records;
}

namespace {

Json matrix_rows(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json bounds_to_json(const BoundReport& b) {
  Json out;
  out["sigma0_sq"] = b.sigma0_sq;
  out["num_arms"] = b.num_arms;
  Json mig;
  mig["horizon"] = b.mig.horizon;
  mig["ids"] = b.mig.ids;
  mig["gamma"] = b.mig.gamma;
  mig["gamma_max"] = b.mig.gamma_max;
  mig["gamma_avg"] = b.mig.gamma_avg;
  out["mig"] = mig;
  if (b.has_theorem4) {
    const auto& t = b.theorem4;
    Json j;
    j["episodes"] = t.episodes;
    j["rhs_T"] = t.rhs.empty() ? 0.0 : t.rhs.back();
    j["final_mean"] = t.mean.empty() ? 0.0 : t.mean.back();
    j["final_se"] = t.se.empty() ? 0.0 : t.se.back();
    j["min_slack"] = t.min_slack;
    j["worst_t"] = t.worst_t;
    j["pass"] = t.pass;
    out["theorem4"] = j;
  } else {
    out["theorem4"] = nullptr;
  }
  if (b.has_theorem1) {
    const auto& t = b.theorem1;
    Json j;
    j["horizon"] = t.horizon;
    j["beta_1"] = t.beta_1;
    j["beta_T"] = t.beta_T;
    j["xi_T"] = t.xi_T;
    j["B"] = t.B;
    j["C"] = t.C;
    j["gamma_hat"] = t.gamma_hat;
    j["gamma_bar"] = t.gamma_bar;
    j["term_priors"] = t.term_priors;
    j["term_noise"] = t.term_noise;
    j["term_information"] = t.term_information;
    j["term_optimum"] = t.term_optimum;
    j["sum_var_at_opt"] = t.sum_var_at_opt;
    j["bound"] = t.bound;
    j["empirical_regret"] = t.empirical_regret;
    j["holds"] = t.holds;
    out["theorem1"] = j;
  } else {
    out["theorem1"] = nullptr;
  }
  return out;
}

}  // namespace

Json summary_to_json(const Summary& summary, const std::vector<std::string>& prior_ids, const RunConfig& config,
                     const BoundReport* bounds) {
  const auto& e = config.experiment;
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["setup"] = e.setup;
  out["horizon"] = summary.horizon;
  out["num_priors"] = summary.num_priors;
  out["prior_ids"] = prior_ids;
  out["delta"] = e.delta;
  out["noise_var"] = e.noise_var;
  out["episodes"] = {{"total", summary.total_episodes}, {"aborted", summary.aborted_episodes}};

  Json regret;
  for (const auto& r : summary.regret) {
    Json j;
    j["episodes"] = r.episodes;
    j["final_mean"] = r.final_mean;
    j["final_se"] = r.final_se;
    Json q;
    for (std::size_t k = 0; k < kRegretQuantiles.size(); ++k)
      q["p" + std::to_string(static_cast<int>(kRegretQuantiles[k]))] = r.quantiles[k];
    j["quantiles"] = q;
    j["mean_curve"] = r.mean_curve;
    j["se_curve"] = r.se_curve;
    regret[std::string(agent_name(r.agent))] = j;
  }
  out["regret"] = regret;

  Json sel;
  sel["entropy_reference"] = {{"q0.8", summary.entropy_ref_80}, {"q0.9", summary.entropy_ref_90}};
  Json agents = Json::object();
  for (const auto& s : summary.selection) {
    Json j;
    j["episodes"] = s.episodes;
    j["accuracy"] = s.accuracy;
    j["confusion"] = matrix_rows(s.confusion);
    j["empty_rows"] = s.empty_rows;
    j["mean_active_priors"] = s.mean_active_priors.empty() ? Json(nullptr) : Json(s.mean_active_priors);
    j["mean_entropy"] = s.mean_entropy.empty() ? Json(nullptr) : Json(s.mean_entropy);
    agents[std::string(agent_name(s.agent))] = j;
  }
  sel["agents"] = agents;
  out["prior_selection"] = sel;
  out["bounds"] = bounds ? bounds_to_json(*bounds) : Json(nullptr);
  return out;
}

Json mig_to_json(const MigTable& table, double noise_var) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["horizon"] = table.horizon;
  out["noise_var"] = noise_var;
  Json priors = Json::array();
  for (std::size_t i = 0; i < table.ids.size(); ++i) priors.push_back({{"id", table.ids[i]}, {"gamma", table.gamma[i]}});
  out["priors"] = priors;
  out["gamma_max"] = table.gamma_max;
  out["gamma_avg"] = table.gamma_avg;
  // Greedy reaches at least (1 - 1/e) of the optimum.
  out["gamma_max_upper"] = table.gamma_max / (1.0 - std::exp(-1.0));
  return out;
}

Json suite_to_json(const SuiteReport& report) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["suite"] = report.suite;
  out["pass"] = report.pass();
  Json checks = Json::array();
  for (const auto& c : report.checks)
    checks.push_back(
        {{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"relation", c.relation}, {"pass", c.pass}});
  out["checks"] = checks;
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << text;
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace gpts
