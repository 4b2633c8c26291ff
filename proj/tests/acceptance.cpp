// Acceptance checks for the benchmark reproduction. Each criterion prints one
// PASS/FAIL line followed by indented details; the exit status is nonzero if
// any requested criterion fails.
//
//   acceptance <criterion>... [--seeds N] [--workers N]
//   acceptance all
#include "gpts/experiment.hpp"
#include "gpts/io.hpp"
#include "gpts/metrics.hpp"
#include "gpts/verify.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

using namespace gpts;
namespace fs = std::filesystem;

namespace {

struct Options {
  int seeds = 100;
  int workers = 0;
};

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok   " : "MISS ") + what);
    pass = pass && ok;
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

std::string fmt(double v, int prec = 1) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

struct Reference {
  double mean;
  double se;
};

const AgentRegret& regret_of(const Summary& s, AgentKind k) {
  for (const auto& r : s.regret)
    if (r.agent == k) return r;
  throw std::runtime_error("agent missing from summary");
}

const AgentSelection& selection_of(const Summary& s, AgentKind k) {
  for (const auto& r : s.selection)
    if (r.agent == k) return r;
  throw std::runtime_error("agent missing from selection stats");
}

Summary run(const std::string& setup, int num_priors, const Options& o, std::vector<EpisodeRecord>* keep = nullptr) {
  ExperimentConfig c;
  c.setup = setup;
  c.num_priors = num_priors;
  c.seeds = o.seeds;
  c.workers = o.workers;
  const Experiment ex(c);
  auto records = run_experiment(ex);
  auto s = summarize(records, ex.num_priors());
  if (keep) *keep = std::move(records);
  return s;
}

// |ours - reference| <= 3 sqrt(se_ours^2 + se_ref^2).
void compare(Outcome& out, const Summary& s, AgentKind k, Reference ref, const std::string& label = "") {
  const auto& r = regret_of(s, k);
  const double pooled = std::sqrt(r.final_se * r.final_se + ref.se * ref.se);
  const double z = (r.final_mean - ref.mean) / pooled;
  out.require(std::abs(z) <= 3.0, label + std::string(agent_name(k)) + " " + fmt(r.final_mean) + " +- " +
                                       fmt(r.final_se) + " vs " + fmt(ref.mean) + " +- " + fmt(ref.se) +
                                       " (z = " + fmt(z, 2) + ")");
}

void note_regrets(Outcome& out, const Summary& s) {
  std::string line;
  for (const auto& r : s.regret)
    line += std::string(agent_name(r.agent)) + " " + fmt(r.final_mean) + "+-" + fmt(r.final_se) + "  ";
  out.note(line);
}

void note_aborts(Outcome& out, const Summary& s) {
  out.require(s.aborted_episodes == 0, "aborted episodes: " + std::to_string(s.aborted_episodes));
}

Outcome lengthscale(const Options& o) {
  Outcome out;
  const auto s = run("lengthscale", 0, o);
  note_regrets(out, s);
  note_aborts(out, s);
  auto m = [&](AgentKind k) { return regret_of(s, k).final_mean; };
  auto se = [&](AgentKind k) { return regret_of(s, k).final_se; };
  const AgentKind group[] = {AgentKind::HpGpTs, AgentKind::MapGpTs, AgentKind::OracleGpTs};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double d = m(group[i]) - m(group[j]);
      const double pooled = std::sqrt(se(group[i]) * se(group[i]) + se(group[j]) * se(group[j]));
      out.require(std::abs(d) <= 3.0 * pooled, std::string(agent_name(group[i])) + " ~ " +
                                                   std::string(agent_name(group[j])) + ": diff " + fmt(d) +
                                                   ", 3 pooled SE " + fmt(3.0 * pooled));
    }
  const double top = std::max({m(AgentKind::HpGpTs), m(AgentKind::MapGpTs), m(AgentKind::OracleGpTs)});
  out.require(top < m(AgentKind::OracleGpUcb), "TS group < Oracle-GP-UCB");
  out.require(m(AgentKind::OracleGpUcb) < m(AgentKind::PeGpTs), "Oracle-GP-UCB < PE-GP-TS");
  out.require(m(AgentKind::PeGpTs) < m(AgentKind::PeGpUcb), "PE-GP-TS < PE-GP-UCB");
  const double ucb = m(AgentKind::PeGpUcb);
  out.require(std::abs(ucb - 116.5) <= 0.2 * 116.5, "PE-GP-UCB " + fmt(ucb) + " within 116.5 +- 20%");
  return out;
}

Outcome lengthscale_scaling(const Options& o) {
  Outcome out;
  const auto s = run("lengthscale-scaling", 8, o);
  note_aborts(out, s);
  const std::map<AgentKind, Reference> table = {
      {AgentKind::HpGpTs, {31.4, 1.0}},  {AgentKind::MapGpTs, {30.2, 1.2}},    {AgentKind::PeGpTs, {61.8, 0.5}},
      {AgentKind::PeGpUcb, {114.2, 0.6}}, {AgentKind::OracleGpTs, {28.1, 0.8}}, {AgentKind::OracleGpUcb, {48.3, 1.2}}};
  for (const auto& [k, ref] : table) compare(out, s, k, ref);
  return out;
}

Outcome kernel_selection(const Options& o) {
  Outcome out;
  std::vector<EpisodeRecord> records;
  const auto s = run("kernel", 0, o, &records);
  note_aborts(out, s);
  const std::map<AgentKind, double> target = {
      {AgentKind::HpGpTs, 63.2}, {AgentKind::MapGpTs, 62.5}, {AgentKind::PeGpTs, 17.0}, {AgentKind::PeGpUcb, 17.0}};
  for (const auto& [k, t] : target) {
    const double acc = 100.0 * selection_of(s, k).accuracy;
    out.require(std::abs(acc - t) <= 10.0,
                std::string(agent_name(k)) + " accuracy " + fmt(acc) + "% vs " + fmt(t) + "% +- 10");
  }
  const auto names = kernel_family_names();
  const auto m32 = static_cast<int>(std::find(names.begin(), names.end(), "matern32") - names.begin());
  double hits = 0.0, rounds = 0.0;
  for (const auto& r : records)
    if (r.agent == AgentKind::PeGpUcb)
      for (const auto& st : r.steps) {
        hits += st.prior == m32;
        rounds += 1.0;
      }
  out.require(m32 < static_cast<int>(names.size()) && hits / rounds > 0.8,
              "PE-GP-UCB rounds on Matern-3/2: " + fmt(100.0 * hits / rounds) + "% > 80%");
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

Outcome subspace_scaling(const Options& o) {
  Outcome out;
  const std::vector<double> sizes = {5, 8, 12, 16};
  const std::map<AgentKind, std::vector<Reference>> table = {
      {AgentKind::MapGpTs, {{87.2, 1.0}, {89.9, 1.1}, {89.1, 0.9}, {90.9, 1.2}}},
      {AgentKind::HpGpTs, {{88.3, 0.9}, {88.8, 0.9}, {89.5, 0.9}, {90.8, 0.9}}},
      {AgentKind::PeGpTs, {{177.1, 1.4}, {269.5, 1.9}, {344.7, 2.3}, {396.9, 2.5}}},
      {AgentKind::PeGpUcb, {{389.0, 1.5}, {526.0, 1.8}, {622.4, 2.3}, {688.0, 2.7}}},
      {AgentKind::OracleGpTs, {{86.0, 1.0}, {84.1, 0.9}, {84.6, 1.0}, {84.8, 1.0}}},
      {AgentKind::OracleGpUcb, {{217.3, 1.0}, {218.2, 1.0}, {218.6, 1.0}, {218.9, 0.9}}}};
  std::map<AgentKind, std::vector<double>> finals;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const int p = static_cast<int>(sizes[i]);
    const auto s = run("subspace-scaling", p, o);
    note_aborts(out, s);
    for (const auto& [k, refs] : table) {
      compare(out, s, k, refs[i], "|P|=" + std::to_string(p) + " ");
      finals[k].push_back(regret_of(s, k).final_mean);
    }
  }
  for (auto k : {AgentKind::PeGpTs, AgentKind::PeGpUcb}) {
    const double slope = loglog_slope(sizes, finals[k]);
    out.require(std::abs(slope - 0.5) <= 0.2, std::string(agent_name(k)) + " log-log slope " + fmt(slope, 3) +
                                                  " within 0.5 +- 0.2");
  }
  for (auto k : {AgentKind::HpGpTs, AgentKind::MapGpTs}) {
    const double slope = loglog_slope(sizes, finals[k]);
    out.require(std::abs(slope) <= 0.1, std::string(agent_name(k)) + " |log-log slope| " + fmt(slope, 3) + " <= 0.1");
  }
  return out;
}

Outcome suite(const std::string& name, const Options& o) {
  Outcome out;
  SuiteOptions so;
  so.workers = o.workers;
  const auto rep = run_suite(name, so);
  for (const auto& c : rep.checks)
    out.require(c.pass, c.name + ": " + fmt(c.value, 6) + " " + c.relation + " " + fmt(c.limit, 6));
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the CLI twice on the same config and compares the written files.
Outcome determinism(const Options& o) {
  Outcome out;
  const fs::path root = fs::temp_directory_path() / "gpts_acceptance_determinism";
  fs::remove_all(root);
  const std::string args = " run --quiet --setup kernel --seeds 10 --T 100 --workers " + std::to_string(o.workers);
  for (const char* name : {"a", "b"}) {
    const std::string cmd = std::string(GPTS_CLI_PATH) + args + " --out " + (root / name).string() + " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    out.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, std::string("run ") + name + " exit status");
  }
  for (const char* file : {"trace.csv", "summary.json"}) {
    const auto a = slurp(root / "a" / file), b = slurp(root / "b" / file);
    out.require(!a.empty() && a == b, std::string(file) + " identical (" + std::to_string(a.size()) + " bytes)");
  }
  // The echoes differ in output.dir by construction.
  auto echo_a = nlohmann::json::parse(slurp(root / "a" / "config.echo.json"));
  auto echo_b = nlohmann::json::parse(slurp(root / "b" / "config.echo.json"));
  echo_a.erase("output.dir");
  echo_b.erase("output.dir");
  out.require(!echo_a.empty() && echo_a == echo_b, "config.echo.json identical apart from output.dir");
  return out;
}

const std::vector<std::pair<std::string, std::function<Outcome(const Options&)>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome(const Options&)>>> list = {
      {"lengthscale", lengthscale},
      {"lengthscale-scaling", lengthscale_scaling},
      {"kernel-selection", kernel_selection},
      {"subspace-scaling", subspace_scaling},
      {"gp-oracle", [](const Options& o) { return suite("gp-oracle", o); }},
      {"lemma1", [](const Options& o) { return suite("lemma1", o); }},
      {"lemma3", [](const Options& o) { return suite("lemma3", o); }},
      {"elimination-safety", [](const Options& o) { return suite("elimination-safety", o); }},
      {"theorem4", [](const Options& o) { return suite("theorem4", o); }},
      {"determinism", determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  Options opts;
  std::vector<std::string> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--seeds" && i + 1 < argc) {
      opts.seeds = std::atoi(argv[++i]);
    } else if (a == "--workers" && i + 1 < argc) {
      opts.workers = std::atoi(argv[++i]);
    } else if (a == "all") {
      for (const auto& [name, fn] : criteria()) wanted.push_back(name);
    } else {
      wanted.push_back(a);
    }
  }
  if (wanted.empty()) {
    std::cerr << "usage: acceptance <criterion>... | all [--seeds N] [--workers N]\ncriteria:";
    for (const auto& [name, fn] : criteria()) std::cerr << ' ' << name;
    std::cerr << '\n';
    return 2;
  }

  bool all_pass = true;
  for (const auto& name : wanted) {
    const auto it = std::find_if(criteria().begin(), criteria().end(), [&](const auto& c) { return c.first == name; });
    if (it == criteria().end()) {
      std::cerr << "unknown criterion '" << name << "'\n";
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = it->second(opts);
    } catch (const std::exception& e) {
      out.pass = false;
      out.details.push_back(std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (out.pass ? "PASS " : "FAIL ") << name << " (" << fmt(secs) << " s)\n";
    for (const auto& d : out.details) std::cout << "  " << d << '\n';
    std::cout << std::flush;
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
