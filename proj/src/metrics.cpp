#include "gpts/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gpts {

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double sample_mean(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double standard_error(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double n = static_cast<double>(values.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

double reference_entropy(double q, int num_priors) {
  if (num_priors < 1 || !(q > 0.0 && q <= 1.0)) throw std::invalid_argument("invalid reference entropy arguments");
  if (num_priors == 1 || q == 1.0) return 0.0;
  const double rest = (1.0 - q) / (num_priors - 1);
  return -q * std::log(q) - (1.0 - q) * std::log(rest);
}

namespace {

std::vector<std::size_t> agent_order(const std::vector<EpisodeRecord>& records) {
  std::vector<std::size_t> first;  // index of the first record of each agent
  std::vector<AgentKind> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (std::find(seen.begin(), seen.end(), records[i].agent) == seen.end()) {
      seen.push_back(records[i].agent);
      first.push_back(i);
    }
  }
  return first;
}

AgentRegret regret_of(AgentKind agent, const std::vector<const EpisodeRecord*>& eps) {
  AgentRegret out;
  out.agent = agent;
  out.episodes = static_cast<int>(eps.size());
  std::size_t horizon = 0;
  for (const auto* e : eps) horizon = std::max(horizon, e->steps.size());

  std::vector<std::vector<double>> curves;
  for (const auto* e : eps) {
    auto c = e->cumulative_curve();
    const double last = c.empty() ? 0.0 : c.back();
    c.resize(horizon, last);
    curves.push_back(std::move(c));
  }
  std::vector<double> column(eps.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t i = 0; i < eps.size(); ++i) column[i] = curves[i][t];
    out.mean_curve.push_back(sample_mean(column));
    out.se_curve.push_back(standard_error(column));
  }
  std::vector<double> finals;
  for (const auto& c : curves) finals.push_back(c.empty() ? 0.0 : c.back());
  out.final_mean = sample_mean(finals);
  out.final_se = standard_error(finals);
  for (std::size_t k = 0; k < kRegretQuantiles.size(); ++k)
    out.quantiles[k] = quantile_linear(finals, kRegretQuantiles[k] / 100.0);
  return out;
}

// Mean over the episodes that reach round t.
template <typename Get>
std::vector<double> running_mean(const std::vector<const EpisodeRecord*>& eps, Get get) {
  std::vector<double> sum, count;
  for (const auto* e : eps) {
    if (sum.size() < e->steps.size()) {
      sum.resize(e->steps.size(), 0.0);
      count.resize(e->steps.size(), 0.0);
    }
    for (std::size_t t = 0; t < e->steps.size(); ++t) {
      sum[t] += get(e->steps[t]);
      count[t] += 1.0;
    }
  }
  for (std::size_t t = 0; t < sum.size(); ++t) sum[t] /= count[t];
  return sum;
}

AgentSelection selection_of(AgentKind agent, const std::vector<const EpisodeRecord*>& eps, int num_priors) {
  AgentSelection out;
  out.agent = agent;
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(num_priors, num_priors);
  double acc_sum = 0.0;
  for (const auto* e : eps) {
    if (e->true_prior < 0) continue;
    if (e->true_prior >= num_priors) throw std::invalid_argument("record true prior exceeds the prior count");
    ++out.episodes;
    double hits = 0.0;
    for (const auto& s : e->steps) {
      if (s.prior < 0 || s.prior >= num_priors) throw std::invalid_argument("record prior index out of range");
      counts(e->true_prior, s.prior) += 1.0;
      if (s.prior == e->true_prior) hits += 1.0;
    }
    if (!e->steps.empty()) acc_sum += hits / static_cast<double>(e->steps.size());
  }
  out.accuracy = out.episodes > 0 ? acc_sum / out.episodes : 0.0;
  out.confusion = Eigen::MatrixXd::Zero(num_priors, num_priors);
  out.empty_rows.assign(static_cast<std::size_t>(num_priors), false);
  for (int p = 0; p < num_priors; ++p) {
    const double total = counts.row(p).sum();
    if (total > 0.0)
      out.confusion.row(p) = counts.row(p) * (100.0 / total);
    else
      out.empty_rows[static_cast<std::size_t>(p)] = true;
  }
  if (is_elimination(agent))
    out.mean_active_priors = running_mean(eps, [](const Step& s) { return static_cast<double>(s.active_priors); });
  if (is_hyperposterior(agent)) out.mean_entropy = running_mean(eps, [](const Step& s) { return s.entropy; });
  return out;
}

}  // namespace

Summary summarize(const std::vector<EpisodeRecord>& records, int num_priors) {
  if (records.empty()) throw std::invalid_argument("summarize: no episode records");
  if (num_priors < 1) throw std::invalid_argument("summarize: prior count must be >= 1");
  Summary out;
  out.num_priors = num_priors;
  out.total_episodes = static_cast<int>(records.size());
  for (const auto& r : records) {
    out.horizon = std::max(out.horizon, static_cast<int>(r.steps.size()));
    if (r.aborted) ++out.aborted_episodes;
  }
  out.entropy_ref_80 = reference_entropy(0.8, num_priors);
  out.entropy_ref_90 = reference_entropy(0.9, num_priors);

  for (std::size_t first : agent_order(records)) {
    const AgentKind agent = records[first].agent;
    std::vector<const EpisodeRecord*> eps;
    for (const auto& r : records)
      if (r.agent == agent) eps.push_back(&r);
    out.regret.push_back(regret_of(agent, eps));
    if (!is_oracle(agent)) out.selection.push_back(selection_of(agent, eps, num_priors));
  }
  return out;
}

}  // namespace gpts
