#include "gpts/priors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gpts {

double Hyperprior::max_prior_variance() const {
  double v = 0.0;
  for (const auto& p : priors) v = std::max(v, p->max_variance());
  return v;
}

void Hyperprior::validate() const {
  if (priors.empty()) throw std::invalid_argument("hyperprior has no priors");
  if (weights.size() != static_cast<Eigen::Index>(priors.size()))
    throw std::invalid_argument("hyperprior weight count differs from prior count");
  if ((weights.array() < 0.0).any() || !weights.allFinite())
    throw std::invalid_argument("hyperprior weights must be finite and nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw std::invalid_argument("hyperprior weights must sum to 1");
  std::set<std::string> ids;
  for (const auto& p : priors) {
    if (p->num_arms() != priors.front()->num_arms())
      throw std::invalid_argument("priors disagree on the number of arms");
    if (!ids.insert(p->id).second) throw std::invalid_argument("duplicate prior id '" + p->id + "'");
  }
}

Hyperprior uniform_hyperprior(std::vector<PriorPtr> priors) {
  Hyperprior h;
  const auto m = static_cast<Eigen::Index>(priors.size());
  h.priors = std::move(priors);
  h.weights = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  h.validate();
  return h;
}

std::vector<KernelSpec> kernel_family_specs() {
  return {rbf_standard(1.0), rational_quadratic(1.0, 0.5), matern52(1.0),
          matern32(1.0),     periodic(1.0, 5.0),           linear(0.05 * 0.05)};
}

std::vector<std::string> kernel_family_names() {
  return {"rbf", "rq", "matern52", "matern32", "periodic", "linear"};
}

std::vector<double> equidistant_lengthscales(int count, double lo, double hi) {
  if (count < 1) throw std::invalid_argument("lengthscale count must be >= 1");
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("invalid lengthscale range");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return out;
}

std::vector<std::vector<int>> subspace_windows(int num_priors, int window_size, int total_dims) {
  if (window_size < 1 || num_priors <= window_size || num_priors > total_dims)
    throw std::invalid_argument("subspace prior count " + std::to_string(num_priors) + " outside supported range [" +
                                std::to_string(window_size + 1) + ", " + std::to_string(total_dims) + "]");
  std::vector<std::vector<int>> windows;
  std::set<std::vector<int>> seen;
  for (int i = 0; i < num_priors; ++i) {
    std::vector<int> w;
    for (int j = i; j < i + window_size; ++j) w.push_back(j % num_priors);
    std::vector<int> key = w;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) continue;
    windows.push_back(std::move(w));
  }
  return windows;
}

Hyperprior kernel_prior_set(const ArmMatrix& arms) {
  std::vector<PriorPtr> priors;
  const auto specs = kernel_family_specs();
  const auto names = kernel_family_names();
  for (std::size_t i = 0; i < specs.size(); ++i) priors.push_back(materialize_kernel_prior(names[i], specs[i], arms));
  return uniform_hyperprior(std::move(priors));
}

Hyperprior lengthscale_prior_set(const ArmMatrix& arms, const std::vector<double>& lengthscales) {
  if (lengthscales.empty()) throw std::invalid_argument("empty lengthscale list");
  std::vector<PriorPtr> priors;
  for (double l : lengthscales) {
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("lengthscales must be positive");
    std::ostringstream id;
    id << "rbf(l=" << l << ")";
    priors.push_back(materialize_kernel_prior(id.str(), rbf_standard(l), arms));
  }
  return uniform_hyperprior(std::move(priors));
}

Hyperprior subspace_prior_set(const ArmMatrix& arms, int num_priors, double lengthscale, int window_size) {
  std::vector<PriorPtr> priors;
  for (auto& dims : subspace_windows(num_priors, window_size, static_cast<int>(arms.cols()))) {
    std::ostringstream id;
    id << "dims(";
    for (std::size_t k = 0; k < dims.size(); ++k) id << (k ? "," : "") << dims[k] + 1;
    id << ")";
    auto spec = rbf_standard(lengthscale);
    spec.active_dims = std::move(dims);
    priors.push_back(materialize_kernel_prior(id.str(), spec, arms));
  }
  return uniform_hyperprior(std::move(priors));
}

BucketedDataset::Grouped BucketedDataset::group() const {
  if (records.empty()) throw std::invalid_argument("bucketed dataset is empty");
  int max_arm = -1;
  for (const auto& r : records) {
    if (r.arm < 0) throw std::invalid_argument("negative arm id");
    max_arm = std::max(max_arm, r.arm);
  }
  const int n = max_arm + 1;
  std::map<int, std::map<int, std::pair<Eigen::VectorXd, std::vector<bool>>>> by_bucket;
  for (const auto& r : records) {
    auto& slot = by_bucket[r.bucket][r.sample];
    if (slot.first.size() == 0) {
      slot.first = Eigen::VectorXd::Zero(n);
      slot.second.assign(static_cast<std::size_t>(n), false);
    }
    if (slot.second[static_cast<std::size_t>(r.arm)])
      throw std::invalid_argument("bucket " + std::to_string(r.bucket) + " sample " + std::to_string(r.sample) +
                                  " lists arm " + std::to_string(r.arm) + " twice");
    if (!std::isfinite(r.value)) throw std::invalid_argument("non-finite value in bucketed data");
    slot.second[static_cast<std::size_t>(r.arm)] = true;
    slot.first[r.arm] = r.value;
  }
  Grouped g;
  g.num_arms = n;
  for (auto& [bucket, samples] : by_bucket) {
    g.bucket_ids.push_back(bucket);
    auto& out = g.samples.emplace_back();
    for (auto& [sample, slot] : samples) {
      if (std::find(slot.second.begin(), slot.second.end(), false) != slot.second.end())
        throw std::invalid_argument("bucket " + std::to_string(bucket) + " sample " + std::to_string(sample) +
                                    " does not cover all " + std::to_string(n) + " arms");
      out.push_back(std::move(slot.first));
    }
  }
  return g;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

}  // namespace

BucketedDataset read_bucketed_csv(const std::string& path, bool log_transform) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bucketed CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("bucketed CSV '" + path + "' is empty");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected = {"bucket_id", "sample_id", "arm_id", "value"};
  if (header != expected)
    throw std::runtime_error("bucketed CSV '" + path + "' must have header bucket_id,sample_id,arm_id,value");
  BucketedDataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 4 columns");
    try {
      BucketedDataset::Record r;
      r.bucket = std::stoi(cells[0]);
      r.sample = std::stoi(cells[1]);
      r.arm = std::stoi(cells[2]);
      r.value = std::stod(cells[3]);
      if (log_transform) r.value = std::log(r.value / 10.0 + 0.1);
      data.records.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return data;
}

void write_bucketed_csv(const std::string& path, const BucketedDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.precision(17);
  out << "bucket_id,sample_id,arm_id,value\n";
  for (const auto& r : data.records) out << r.bucket << ',' << r.sample << ',' << r.arm << ',' << r.value << '\n';
}

Hyperprior empirical_prior_set(const BucketedDataset& data, double ridge) {
  if (!(ridge >= 0.0)) throw std::invalid_argument("ridge must be nonnegative");
  const auto grouped = data.group();
  const Eigen::Index n = grouped.num_arms;
  std::vector<PriorPtr> priors;
  for (std::size_t b = 0; b < grouped.bucket_ids.size(); ++b) {
    const auto& samples = grouped.samples[b];
    const auto m = static_cast<Eigen::Index>(samples.size());
    if (m < 2)
      throw std::invalid_argument("bucket " + std::to_string(grouped.bucket_ids[b]) +
                                  " has fewer than 2 samples");
    Eigen::MatrixXd x(n, m);
    for (Eigen::Index j = 0; j < m; ++j) x.col(j) = samples[static_cast<std::size_t>(j)];
    Eigen::VectorXd mean = x.rowwise().mean();
    const Eigen::MatrixXd centered = x.colwise() - mean;
    Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(m - 1);
    cov = 0.5 * (cov + cov.transpose());
    const double mean_diag = cov.diagonal().mean();
    cov.diagonal().array() += ridge * (mean_diag > 0.0 ? mean_diag : 1.0);
    priors.push_back(materialize_prior("bucket" + std::to_string(grouped.bucket_ids[b]), std::move(mean),
                                       std::move(cov)));
  }
  return uniform_hyperprior(std::move(priors));
}

}  // namespace gpts
