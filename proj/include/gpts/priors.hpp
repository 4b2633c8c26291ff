#pragma once

#include "gpts/gp.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace gpts {

/// A finite prior set with a probability vector over it.
struct Hyperprior {
  std::vector<PriorPtr> priors;
  Eigen::VectorXd weights;

  std::size_t size() const { return priors.size(); }
  Eigen::Index num_arms() const { return priors.front()->num_arms(); }
  /// Largest prior variance over all priors and arms.
  double max_prior_variance() const;
  /// Checks the weight vector, prior count and id uniqueness.
  void validate() const;
};

Hyperprior uniform_hyperprior(std::vector<PriorPtr> priors);

/// The six kernel families with shared lengthscale 1, in a fixed order:
/// RBF, RQ(alpha = 0.5), Matern-5/2, Matern-3/2, periodic(period 5), linear(v = 0.05^2).
/// RBF lengthscales of the synthetic sets follow rbf_standard().
std::vector<KernelSpec> kernel_family_specs();
std::vector<std::string> kernel_family_names();

/// `count` lengthscales equidistant in [lo, hi] (count = 1 gives lo).
std::vector<double> equidistant_lengthscales(int count, double lo = 0.5, double hi = 4.0);

/// Active-dimension windows for the subspace setup, 0-based. Prior i uses
/// window_size consecutive coordinates starting at i on a cycle of
/// `num_priors` coordinates, so with 5 priors and window 4 every pair shares
/// exactly 3 coordinates and no pair shares more than window_size - 1.
/// Requires window_size < num_priors <= total_dims.
std::vector<std::vector<int>> subspace_windows(int num_priors, int window_size = 4, int total_dims = 16);

Hyperprior kernel_prior_set(const ArmMatrix& arms);
Hyperprior lengthscale_prior_set(const ArmMatrix& arms, const std::vector<double>& lengthscales);
Hyperprior subspace_prior_set(const ArmMatrix& arms, int num_priors, double lengthscale = 8.0,
                              int window_size = 4);

/// Long-format bucketed measurements: for every (bucket, sample) pair there is
/// one value per arm.
struct BucketedDataset {
  struct Record {
    int bucket = 0;
    int sample = 0;
    int arm = 0;
    double value = 0.0;
  };
  std::vector<Record> records;

  /// bucket -> sample -> n-vector, with coverage checks. Buckets and samples
  /// are ordered by id.
  struct Grouped {
    std::vector<int> bucket_ids;
    std::vector<std::vector<Eigen::VectorXd>> samples;  // [bucket][sample]
    int num_arms = 0;
  };
  Grouped group() const;
};

/// Reads a headered CSV `bucket_id,sample_id,arm_id,value`. When `log_transform`
/// is set each value v becomes log(v / 10 + 0.1) before grouping.
BucketedDataset read_bucketed_csv(const std::string& path, bool log_transform = false);
void write_bucketed_csv(const std::string& path, const BucketedDataset& data);

inline constexpr double kDefaultRidge = 1e-6;

/// One prior per bucket: per-arm sample mean and unbiased sample covariance
/// plus ridge * (mean diagonal) * I. A bucket with zero sample variance gets
/// ridge * I. Uniform weights.
Hyperprior empirical_prior_set(const BucketedDataset& data, double ridge = kDefaultRidge);

}  // namespace gpts
