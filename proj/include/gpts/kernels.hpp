#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace gpts {

// Arm sets are stored one arm per row.
using ArmMatrix = Eigen::MatrixXd;

enum class KernelKind { RBF, RationalQuadratic, Matern32, Matern52, Periodic, Linear };

std::string_view kernel_kind_name(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

/// Parameters of one prior covariance family.
///
/// Stationary families are unit-variance, k(x, x) = 1. The RBF convention is
/// exp(-r^2 / l^2) with no factor 1/2 in the denominator, which differs from
/// the form most GP libraries use. The periodic family divides the summed
/// sin^2 terms by the lengthscale itself (not its square).
///
/// `active_dims` holds 0-based coordinate indices; empty means every
/// coordinate participates.
struct KernelSpec {
  KernelKind kind = KernelKind::RBF;
  double lengthscale = 1.0;
  double alpha = 1.0;     // rational quadratic only
  double period = 1.0;    // periodic only
  double variance = 1.0;  // linear only
  std::vector<int> active_dims;

  /// Throws std::invalid_argument when a parameter is out of range or an
  /// active dimension is duplicated or outside [0, dim).
  void validate(Eigen::Index dim) const;

  bool stationary() const { return kind != KernelKind::Linear; }
  std::string describe() const;
};

KernelSpec rbf(double lengthscale);
/// RBF with the common exp(-r^2 / (2 l^2)) convention, expressed in this
/// library's form: returns rbf(sqrt(2) * lengthscale). The synthetic prior sets
/// quote their lengthscales in this convention.
KernelSpec rbf_standard(double lengthscale);
KernelSpec rational_quadratic(double lengthscale, double alpha);
KernelSpec matern32(double lengthscale);
KernelSpec matern52(double lengthscale);
KernelSpec periodic(double lengthscale, double period);
KernelSpec linear(double variance);

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x_tilde);

/// Dense n x n kernel matrix over the rows of `arms`. Exactly symmetric.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const ArmMatrix& arms);

/// Smallest eigenvalue >= -tol * max diagonal.
bool is_psd_up_to_jitter(const Eigen::MatrixXd& gram, double tol = 1e-8);

}  // namespace gpts
