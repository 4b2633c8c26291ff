#include "gpts/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gpts {

std::string_view kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::RBF: return "rbf";
    case KernelKind::RationalQuadratic: return "rq";
    case KernelKind::Matern32: return "matern32";
    case KernelKind::Matern52: return "matern52";
    case KernelKind::Periodic: return "periodic";
    case KernelKind::Linear: return "linear";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "rbf") return KernelKind::RBF;
  if (name == "rq") return KernelKind::RationalQuadratic;
  if (name == "matern32") return KernelKind::Matern32;
  if (name == "matern52") return KernelKind::Matern52;
  if (name == "periodic") return KernelKind::Periodic;
  if (name == "linear") return KernelKind::Linear;
  throw std::invalid_argument("unknown kernel kind '" + std::string(name) +
                              "' (Matern is available only as matern32 / matern52)");
}

void KernelSpec::validate(Eigen::Index dim) const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("kernel ") + what + " must be positive and finite");
  };
  switch (kind) {
    case KernelKind::Linear: positive(variance, "variance"); break;
    case KernelKind::RationalQuadratic:
      positive(lengthscale, "lengthscale");
      positive(alpha, "alpha");
      break;
    case KernelKind::Periodic:
      positive(lengthscale, "lengthscale");
      positive(period, "period");
      break;
    default: positive(lengthscale, "lengthscale"); break;
  }
  std::vector<int> seen = active_dims;
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw std::invalid_argument("kernel active_dims contains duplicates");
  for (int d : seen)
    if (d < 0 || d >= dim)
      throw std::invalid_argument("kernel active dimension " + std::to_string(d) +
                                  " outside [0, " + std::to_string(dim) + ")");
}

std::string KernelSpec::describe() const {
  std::ostringstream out;
  out << kernel_kind_name(kind);
  switch (kind) {
    case KernelKind::Linear: out << "(v=" << variance << ")"; break;
    case KernelKind::RationalQuadratic: out << "(l=" << lengthscale << ",alpha=" << alpha << ")"; break;
    case KernelKind::Periodic: out << "(l=" << lengthscale << ",period=" << period << ")"; break;
    default: out << "(l=" << lengthscale << ")"; break;
  }
  if (!active_dims.empty()) {
    out << "[";
    for (std::size_t i = 0; i < active_dims.size(); ++i) out << (i ? "," : "") << active_dims[i];
    out << "]";
  }
  return out.str();
}

KernelSpec rbf(double lengthscale) {
  KernelSpec s;
  s.kind = KernelKind::RBF;
  s.lengthscale = lengthscale;
  return s;
}

KernelSpec rbf_standard(double lengthscale) { return rbf(std::numbers::sqrt2 * lengthscale); }

KernelSpec rational_quadratic(double lengthscale, double alpha) {
  KernelSpec s;
  s.kind = KernelKind::RationalQuadratic;
  s.lengthscale = lengthscale;
  s.alpha = alpha;
  return s;
}

KernelSpec matern32(double lengthscale) {
  KernelSpec s;
  s.kind = KernelKind::Matern32;
  s.lengthscale = lengthscale;
  return s;
}

KernelSpec matern52(double lengthscale) {
  KernelSpec s;
  s.kind = KernelKind::Matern52;
  s.lengthscale = lengthscale;
  return s;
}

KernelSpec periodic(double lengthscale, double period) {
  KernelSpec s;
  s.kind = KernelKind::Periodic;
  s.lengthscale = lengthscale;
  s.period = period;
  return s;
}

KernelSpec linear(double variance) {
  KernelSpec s;
  s.kind = KernelKind::Linear;
  s.variance = variance;
  return s;
}

namespace {

// Applies `fn(i)` to every participating coordinate.
template <typename Fn>
void for_active(const KernelSpec& spec, Eigen::Index dim, Fn&& fn) {
  if (spec.active_dims.empty()) {
    for (Eigen::Index i = 0; i < dim; ++i) fn(i);
  } else {
    for (int i : spec.active_dims) fn(static_cast<Eigen::Index>(i));
  }
}

double eval_unchecked(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::Index dim = x.size();
  switch (spec.kind) {
    case KernelKind::Linear: {
      double dot = 0.0;
      for_active(spec, dim, [&](Eigen::Index i) { dot += x[i] * y[i]; });
      return spec.variance * dot;
    }
    case KernelKind::Periodic: {
      double s = 0.0;
      const double w = std::numbers::pi / spec.period;
      for_active(spec, dim, [&](Eigen::Index i) {
        const double sn = std::sin(w * (x[i] - y[i]));
        s += sn * sn;
      });
      return std::exp(-0.5 * s / spec.lengthscale);
    }
    default: break;
  }

  double r2 = 0.0;
  for_active(spec, dim, [&](Eigen::Index i) {
    const double d = x[i] - y[i];
    r2 += d * d;
  });
  const double l2 = spec.lengthscale * spec.lengthscale;
  switch (spec.kind) {
    case KernelKind::RBF: return std::exp(-r2 / l2);
    case KernelKind::RationalQuadratic:
      return std::pow(1.0 + r2 / (2.0 * spec.alpha * l2), -spec.alpha);
    case KernelKind::Matern32: {
      const double a = std::sqrt(3.0 * r2) / spec.lengthscale;
      return (1.0 + a) * std::exp(-a);
    }
    case KernelKind::Matern52: {
      const double a = std::sqrt(5.0 * r2) / spec.lengthscale;
      return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
    default: break;
  }
  throw std::logic_error("unhandled kernel kind");
}

}  // namespace

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x_tilde) {
  if (x.size() != x_tilde.size())
    throw std::invalid_argument("eval_kernel: point dimensions differ");
  spec.validate(x.size());
  return eval_unchecked(spec, x, x_tilde);
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const ArmMatrix& arms) {
  if (arms.rows() < 1) throw std::invalid_argument("gram_matrix: empty arm set");
  spec.validate(arms.cols());
  const Eigen::Index n = arms.rows();
  // Column-major copy so each arm is a contiguous vector.
  const Eigen::MatrixXd pts = arms.transpose();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double v = eval_unchecked(spec, pts.col(i), pts.col(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

bool is_psd_up_to_jitter(const Eigen::MatrixXd& gram, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double scale = std::max(gram.diagonal().maxCoeff(), 0.0);
  return eig.eigenvalues().minCoeff() >= -tol * scale;
}

}  // namespace gpts
