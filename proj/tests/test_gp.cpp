#include "gpts/gp.hpp"
#include "gpts/random.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

using namespace gpts;

namespace {

PriorPtr scalar_prior(double mean = 0.0, double var = 1.0) {
  return materialize_prior("scalar", Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, var));
}

PriorPtr random_prior(int n, RandomStream& rng) {
  ArmMatrix arms(n, 1);
  for (int i = 0; i < n; ++i) arms(i, 0) = 20.0 * rng.uniform();
  Eigen::VectorXd mean(n);
  for (int i = 0; i < n; ++i) mean[i] = rng.normal();
  return materialize_prior("rand", mean, gram_matrix(matern52(2.0), arms));
}

// Posterior through an explicit inverse of (K_XX + noise I).
struct Reference {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Reference reference(const MaterializedPrior& p, const std::vector<Eigen::Index>& x, const std::vector<double>& y,
                    double noise) {
  const auto t = static_cast<Eigen::Index>(x.size());
  const Eigen::Index n = p.num_arms();
  Eigen::MatrixXd kxx(t, t), knx(n, t);
  Eigen::VectorXd r(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    r[i] = y[static_cast<std::size_t>(i)] - p.mean[x[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < t; ++j) kxx(i, j) = p.cov(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
    for (Eigen::Index a = 0; a < n; ++a) knx(a, i) = p.cov(a, x[static_cast<std::size_t>(i)]);
  }
  const Eigen::MatrixXd inv = (kxx + noise * Eigen::MatrixXd::Identity(t, t)).inverse();
  return {p.mean + knx * inv * r, p.cov - knx * inv * knx.transpose()};
}

}  // namespace

TEST_CASE("no observations gives the prior") {
  RandomStream rng(1);
  const auto p = random_prior(15, rng);
  PosteriorState post(p, 0.0625);
  CHECK((post.mean() - p->mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((post.variance() - p->cov.diagonal()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("scalar conjugate update") {
  PosteriorState post(scalar_prior(), 0.0625);
  post.condition(0, 1.0);
  CHECK(post.mean(0) == doctest::Approx(1.0 / 1.0625).epsilon(1e-7));
  CHECK(post.mean(0) == doctest::Approx(0.941176).epsilon(1e-6));
  CHECK(post.variance(0) == doctest::Approx(0.0625 / 1.0625).epsilon(1e-6));
  CHECK(post.variance(0) == doctest::Approx(0.058824).epsilon(1e-5));
}

TEST_CASE("repeated observations of one arm") {
  const double noise = 0.0625;
  PosteriorState post(scalar_prior(), noise);
  for (int k = 1; k <= 50; ++k) {
    post.condition(0, 0.3);
    // Closed form for k identical observations of a N(0, 1) value.
    const double v = 1.0 + kPriorJitter;
    CHECK(post.variance(0) == doctest::Approx(v * noise / (k * v + noise)).epsilon(1e-8));
    CHECK(post.mean(0) == doctest::Approx(0.3 * k * v / (k * v + noise)).epsilon(1e-8));
  }
  CHECK(post.variance(0) <= noise / 50.0 + 1e-6);
}

TEST_CASE("incremental posterior matches an explicit inverse") {
  RandomStream rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = random_prior(20, rng);
    PosteriorState post(p, 0.0625, 2);
    std::vector<Eigen::Index> x;
    std::vector<double> y;
    for (int t = 0; t < 25; ++t) {
      const auto a = static_cast<Eigen::Index>(rng.uniform() * 20) % 20;
      const double v = rng.normal();
      post.condition(a, v);
      x.push_back(a);
      y.push_back(v);
    }
    const auto ref = reference(*p, x, y, 0.0625);
    const double scale = 1.0 + ref.mean.cwiseAbs().maxCoeff();
    CHECK((post.mean() - ref.mean).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    CHECK((post.variance() - ref.cov.diagonal().cwiseMax(0.0)).cwiseAbs().maxCoeff() <= 1e-8);
    for (Eigen::Index a = 0; a < 20; ++a) {
      CHECK(post.variance(a) <= p->cov(a, a) + 1e-12);
      CHECK(post.variance(a) >= 0.0);
    }
  }
}

TEST_CASE("prior factor and observation factor are consistent") {
  RandomStream rng(3);
  const auto p = random_prior(12, rng);
  CHECK((p->chol * p->chol.transpose() - p->cov).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(p->jitter >= kPriorJitter * 1.0);
  PosteriorState post(p, 0.1);
  std::vector<Eigen::Index> x = {0, 4, 4, 9};
  for (auto a : x) post.condition(a, 1.0);
  const Eigen::MatrixXd l = post.obs_cholesky();
  Eigen::MatrixXd k(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) k(i, j) = p->cov(x[i], x[j]) + (i == j ? 0.1 : 0.0);
  CHECK((l * l.transpose() - k).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(l.isLowerTriangular());
}

TEST_CASE("jitter recovers a singular covariance") {
  // Rank one: a linear kernel on 1-d arms.
  ArmMatrix arms(5, 1);
  arms << 1, 2, 3, 4, 5;
  const auto p = materialize_kernel_prior("lin", linear(1.0), arms);
  CHECK(p->jitter > 0.0);
  CHECK((p->chol * p->chol.transpose() - p->cov).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::MatrixXd neg = Eigen::MatrixXd::Identity(2, 2);
  neg(1, 1) = -1.0;
  CHECK_THROWS_AS(materialize_prior("neg", Eigen::VectorXd::Zero(2), neg), NumericalError);
}

TEST_CASE("pathwise samples have the posterior moments") {
  RandomStream rng(11);
  const auto p = random_prior(8, rng);
  PosteriorState post(p, 0.0625);
  for (Eigen::Index a : {1, 3, 3, 6}) post.condition(a, rng.normal());
  const auto ref = reference(*p, post.observed_arms(), post.observed_rewards(), 0.0625);

  const int draws = 20000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(8);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(8);
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd f = post.sample(rng);
    sum += f;
    sq += (f - ref.mean).cwiseAbs2();
  }
  for (Eigen::Index a = 0; a < 8; ++a) {
    const double v = std::max(ref.cov(a, a), 1e-12);
    const double mean_z = (sum[a] / draws - ref.mean[a]) / std::sqrt(v / draws);
    CHECK(std::abs(mean_z) < 4.0);
    // Var of the squared deviation is 2 v^2 for a Gaussian.
    const double var_z = (sq[a] / draws - v) / std::sqrt(2.0 * v * v / draws);
    CHECK(std::abs(var_z) < 4.0);
  }
}

TEST_CASE("near-noiseless observations pin the sample") {
  RandomStream rng(5);
  const auto p = random_prior(10, rng);
  PosteriorState post(p, 1e-10);
  post.condition(4, 0.8);
  double ss = 0.0;
  const int draws = 2000;
  for (int i = 0; i < draws; ++i) {
    const double d = post.sample(rng)[4] - 0.8;
    ss += d * d;
  }
  CHECK(std::sqrt(ss / draws) <= 1e-4);
}

TEST_CASE("predictive log-likelihood") {
  PosteriorState post(scalar_prior(), 0.0625);
  const double v = 1.0 + kPriorJitter + 0.0625;
  CHECK(post.predictive_loglik(0, 0.0) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi * v)).epsilon(1e-12));
  CHECK(post.predictive_loglik(0, 0.0) == doctest::Approx(-0.94926).epsilon(1e-5));
  CHECK(post.predictive_loglik(0, 1.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 / v).epsilon(1e-12));
}

TEST_CASE("sample_from is deterministic in its normals") {
  RandomStream rng(9);
  const auto p = random_prior(6, rng);
  PosteriorState post(p, 0.0625);
  post.condition(2, 0.5);
  const Eigen::VectorXd z = rng.normals(6);
  const Eigen::VectorXd e = rng.normals(1);
  CHECK(post.sample_from(z, e) == post.sample_from(z, e));
  // Zero normals give the posterior mean.
  CHECK((post.sample_from(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(1)) - post.mean()).cwiseAbs().maxCoeff() <
        1e-12);
}
