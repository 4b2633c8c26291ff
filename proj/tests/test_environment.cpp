#include "gpts/agents.hpp"
#include "gpts/environment.hpp"
#include "gpts/experiment.hpp"
#include "gpts/priors.hpp"

#include <doctest.h>

#include <cmath>

using namespace gpts;

namespace {

PriorPtr diag_prior(std::string id, Eigen::VectorXd mean, Eigen::VectorXd var) {
  return materialize_prior(std::move(id), std::move(mean), var.asDiagonal().toDenseMatrix());
}

}  // namespace

TEST_CASE("single prior is always the truth") {
  const auto h = uniform_hyperprior({diag_prior("A", Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3))});
  RandomStream rng(1);
  for (int i = 0; i < 50; ++i) CHECK(sample_environment(h, 0.0625, rng).true_prior == 0);
}

TEST_CASE("environment draws have the prior moments") {
  Eigen::VectorXd m(3), v(3);
  m << -1.0, 0.0, 2.0;
  v << 0.5, 1.0, 2.0;
  const auto h = uniform_hyperprior({diag_prior("A", m, v)});
  RandomStream rng(2);
  const int draws = 20000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3), sq = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < draws; ++i) {
    const auto env = sample_environment(h, 0.0625, rng);
    sum += env.f;
    sq += (env.f - m).cwiseAbs2();
    CHECK(env.f_star == env.f.maxCoeff());
    CHECK(env.f[env.x_star] == env.f_star);
  }
  for (int a = 0; a < 3; ++a) {
    CHECK(std::abs(sum[a] / draws - m[a]) < 4.0 * std::sqrt(v[a] / draws));
    CHECK(std::abs(sq[a] / draws - v[a]) < 4.0 * std::sqrt(2.0 * v[a] * v[a] / draws));
  }
}

TEST_CASE("true prior frequencies follow the weights") {
  const auto a = diag_prior("A", Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
  const auto b = diag_prior("B", Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
  const auto c = diag_prior("C", Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
  Hyperprior h = uniform_hyperprior({a, b, c});
  h.weights << 0.2, 0.5, 0.3;
  RandomStream rng(3);
  const int draws = 10000;
  Eigen::VectorXd count = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < draws; ++i) count[sample_environment(h, 0.0625, rng).true_prior] += 1.0;
  for (int p = 0; p < 3; ++p) {
    const double q = h.weights[p];
    CHECK(std::abs(count[p] / draws - q) < 4.0 * std::sqrt(q * (1 - q) / draws));
  }
}

TEST_CASE("ties in f go to the lowest arm") {
  Environment env;
  Eigen::VectorXd f(4);
  f << 0.0, 2.0, 2.0, 1.0;
  env.set_function(f);
  CHECK(env.x_star == 1);
  CHECK_THROWS_AS(env.set_function(Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("a single arm never incurs regret") {
  const auto h = uniform_hyperprior({diag_prior("A", Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1))});
  RandomStream env_rng(5);
  const auto env = sample_environment(h, 0.0625, env_rng);
  for (auto kind : all_agents()) {
    auto agent = make_agent(kind, h, 0, 0.0625, 0.05, 20);
    RandomStream agent_rng(6);
    const auto rec = run_episode(env, *agent, 20, RandomStream(7), agent_rng);
    CHECK(rec.steps.size() == 20);
    CHECK(rec.cumulative_regret() == 0.0);
  }
}

TEST_CASE("reward noise has the configured variance") {
  const auto h = uniform_hyperprior({diag_prior("A", Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1))});
  RandomStream env_rng(8);
  const auto env = sample_environment(h, 0.25, env_rng);
  auto agent = make_agent(AgentKind::OracleGpTs, h, 0, 0.25, 0.05, 4000);
  RandomStream agent_rng(9);
  const int n = 4000;
  const auto rec = run_episode(env, *agent, n, RandomStream(10), agent_rng);
  double s = 0.0, ss = 0.0;
  for (const auto& st : rec.steps) {
    const double e = st.reward - env.f[0];
    s += e;
    ss += e * e;
  }
  CHECK(std::abs(s / n) < 4.0 * std::sqrt(0.25 / n));
  CHECK(std::abs(ss / n - 0.25) < 4.0 * std::sqrt(2.0 * 0.0625 / n));
}

TEST_CASE("episodes are deterministic in their streams") {
  const auto arms = equispaced_arms(30, 20.0);
  const auto h = kernel_prior_set(arms);
  RandomStream e1(11), e2(11);
  const auto env1 = sample_environment(h, 0.0625, e1);
  const auto env2 = sample_environment(h, 0.0625, e2);
  CHECK(env1.f == env2.f);
  for (auto kind : all_agents()) {
    auto a1 = make_agent(kind, h, env1.true_prior, 0.0625, 0.05, 25);
    auto a2 = make_agent(kind, h, env1.true_prior, 0.0625, 0.05, 25);
    RandomStream r1(12), r2(12);
    EpisodeOptions opts;
    opts.track_var_at_opt = true;
    const auto x = run_episode(env1, *a1, 25, RandomStream(13), r1, opts);
    const auto y = run_episode(env2, *a2, 25, RandomStream(13), r2, opts);
    REQUIRE(x.steps.size() == y.steps.size());
    for (std::size_t t = 0; t < x.steps.size(); ++t) {
      CHECK(x.steps[t].arm == y.steps[t].arm);
      CHECK(x.steps[t].reward == y.steps[t].reward);
      CHECK(x.steps[t].instant_regret == doctest::Approx(env1.f_star - env1.f[x.steps[t].arm]).epsilon(1e-15));
    }
    if (is_elimination(kind)) CHECK(std::isfinite(x.sum_var_at_opt));
  }
}
