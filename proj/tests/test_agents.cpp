#include "gpts/agents.hpp"
#include "gpts/priors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace gpts;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

PriorPtr diag_prior(std::string id, Eigen::VectorXd mean, Eigen::VectorXd var) {
  return materialize_prior(std::move(id), std::move(mean), var.asDiagonal().toDenseMatrix());
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// P(arm a is the argmax) for independent Gaussians, by the trapezoid rule.
double argmax_probability(const Eigen::VectorXd& mu, const Eigen::VectorXd& sd, Eigen::Index a) {
  const double lo = mu[a] - 10.0 * sd[a], hi = mu[a] + 10.0 * sd[a];
  const int steps = 20000;
  const double h = (hi - lo) / steps;
  double total = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + i * h;
    double v = normal_pdf((x - mu[a]) / sd[a]) / sd[a];
    for (Eigen::Index b = 0; b < mu.size(); ++b)
      if (b != a) v *= normal_cdf((x - mu[b]) / sd[b]);
    total += (i == 0 || i == steps ? 0.5 : 1.0) * v;
  }
  return total * h;
}

// Independent-arm posterior after k zero observations at one arm.
struct ArmPosterior {
  double mean;
  double var;
};
ArmPosterior zero_obs_posterior(double m, double v, int k, double noise) {
  return {m * noise / (k * v + noise), v * noise / (k * v + noise)};
}

}  // namespace

TEST_CASE("confidence schedules") {
  ConfidenceSchedule s{0.05, 500, 6, 0.0625};
  CHECK(s.beta(1) == doctest::Approx(2.0 * std::log(2.0 * 500 * 6 * kPi2 / (3 * 0.05))).epsilon(1e-14));
  CHECK(s.beta(1) == doctest::Approx(25.78).epsilon(5e-4));
  CHECK(s.beta_concentration(1) == doctest::Approx(24.39).epsilon(5e-4));
  CHECK(s.xi(3) == doctest::Approx(2.0 * 0.0625 * std::log(6 * kPi2 * 9 / (3 * 0.05))).epsilon(1e-14));
  CHECK(s.beta(10) > s.beta(9));
}

TEST_CASE("argmax ties go to the lowest index") {
  Eigen::VectorXd v(4);
  v << 1.0, 3.0, 3.0, 2.0;
  CHECK(argmax_lowest(v) == 1);
}

TEST_CASE("elimination state threshold") {
  EliminationState e(2);
  // |eta| = 1 against sqrt(xi * 1) + width = 0.5 + 0.4.
  CHECK(e.record(1, -1.0, 0.4, 0.25));
  CHECK_FALSE(e.active(1));
  CHECK(e.active_count() == 1);
  CHECK_FALSE(e.record(0, 0.5, 0.4, 0.25));
  CHECK(e.selections(0) == 1);
  CHECK(e.error_sum(0) == 0.5);
  CHECK(e.width_sum(0) == doctest::Approx(0.4));
}

// Two arms, two priors. Prior B is confidently wrong about every arm and the
// rewards are all zero. With UCB, round 1 keeps B (1.05 < 0.781 + 0.354) and
// round 2 drops it (2.10 > 1.252 + 0.354 + 0.391). The expected elimination round is simulated here from
// closed-form scalar posteriors, following the agent's own (arm, prior) trace.
TEST_CASE("hand-built elimination trace") {
  const double noise = 0.0625, delta = 0.05, mb = 1.05, v = 0.01;
  const auto a = diag_prior("A", Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, v));
  const auto b = diag_prior("B", Eigen::VectorXd::Constant(2, mb), Eigen::VectorXd::Constant(2, v));
  const auto h = uniform_hyperprior({a, b});
  const double prior_var[2] = {a->cov(0, 0), b->cov(0, 0)};
  const double means[2] = {0.0, mb};

  for (auto rule : {EliminationAgent::Rule::Ucb, EliminationAgent::Rule::ThompsonSampling}) {
    CAPTURE(static_cast<int>(rule));
    EliminationAgent agent(h, noise, delta, rule);
    RandomStream rng(42);
    int obs[2] = {0, 0};
    double err[2] = {0, 0}, width[2] = {0, 0};
    int count[2] = {0, 0};
    int expected = -1, observed = -1;
    for (int t = 1; t <= 300 && observed < 0; ++t) {
      const auto sel = agent.select(rng);
      const int p = sel.prior;
      const auto x = static_cast<int>(sel.arm);
      const auto post = zero_obs_posterior(means[p], prior_var[p], obs[x], noise);
      const double beta = 2.0 * std::log(2.0 * 2 * 2 * kPi2 * t * t / (3 * delta));
      const double xi = 2.0 * noise * std::log(2 * kPi2 * t * t / (3 * delta));
      err[p] += 0.0 - post.mean;
      width[p] += std::sqrt(beta * post.var);
      ++count[p];
      if (expected < 0 && std::abs(err[p]) > std::sqrt(xi * count[p]) + width[p]) expected = t;
      agent.observe(0.0);
      ++obs[x];
      if (!agent.elimination().active(1)) observed = t;
      CHECK(agent.elimination().active(0));
    }
    CHECK(expected >= 2);
    CHECK(observed == expected);
    if (rule == EliminationAgent::Rule::Ucb) CHECK(observed == 2);
  }
}

TEST_CASE("all priors eliminated aborts the agent") {
  const auto b = diag_prior("B", Eigen::VectorXd::Constant(2, 50.0), Eigen::VectorXd::Constant(2, 0.01));
  EliminationAgent agent(uniform_hyperprior({b}), 0.0625, 0.05, EliminationAgent::Rule::Ucb);
  RandomStream rng(1);
  agent.select(rng);
  agent.observe(0.0);
  CHECK(agent.aborted());
  CHECK(agent.active_prior_count() == 0);
  CHECK_THROWS_AS(agent.select(rng), std::logic_error);
}

TEST_CASE("observe without select is an error") {
  const auto a = diag_prior("A", Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
  EliminationAgent e(uniform_hyperprior({a}), 0.0625, 0.05, EliminationAgent::Rule::Ucb);
  CHECK_THROWS_AS(e.observe(0.0), std::logic_error);
  HyperposteriorAgent hp(uniform_hyperprior({a}), 0.0625, HyperposteriorAgent::PriorChoice::Sample);
  CHECK_THROWS_AS(hp.observe(0.0), std::logic_error);
}

TEST_CASE("UCB with no data follows the widest prior") {
  Eigen::VectorXd va(3), vb(3);
  va << 1.0, 1.0, 1.0;
  vb << 0.5, 4.0, 4.0;
  const auto a = diag_prior("A", Eigen::VectorXd::Zero(3), va);
  const auto b = diag_prior("B", Eigen::VectorXd::Zero(3), vb);
  EliminationAgent agent(uniform_hyperprior({a, b}), 0.0625, 0.05, EliminationAgent::Rule::Ucb);
  RandomStream rng(0);
  const auto s = agent.select(rng);
  CHECK(s.prior == 1);
  CHECK(s.arm == 1);
}

TEST_CASE("oracle UCB picks the arm a hand computation picks") {
  Eigen::VectorXd m(2), v(2);
  m << 0.0, 0.5;
  v << 4.0, 1.0;
  const auto p = diag_prior("P", m, v);
  OracleAgent agent(p, 0.0625, 0.05, OracleAgent::Rule::Ucb);
  const double rb = std::sqrt(2.0 * std::log(2.0 * 2 * 1 * kPi2 / (3 * 0.05)));
  REQUIRE(0.0 + rb * 2.0 > 0.5 + rb * 1.0);
  RandomStream rng(0);
  CHECK(agent.select(rng).arm == 0);
  agent.observe(3.0);
  // Arm 0 now has mean ~2.82 and sd ~0.12; compare with the same numbers.
  const auto post = agent.posterior();
  const double rb2 = std::sqrt(2.0 * std::log(2.0 * 2 * 1 * kPi2 * 4 / (3 * 0.05)));
  const Eigen::Index expect = post.mean(0) + rb2 * post.stddev(0) >= 0.5 + rb2 * 1.0 ? 0 : 1;
  CHECK(agent.select(rng).arm == expect);
}

TEST_CASE("oracle Thompson sampling matches argmax probabilities") {
  Eigen::VectorXd mu(5), var(5);
  mu << 0.0, 0.3, -0.2, 0.5, 0.1;
  var << 1.0, 0.5, 2.0, 0.2, 1.0;
  const auto p = diag_prior("P", mu, var);
  OracleAgent agent(p, 0.0625, 0.05, OracleAgent::Rule::ThompsonSampling);
  RandomStream rng(123);
  const int draws = 50000;
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(5);
  for (int i = 0; i < draws; ++i) freq[agent.select(rng).arm] += 1.0;
  freq /= draws;
  const Eigen::VectorXd sd = p->cov.diagonal().cwiseSqrt();
  double total = 0.0;
  for (Eigen::Index a = 0; a < 5; ++a) {
    const double q = argmax_probability(mu, sd, a);
    total += q;
    CHECK(std::abs(freq[a] - q) <= 4.0 * std::sqrt(q * (1 - q) / draws) + 1e-4);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("hyperposterior weights") {
  HyperposteriorState uniform(Eigen::VectorXd::Constant(6, 1.0 / 6.0));
  CHECK(uniform.entropy() == doctest::Approx(std::log(6.0)).epsilon(1e-14));
  CHECK(uniform.map_index() == 0);

  HyperposteriorState two(Eigen::VectorXd::Constant(2, 0.5));
  Eigen::VectorXd ll(2);
  ll << std::log(3.0), 0.0;
  two.update(ll);
  CHECK(two.weights()[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(two.weights()[1] == doctest::Approx(0.25).epsilon(1e-14));

  // Large log-likelihoods must not overflow.
  ll << -2000.0, -2001.0;
  two.update(ll);
  CHECK(two.weights()[0] == doctest::Approx(3 * std::exp(1.0) / (3 * std::exp(1.0) + 1)).epsilon(1e-12));

  Eigen::VectorXd w(3);
  w << 0.2, 0.7, 0.1;
  CHECK(HyperposteriorState(w).map_index() == 1);
}

TEST_CASE("identical priors keep uniform weights") {
  const auto a = diag_prior("A", Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
  const auto b = diag_prior("B", Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
  HyperposteriorAgent agent(uniform_hyperprior({a, b}), 0.0625, HyperposteriorAgent::PriorChoice::Sample);
  RandomStream rng(4);
  for (int t = 0; t < 30; ++t) {
    agent.select(rng);
    agent.observe(rng.normal());
  }
  CHECK(agent.hyperposterior().weights()[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("MAP agent starts on the lowest index and follows the evidence") {
  const auto a = diag_prior("A", Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
  const auto b = diag_prior("B", Eigen::VectorXd::Constant(2, 3.0), Eigen::VectorXd::Ones(2));
  HyperposteriorAgent agent(uniform_hyperprior({a, b}), 0.0625, HyperposteriorAgent::PriorChoice::Map);
  RandomStream rng(0);
  CHECK(agent.select(rng).prior == 0);
  agent.observe(3.0);
  CHECK(agent.select(rng).prior == 1);
}

TEST_CASE("agent names round trip") {
  for (auto k : all_agents()) CHECK(parse_agent(agent_name(k)) == k);
  CHECK_THROWS_AS(parse_agent("bogus"), std::invalid_argument);
  CHECK(all_agents().size() == 6);
}
