#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "htopt/optimizers.hpp"

using namespace htopt;

TEST_CASE("adagrad_step: accumulate first, then step with the bumped value") {
  {
    AdaGradState s{{0.0, 0.0}, {0.0, 0.0}, 1.0, 1.0, 0};
    const auto s2 = adagrad_step(s, {2.0, 0.0});
    REQUIRE(s2.v == Vec{4.0, 0.0});
    REQUIRE(s2.x[0] == Catch::Approx(-2.0 / 3.0).epsilon(1e-15));
    REQUIRE(s2.x[1] == 0.0);
    REQUIRE(s2.t == 1);
  }
  {
    AdaGradState s{{1.5, -2.0}, {3.0, 4.0}, 0.5, 0.1, 7};
    const auto s2 = adagrad_step(s, {0.0, 0.0});
    REQUIRE(s2.x == s.x);
    REQUIRE(s2.v == s.v);
    REQUIRE(s2.t == 8);
  }
  {
    // lambda = 0 with a non-zero gradient: v' >= g^2 > 0, so the step is finite
    AdaGradState s{{0.0}, {0.0}, 2.0, 0.0, 0};
    const auto s2 = adagrad_step(s, {-3.0});
    REQUIRE(s2.v == Vec{9.0});
    REQUIRE(s2.x[0] == 2.0);
  }
}

TEST_CASE("adagrad_step: 0/0 convention when lambda = 0") {
  AdaGradState s{{1.0}, {0.0}, 1.0, 0.0, 0};
  const auto s2 = adagrad_step(s, {0.0});
  REQUIRE(s2.x[0] == 1.0);
  REQUIRE(s2.v[0] == 0.0);
}

TEST_CASE("adagradnorm_step: scalar accumulator shared across coordinates") {
  {
    AdaGradNormState s{{0.0, 0.0}, 0.0, 1.0, 0.0, 0};
    const auto s2 = adagradnorm_step(s, {3.0, 4.0});
    REQUIRE(s2.v == 25.0);
    REQUIRE(s2.x[0] == Catch::Approx(-0.6).epsilon(1e-15));
    REQUIRE(s2.x[1] == Catch::Approx(-0.8).epsilon(1e-15));
  }
  {
    AdaGradNormState s{{1.0}, 5.0, 1.0, 0.5, 3};
    const auto s2 = adagradnorm_step(s, {0.0});
    REQUIRE(s2.x == Vec{1.0});
    REQUIRE(s2.v == 5.0);
  }
}

TEST_CASE("adagradnorm: equal-norm steps shrink as 1/sqrt(t)") {
  AdaGradNormState s{{0.0}, 0.0, 1.0, 0.0, 0};
  const auto s1 = adagradnorm_step(s, {2.0});
  const double step1 = -s1.x[0];  // gamma * g / ||g|| / sqrt(1)
  const auto s2 = adagradnorm_step(s1, {2.0});
  const double step2 = s1.x[0] - s2.x[0];
  REQUIRE(step1 == Catch::Approx(1.0).epsilon(1e-15));
  REQUIRE(step2 == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("baseline steps") {
  OptimizerSpec clipped;
  clipped.algo = Algo::clipped_sgd;
  clipped.eta = 1.0;
  clipped.tau = 1.0;
  BaselineState b{{0.0, 0.0}, {}, 0};
  const auto b2 = baseline_step(clipped, b, {3.0, 4.0});
  REQUIRE(b2.x[0] == Catch::Approx(-0.6).epsilon(1e-15));
  REQUIRE(b2.x[1] == Catch::Approx(-0.8).epsilon(1e-15));

  OptimizerSpec nsgd;
  nsgd.algo = Algo::nsgd_m;
  nsgd.eta = 0.5;
  nsgd.beta = 0.0;
  BaselineState n{{0.0, 0.0}, {}, 0};
  const auto n2 = baseline_step(nsgd, n, {0.0, 2.0});
  REQUIRE(n2.x[0] == 0.0);
  REQUIRE(n2.x[1] == Catch::Approx(-0.5).epsilon(1e-15));

  OptimizerSpec sgd;
  sgd.algo = Algo::sgd;
  sgd.eta = 0.1;
  BaselineState g{{0.0}, {}, 0};
  REQUIRE(baseline_step(sgd, g, {1.0}).x[0] == Catch::Approx(-0.1).epsilon(1e-15));

  // zero momentum vector: skip the step
  BaselineState z{{1.0}, {}, 0};
  REQUIRE(baseline_step(nsgd, z, {0.0}).x[0] == 1.0);
}

TEST_CASE("missing hyperparameters are rejected") {
  OptimizerSpec s;
  s.algo = Algo::clipped_sgd;
  s.eta = 0.1;  // tau missing
  REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);
  OptimizerSpec a;
  a.algo = Algo::adagrad;  // gamma/lambda missing
  REQUIRE_THROWS_AS(a.validate(), std::invalid_argument);
}

namespace {

OptimizerSpec adagrad_spec(double gamma, double lambda) {
  OptimizerSpec s;
  s.algo = Algo::adagrad;
  s.gamma = gamma;
  s.lambda = lambda;
  return s;
}

}  // namespace

TEST_CASE("run with zero noise and T=1 reproduces a single manual step") {
  const Problem prob = make_quadratic({1.0, 4.0}, {0.0, 0.0});
  const NoiseModel nm = make_zero(2);
  const Trajectory traj = run(prob, nm, adagrad_spec(1.0, 1.0), 1, 3);
  AdaGradState st{prob.x_default, {0.0, 0.0}, 1.0, 1.0, 0};
  const auto manual = adagrad_step(st, prob.eval_grad(prob.x_default));
  REQUIRE(traj.x_final == manual.x);
  REQUIRE(traj.v[0] == manual.v);
}

TEST_CASE("same seed gives bit-identical trajectories") {
  const Problem prob = make_quadratic({1.0, 4.0}, {0.0, 0.0});
  const NoiseModel nm = make_pareto_sym(1.5, {1.0, 1.0}, 3.0);
  const Trajectory a = run(prob, nm, adagrad_spec(1.0, 0.5), 200, 17);
  const Trajectory b = run(prob, nm, adagrad_spec(1.0, 0.5), 200, 17);
  REQUIRE(a.x == b.x);
  REQUIRE(a.g == b.g);
  REQUIRE(a.v == b.v);
  REQUIRE(a.f == b.f);
  const Trajectory c = run(prob, nm, adagrad_spec(1.0, 0.5), 200, 18);
  REQUIRE(a.g != c.g);
}

TEST_CASE("deterministic adagrad descends on a convex quadratic") {
  const Problem prob = make_quadratic({1.0}, {0.0});
  Problem p = prob;
  p.x_default = {10.0};
  const Trajectory traj = run(p, make_zero(1), adagrad_spec(1.0, 1.0), 100, 0);
  for (long t = 1; t < traj.steps(); ++t)
    REQUIRE(traj.f[static_cast<std::size_t>(t)] < traj.f[static_cast<std::size_t>(t - 1)]);
}

TEST_CASE("accumulator identity: v_T equals the running sum of g^2, bit for bit") {
  const Problem prob = make_bounded_cosine({1.0, 0.5}, {1.0, 3.0});
  const NoiseModel nm = make_discrete3(2.0, {0.7, 0.7}, std::sqrt(2.0));
  const Trajectory traj = run(prob, nm, adagrad_spec(0.7, 0.3), 500, 5);
  Vec v = zeros(2);
  for (long t = 0; t < traj.steps(); ++t) {
    for (int i = 0; i < 2; ++i) {
      const double gi = traj.g[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      v[static_cast<std::size_t>(i)] += gi * gi;
      REQUIRE(v[static_cast<std::size_t>(i)] ==
              traj.v[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("recorded noise satisfies g = grad + xi exactly") {
  const Problem prob = make_quadratic({1.0, 4.0}, {0.0, 0.0});
  const NoiseModel nm = make_pareto_sym(2.0, {0.5, 0.5}, 4.0);
  const Trajectory traj = run(prob, nm, adagrad_spec(1.0, 1.0), 300, 9);
  for (long t = 0; t < traj.steps(); ++t)
    for (int i = 0; i < 2; ++i) {
      const auto ti = static_cast<std::size_t>(t);
      const auto ii = static_cast<std::size_t>(i);
      REQUIRE(traj.g[ti][ii] == traj.grad[ti][ii] + traj.xi[ti][ii]);
    }
}

TEST_CASE("effective stepsizes are non-increasing") {
  const Problem prob = make_quadratic({1.0, 4.0}, {0.0, 0.0});
  const NoiseModel nm = make_discrete3(2.0, {1.0, 1.0}, std::sqrt(2.0));
  const Trajectory a = run(prob, nm, adagrad_spec(1.0, 0.5), 400, 21);
  for (long t = 1; t < a.steps(); ++t)
    for (int i = 0; i < 2; ++i)
      REQUIRE(a.stepsize[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] <=
              a.stepsize[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(i)]);

  OptimizerSpec norm;
  norm.algo = Algo::adagradnorm;
  norm.gamma = 1.0;
  norm.lambda = 0.5;
  const Trajectory b = run(prob, nm, norm, 400, 22);
  for (long t = 1; t < b.steps(); ++t)
    REQUIRE(b.stepsize_scalar[static_cast<std::size_t>(t)] <=
            b.stepsize_scalar[static_cast<std::size_t>(t - 1)]);
}

TEST_CASE("gradient growth envelopes hold on random paths") {
  const Problem prob = make_bounded_cosine({1.0, 0.5}, {1.0, 3.0});
  const NoiseModel nm = make_pareto_sym(1.5, {0.7, 0.7}, 3.0);
  const double gamma = 0.8;
  {
    const Trajectory traj = run(prob, nm, adagrad_spec(gamma, 0.0), 300, 31);
    const double l1 = norm1(prob.L);
    for (long t = 0; t < traj.steps(); ++t)
      for (int i = 0; i < 2; ++i) {
        const auto ti = static_cast<std::size_t>(t);
        const auto ii = static_cast<std::size_t>(i);
        REQUIRE(std::abs(traj.grad[ti][ii]) <=
                std::abs(traj.grad[0][ii]) + gamma * std::sqrt(prob.L[ii] * l1) * static_cast<double>(t) +
                    1e-9);
      }
  }
  {
    OptimizerSpec norm;
    norm.algo = Algo::adagradnorm;
    norm.gamma = gamma;
    norm.lambda = 0.0;
    const Trajectory traj = run(prob, nm, norm, 300, 32);
    const double linf = norm_inf(prob.L);
    for (long t = 0; t < traj.steps(); ++t) {
      double diff = 0.0;
      for (int i = 0; i < 2; ++i) {
        const double d = traj.grad[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] -
                         traj.grad[0][static_cast<std::size_t>(i)];
        diff += d * d;
      }
      REQUIRE(std::sqrt(diff) <= gamma * linf * static_cast<double>(t) + 1e-9);
    }
  }
}

TEST_CASE("run_metrics reproduces metrics recomputed from the full record") {
  const Problem prob = make_bounded_cosine({1.0, 0.5}, {1.0, 3.0});
  const NoiseModel nm = make_pareto_sym(1.5, {1.0, 1.0}, 3.0);
  for (Algo algo : {Algo::adagrad, Algo::adagradnorm}) {
    OptimizerSpec spec;
    spec.algo = algo;
    spec.gamma = 1.0;
    spec.lambda = 0.5;
    const Trajectory traj = run(prob, nm, spec, 250, 77);
    const RunMetrics m = run_metrics(prob, nm, spec, 250, 77);
    double s1 = 0, s2 = 0, ssq = 0;
    for (long t = 0; t < traj.steps(); ++t) {
      s1 += norm1(traj.grad[static_cast<std::size_t>(t)]);
      s2 += norm2(traj.grad[static_cast<std::size_t>(t)]);
      ssq += norm2_sq(traj.grad[static_cast<std::size_t>(t)]);
    }
    REQUIRE(m.grad_l1_avg == s1 / 250.0);
    REQUIRE(m.grad_l2_avg == s2 / 250.0);
    REQUIRE(m.grad_l2_sq_avg == ssq / 250.0);
  }
}
