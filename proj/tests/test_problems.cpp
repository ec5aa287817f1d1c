#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "htopt/problems.hpp"

using namespace htopt;

TEST_CASE("quadratic evaluates f and grad in closed form") {
  {
    const Problem p = make_quadratic({1.0}, {0.0});
    REQUIRE(p.eval_f({2.0}) == 2.0);
    REQUIRE(p.eval_grad({2.0})[0] == 2.0);
  }
  {
    const Problem p = make_quadratic({1.0, 4.0}, {0.0, 0.0});
    REQUIRE(p.eval_f({1.0, 1.0}) == 2.5);
    const Vec g = p.eval_grad({1.0, 1.0});
    REQUIRE(g[0] == 1.0);
    REQUIRE(g[1] == 4.0);
  }
  {
    const Problem p = make_quadratic({3.0}, {1.0});
    REQUIRE(p.eval_f({1.0}) == 0.0);
    REQUIRE(p.eval_grad({1.0})[0] == 0.0);
  }
}

TEST_CASE("quadratic metadata") {
  const Problem p = make_quadratic({2.0, 5.0}, {1.0, -1.0});
  REQUIRE(p.f_star == 0.0);
  REQUIRE_FALSE(p.f_sup.has_value());
  REQUIRE(p.L == Vec{2.0, 5.0});
  REQUIRE(p.dim == 2);
}

TEST_CASE("quadratic rejects non-positive smoothness") {
  REQUIRE_THROWS_AS(make_quadratic({1.0, 0.0}, {0.0, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(make_quadratic({-1.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("bounded cosine evaluates f and grad in closed form") {
  const Problem p = make_bounded_cosine({1.0}, {1.0});
  REQUIRE(p.eval_f({0.0}) == 0.0);
  REQUIRE(p.eval_grad({0.0})[0] == 0.0);
  REQUIRE(p.eval_f({std::numbers::pi}) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(std::abs(p.eval_grad({std::numbers::pi})[0]) < 1e-12);
}

TEST_CASE("bounded cosine metadata: L = A a^2 and f_sup = 2 sum A") {
  const Problem p = make_bounded_cosine({2.0}, {3.0});
  REQUIRE(p.L[0] == 18.0);
  REQUIRE(p.f_sup.has_value());
  REQUIRE(*p.f_sup == 4.0);
  REQUIRE(p.f_star == 0.0);
  REQUIRE_THROWS_AS(make_bounded_cosine({0.0}, {1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(make_bounded_cosine({1.0}, {-2.0}), std::invalid_argument);
}

TEST_CASE("check_assumptions passes on both canonical families") {
  const AssumptionReport rq = check_assumptions(make_quadratic({1.0, 4.0}, {0.0, 0.0}), 100, 11);
  REQUIRE(rq.pass);
  REQUIRE(rq.max_secant_violation <= kSecantSlack);

  const AssumptionReport rc = check_assumptions(make_bounded_cosine({1.0, 0.5}, {1.0, 3.0}), 100, 12);
  REQUIRE(rc.pass);
}

TEST_CASE("check_assumptions detects an under-declared smoothness vector") {
  Problem p = make_quadratic({2.0, 2.0}, {0.0, 0.0});
  for (auto& li : p.L) li *= 0.5;  // adversarially halve the declared budget
  const AssumptionReport r = check_assumptions(p, 100, 13);
  REQUIRE_FALSE(r.pass);
  REQUIRE(r.max_secant_violation > 0.0);
}

TEST_CASE("check_assumptions validates n_samples") {
  REQUIRE_THROWS_AS(check_assumptions(make_quadratic({1.0}, {0.0}), 0, 1), std::invalid_argument);
}

TEST_CASE("quadratic secant bound is equality-tight") {
  const Problem p = make_quadratic({1.0, 4.0, 0.5}, {0.0, 0.0, 0.0});
  const auto stream = RngStream::from_seed(77);
  for (int s = 0; s < 200; ++s) {
    const auto draw = stream.child(s);
    Vec x(3), y(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = 10.0 * (2.0 * draw.uniform01(2 * i) - 1.0);
      y[i] = 10.0 * (2.0 * draw.uniform01(2 * i + 1) - 1.0);
    }
    double inner = 0.0, budget = 0.0;
    const Vec gy = p.eval_grad(y);
    for (int i = 0; i < 3; ++i) {
      inner += gy[i] * (x[i] - y[i]);
      budget += 0.5 * p.L[i] * (x[i] - y[i]) * (x[i] - y[i]);
    }
    if (budget < 1e-6) continue;  // degenerate pair
    const double ratio = std::abs(p.eval_f(x) - p.eval_f(y) - inner) / budget;
    REQUIRE(ratio == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("norms agree with brute-force coordinate sums") {
  const Vec v = {1.5, -2.0, 0.25, -0.125};
  double s1 = 0, s2 = 0, si = 0;
  for (double x : v) {
    s1 += std::abs(x);
    s2 += x * x;
    si = std::max(si, std::abs(x));
  }
  REQUIRE(norm1(v) == s1);
  REQUIRE(norm2(v) == std::sqrt(s2));
  REQUIRE(norm_inf(v) == si);
  double sp = 0;
  for (double x : v) sp += std::pow(std::abs(x), 1.5);
  REQUIRE(norm_p(v, 1.5) == Catch::Approx(std::pow(sp, 1.0 / 1.5)).epsilon(1e-14));
}
