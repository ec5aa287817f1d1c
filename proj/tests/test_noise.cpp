#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "htopt/noise.hpp"

using namespace htopt;

namespace {

// Independent moment oracle: exact expectation over an enumerated support.
double enumerated_abs_moment(const NoiseModel& nm, int coord, double power) {
  double m = 0.0;
  for (const auto& atom : enumerate_support(nm))
    m += atom.prob * std::pow(std::abs(atom.outcome[static_cast<std::size_t>(coord)]), power);
  return m;
}

struct McMoment {
  double mean = 0.0;
  double se = 0.0;
};

McMoment mc_abs_moment(const NoiseModel& nm, int coord, double power, long n, std::uint64_t seed) {
  const auto stream = RngStream::from_seed(seed);
  Vec xi;
  double sum = 0.0, sumsq = 0.0;
  for (long t = 0; t < n; ++t) {
    nm.sample_into(stream.child(static_cast<std::uint64_t>(t)), xi);
    const double v = std::pow(std::abs(xi[static_cast<std::size_t>(coord)]), power);
    sum += v;
    sumsq += v * v;
  }
  McMoment out;
  out.mean = sum / static_cast<double>(n);
  const double var = (sumsq / static_cast<double>(n) - out.mean * out.mean) *
                     static_cast<double>(n) / static_cast<double>(n - 1);
  out.se = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  return out;
}

}  // namespace

TEST_CASE("discrete3 matches its closed-form construction") {
  const NoiseModel nm = make_discrete3(2.0, {1.0}, std::sqrt(2.0));
  REQUIRE(nm.a[0] == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
  REQUIRE(nm.rho[0] == Catch::Approx(0.5).epsilon(1e-15));
  // P(+-a) = rho/2 = 1/4 each; E xi^2 = rho a^2 = 1.
  REQUIRE(enumerated_abs_moment(nm, 0, 2.0) == Catch::Approx(1.0).epsilon(1e-14));
  REQUIRE(enumerated_abs_moment(nm, 0, 1.0) > 0.0);
}

TEST_CASE("discrete3 with p = 1.5 and scale 2^(2/3) has rho = 1/2 and unit moment") {
  const double scale = std::pow(2.0, 1.0 / 1.5);
  const NoiseModel nm = make_discrete3(1.5, {1.0}, scale);
  REQUIRE(nm.rho[0] == Catch::Approx(0.5).epsilon(1e-14));
  REQUIRE(enumerated_abs_moment(nm, 0, 1.5) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("discrete3 degenerates to a point mass at zero noise") {
  const NoiseModel nm = make_discrete3(2.0, {0.0}, 2.0);
  const auto atoms = enumerate_support(nm);
  REQUIRE(atoms.size() == 1);
  REQUIRE(atoms[0].outcome[0] == 0.0);
  REQUIRE(atoms[0].prob == 1.0);
}

TEST_CASE("discrete3 rejects scale_a < 1") {
  REQUIRE_THROWS_AS(make_discrete3(2.0, {1.0}, 0.9), std::invalid_argument);
}

TEST_CASE("pareto_sym certified moment and variance flag") {
  {
    const double p = 1.5;
    const NoiseModel nm = make_pareto_sym(p, {1.0}, 2.0 * p);
    REQUIRE(nm.sigma_tilde[0] == Catch::Approx(std::pow(2.0, -1.0 / p)).epsilon(1e-14));
    REQUIRE_FALSE(nm.infinite_variance);  // alpha = 3 > 2
  }
  {
    const NoiseModel nm = make_pareto_sym(1.5, {1.0}, 1.9);
    REQUIRE(nm.infinite_variance);
  }
  {
    const NoiseModel nm = make_pareto_sym(1.5, {0.0}, 3.0);
    REQUIRE_FALSE(nm.infinite_variance);
    Vec xi;
    nm.sample_into(RngStream::from_seed(4).child(1), xi);
    REQUIRE(xi[0] == 0.0);
  }
  REQUIRE_THROWS_AS(make_pareto_sym(1.5, {1.0}, 1.5), std::invalid_argument);
  REQUIRE_THROWS_AS(make_pareto_sym(1.5, {1.0}, 1.2), std::invalid_argument);
}

TEST_CASE("sampling is a pure function of the stream") {
  const NoiseModel nm = make_discrete3(2.0, {1.0, 0.5}, std::sqrt(2.0));
  const auto s1 = RngStream::from_seed(42);
  const auto s2 = RngStream::from_seed(42);
  Vec a, b;
  for (int t = 0; t < 100; ++t) {
    nm.sample_into(s1.child(t), a);
    nm.sample_into(s2.child(t), b);
    REQUIRE(a == b);
  }
}

TEST_CASE("zero kind always returns the origin") {
  const NoiseModel nm = make_zero(3);
  Vec xi;
  nm.sample_into(RngStream::from_seed(9).child(12), xi);
  REQUIRE(xi == Vec{0.0, 0.0, 0.0});
  const auto atoms = enumerate_support(nm);
  REQUIRE(atoms.size() == 1);
  REQUIRE(atoms[0].prob == 1.0);
}

TEST_CASE("Monte Carlo p-th moment of pareto_sym lands within 2% of the certified value") {
  const NoiseModel nm = make_pareto_sym(1.5, {1.0}, 3.0);
  const auto mc = mc_abs_moment(nm, 0, 1.5, 1000000, 314);
  REQUIRE(mc.mean == Catch::Approx(1.0).epsilon(0.02));
}

TEST_CASE("Monte Carlo moments fall within five standard errors of certified values") {
  const std::vector<NoiseModel> models = {
      make_discrete3(2.0, {1.0, 0.5}, std::sqrt(2.0)),
      make_discrete3(1.5, {1.0}, std::pow(2.0, 1.0 / 1.5)),
      make_pareto_sym(2.0, {1.0}, 4.5),
      make_pareto_sym(1.5, {1.0}, 3.5),
  };
  std::uint64_t seed = 100;
  for (const auto& nm : models) {
    for (int i = 0; i < nm.dim; ++i) {
      const auto mc = mc_abs_moment(nm, i, nm.p, 200000, seed++);
      const double cert = nm.certified_moment_p(i);
      REQUIRE(std::abs(mc.mean - cert) <= 5.0 * mc.se);
    }
  }
}

TEST_CASE("empirical mean is within five standard errors of zero") {
  const std::vector<NoiseModel> models = {
      make_discrete3(2.0, {1.0}, std::sqrt(2.0)),
      make_pareto_sym(2.0, {1.0}, 4.5),
  };
  std::uint64_t seed = 555;
  for (const auto& nm : models) {
    const auto stream = RngStream::from_seed(seed++);
    Vec xi;
    double sum = 0, sumsq = 0;
    const long n = 200000;
    for (long t = 0; t < n; ++t) {
      nm.sample_into(stream.child(static_cast<std::uint64_t>(t)), xi);
      sum += xi[0];
      sumsq += xi[0] * xi[0];
    }
    const double mean = sum / static_cast<double>(n);
    const double se = std::sqrt((sumsq / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
    REQUIRE(std::abs(mean) <= 5.0 * se);
  }
}

TEST_CASE("sign balance of the infinite-variance sampler stays inside a binomial CI") {
  const NoiseModel nm = make_pareto_sym(1.5, {1.0}, 1.9);
  const auto stream = RngStream::from_seed(777);
  Vec xi;
  long pos = 0;
  const long n = 200000;
  for (long t = 0; t < n; ++t) {
    nm.sample_into(stream.child(static_cast<std::uint64_t>(t)), xi);
    if (xi[0] > 0.0) ++pos;
  }
  const double frac = static_cast<double>(pos) / static_cast<double>(n);
  REQUIRE(std::abs(frac - 0.5) <= 5.0 * std::sqrt(0.25 / static_cast<double>(n)));
}

TEST_CASE("enumerate_support sizes and mass") {
  {
    const NoiseModel nm = make_discrete3(2.0, {1.0}, 2.0);
    REQUIRE(enumerate_support(nm).size() == 3);
  }
  {
    const NoiseModel nm = make_discrete3(2.0, {1.0, 1.0}, 2.0);
    const auto atoms = enumerate_support(nm);
    REQUIRE(atoms.size() == 9);
    double mass = 0.0;
    for (const auto& a : atoms) mass += a.prob;
    REQUIRE(mass == Catch::Approx(1.0).margin(1e-12));
  }
  REQUIRE_THROWS_AS(enumerate_support(make_pareto_sym(1.5, {1.0}, 3.0)), std::invalid_argument);
  REQUIRE_THROWS_AS(enumerate_support(make_discrete3(2.0, Vec(9, 1.0), 2.0)), std::invalid_argument);
}

TEST_CASE("disjoint seeds give statistically independent sequences") {
  const NoiseModel nm = make_discrete3(2.0, {1.0}, std::sqrt(2.0));
  const auto sa = RngStream::from_seed(1);
  const auto sb = RngStream::from_seed(2);
  Vec xa, xb;
  double sxy = 0, sxx = 0, syy = 0;
  const long n = 100000;
  for (long t = 0; t < n; ++t) {
    nm.sample_into(sa.child(static_cast<std::uint64_t>(t)), xa);
    nm.sample_into(sb.child(static_cast<std::uint64_t>(t)), xb);
    sxy += xa[0] * xb[0];
    sxx += xa[0] * xa[0];
    syy += xb[0] * xb[0];
  }
  const double corr = sxy / std::sqrt(sxx * syy);
  REQUIRE(std::abs(corr) < 5.0 / std::sqrt(static_cast<double>(n)));
}
