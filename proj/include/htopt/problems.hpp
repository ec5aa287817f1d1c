#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "htopt/core.hpp"
#include "htopt/rng.hpp"

namespace htopt {

// A synthetic objective with analytically known gradient, per-coordinate
// smoothness vector L, and exact optimal value.  Immutable after
// construction; evaluation is pure, so instances can be shared across
// concurrent workers.
struct Problem {
  int dim = 0;
  std::string name;
  std::function<double(const Vec&)> eval_f;
  std::function<Vec(const Vec&)> eval_grad;
  Vec L;                         // coordinate-wise smoothness
  double f_star = 0.0;           // exact infimum
  std::optional<double> f_sup;   // exact supremum, when the objective is bounded above
  Vec x_default;                 // canonical start
};

// f(x) = 1/2 sum_i L_i (x_i - x_opt_i)^2.  Smoothness vector is exactly L,
// the secant bound holds with equality, and f is unbounded above.
inline Problem make_quadratic(const Vec& L, const Vec& x_opt) {
  if (L.size() != x_opt.size() || L.empty())
    throw std::invalid_argument("make_quadratic: L and x_opt must be non-empty and equal-sized");
  for (double li : L)
    if (!(li > 0.0)) throw std::invalid_argument("make_quadratic: L must be strictly positive");
  Problem p;
  p.dim = static_cast<int>(L.size());
  p.name = "quadratic";
  p.L = L;
  p.f_star = 0.0;
  p.x_default = x_opt;
  for (auto& xi : p.x_default) xi += 1.0;
  p.eval_f = [L, x_opt](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i) {
      const double d = x[i] - x_opt[i];
      s += 0.5 * L[i] * d * d;
    }
    return s;
  };
  p.eval_grad = [L, x_opt](const Vec& x) {
    Vec g(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) g[i] = L[i] * (x[i] - x_opt[i]);
    return g;
  };
  return p;
}

// f(x) = sum_i A_i (1 - cos(a_i x_i)).  Bounded: f_star = 0,
// f_sup = 2 sum_i A_i, and L_i = A_i a_i^2.
inline Problem make_bounded_cosine(const Vec& A, const Vec& a) {
  if (A.size() != a.size() || A.empty())
    throw std::invalid_argument("make_bounded_cosine: A and a must be non-empty and equal-sized");
  for (std::size_t i = 0; i < A.size(); ++i)
    if (!(A[i] > 0.0) || !(a[i] > 0.0))
      throw std::invalid_argument("make_bounded_cosine: A and a must be strictly positive");
  Problem p;
  p.dim = static_cast<int>(A.size());
  p.name = "bounded_cosine";
  p.L.resize(A.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    p.L[i] = A[i] * a[i] * a[i];
    sup += 2.0 * A[i];
  }
  p.f_star = 0.0;
  p.f_sup = sup;
  p.x_default = ones(A.size());
  p.eval_f = [A, a](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) s += A[i] * (1.0 - std::cos(a[i] * x[i]));
    return s;
  };
  p.eval_grad = [A, a](const Vec& x) {
    Vec g(A.size());
    for (std::size_t i = 0; i < A.size(); ++i) g[i] = A[i] * a[i] * std::sin(a[i] * x[i]);
    return g;
  };
  return p;
}

struct AssumptionReport {
  double max_secant_violation = 0.0;  // positive excess over (1/2)||x-y||_L^2
  double max_grad_rel_err = 0.0;      // central finite differences vs eval_grad
  int n_samples = 0;
  bool pass = false;
};

inline constexpr double kSecantSlack = 1e-9;   // absolute
inline constexpr double kGradRelTol = 1e-6;    // relative

// Samples random pairs from a box of radius 10 around x_default and checks
// the declared smoothness budget plus gradient consistency against central
// finite differences with step h = 1e-5 * (1 + |x_i|).
inline AssumptionReport check_assumptions(const Problem& p, int n_samples, std::uint64_t rng_seed) {
  if (n_samples < 1) throw std::invalid_argument("check_assumptions: n_samples must be >= 1");
  const double radius = 10.0;
  const auto stream = RngStream::from_seed(rng_seed);
  AssumptionReport rep;
  rep.n_samples = n_samples;
  Vec x(p.dim), y(p.dim);
  for (int s = 0; s < n_samples; ++s) {
    const auto draw = stream.child(static_cast<std::uint64_t>(s));
    for (int i = 0; i < p.dim; ++i) {
      x[i] = p.x_default[i] + radius * (2.0 * draw.uniform01(2 * i) - 1.0);
      y[i] = p.x_default[i] + radius * (2.0 * draw.uniform01(2 * i + 1) - 1.0);
    }
    const double fx = p.eval_f(x);
    const double fy = p.eval_f(y);
    const Vec gy = p.eval_grad(y);
    double inner = 0.0, budget = 0.0;
    for (int i = 0; i < p.dim; ++i) {
      const double d = x[i] - y[i];
      inner += gy[i] * d;
      budget += 0.5 * p.L[i] * d * d;
    }
    const double excess = std::abs(fx - fy - inner) - budget;
    rep.max_secant_violation = std::max(rep.max_secant_violation, excess);

    const Vec gx = p.eval_grad(x);
    Vec xp = x, xm = x;
    for (int i = 0; i < p.dim; ++i) {
      const double h = 1e-5 * (1.0 + std::abs(x[i]));
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      const double fd = (p.eval_f(xp) - p.eval_f(xm)) / (2.0 * h);
      const double rel = std::abs(fd - gx[i]) / std::max(1.0, std::abs(gx[i]));
      rep.max_grad_rel_err = std::max(rep.max_grad_rel_err, rel);
      xp[i] = x[i];
      xm[i] = x[i];
    }
  }
  rep.pass = rep.max_secant_violation <= kSecantSlack && rep.max_grad_rel_err <= kGradRelTol;
  return rep;
}

}  // namespace htopt
