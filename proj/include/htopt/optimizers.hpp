#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "htopt/core.hpp"
#include "htopt/noise.hpp"
#include "htopt/problems.hpp"
#include "htopt/rng.hpp"

namespace htopt {

enum class Algo { adagrad, adagradnorm, sgd, nsgd_m, clipped_sgd };

inline const char* to_string(Algo a) {
  switch (a) {
    case Algo::adagrad: return "adagrad";
    case Algo::adagradnorm: return "adagradnorm";
    case Algo::sgd: return "sgd";
    case Algo::nsgd_m: return "nsgd_m";
    case Algo::clipped_sgd: return "clipped_sgd";
  }
  return "?";
}

struct OptimizerSpec {
  Algo algo = Algo::adagrad;
  double gamma = std::numeric_limits<double>::quiet_NaN();   // adagrad / adagradnorm
  double lambda = std::numeric_limits<double>::quiet_NaN();  // adagrad / adagradnorm
  double eta = std::numeric_limits<double>::quiet_NaN();     // baselines
  double beta = std::numeric_limits<double>::quiet_NaN();    // nsgd_m momentum
  double tau = std::numeric_limits<double>::quiet_NaN();     // clipped_sgd threshold

  void validate() const {
    auto need = [](double v, const char* what) {
      if (std::isnan(v)) throw std::invalid_argument(std::string("optimizer spec: missing hyperparameter ") + what);
    };
    switch (algo) {
      case Algo::adagrad:
      case Algo::adagradnorm:
        need(gamma, "gamma");
        need(lambda, "lambda");
        if (!(gamma > 0.0)) throw std::invalid_argument("optimizer spec: gamma must be positive");
        if (lambda < 0.0) throw std::invalid_argument("optimizer spec: lambda must be non-negative");
        break;
      case Algo::sgd:
        need(eta, "eta");
        break;
      case Algo::clipped_sgd:
        need(eta, "eta");
        need(tau, "tau");
        break;
      case Algo::nsgd_m:
        need(eta, "eta");
        need(beta, "beta");
        break;
    }
  }

  std::string describe() const {
    std::string s = to_string(algo);
    auto add = [&s](const char* k, double v) {
      if (!std::isnan(v)) s += std::string(",") + k + "=" + std::to_string(v);
    };
    s += "(";
    add("gamma", gamma);
    add("lambda", lambda);
    add("eta", eta);
    add("beta", beta);
    add("tau", tau);
    s += ")";
    return s;
  }
};

// ---------------------------------------------------------------------------
// Single-step updates.  The accumulator is bumped first and the step uses the
// bumped value; the 0/0 := 0 convention applies when lambda = 0 and a
// coordinate sees g_i = 0 with v_i = 0 (g_i != 0 makes the denominator
// positive, so no other division by zero can occur).
// ---------------------------------------------------------------------------

struct AdaGradState {
  Vec x;
  Vec v;  // per-coordinate accumulator, non-decreasing, v0 = 0
  double gamma = 1.0;
  double lambda = 0.0;
  long t = 0;
};

inline AdaGradState adagrad_step(AdaGradState s, const Vec& g) {
  if (g.size() != s.x.size()) throw std::invalid_argument("adagrad_step: dim(g) != dim(x)");
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.v[i] += g[i] * g[i];
    if (g[i] != 0.0) s.x[i] -= (s.gamma / (s.lambda + std::sqrt(s.v[i]))) * g[i];
  }
  ++s.t;
  return s;
}

struct AdaGradNormState {
  Vec x;
  double v = 0.0;  // scalar accumulator of squared gradient norms
  double gamma = 1.0;
  double lambda = 0.0;
  long t = 0;
};

inline AdaGradNormState adagradnorm_step(AdaGradNormState s, const Vec& g) {
  if (g.size() != s.x.size()) throw std::invalid_argument("adagradnorm_step: dim(g) != dim(x)");
  const double gsq = norm2_sq(g);
  s.v += gsq;
  if (gsq != 0.0) {
    const double step = s.gamma / (s.lambda + std::sqrt(s.v));
    for (std::size_t i = 0; i < g.size(); ++i) s.x[i] -= step * g[i];
  }
  ++s.t;
  return s;
}

struct BaselineState {
  Vec x;
  Vec m;  // momentum buffer (nsgd_m only)
  long t = 0;
};

inline BaselineState baseline_step(const OptimizerSpec& spec, BaselineState s, const Vec& g) {
  spec.validate();
  if (g.size() != s.x.size()) throw std::invalid_argument("baseline_step: dim(g) != dim(x)");
  switch (spec.algo) {
    case Algo::sgd:
      for (std::size_t i = 0; i < g.size(); ++i) s.x[i] -= spec.eta * g[i];
      break;
    case Algo::clipped_sgd: {
      const double gn = norm2(g);
      const double factor = (gn > spec.tau) ? spec.tau / gn : 1.0;
      for (std::size_t i = 0; i < g.size(); ++i) s.x[i] -= spec.eta * factor * g[i];
      break;
    }
    case Algo::nsgd_m: {
      if (s.m.size() != s.x.size()) s.m.assign(s.x.size(), 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) s.m[i] = spec.beta * s.m[i] + (1.0 - spec.beta) * g[i];
      const double mn = norm2(s.m);
      if (mn > 0.0)
        for (std::size_t i = 0; i < g.size(); ++i) s.x[i] -= spec.eta * s.m[i] / mn;
      break;
    }
    default:
      throw std::invalid_argument("baseline_step: not a baseline algorithm");
  }
  ++s.t;
  return s;
}

// ---------------------------------------------------------------------------
// Full trajectory record.  Everything the post-hoc inequality checkers need:
// per step t the iterate, the true gradient, the stochastic gradient and its
// noise component, the accumulator value used by the step, f(x_t), and the
// effective stepsize(s); plus the final iterate so telescoped sums close.
// ---------------------------------------------------------------------------

struct Trajectory {
  std::string problem_name;
  std::string noise_desc;
  std::string optimizer_desc;
  OptimizerSpec opt;
  double noise_p = 2.0;
  std::uint64_t seed = 0;
  int dim = 0;
  long T = 0;  // requested horizon
  bool diverged = false;
  long diverged_at = -1;  // 1-based step at which a non-finite value appeared

  std::vector<Vec> x, grad, g, xi;
  std::vector<Vec> v;                   // adagrad
  std::vector<double> v_scalar;         // adagradnorm
  std::vector<Vec> stepsize;            // adagrad
  std::vector<double> stepsize_scalar;  // adagradnorm + baselines
  std::vector<double> f;
  Vec x_final;
  double f_final = 0.0;

  long steps() const { return static_cast<long>(f.size()); }
};

namespace detail {

// Per-trajectory noise stream: step t draws from stream.child(t).
inline RngStream trajectory_stream(std::uint64_t seed) { return RngStream::from_seed(seed); }

}  // namespace detail

inline Trajectory run(const Problem& prob, const NoiseModel& nm, const OptimizerSpec& spec, long T,
                      std::uint64_t seed) {
  spec.validate();
  if (T < 1) throw std::invalid_argument("run: horizon must be >= 1");
  if (nm.dim != prob.dim) throw std::invalid_argument("run: noise and problem dimensions differ");
  Trajectory traj;
  traj.problem_name = prob.name;
  traj.noise_desc = nm.describe();
  traj.optimizer_desc = spec.describe();
  traj.opt = spec;
  traj.noise_p = nm.p;
  traj.seed = seed;
  traj.dim = prob.dim;
  traj.T = T;

  const auto stream = detail::trajectory_stream(seed);
  Vec x = prob.x_default;
  Vec v = zeros(x.size());
  double v_norm = 0.0;
  BaselineState bstate{x, {}, 0};
  Vec xi(x.size());

  const bool is_adagrad = spec.algo == Algo::adagrad;
  const bool is_norm = spec.algo == Algo::adagradnorm;

  for (long t = 1; t <= T; ++t) {
    const double ft = prob.eval_f(x);
    Vec gr = prob.eval_grad(x);
    if (!std::isfinite(ft) || !all_finite(gr)) {
      traj.diverged = true;
      traj.diverged_at = t;
      traj.x_final = x;
      traj.f_final = ft;
      return traj;
    }
    nm.sample_into(stream.child(static_cast<std::uint64_t>(t)), xi);
    Vec gt(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) gt[i] = gr[i] + xi[i];
    if (!all_finite(gt)) {
      traj.diverged = true;
      traj.diverged_at = t;
      traj.x_final = x;
      traj.f_final = ft;
      return traj;
    }

    traj.x.push_back(x);
    traj.grad.push_back(gr);
    traj.g.push_back(gt);
    traj.xi.push_back(xi);
    traj.f.push_back(ft);

    if (is_adagrad) {
      Vec step(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        v[i] += gt[i] * gt[i];
        const double denom = spec.lambda + std::sqrt(v[i]);
        step[i] = denom > 0.0 ? spec.gamma / denom : std::numeric_limits<double>::infinity();
        if (gt[i] != 0.0) x[i] -= (spec.gamma / denom) * gt[i];
      }
      traj.v.push_back(v);
      traj.stepsize.push_back(std::move(step));
    } else if (is_norm) {
      const double gsq = norm2_sq(gt);
      v_norm += gsq;
      const double denom = spec.lambda + std::sqrt(v_norm);
      const double step = denom > 0.0 ? spec.gamma / denom : std::numeric_limits<double>::infinity();
      if (gsq != 0.0)
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= (spec.gamma / denom) * gt[i];
      traj.v_scalar.push_back(v_norm);
      traj.stepsize_scalar.push_back(step);
    } else {
      bstate.x = x;
      bstate = baseline_step(spec, std::move(bstate), gt);
      x = bstate.x;
      double eff = spec.eta;
      if (spec.algo == Algo::clipped_sgd) {
        const double gn = norm2(gt);
        eff = spec.eta * ((gn > spec.tau) ? spec.tau / gn : 1.0);
      } else if (spec.algo == Algo::nsgd_m) {
        const double mn = norm2(bstate.m);
        eff = mn > 0.0 ? spec.eta / mn : 0.0;
      }
      traj.stepsize_scalar.push_back(eff);
    }

    if (!all_finite(x)) {
      traj.diverged = true;
      traj.diverged_at = t;
      traj.x_final = x;
      traj.f_final = std::numeric_limits<double>::quiet_NaN();
      return traj;
    }
  }

  traj.x_final = x;
  traj.f_final = prob.eval_f(x);
  if (!std::isfinite(traj.f_final)) {
    traj.diverged = true;
    traj.diverged_at = T + 1;
  }
  return traj;
}

// Streaming metrics for Monte Carlo sweeps: same stepping arithmetic and
// RNG schedule as run(), without retaining the trajectory.
struct RunMetrics {
  double grad_l1_avg = 0.0;
  double grad_l2_avg = 0.0;
  double grad_l2_sq_avg = 0.0;
  double v_final_total = 0.0;  // sum_i v_{T,i}; equals v_T for adagradnorm
  bool diverged = false;
  long diverged_at = -1;
};

inline RunMetrics run_metrics(const Problem& prob, const NoiseModel& nm, const OptimizerSpec& spec,
                              long T, std::uint64_t seed) {
  spec.validate();
  if (T < 1) throw std::invalid_argument("run_metrics: horizon must be >= 1");
  if (nm.dim != prob.dim) throw std::invalid_argument("run_metrics: noise and problem dimensions differ");
  RunMetrics m;
  const auto stream = detail::trajectory_stream(seed);
  Vec x = prob.x_default;
  Vec v = zeros(x.size());
  double v_norm = 0.0;
  BaselineState bstate{x, {}, 0};
  Vec xi(x.size());
  double sum_l1 = 0.0, sum_l2 = 0.0, sum_l2sq = 0.0;

  const bool is_adagrad = spec.algo == Algo::adagrad;
  const bool is_norm = spec.algo == Algo::adagradnorm;

  for (long t = 1; t <= T; ++t) {
    const double ft = prob.eval_f(x);
    Vec gr = prob.eval_grad(x);
    if (!std::isfinite(ft) || !all_finite(gr)) {
      m.diverged = true;
      m.diverged_at = t;
      return m;
    }
    nm.sample_into(stream.child(static_cast<std::uint64_t>(t)), xi);
    Vec gt(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) gt[i] = gr[i] + xi[i];
    if (!all_finite(gt)) {
      m.diverged = true;
      m.diverged_at = t;
      return m;
    }
    sum_l1 += norm1(gr);
    sum_l2 += norm2(gr);
    sum_l2sq += norm2_sq(gr);

    if (is_adagrad) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        v[i] += gt[i] * gt[i];
        if (gt[i] != 0.0) x[i] -= (spec.gamma / (spec.lambda + std::sqrt(v[i]))) * gt[i];
      }
    } else if (is_norm) {
      const double gsq = norm2_sq(gt);
      v_norm += gsq;
      if (gsq != 0.0) {
        const double denom = spec.lambda + std::sqrt(v_norm);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= (spec.gamma / denom) * gt[i];
      }
    } else {
      bstate.x = x;
      bstate = baseline_step(spec, std::move(bstate), gt);
      x = bstate.x;
    }
    if (!all_finite(x)) {
      m.diverged = true;
      m.diverged_at = t;
      return m;
    }
  }
  const double dT = static_cast<double>(T);
  m.grad_l1_avg = sum_l1 / dT;
  m.grad_l2_avg = sum_l2 / dT;
  m.grad_l2_sq_avg = sum_l2sq / dT;
  m.v_final_total = is_norm ? v_norm : 0.0;
  if (is_adagrad) {
    double tot = 0.0;
    for (double vi : v) tot += vi;
    m.v_final_total = tot;
  }
  return m;
}

}  // namespace htopt
