#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "htopt/core.hpp"
#include "htopt/optimizers.hpp"
#include "htopt/rng.hpp"

namespace htopt {

// Bernoulli success probability of the adversarial oracle:
// q = 1 / [1 + (p-1)/4 * (2 sigma / eps)^p]^(1/(p-1)), in [0, 1].
inline double q_of(double p, double sigma, double eps) {
  validate_tail_index(p);
  if (sigma < 0.0) throw std::invalid_argument("q_of: sigma must be non-negative");
  if (!(eps > 0.0)) throw std::invalid_argument("q_of: eps must be positive");
  const double base = 1.0 + (p - 1.0) / 4.0 * std::pow(2.0 * sigma / eps, p);
  return 1.0 / std::pow(base, 1.0 / (p - 1.0));
}

// Grid spacing sequence delta_t = gamma / (lambda q / eps + sqrt(t)),
// strictly decreasing in t and linear in gamma.
inline std::vector<double> delta_seq(double gamma, double lambda, double q, double eps, long T_cap) {
  if (!(gamma > 0.0)) throw std::invalid_argument("delta_seq: gamma must be positive");
  if (T_cap < 0) throw std::invalid_argument("delta_seq: negative length");
  const double lam_term = lambda * q / eps;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(T_cap));
  for (long t = 1; t <= T_cap; ++t)
    out.push_back(gamma / (lam_term + std::sqrt(static_cast<double>(t))));
  return out;
}

inline constexpr long kTStarScanCap = 1000000000L;

// First horizon T at which the descent budget
//   Delta - eps * sum_{t<=T} delta_t + (L/4) * sum_{t<=T} delta_t^2
// drops strictly below eps^2 / (2L).  Prefix sums are compensated so the
// scan cannot drift over long horizons; sum delta_t diverges, so the scan
// terminates (capped defensively).
inline long t_star(double Delta, double eps, double L, const std::function<double(long)>& delta_of,
                   long cap = kTStarScanCap) {
  if (!(Delta > 0.0) || !(L > 0.0) || !(eps > 0.0)) throw std::invalid_argument("t_star: bad parameters");
  if (!(eps <= std::sqrt(2.0 * Delta * L)))
    throw std::invalid_argument("t_star: eps must satisfy eps <= sqrt(2 Delta L)");
  const double threshold = eps * eps / (2.0 * L);
  KahanSum s1, s2;
  for (long T = 1; T <= cap; ++T) {
    const double d = delta_of(T);
    if (!(d >= 0.0)) throw std::invalid_argument("t_star: negative delta");
    s1.add(d);
    s2.add(d * d);
    const double value = Delta - eps * s1.value() + (L / 4.0) * s2.value();
    if (value < threshold) return T;
  }
  throw std::runtime_error("t_star: scan cap exceeded; instance too large");
}

inline long t_star(double Delta, double eps, double L, std::span<const double> deltas) {
  return t_star(Delta, eps, L,
                [&deltas](long t) {
                  if (t > static_cast<long>(deltas.size()))
                    throw std::runtime_error("t_star: delta list exhausted before threshold");
                  return deltas[static_cast<std::size_t>(t - 1)];
                },
                static_cast<long>(deltas.size()));
}

// The one-dimensional adversarial construction: a piecewise objective whose
// grid points y_1..y_{T_star} all carry slope -eps, paired with a Bernoulli
// oracle that zeroes the gradient on the grid with probability 1 - q.
// Immutable after build_instance.
struct HardInstance {
  double Delta = 0.0;
  double L = 0.0;
  double p = 2.0;
  double sigma = 0.0;
  double eps = 0.0;
  double x1 = 0.0;
  double gamma = 1.0;
  double lambda = 0.0;

  double q = 1.0;
  double lam_term = 0.0;          // lambda * q / eps
  std::vector<double> delta_seq;  // delta_1..delta_{T_star - 1}: consecutive grid gaps
  std::vector<double> y_grid;     // y_1..y_{T_star}; y_1 == x1; strictly increasing
  std::vector<double> f_y;        // f(y_t) = Delta - eps sum delta + (L/4) sum delta^2
  long T_star = 0;

  double delta_at(long t) const { return gamma / (lam_term + std::sqrt(static_cast<double>(t))); }
};

inline HardInstance build_instance(double Delta, double L, double p, double sigma, double eps,
                                   double x1, double gamma, double lambda) {
  validate_tail_index(p);
  if (!(Delta > 0.0)) throw std::invalid_argument("build_instance: Delta must be positive");
  if (!(L > 0.0)) throw std::invalid_argument("build_instance: L must be positive");
  if (sigma < 0.0) throw std::invalid_argument("build_instance: sigma must be non-negative");
  if (!(gamma > 0.0)) throw std::invalid_argument("build_instance: gamma must be positive");
  if (lambda < 0.0) throw std::invalid_argument("build_instance: lambda must be non-negative");
  if (!(eps > 0.0) || !(eps <= std::sqrt(2.0 * Delta * L)))
    throw std::invalid_argument("build_instance: eps must lie in (0, sqrt(2 Delta L)]");
  if (sigma == 0.0 && lambda != 0.0)
    throw std::invalid_argument("build_instance: lambda must be 0 when sigma is 0");

  HardInstance inst;
  inst.Delta = Delta;
  inst.L = L;
  inst.p = p;
  inst.sigma = sigma;
  inst.eps = eps;
  inst.x1 = x1;
  inst.gamma = gamma;
  inst.lambda = lambda;
  inst.q = q_of(p, sigma, eps);
  inst.lam_term = lambda * inst.q / eps;
  inst.T_star = t_star(Delta, eps, L, [&inst](long t) { return inst.delta_at(t); });

  inst.delta_seq.reserve(static_cast<std::size_t>(inst.T_star - 1));
  inst.y_grid.reserve(static_cast<std::size_t>(inst.T_star));
  inst.f_y.reserve(static_cast<std::size_t>(inst.T_star));
  // y is a plain prefix sum: the float-mode oracle resolves membership by bit
  // equality against these values, so they must be produced by the same
  // accumulation order as an AdaGrad replay.
  double y = x1;
  KahanSum drop, lift;
  inst.y_grid.push_back(y);
  inst.f_y.push_back(Delta);
  for (long t = 1; t <= inst.T_star - 1; ++t) {
    const double d = inst.delta_at(t);
    inst.delta_seq.push_back(d);
    y += d;
    inst.y_grid.push_back(y);
    drop.add(eps * d);
    lift.add((L / 4.0) * d * d);
    inst.f_y.push_back(Delta - drop.value() + lift.value());
  }
  return inst;
}

// Continuous piecewise-linear derivative of the hard objective; slope
// magnitude never exceeds L and every grid point evaluates to exactly -eps.
inline double f_prime(const HardInstance& inst, double x) {
  const auto& y = inst.y_grid;
  if (x < y.front()) return -inst.eps;
  if (x >= y.back()) return -inst.eps + inst.L * (x - y.back());
  const auto it = std::upper_bound(y.begin(), y.end(), x);
  const std::size_t idx = static_cast<std::size_t>(it - y.begin()) - 1;
  const double z = x - y[idx];
  const double d = inst.delta_seq[idx];
  return (z <= 0.5 * d) ? -inst.eps + inst.L * z : -inst.eps + inst.L * d - inst.L * z;
}

// Antiderivative with f(y_1) = Delta; closed-form quadratic on each piece.
inline double f_val(const HardInstance& inst, double x) {
  const auto& y = inst.y_grid;
  if (x < y.front()) return inst.f_y.front() + inst.eps * (y.front() - x);
  if (x >= y.back()) {
    const double z = x - y.back();
    return inst.f_y.back() - inst.eps * z + 0.5 * inst.L * z * z;
  }
  const auto it = std::upper_bound(y.begin(), y.end(), x);
  const std::size_t idx = static_cast<std::size_t>(it - y.begin()) - 1;
  const double z = x - y[idx];
  const double d = inst.delta_seq[idx];
  const double base = inst.f_y[idx];
  if (z <= 0.5 * d) return base - inst.eps * z + 0.5 * inst.L * z * z;
  const double half = base - inst.eps * (0.5 * d) + inst.L * d * d / 8.0;
  const double w = z - 0.5 * d;
  return half + (-inst.eps + inst.L * d) * w - 0.5 * inst.L * (z * z - 0.25 * d * d);
}

inline bool grid_member(const HardInstance& inst, double x) {
  const auto it = std::lower_bound(inst.y_grid.begin(), inst.y_grid.end(), x);
  return it != inst.y_grid.end() && *it == x;
}

// Oracle in lattice mode: the caller tracks the iterate as a grid index, so
// membership is exact by construction.
inline double oracle_at_index(const HardInstance& inst, long /*grid_idx*/, int r) {
  return r ? -inst.eps / inst.q : 0.0;
}

// Oracle in float mode: membership resolved by bit equality against the
// stored grid values.
inline double oracle(const HardInstance& inst, double x, int r) {
  if (grid_member(inst, x)) return r ? f_prime(inst, x) / inst.q : 0.0;
  return f_prime(inst, x);
}

struct StallPath {
  int seed_index = 0;
  long R_T = 0;           // number of oracle successes over the horizon
  bool stalled = false;   // R_T <= T_star - 1
  double metric = 0.0;    // (1/T) sum_t |f'(x_t)|
  bool violation = false; // stalled path left the grid (or lost slope exactness)
};

struct StallStats {
  long T = 0;
  int n_seeds = 0;
  double frac_stalled = 0.0;
  double frac_stalled_ci95 = 0.0;
  double mean_metric = 0.0;
  double metric_ci95 = 0.0;
  long grid_violations = 0;
};

enum class StallMode {
  lattice,       // iterate tracked as a grid index; exact for any parameters
  float_replay,  // faithful AdaGrad float recurrence; membership by bit equality
};

namespace detail {

inline StallPath simulate_stall_path(const HardInstance& inst, long T, const RngStream& stream,
                                     StallMode mode) {
  StallPath out;
  AdaGradState st;
  st.x = Vec{inst.x1};
  st.v = Vec{0.0};
  st.gamma = inst.gamma;
  st.lambda = inst.lambda;
  long R = 0;
  bool lattice_on_grid = true;
  long idx = 0;
  bool off_grid_seen = false;
  bool slope_exact = true;
  double sum_abs_fp = 0.0;
  Vec g1(1);
  for (long t = 1; t <= T; ++t) {
    const double xt = st.x[0];
    const bool member = (mode == StallMode::lattice) ? lattice_on_grid : grid_member(inst, xt);
    if (!member) off_grid_seen = true;
    double fp;
    if (member) {
      fp = (mode == StallMode::lattice) ? f_prime(inst, inst.y_grid[static_cast<std::size_t>(idx)])
                                        : f_prime(inst, xt);
      if (fp != -inst.eps) slope_exact = false;
    } else {
      fp = f_prime(inst, xt);
    }
    sum_abs_fp += std::abs(fp);

    double g;
    int r = 0;
    if (member) {
      r = stream.child(static_cast<std::uint64_t>(t)).uniform01(0) < inst.q ? 1 : 0;
      g = r ? fp / inst.q : 0.0;
    } else {
      g = fp;
    }
    g1[0] = g;
    st = adagrad_step(std::move(st), g1);
    if (member && r) {
      ++R;
      if (mode == StallMode::lattice) {
        if (R <= inst.T_star - 1) {
          idx = R;
          st.x[0] = inst.y_grid[static_cast<std::size_t>(idx)];  // resync float to lattice
        } else {
          lattice_on_grid = false;
        }
      }
    }
  }
  out.R_T = R;
  out.stalled = (R <= inst.T_star - 1);
  out.metric = sum_abs_fp / static_cast<double>(T);
  out.violation = out.stalled && (off_grid_seen || !slope_exact);
  return out;
}

}  // namespace detail

// Runs AdaGrad against the Bernoulli oracle for n_seeds independent paths.
// On every stalled path (R_T <= T_star - 1) each iterate must sit on the
// y-grid with slope exactly -eps; a violation falsifies the construction and
// throws unless the caller opts out.
inline StallStats stall_experiment(const HardInstance& inst, long T, int n_seeds,
                                   std::uint64_t base_seed, StallMode mode = StallMode::lattice,
                                   bool throw_on_violation = true,
                                   std::vector<StallPath>* paths_out = nullptr) {
  if (T < 1) throw std::invalid_argument("stall_experiment: horizon must be >= 1");
  if (n_seeds < 1) throw std::invalid_argument("stall_experiment: n_seeds must be >= 1");
  std::vector<StallPath> paths(static_cast<std::size_t>(n_seeds));
  const auto root = RngStream::from_seed(base_seed);
  parallel_for(static_cast<std::size_t>(n_seeds), [&](std::size_t s) {
    paths[s] = detail::simulate_stall_path(inst, T, root.child(s), mode);
    paths[s].seed_index = static_cast<int>(s);
  });
  StallStats stats;
  stats.T = T;
  stats.n_seeds = n_seeds;
  std::vector<double> metrics;
  metrics.reserve(paths.size());
  long stalled = 0;
  for (const auto& pth : paths) {
    metrics.push_back(pth.metric);
    if (pth.stalled) ++stalled;
    if (pth.violation) ++stats.grid_violations;
  }
  stats.frac_stalled = static_cast<double>(stalled) / static_cast<double>(n_seeds);
  stats.frac_stalled_ci95 = binomial_ci95(stats.frac_stalled, paths.size());
  const auto ms = mean_stats(metrics);
  stats.mean_metric = ms.mean;
  stats.metric_ci95 = ms.ci95;
  if (paths_out) *paths_out = std::move(paths);
  if (throw_on_violation && stats.grid_violations > 0)
    throw std::runtime_error("stall_experiment: grid violation on a stalled path (theory falsified)");
  return stats;
}

struct LbThreshold {
  double T_operational = 0.0;           // (T_star - 1) / (2 q): exact, testable
  double T_asymptotic_functional = 0.0; // headline functional without its hidden constant
};

inline LbThreshold lb_threshold(const HardInstance& inst) {
  LbThreshold out;
  out.T_operational = (static_cast<double>(inst.T_star) - 1.0) / (2.0 * inst.q);
  const double pb = inst.p / (inst.p - 1.0);
  const double s_term = inst.sigma == 0.0 ? 0.0 : std::pow(inst.sigma, pb) * std::pow(inst.eps, -pb);
  const double arg =
      inst.gamma * inst.L * (1.0 + s_term) / (inst.lambda + inst.eps * (1.0 + s_term));
  const double ln2 = std::pow(std::log(arg), 2.0);
  const double core = inst.Delta * inst.Delta / (inst.gamma * inst.gamma) +
                      inst.gamma * inst.gamma * inst.L * inst.L * ln2;
  out.T_asymptotic_functional =
      (inst.lambda * inst.Delta / inst.gamma + core) / (inst.eps * inst.eps) +
      (inst.sigma == 0.0
           ? 0.0
           : core * std::pow(inst.sigma, pb) /
                 std::pow(inst.eps, (3.0 * inst.p - 2.0) / (inst.p - 1.0)));
  return out;
}

// Unique positive root of 2c = (1+c) ln(1+c), bisected to 1e-12.
inline double stall_constant_c() {
  auto h = [](double c) { return 2.0 * c - (1.0 + c) * std::log(1.0 + c); };
  double lo = 3.0, hi = 5.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Small-eps feasibility conditions under which the closed-form threshold
// analysis applies.  Reported, never optimized.
inline bool eps_feasible(const HardInstance& inst) {
  const double c = stall_constant_c();
  const double lam = inst.lam_term;  // lambda q / eps
  const double ratio = 16.0 * inst.eps / (inst.gamma * inst.L);
  const bool cond1 = inst.eps <= std::sqrt(inst.Delta * inst.L);
  const bool cond2 = std::log1p(1.0 / (lam * lam + 1.0)) >= ratio;
  const bool cond3 = ratio * std::sqrt(lam * lam + 1.0) <= std::log(c) / std::sqrt(2.0 * c);
  return cond1 && cond2 && cond3;
}

// Independent audit of a built instance: grid slopes, threshold minimality,
// and a fine-grid scan for the infimum (spacing eps/(100 L) resolves the
// parabolic dips of depth eps^2/(2L)).
struct InstanceAudit {
  double f_at_x1 = 0.0;
  double inf_grid = 0.0;
  double max_grid_slope_err = 0.0;  // max over t of |f'(y_t) + eps|
  bool t_star_minimal = false;
  bool y_strictly_increasing = false;
  bool pass = false;
};

inline InstanceAudit audit_instance(const HardInstance& inst) {
  InstanceAudit a;
  a.f_at_x1 = f_val(inst, inst.x1);
  for (double yt : inst.y_grid)
    a.max_grid_slope_err = std::max(a.max_grid_slope_err, std::abs(f_prime(inst, yt) + inst.eps));

  a.y_strictly_increasing = true;
  for (std::size_t i = 1; i < inst.y_grid.size(); ++i)
    if (!(inst.y_grid[i] > inst.y_grid[i - 1])) a.y_strictly_increasing = false;

  // Re-scan the threshold with fresh sums.
  const double threshold = inst.eps * inst.eps / (2.0 * inst.L);
  KahanSum s1, s2;
  double value_prev = inst.Delta;
  double value_at = inst.Delta;
  for (long t = 1; t <= inst.T_star; ++t) {
    const double d = inst.delta_at(t);
    s1.add(d);
    s2.add(d * d);
    if (t == inst.T_star - 1) value_prev = inst.Delta - inst.eps * s1.value() + (inst.L / 4.0) * s2.value();
    if (t == inst.T_star) value_at = inst.Delta - inst.eps * s1.value() + (inst.L / 4.0) * s2.value();
  }
  a.t_star_minimal = (inst.T_star == 1 || value_prev >= threshold) && value_at < threshold;

  const double spacing = inst.eps / (100.0 * inst.L);
  const double lo = inst.y_grid.front() - 2.0 * inst.eps / inst.L;
  const double hi = inst.y_grid.back() + 2.0 * inst.eps / inst.L;
  const double n_points = (hi - lo) / spacing;
  if (n_points > 5e7) throw std::runtime_error("audit_instance: fine grid too large for this instance");
  double inf = f_val(inst, lo);
  for (double xx = lo; xx <= hi; xx += spacing) inf = std::min(inf, f_val(inst, xx));
  a.inf_grid = inf;

  const double tol = 1e-9 * std::max(1.0, inst.Delta);
  a.pass = a.max_grid_slope_err == 0.0 && a.t_star_minimal && a.y_strictly_increasing &&
           a.f_at_x1 == inst.Delta && a.inf_grid >= -tol &&
           (a.f_at_x1 - a.inf_grid) <= inst.Delta + tol;
  return a;
}

}  // namespace htopt
