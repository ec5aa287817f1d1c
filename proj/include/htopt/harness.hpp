#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "htopt/core.hpp"
#include "htopt/lower_bound.hpp"
#include "htopt/noise.hpp"
#include "htopt/optimizers.hpp"
#include "htopt/problems.hpp"
#include "htopt/theory.hpp"

namespace htopt {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SweepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal text for a double; keeps emitted files
// byte-stable across runs and re-parsable without loss.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

enum class MetricKind { grad_l1_avg, grad_l2_avg, grad_l2_sq_avg };

inline const char* to_string(MetricKind m) {
  switch (m) {
    case MetricKind::grad_l1_avg: return "grad_l1_avg";
    case MetricKind::grad_l2_avg: return "grad_l2_avg";
    case MetricKind::grad_l2_sq_avg: return "grad_l2_sq_avg";
  }
  return "?";
}

inline MetricKind metric_from_string(const std::string& s) {
  if (s == "grad_l1_avg") return MetricKind::grad_l1_avg;
  if (s == "grad_l2_avg") return MetricKind::grad_l2_avg;
  if (s == "grad_l2_sq_avg") return MetricKind::grad_l2_sq_avg;
  throw ConfigError("unknown metric: " + s);
}

inline double pick_metric(const RunMetrics& m, MetricKind kind) {
  switch (kind) {
    case MetricKind::grad_l1_avg: return m.grad_l1_avg;
    case MetricKind::grad_l2_avg: return m.grad_l2_avg;
    case MetricKind::grad_l2_sq_avg: return m.grad_l2_sq_avg;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Spec resolution from JSON blocks.
// ---------------------------------------------------------------------------

inline Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  Vec v;
  for (const auto& e : j) v.push_back(e.get<double>());
  return v;
}

inline Problem resolve_problem(const json& j) {
  if (!j.contains("name")) throw ConfigError("problem block needs a name");
  const std::string name = j.at("name").get<std::string>();
  Problem p;
  if (name == "quadratic") {
    const Vec L = vec_from_json(j.at("L"), "problem.L");
    const Vec x_opt = j.contains("x_opt") ? vec_from_json(j.at("x_opt"), "problem.x_opt")
                                          : zeros(L.size());
    p = make_quadratic(L, x_opt);
  } else if (name == "bounded_cosine") {
    const Vec A = vec_from_json(j.at("A"), "problem.A");
    const Vec a = vec_from_json(j.at("a"), "problem.a");
    p = make_bounded_cosine(A, a);
  } else {
    throw ConfigError("unknown problem: " + name);
  }
  if (j.contains("x1")) {
    const Vec x1 = vec_from_json(j.at("x1"), "problem.x1");
    if (static_cast<int>(x1.size()) != p.dim) throw ConfigError("problem.x1 has wrong dimension");
    p.x_default = x1;
  }
  return p;
}

inline NoiseModel resolve_noise(const json& j, int dim) {
  if (!j.contains("kind")) throw ConfigError("noise block needs a kind");
  const std::string kind = j.at("kind").get<std::string>();
  const double p = j.value("p", 2.0);
  auto sigma_of = [&](const json& block) {
    if (!block.contains("sigma")) throw ConfigError("noise block needs sigma");
    const auto& s = block.at("sigma");
    if (s.is_number()) return Vec(static_cast<std::size_t>(dim), s.get<double>());
    Vec v = vec_from_json(s, "noise.sigma");
    if (static_cast<int>(v.size()) != dim) throw ConfigError("noise.sigma has wrong dimension");
    return v;
  };
  if (kind == "zero") return make_zero(dim, p);
  if (kind == "discrete3") return make_discrete3(p, sigma_of(j), j.at("scale_a").get<double>());
  if (kind == "pareto_sym") return make_pareto_sym(p, sigma_of(j), j.at("alpha").get<double>());
  throw ConfigError("unknown noise kind: " + kind);
}

inline OptimizerSpec resolve_optimizer(const json& j) {
  if (!j.contains("algo")) throw ConfigError("optimizer block needs an algo");
  const std::string algo = j.at("algo").get<std::string>();
  OptimizerSpec spec;
  if (algo == "adagrad")
    spec.algo = Algo::adagrad;
  else if (algo == "adagradnorm")
    spec.algo = Algo::adagradnorm;
  else if (algo == "sgd")
    spec.algo = Algo::sgd;
  else if (algo == "nsgd_m")
    spec.algo = Algo::nsgd_m;
  else if (algo == "clipped_sgd")
    spec.algo = Algo::clipped_sgd;
  else
    throw ConfigError("unknown algo: " + algo);
  if (j.contains("gamma")) spec.gamma = j.at("gamma").get<double>();
  if (j.contains("lambda")) spec.lambda = j.at("lambda").get<double>();
  if (j.contains("eta")) spec.eta = j.at("eta").get<double>();
  if (j.contains("beta")) spec.beta = j.at("beta").get<double>();
  if (j.contains("tau")) spec.tau = j.at("tau").get<double>();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Run configuration.
// ---------------------------------------------------------------------------

struct RunConfig {
  json problem;
  json noise;
  json optimizer;
  std::vector<long> horizons{100, 1000, 10000, 100000};
  int n_seeds = 100;
  std::uint64_t base_seed = 0;
  std::string out_dir;
  MetricKind metric = MetricKind::grad_l2_avg;
  std::vector<std::string> checks;
  std::string theorem;  // "", "A1", "51", "D1"

  json echo() const {
    json j;
    j["problem"] = problem;
    j["noise"] = noise;
    j["optimizer"] = optimizer;
    j["horizons"] = horizons;
    j["n_seeds"] = n_seeds;
    j["base_seed"] = base_seed;
    j["metric"] = to_string(metric);
    if (!out_dir.empty()) j["out_dir"] = out_dir;
    if (!checks.empty()) j["checks"] = checks;
    if (!theorem.empty()) j["theorem"] = theorem;
    return j;
  }
};

inline RunConfig parse_config(const json& j) {
  RunConfig cfg;
  if (!j.contains("problem") || !j.contains("noise") || !j.contains("optimizer"))
    throw ConfigError("config needs problem, noise, and optimizer blocks");
  cfg.problem = j.at("problem");
  cfg.noise = j.at("noise");
  cfg.optimizer = j.at("optimizer");
  if (j.contains("horizons")) {
    cfg.horizons.clear();
    for (const auto& e : j.at("horizons")) cfg.horizons.push_back(e.get<long>());
  }
  if (cfg.horizons.empty()) throw ConfigError("horizons must be non-empty");
  for (std::size_t i = 1; i < cfg.horizons.size(); ++i)
    if (cfg.horizons[i] <= cfg.horizons[i - 1])
      throw ConfigError("horizons must be strictly increasing");
  cfg.n_seeds = j.value("n_seeds", 100);
  if (cfg.n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
  cfg.base_seed = j.value("base_seed", std::uint64_t{0});
  cfg.out_dir = j.value("out_dir", std::string{});
  if (j.contains("metric")) cfg.metric = metric_from_string(j.at("metric").get<std::string>());
  if (j.contains("checks"))
    for (const auto& e : j.at("checks")) cfg.checks.push_back(e.get<std::string>());
  cfg.theorem = j.value("theorem", std::string{});
  // Fail fast on unresolvable specs.
  const Problem p = resolve_problem(cfg.problem);
  (void)resolve_noise(cfg.noise, p.dim);
  (void)resolve_optimizer(cfg.optimizer);
  return cfg;
}

// ---------------------------------------------------------------------------
// Monte Carlo sweep over horizons x seeds.
// ---------------------------------------------------------------------------

struct CellResult {
  long T = 0;
  int seed_index = 0;
  double metric = 0.0;
  double v_final = 0.0;
  bool diverged = false;
};

struct AggRow {
  long T = 0;
  int n_seeds = 0;
  int n_diverged = 0;
  double mean = 0.0;
  double se = 0.0;
  double ci95 = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_used = 0;
  int n_rejected = 0;
};

// Least squares on (ln T, ln metric); points with a non-positive metric are
// rejected with a count rather than poisoning the fit.
inline std::optional<RateFit> fit_rate(std::span<const std::pair<double, double>> points) {
  std::vector<double> xs, ys;
  int rejected = 0;
  for (const auto& [t, m] : points) {
    if (!(t > 0.0) || !(m > 0.0)) {
      ++rejected;
      continue;
    }
    xs.push_back(std::log(t));
    ys.push_back(std::log(m));
  }
  if (xs.size() < 2) return std::nullopt;
  const std::size_t n = xs.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  fit.n_used = static_cast<int>(n);
  fit.n_rejected = rejected;
  return fit;
}

struct SweepResult {
  json config_echo;
  MetricKind metric = MetricKind::grad_l2_avg;
  std::vector<CellResult> cells;   // ordered by (horizon index, seed index)
  std::vector<AggRow> aggregates;  // one row per horizon
  std::optional<RateFit> fit;
  std::vector<BoundReport> bounds;  // non-empty after verify_bounds
};

inline SweepResult monte_carlo(const RunConfig& cfg) {
  const Problem prob = resolve_problem(cfg.problem);
  const NoiseModel nm = resolve_noise(cfg.noise, prob.dim);
  const OptimizerSpec opt = resolve_optimizer(cfg.optimizer);

  SweepResult res;
  res.config_echo = cfg.echo();
  res.metric = cfg.metric;
  const std::size_t n_cells = cfg.horizons.size() * static_cast<std::size_t>(cfg.n_seeds);
  res.cells.resize(n_cells);
  const auto root = RngStream::from_seed(cfg.base_seed);
  // Each (horizon, seed) cell owns an independent stream, so horizons are
  // independent experiments and the parallel schedule cannot leak between
  // cells.
  parallel_for(n_cells, [&](std::size_t flat) {
    const std::size_t ti = flat / static_cast<std::size_t>(cfg.n_seeds);
    const std::size_t si = flat % static_cast<std::size_t>(cfg.n_seeds);
    const long T = cfg.horizons[ti];
    const std::uint64_t run_seed = root.child(ti).child(si).key;
    const RunMetrics m = run_metrics(prob, nm, opt, T, run_seed);
    CellResult& cell = res.cells[flat];
    cell.T = T;
    cell.seed_index = static_cast<int>(si);
    cell.diverged = m.diverged;
    cell.metric = m.diverged ? std::numeric_limits<double>::quiet_NaN() : pick_metric(m, cfg.metric);
    cell.v_final = m.diverged ? std::numeric_limits<double>::quiet_NaN() : m.v_final_total;
  });

  for (std::size_t ti = 0; ti < cfg.horizons.size(); ++ti) {
    AggRow row;
    row.T = cfg.horizons[ti];
    row.n_seeds = cfg.n_seeds;
    std::vector<double> vals;
    for (int si = 0; si < cfg.n_seeds; ++si) {
      const auto& cell = res.cells[ti * static_cast<std::size_t>(cfg.n_seeds) +
                                   static_cast<std::size_t>(si)];
      if (cell.diverged)
        ++row.n_diverged;
      else
        vals.push_back(cell.metric);
    }
    if (vals.empty())
      throw SweepError("monte_carlo: every seed diverged at T=" + std::to_string(row.T));
    const auto st = mean_stats(vals);
    row.mean = st.mean;
    row.se = st.se;
    row.ci95 = st.ci95;
    res.aggregates.push_back(row);
  }

  std::vector<std::pair<double, double>> pts;
  for (const auto& row : res.aggregates)
    pts.emplace_back(static_cast<double>(row.T), row.mean);
  if (pts.size() >= 3) res.fit = fit_rate(pts);
  return res;
}

// ---------------------------------------------------------------------------
// Bound certificates against measured sweeps.
// ---------------------------------------------------------------------------

inline TheoremId theorem_from_string(const std::string& s) {
  if (s == "A1") return TheoremId::A1;
  if (s == "51") return TheoremId::T51;
  if (s == "D1") return TheoremId::D1;
  throw ConfigError("unknown theorem id: " + s + " (expected A1, 51, or D1)");
}

// Each certificate is tied to one stationarity measure and one algorithm;
// mixing them silently would compare apples to oranges, so mismatches are
// configuration errors.
inline void validate_theorem_config(TheoremId id, const Problem& prob, const OptimizerSpec& opt,
                                    MetricKind metric) {
  switch (id) {
    case TheoremId::A1:
      if (opt.algo != Algo::adagrad) throw ConfigError("theorem A1 certifies adagrad runs");
      if (metric != MetricKind::grad_l1_avg) throw ConfigError("theorem A1 uses metric grad_l1_avg");
      if (!(opt.lambda > 0.0)) throw ConfigError("theorem A1 needs lambda > 0");
      break;
    case TheoremId::T51:
      if (opt.algo != Algo::adagradnorm) throw ConfigError("theorem 51 certifies adagradnorm runs");
      if (metric != MetricKind::grad_l2_avg) throw ConfigError("theorem 51 uses metric grad_l2_avg");
      if (!prob.f_sup) throw ConfigError("theorem 51 needs a bounded objective (f_sup)");
      if (!(opt.lambda > 0.0)) throw ConfigError("theorem 51 needs lambda > 0");
      break;
    case TheoremId::D1:
      if (opt.algo != Algo::adagradnorm) throw ConfigError("theorem D1 certifies adagradnorm runs");
      if (metric != MetricKind::grad_l2_avg) throw ConfigError("theorem D1 uses metric grad_l2_avg");
      if (!(opt.lambda > 0.0)) throw ConfigError("theorem D1 needs lambda > 0");
      break;
  }
}

inline CertificateParams certificate_params(const Problem& prob, const NoiseModel& nm,
                                            const OptimizerSpec& opt) {
  CertificateParams prm;
  prm.Delta = prob.eval_f(prob.x_default) - prob.f_star;
  prm.Delta_star = prob.f_sup ? *prob.f_sup - prob.f_star : 0.0;
  prm.L = prob.L;
  prm.sigma = nm.sigma;
  prm.p = nm.p;
  prm.gamma = opt.gamma;
  prm.lambda = opt.lambda;
  prm.grad_x1 = prob.eval_grad(prob.x_default);
  return prm;
}

// Runs the sweep and compares each aggregate against the explicit-constant
// certificate.  rhs_scale is a sensitivity hook: the harness must be able to
// detect a corrupted (shrunken) certificate.
inline SweepResult verify_bounds(const RunConfig& cfg, double rhs_scale = 1.0) {
  if (cfg.theorem.empty()) throw ConfigError("verify_bounds: config needs a theorem id");
  const TheoremId id = theorem_from_string(cfg.theorem);
  const Problem prob = resolve_problem(cfg.problem);
  const NoiseModel nm = resolve_noise(cfg.noise, prob.dim);
  const OptimizerSpec opt = resolve_optimizer(cfg.optimizer);
  validate_theorem_config(id, prob, opt, cfg.metric);
  const CertificateParams prm = certificate_params(prob, nm, opt);

  SweepResult res = monte_carlo(cfg);
  for (const auto& row : res.aggregates) {
    const Certificate cert = rhs_certificate(id, prm, static_cast<double>(row.T));
    BoundReport rep;
    rep.theorem_id = cfg.theorem;
    rep.T = static_cast<double>(row.T);
    rep.rhs_value = cert.value * rhs_scale;
    rep.lhs_measured = row.mean;
    rep.lhs_ci95 = row.ci95;
    rep.pass = row.mean - row.ci95 <= rep.rhs_value;
    rep.constants_provenance = cert.constants_provenance;
    res.bounds.push_back(rep);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Emission.  Identical config + base_seed must reproduce output files byte
// for byte, so doubles are printed with shortest round-trip text and all
// orderings are fixed.
// ---------------------------------------------------------------------------

inline void write_file(const std::string& path, const std::string& content) {
  if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

inline void emit_sweep_csv(const SweepResult& res, const std::string& path) {
  std::string s = "T,n_seeds,n_diverged,metric_mean,metric_se,metric_ci95";
  const bool with_bounds = !res.bounds.empty();
  if (with_bounds) s += ",rhs_value,pass";
  s += "\n";
  for (std::size_t i = 0; i < res.aggregates.size(); ++i) {
    const auto& r = res.aggregates[i];
    s += std::to_string(r.T) + "," + std::to_string(r.n_seeds) + "," + std::to_string(r.n_diverged) +
         "," + fmt_double(r.mean) + "," + fmt_double(r.se) + "," + fmt_double(r.ci95);
    if (with_bounds) {
      const auto& b = res.bounds[i];
      s += "," + fmt_double(b.rhs_value) + "," + (b.pass ? std::string("1") : std::string("0"));
    }
    s += "\n";
  }
  write_file(path, s);
}

inline json sweep_to_json(const SweepResult& res) {
  json j;
  j["config"] = res.config_echo;
  j["metric"] = to_string(res.metric);
  j["cells"] = json::array();
  for (const auto& c : res.cells) {
    json jc;
    jc["T"] = c.T;
    jc["seed"] = c.seed_index;
    jc["diverged"] = c.diverged;
    jc["metric"] = c.metric;  // null when diverged
    jc["v_final"] = c.v_final;
    j["cells"].push_back(jc);
  }
  j["aggregates"] = json::array();
  for (const auto& r : res.aggregates) {
    json jr;
    jr["T"] = r.T;
    jr["n_seeds"] = r.n_seeds;
    jr["n_diverged"] = r.n_diverged;
    jr["metric_mean"] = r.mean;
    jr["metric_se"] = r.se;
    jr["metric_ci95"] = r.ci95;
    j["aggregates"].push_back(jr);
  }
  if (res.fit) {
    j["fit"] = {{"slope", res.fit->slope},
                {"intercept", res.fit->intercept},
                {"r_squared", res.fit->r_squared},
                {"n_used", res.fit->n_used},
                {"n_rejected", res.fit->n_rejected}};
  } else {
    j["fit"] = nullptr;
  }
  if (!res.bounds.empty()) {
    j["bounds"] = json::array();
    for (const auto& b : res.bounds) {
      j["bounds"].push_back({{"theorem", b.theorem_id},
                             {"T", b.T},
                             {"rhs_value", b.rhs_value},
                             {"lhs_measured", b.lhs_measured},
                             {"lhs_ci95", b.lhs_ci95},
                             {"pass", b.pass},
                             {"constants_provenance", b.constants_provenance}});
    }
  }
  return j;
}

inline void emit_sweep_json(const SweepResult& res, const std::string& path) {
  write_file(path, sweep_to_json(res).dump(2) + "\n");
}

inline json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  json j;
  in >> j;
  return j;
}

inline void emit_trajectory_csv(const Trajectory& traj, const std::string& run_id,
                                const std::string& path) {
  const int d = traj.dim;
  const bool coord_v = traj.opt.algo == Algo::adagrad;
  std::string s = "run_id,T,seed,t,f";
  auto add_cols = [&s, d](const char* stem) {
    for (int i = 0; i < d; ++i) s += std::string(",") + stem + "_" + std::to_string(i);
  };
  add_cols("x");
  add_cols("grad");
  add_cols("g");
  add_cols("xi");
  if (coord_v) {
    add_cols("v");
    add_cols("step");
  } else {
    s += ",v,step";
  }
  s += "\n";
  const std::string prefix =
      run_id + "," + std::to_string(traj.T) + "," + std::to_string(traj.seed) + ",";
  for (long t = 0; t < traj.steps(); ++t) {
    s += prefix + std::to_string(t + 1) + "," + fmt_double(traj.f[static_cast<std::size_t>(t)]);
    auto add_vec = [&s](const Vec& v) {
      for (double x : v) s += "," + fmt_double(x);
    };
    add_vec(traj.x[static_cast<std::size_t>(t)]);
    add_vec(traj.grad[static_cast<std::size_t>(t)]);
    add_vec(traj.g[static_cast<std::size_t>(t)]);
    add_vec(traj.xi[static_cast<std::size_t>(t)]);
    if (coord_v) {
      add_vec(traj.v[static_cast<std::size_t>(t)]);
      add_vec(traj.stepsize[static_cast<std::size_t>(t)]);
    } else if (traj.opt.algo == Algo::adagradnorm) {
      s += "," + fmt_double(traj.v_scalar[static_cast<std::size_t>(t)]);
      s += "," + fmt_double(traj.stepsize_scalar[static_cast<std::size_t>(t)]);
    } else {
      s += ",0," + fmt_double(traj.stepsize_scalar[static_cast<std::size_t>(t)]);
    }
    s += "\n";
  }
  write_file(path, s);
}

inline void emit_lb_csv(std::span<const StallPath> paths, const std::string& path) {
  std::string s = "seed,R_T,stalled,metric\n";
  for (const auto& p : paths) {
    s += std::to_string(p.seed_index) + "," + std::to_string(p.R_T) + "," +
         (p.stalled ? "1" : "0") + "," + fmt_double(p.metric) + "\n";
  }
  write_file(path, s);
}

// Reads a sweep CSV back as (T, metric_mean) points for rate fitting.
inline std::vector<std::pair<double, double>> load_rate_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  int t_idx = -1, m_idx = -1;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "T") t_idx = static_cast<int>(i);
    if (cols[i] == "metric_mean") m_idx = static_cast<int>(i);
  }
  if (t_idx < 0 || m_idx < 0) throw IoError("CSV lacks T/metric_mean columns: " + path);
  std::vector<std::pair<double, double>> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string c;
    std::vector<std::string> row;
    while (std::getline(ss, c, ',')) row.push_back(c);
    pts.emplace_back(std::stod(row[static_cast<std::size_t>(t_idx)]),
                     std::stod(row[static_cast<std::size_t>(m_idx)]));
  }
  return pts;
}

// ---------------------------------------------------------------------------
// The full per-path checker matrix: both optimizers across the problem x
// noise x tail-index x lambda grid, every inequality at every prefix.
// ---------------------------------------------------------------------------

struct CheckerMatrixOptions {
  long T = 10000;
  int seeds_per_cell = 3;
  double gamma = 1.0;
  double sigma = 0.7;
  std::uint64_t base_seed = 2026;
};

struct CheckerCellOutcome {
  std::string problem;
  std::string noise;
  std::string algo;
  double p = 2.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  double worst_slack = 0.0;
  std::string worst_item;
};

struct CheckerMatrixReport {
  std::vector<CheckerCellOutcome> cells;
  long n_trajectories = 0;
  long n_violations = 0;
  double worst_slack = -std::numeric_limits<double>::infinity();
  std::string worst_item;
  bool pass = false;
};

inline CheckerMatrixReport run_checker_matrix(const CheckerMatrixOptions& opts = {}) {
  std::vector<Problem> problems = {make_quadratic({1.0, 4.0}, {0.0, 0.0}),
                                   make_bounded_cosine({1.0, 0.5}, {1.0, 3.0})};
  struct Cell {
    const Problem* prob;
    NoiseModel nm;
    OptimizerSpec opt;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  const Vec sig(2, opts.sigma);
  for (const auto& prob : problems) {
    for (double p : {1.5, 2.0}) {
      std::vector<NoiseModel> noises;
      noises.push_back(make_zero(prob.dim, p));
      noises.push_back(make_discrete3(p, sig, std::sqrt(2.0)));
      noises.push_back(make_pareto_sym(p, sig, 2.0 * p));
      if (p < 2.0) noises.push_back(make_pareto_sym(p, sig, 1.9));  // infinite variance
      for (const auto& nm : noises) {
        for (double lambda : {0.1, 1.0}) {
          for (Algo algo : {Algo::adagrad, Algo::adagradnorm}) {
            OptimizerSpec spec;
            spec.algo = algo;
            spec.gamma = opts.gamma;
            spec.lambda = lambda;
            for (int s = 0; s < opts.seeds_per_cell; ++s) {
              const std::uint64_t seed =
                  RngStream::from_seed(opts.base_seed).child(cells.size()).child(s).key;
              cells.push_back(Cell{&prob, nm, spec, seed});
            }
          }
        }
      }
    }
  }

  CheckerMatrixReport rep;
  rep.cells.resize(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    const Trajectory traj = run(*cell.prob, cell.nm, cell.opt, opts.T, cell.seed);
    const PathCheckReport pcr = cell.opt.algo == Algo::adagrad
                                    ? check_path_adagrad(traj, *cell.prob)
                                    : check_path_adagradnorm(traj, *cell.prob);
    CheckerCellOutcome& out = rep.cells[i];
    out.problem = cell.prob->name;
    out.noise = cell.nm.describe();
    out.algo = to_string(cell.opt.algo);
    out.p = cell.nm.p;
    out.lambda = cell.opt.lambda;
    out.seed = cell.seed;
    out.ok = pcr.all_hold();
    out.worst_slack = pcr.worst_slack();
    for (const auto& item : pcr.items)
      if (item.applicable && item.n_evals > 0 && item.max_slack == out.worst_slack)
        out.worst_item = item.name;
  });
  rep.n_trajectories = static_cast<long>(rep.cells.size());
  for (const auto& c : rep.cells) {
    if (!c.ok) ++rep.n_violations;
    if (c.worst_slack > rep.worst_slack) {
      rep.worst_slack = c.worst_slack;
      rep.worst_item = c.worst_item;
    }
  }
  rep.pass = rep.n_violations == 0;
  return rep;
}

// Canonical bound-certificate configurations used by the verify command.
inline RunConfig canonical_bound_config(TheoremId id, double p, int n_seeds,
                                        std::vector<long> horizons,
                                        std::uint64_t base_seed = 7) {
  RunConfig cfg;
  cfg.horizons = std::move(horizons);
  cfg.n_seeds = n_seeds;
  cfg.base_seed = base_seed;
  if (id == TheoremId::A1) {
    cfg.problem = {{"name", "quadratic"}, {"L", {1.0, 4.0}}, {"x_opt", {0.0, 0.0}},
                   {"x1", {3.0, -1.5}}};
    cfg.noise = {{"kind", "pareto_sym"}, {"p", p}, {"sigma", {0.5, 0.5}}, {"alpha", 2.0 * p}};
    cfg.optimizer = {{"algo", "adagrad"}, {"gamma", 1.0}, {"lambda", 1.0}};
    cfg.metric = MetricKind::grad_l1_avg;
    cfg.theorem = "A1";
  } else if (id == TheoremId::T51) {
    cfg.problem = {{"name", "bounded_cosine"}, {"A", {1.0, 0.5}}, {"a", {1.0, 2.0}},
                   {"x1", {1.0, 1.0}}};
    cfg.noise = {{"kind", "pareto_sym"}, {"p", p}, {"sigma", {1.0, 1.0}}, {"alpha", 2.0 * p}};
    cfg.optimizer = {{"algo", "adagradnorm"}, {"gamma", 1.0}, {"lambda", 1.0}};
    cfg.metric = MetricKind::grad_l2_avg;
    cfg.theorem = "51";
  } else {
    cfg.problem = {{"name", "quadratic"}, {"L", {1.0, 4.0}}, {"x_opt", {0.0, 0.0}},
                   {"x1", {3.0, -1.5}}};
    cfg.noise = {{"kind", "pareto_sym"}, {"p", p}, {"sigma", {0.5, 0.5}}, {"alpha", 2.0 * p}};
    cfg.optimizer = {{"algo", "adagradnorm"}, {"gamma", 1.0}, {"lambda", 1.0}};
    cfg.metric = MetricKind::grad_l2_avg;
    cfg.theorem = "D1";
  }
  return cfg;
}

inline std::string output_root() {
  if (const char* env = std::getenv("HTOPT_OUT")) return std::string(env);
  return ".";
}

}  // namespace htopt
