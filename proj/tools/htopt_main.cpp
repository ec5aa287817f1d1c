// Command-line front end: single-run dumps, Monte Carlo sweeps, the checker
// matrix, the stall demo, and rate fitting from emitted CSVs.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "htopt/htopt.hpp"

namespace {

using htopt::json;

struct Overrides {
  std::string algo;
  double gamma = std::nan("");
  double lambda = std::nan("");
  double eta = std::nan("");
  double beta = std::nan("");
  double tau = std::nan("");
  std::string metric;
  std::string horizons;
  long n_seeds = -1;
  long base_seed = -1;
  std::string theorem;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--algo", ov.algo, "override optimizer.algo");
  cmd->add_option("--gamma", ov.gamma, "override optimizer.gamma");
  cmd->add_option("--lambda", ov.lambda, "override optimizer.lambda");
  cmd->add_option("--eta", ov.eta, "override optimizer.eta");
  cmd->add_option("--beta", ov.beta, "override optimizer.beta");
  cmd->add_option("--tau", ov.tau, "override optimizer.tau");
  cmd->add_option("--metric", ov.metric, "override metric");
  cmd->add_option("--horizons", ov.horizons, "override horizons, comma separated");
  cmd->add_option("--seeds", ov.n_seeds, "override n_seeds");
  cmd->add_option("--base-seed", ov.base_seed, "override base_seed");
  cmd->add_option("--theorem", ov.theorem, "override theorem id (A1, 51, D1)");
}

json load_config_with_overrides(const std::string& path, const Overrides& ov) {
  json j = htopt::load_json(path);
  auto set_opt = [&j](const char* key, double v) {
    if (!std::isnan(v)) j["optimizer"][key] = v;
  };
  if (!ov.algo.empty()) j["optimizer"]["algo"] = ov.algo;
  set_opt("gamma", ov.gamma);
  set_opt("lambda", ov.lambda);
  set_opt("eta", ov.eta);
  set_opt("beta", ov.beta);
  set_opt("tau", ov.tau);
  if (!ov.metric.empty()) j["metric"] = ov.metric;
  if (!ov.horizons.empty()) {
    std::vector<long> hs;
    std::stringstream ss(ov.horizons);
    std::string tok;
    while (std::getline(ss, tok, ',')) hs.push_back(std::stol(tok));
    j["horizons"] = hs;
  }
  if (ov.n_seeds >= 0) j["n_seeds"] = ov.n_seeds;
  if (ov.base_seed >= 0) j["base_seed"] = static_cast<std::uint64_t>(ov.base_seed);
  if (!ov.theorem.empty()) j["theorem"] = ov.theorem;
  return j;
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return dir + "/" + name;
}

int cmd_run(const std::string& config_path, const Overrides& ov, long T, long seed,
            std::string out_dir, const std::string& run_id) {
  const htopt::RunConfig cfg = htopt::parse_config(load_config_with_overrides(config_path, ov));
  const htopt::Problem prob = htopt::resolve_problem(cfg.problem);
  const htopt::NoiseModel nm = htopt::resolve_noise(cfg.noise, prob.dim);
  const htopt::OptimizerSpec opt = htopt::resolve_optimizer(cfg.optimizer);
  if (out_dir.empty()) out_dir = htopt::output_root();
  const htopt::Trajectory traj =
      htopt::run(prob, nm, opt, T, static_cast<std::uint64_t>(seed));
  htopt::emit_trajectory_csv(traj, run_id, join_path(out_dir, run_id + ".csv"));
  json meta;
  meta["config"] = cfg.echo();
  meta["T"] = T;
  meta["seed"] = seed;
  meta["diverged"] = traj.diverged;
  if (traj.diverged) meta["diverged_at"] = traj.diverged_at;
  meta["f_final"] = traj.f_final;
  htopt::write_file(join_path(out_dir, run_id + ".json"), meta.dump(2) + "\n");
  std::cout << meta.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const Overrides& ov, std::string out_dir,
              const std::string& name) {
  const htopt::RunConfig cfg = htopt::parse_config(load_config_with_overrides(config_path, ov));
  if (out_dir.empty()) out_dir = cfg.out_dir.empty() ? htopt::output_root() : cfg.out_dir;
  const htopt::SweepResult res =
      cfg.theorem.empty() ? htopt::monte_carlo(cfg) : htopt::verify_bounds(cfg);
  htopt::emit_sweep_csv(res, join_path(out_dir, name + ".csv"));
  htopt::emit_sweep_json(res, join_path(out_dir, name + ".json"));
  for (const auto& row : res.aggregates)
    std::cout << "T=" << row.T << " mean=" << htopt::fmt_double(row.mean)
              << " se=" << htopt::fmt_double(row.se) << " diverged=" << row.n_diverged << "\n";
  if (res.fit)
    std::cout << "fitted slope=" << htopt::fmt_double(res.fit->slope)
              << " r2=" << htopt::fmt_double(res.fit->r_squared) << "\n";
  for (const auto& b : res.bounds)
    std::cout << "theorem " << b.theorem_id << " T=" << b.T
              << " lhs=" << htopt::fmt_double(b.lhs_measured)
              << " rhs=" << htopt::fmt_double(b.rhs_value) << (b.pass ? " PASS" : " FAIL") << "\n";
  return 0;
}

int cmd_verify(const std::string& config_path, const Overrides& ov, std::string out_dir, long T,
               int cell_seeds, int descent_trials, bool with_bounds, int bound_seeds) {
  if (out_dir.empty()) out_dir = htopt::output_root();
  json report;
  bool ok = true;

  // Per-path inequality matrix.
  htopt::CheckerMatrixOptions mopts;
  mopts.T = T;
  mopts.seeds_per_cell = cell_seeds;
  const htopt::CheckerMatrixReport matrix = htopt::run_checker_matrix(mopts);
  report["path_matrix"] = {{"trajectories", matrix.n_trajectories},
                           {"violations", matrix.n_violations},
                           {"worst_slack", matrix.worst_slack},
                           {"worst_item", matrix.worst_item},
                           {"pass", matrix.pass}};
  ok = ok && matrix.pass;
  std::cout << (matrix.pass ? "PASS" : "FAIL") << " path matrix: " << matrix.n_trajectories
            << " trajectories, worst slack " << htopt::fmt_double(matrix.worst_slack) << "\n";

  // Exact single-step descent certificates under enumerated noise.
  {
    const htopt::Problem prob = htopt::make_quadratic({1.0, 3.0}, {0.0, 0.0});
    const htopt::NoiseModel nm = htopt::make_discrete3(1.5, {0.8, 0.8}, std::sqrt(2.0));
    const auto root = htopt::RngStream::from_seed(99);
    long fails = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < descent_trials; ++trial) {
      const auto st = root.child(trial);
      htopt::Vec x = {4.0 * (st.uniform01(0) - 0.5), 4.0 * (st.uniform01(1) - 0.5)};
      htopt::Vec v = {st.uniform01(2) * 5.0, st.uniform01(3) * 5.0};
      const double lambda = st.uniform01(4) * 0.5;
      const double cs = std::pow(10.0, -2.0 + 3.0 * st.uniform01(5));
      const htopt::Vec c = {cs, cs};
      const auto r1 = htopt::check_core_descent(prob, nm, x, v, 1.0, lambda, c);
      const auto r2 = htopt::check_core_descent_norm(prob, nm, x, v[0], 1.0, lambda, cs);
      if (!r1.holds || !r2.holds) ++fails;
      worst = std::min({worst, r1.margin(), r2.margin()});
    }
    report["core_descent"] = {{"trials", descent_trials}, {"failures", fails}, {"min_margin", worst}};
    ok = ok && fails == 0;
    std::cout << (fails == 0 ? "PASS" : "FAIL") << " core descent: " << descent_trials
              << " trials, min margin " << htopt::fmt_double(worst) << "\n";
  }

  // Scalar numeric lemma scans.
  const htopt::NumericLemmaReport lem = htopt::numeric_lemma_checks();
  report["numeric_lemmas"] = {
      {"log_ratio_threshold",
       {{"points", lem.log_ratio_threshold.points},
        {"violations", lem.log_ratio_threshold.violations},
        {"min_margin", lem.log_ratio_threshold.min_margin}}},
      {"log_square_envelope",
       {{"points", lem.log_square_envelope.points},
        {"violations", lem.log_square_envelope.violations},
        {"min_margin", lem.log_square_envelope.min_margin}}},
      {"pass", lem.pass}};
  ok = ok && lem.pass;
  std::cout << (lem.pass ? "PASS" : "FAIL") << " numeric lemmas\n";

  // Bound certificates: from an explicit config, or the canonical pair.
  std::vector<htopt::RunConfig> bound_cfgs;
  if (!config_path.empty())
    bound_cfgs.push_back(htopt::parse_config(load_config_with_overrides(config_path, ov)));
  else if (with_bounds) {
    for (double p : {1.5, 2.0}) {
      bound_cfgs.push_back(
          htopt::canonical_bound_config(htopt::TheoremId::T51, p, bound_seeds, {100, 1000, 10000}));
      bound_cfgs.push_back(
          htopt::canonical_bound_config(htopt::TheoremId::A1, p, bound_seeds, {100, 1000, 10000}));
    }
  }
  report["bounds"] = json::array();
  for (const auto& bcfg : bound_cfgs) {
    const htopt::SweepResult res = htopt::verify_bounds(bcfg);
    for (const auto& b : res.bounds) {
      report["bounds"].push_back({{"theorem", b.theorem_id},
                                  {"T", b.T},
                                  {"lhs_measured", b.lhs_measured},
                                  {"lhs_ci95", b.lhs_ci95},
                                  {"rhs_value", b.rhs_value},
                                  {"pass", b.pass}});
      ok = ok && b.pass;
      std::cout << (b.pass ? "PASS" : "FAIL") << " theorem " << b.theorem_id << " T=" << b.T
                << " lhs=" << htopt::fmt_double(b.lhs_measured)
                << " rhs=" << htopt::fmt_double(b.rhs_value) << "\n";
    }
  }

  report["pass"] = ok;
  htopt::write_file(join_path(out_dir, "verify_report.json"), report.dump(2) + "\n");
  std::cout << (ok ? "PASS" : "FAIL") << " verify (report at " << join_path(out_dir, "verify_report.json")
            << ")\n";
  return ok ? 0 : 1;
}

int cmd_lb_demo(double delta, double smoothness, double p, double sigma, double eps, double gamma,
                double lambda, long horizon, int seeds, long base_seed, const std::string& mode,
                std::string out_dir) {
  if (out_dir.empty()) out_dir = htopt::output_root();
  const htopt::HardInstance inst =
      htopt::build_instance(delta, smoothness, p, sigma, eps, 0.0, gamma, lambda);
  const htopt::LbThreshold thr = htopt::lb_threshold(inst);
  if (horizon <= 0) {
    if (!(thr.T_operational < 1e7))
      throw std::runtime_error("operational threshold exceeds 1e7 steps; pass --horizon explicitly");
    horizon = std::max<long>(1, static_cast<long>(thr.T_operational));
  }
  const htopt::StallMode smode =
      mode == "float" ? htopt::StallMode::float_replay : htopt::StallMode::lattice;
  std::vector<htopt::StallPath> paths;
  const htopt::StallStats stats =
      htopt::stall_experiment(inst, horizon, seeds, static_cast<std::uint64_t>(base_seed), smode,
                              /*throw_on_violation=*/false, &paths);
  htopt::emit_lb_csv(paths, join_path(out_dir, "lb_demo.csv"));
  json j;
  j["instance"] = {{"delta", delta}, {"smoothness", smoothness}, {"p", p},     {"sigma", sigma},
                   {"eps", eps},     {"gamma", gamma},           {"lambda", lambda}};
  j["base_seed"] = base_seed;
  j["mode"] = mode;
  j["T_star"] = inst.T_star;
  j["q"] = inst.q;
  j["T"] = stats.T;
  j["n_seeds"] = stats.n_seeds;
  j["frac_stalled"] = stats.frac_stalled;
  j["frac_stalled_ci95"] = stats.frac_stalled_ci95;
  j["mean_metric"] = stats.mean_metric;
  j["metric_ci95"] = stats.metric_ci95;
  j["grid_violations"] = stats.grid_violations;
  j["T_operational"] = thr.T_operational;
  j["T_asymptotic_functional"] = thr.T_asymptotic_functional;
  j["eps_feasible"] = htopt::eps_feasible(inst);
  htopt::write_file(join_path(out_dir, "lb_demo.json"), j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return stats.grid_violations == 0 ? 0 : 1;
}

int cmd_rate(const std::string& input, long min_T) {
  auto pts = htopt::load_rate_points_csv(input);
  if (min_T > 0) {
    std::erase_if(pts, [min_T](const auto& pr) { return pr.first < static_cast<double>(min_T); });
  }
  const auto fit = htopt::fit_rate(pts);
  if (!fit) {
    std::cerr << "rate: need at least two positive points\n";
    return 1;
  }
  json j;
  j["slope"] = fit->slope;
  j["intercept"] = fit->intercept;
  j["r_squared"] = fit->r_squared;
  j["n_used"] = fit->n_used;
  j["n_rejected"] = fit->n_rejected;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heavy-tailed adaptive-gradient verification lab"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path, out_dir, run_id = "trajectory", sweep_name = "sweep";
  long T = 1000, seed = 0;

  auto* c_run = app.add_subcommand("run", "run one trajectory and dump it");
  c_run->add_option("--config", config_path, "config JSON")->required();
  c_run->add_option("--T", T, "horizon");
  c_run->add_option("--seed", seed, "trajectory seed");
  c_run->add_option("--out", out_dir, "output directory");
  c_run->add_option("--run-id", run_id, "output basename");
  add_override_flags(c_run, ov);

  auto* c_sweep = app.add_subcommand("sweep", "Monte Carlo sweep over horizons x seeds");
  c_sweep->add_option("--config", config_path, "config JSON")->required();
  c_sweep->add_option("--out", out_dir, "output directory");
  c_sweep->add_option("--name", sweep_name, "output basename");
  add_override_flags(c_sweep, ov);

  long verify_T = 10000;
  int cell_seeds = 3, descent_trials = 200, bound_seeds = 30;
  bool with_bounds = false;
  auto* c_verify = app.add_subcommand("verify", "checker matrix + certificates, JSON report");
  c_verify->add_option("--config", config_path, "optional bound config JSON");
  c_verify->add_option("--out", out_dir, "output directory");
  c_verify->add_option("--T", verify_T, "matrix horizon");
  c_verify->add_option("--cell-seeds", cell_seeds, "trajectories per matrix cell");
  c_verify->add_option("--descent-trials", descent_trials, "random descent-certificate trials");
  c_verify->add_flag("--bounds", with_bounds, "also run canonical bound certificates");
  c_verify->add_option("--bound-seeds", bound_seeds, "seeds per bound sweep");
  add_override_flags(c_verify, ov);

  double delta = 5.0, smoothness = 1.0, p = 2.0, sigma = 0.0, eps = 1.0, gamma = 1.0, lambda = 0.0;
  long horizon = 0, lb_base_seed = 0;
  int lb_seeds = 100;
  std::string lb_mode = "lattice";
  auto* c_lb = app.add_subcommand("lb-demo", "adversarial stall experiment");
  c_lb->add_option("--delta", delta, "initial gap");
  c_lb->add_option("--smoothness", smoothness, "smoothness constant L");
  c_lb->add_option("--p", p, "tail index");
  c_lb->add_option("--sigma", sigma, "noise level");
  c_lb->add_option("--eps", eps, "target stationarity");
  c_lb->add_option("--gamma", gamma, "learning rate");
  c_lb->add_option("--lambda", lambda, "stepsize offset");
  c_lb->add_option("--horizon", horizon, "horizon (default: operational threshold)");
  c_lb->add_option("--seeds", lb_seeds, "number of paths");
  c_lb->add_option("--base-seed", lb_base_seed, "base seed");
  c_lb->add_option("--mode", lb_mode, "lattice | float");
  c_lb->add_option("--out", out_dir, "output directory");

  std::string rate_input;
  long rate_min_T = 0;
  auto* c_rate = app.add_subcommand("rate", "fit a decay exponent from a sweep CSV");
  c_rate->add_option("--input", rate_input, "sweep CSV path")->required();
  c_rate->add_option("--min-T", rate_min_T, "ignore rows with T below this");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_run->parsed()) return cmd_run(config_path, ov, T, seed, out_dir, run_id);
    if (c_sweep->parsed()) return cmd_sweep(config_path, ov, out_dir, sweep_name);
    if (c_verify->parsed())
      return cmd_verify(config_path, ov, out_dir, verify_T, cell_seeds, descent_trials,
                        with_bounds, bound_seeds);
    if (c_lb->parsed())
      return cmd_lb_demo(delta, smoothness, p, sigma, eps, gamma, lambda, horizon, lb_seeds,
                         lb_base_seed, lb_mode, out_dir);
    if (c_rate->parsed()) return cmd_rate(rate_input, rate_min_T);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
