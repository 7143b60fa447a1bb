#pragma once

// Command-line front end. Kept in a header so the test suite can drive every
// subcommand in-process; tools/saddle_cli.cpp only forwards argv.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "saddle/critical_points.hpp"
#include "saddle/descent_engine.hpp"
#include "saddle/errors.hpp"
#include "saddle/experiments.hpp"
#include "saddle/inverse_map.hpp"
#include "saddle/io.hpp"
#include "saddle/objective_spec.hpp"

namespace saddle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Every setting a subcommand can read. Fields are optional so that a
/// --config file and command-line flags can be layered.
struct RunConfig {
  std::optional<nlohmann::json> objective;
  std::optional<double> alpha;
  std::optional<double> theta;
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> y;
  std::optional<std::vector<double>> init_box;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::size_t> max_iters;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::optional<double> radius;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> saddle;
  std::optional<std::size_t> seeds;
  std::optional<double> loj_a;
  std::optional<double> loj_m;
};

namespace detail {

// Raw flag values as typed on the command line.
struct Flags {
  std::optional<std::string> config, objective, x0, y, init_box, out;
  std::optional<double> alpha, theta, tol, radius, loj_a, loj_m;
  std::optional<std::size_t> trials, max_iters, threads, grid, saddle, seeds;
  std::optional<std::uint64_t> seed;
};

inline std::vector<double> json_real_list(const nlohmann::json& j, const char* key) {
  if (j.is_string()) return parse_real_list(j.get<std::string>());
  if (!j.is_array()) throw ContractViolation(std::string("config: '") + key + "' must be a list");
  std::vector<double> out;
  for (const auto& e : j) {
    if (e.is_array()) {
      for (const auto& v : e) out.push_back(v.get<double>());
    } else {
      out.push_back(e.get<double>());
    }
  }
  return out;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ContractViolation("config file must hold a JSON object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "objective") c.objective = v;
    else if (key == "alpha") c.alpha = v.get<double>();
    else if (key == "theta") c.theta = v.get<double>();
    else if (key == "x0") c.x0 = json_real_list(v, "x0");
    else if (key == "y") c.y = json_real_list(v, "y");
    else if (key == "init_box") c.init_box = json_real_list(v, "init_box");
    else if (key == "trials") c.trials = v.get<std::size_t>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "tol") c.tol = v.get<double>();
    else if (key == "max_iters") c.max_iters = v.get<std::size_t>();
    else if (key == "out") c.out = v.get<std::string>();
    else if (key == "threads") c.threads = v.get<std::size_t>();
    else if (key == "radius") c.radius = v.get<double>();
    else if (key == "grid") c.grid = v.get<std::size_t>();
    else if (key == "saddle") c.saddle = v.get<std::size_t>();
    else if (key == "seeds") c.seeds = v.get<std::size_t>();
    else if (key == "a") c.loj_a = v.get<double>();
    else if (key == "m") c.loj_m = v.get<double>();
    else throw ContractViolation("config: unknown key '" + key + "'");
  }
  return c;
}

template <typename T>
void override_with(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

// Command-line flags win over the config file.
inline RunConfig merge(RunConfig base, const Flags& f) {
  if (f.objective) base.objective = nlohmann::json(*f.objective);
  if (f.alpha || f.theta) {
    base.alpha.reset();
    base.theta.reset();
  }
  override_with(base.alpha, f.alpha);
  override_with(base.theta, f.theta);
  if (f.x0) base.x0 = parse_real_list(*f.x0);
  if (f.y) base.y = parse_real_list(*f.y);
  if (f.init_box) base.init_box = parse_real_list(*f.init_box);
  override_with(base.trials, f.trials);
  override_with(base.seed, f.seed);
  override_with(base.tol, f.tol);
  override_with(base.max_iters, f.max_iters);
  override_with(base.out, f.out);
  override_with(base.threads, f.threads);
  override_with(base.radius, f.radius);
  override_with(base.grid, f.grid);
  override_with(base.saddle, f.saddle);
  override_with(base.seeds, f.seeds);
  override_with(base.loj_a, f.loj_a);
  override_with(base.loj_m, f.loj_m);
  return base;
}

inline RunConfig resolve(const Flags& f) {
  RunConfig base;
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw ContractViolation("cannot read config file '" + *f.config + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ContractViolation("config file '" + *f.config + "' is not valid JSON: " + e.what());
    }
    base = config_from_json(j);
  }
  return merge(std::move(base), f);
}

inline AnyObjective require_objective(const RunConfig& c) {
  if (!c.objective) throw ContractViolation("--objective is required");
  return objective_from_json(*c.objective);
}

inline double resolve_alpha(const RunConfig& c, const AnyObjective& f) {
  if (c.alpha && c.theta) throw ContractViolation("give exactly one of --alpha and --theta");
  if (c.alpha) return *c.alpha;
  return alpha_from_theta(f, c.theta.value_or(kDefaultTheta));
}

inline Vector require_point(const std::optional<std::vector<double>>& v, const AnyObjective& f,
                            const char* flag) {
  if (!v) throw ContractViolation(std::string(flag) + " is required");
  if (v->size() != f.dimension()) {
    throw ContractViolation(std::string(flag) + " has " + std::to_string(v->size()) +
                            " entries; objective dimension is " + std::to_string(f.dimension()));
  }
  return to_vector(*v);
}

// "lo,hi" for every coordinate, or "lo1,hi1,...,lod,hid".
inline Box resolve_init_box(const RunConfig& c, const AnyObjective& f) {
  const std::size_t d = f.dimension();
  if (!c.init_box) return sampling_box(f.domain_box());
  const auto& v = *c.init_box;
  if (v.size() == 2) return Box::cube(d, v[0], v[1]);
  if (v.size() == 2 * d) {
    Vector lo(static_cast<Eigen::Index>(d)), hi(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      lo[static_cast<Eigen::Index>(i)] = v[2 * i];
      hi[static_cast<Eigen::Index>(i)] = v[2 * i + 1];
    }
    return Box(lo, hi);
  }
  throw ContractViolation("--init-box needs 2 or 2*d numbers");
}

inline StopPolicy resolve_policy(const RunConfig& c) {
  StopPolicy p;
  if (c.tol) {
    if (!(*c.tol > 0.0)) throw ContractViolation("--tol must be positive");
    p.tol = *c.tol;
  }
  if (c.max_iters) p.max_iters = *c.max_iters;
  return p;
}

inline std::filesystem::path out_dir(const RunConfig& c) { return c.out.value_or("."); }

inline nlohmann::json basin_json(const BasinLabel& label, const std::vector<CriticalPointRecord>& records) {
  nlohmann::json j = {{"label", label_string(label)}};
  if (label.kind == LabelKind::Basin) {
    j["location"] = to_json(records[label.index].location);
    j["classification"] = std::string(to_string(records[label.index].classification));
  }
  return j;
}

// --- subcommands -----------------------------------------------------------

inline int cmd_run(const RunConfig& c, std::ostream& out) {
  const AnyObjective f = require_objective(c);
  const GradientMap<AnyObjective> map(f, resolve_alpha(c, f));
  const Vector x0 = require_point(c.x0, f, "--x0");
  const Trajectory traj = run(map, x0, resolve_policy(c));
  const auto records = find_critical_points(f, c.seeds.value_or(100), c.seed.value_or(0)).records;
  const BasinLabel label = assign_basin(traj, records);

  nlohmann::json summary = {{"objective", objective_to_json(f)},
                            {"alpha", map.alpha()},
                            {"x0", to_json(x0)},
                            {"stop_reason", std::string(to_string(traj.stop_reason))},
                            {"iterations", traj.steps()},
                            {"final_iterate", to_json(traj.final_iterate())},
                            {"final_f", traj.f_values.back()},
                            {"final_grad_norm", traj.final_grad_norm()},
                            {"basin", basin_json(label, records)}};
  const auto dir = out_dir(c);
  write_file_atomic(dir / "trajectory.csv", trajectory_csv(traj));
  write_file_atomic(dir / "run_summary.json", summary.dump(2) + "\n");
  out << summary.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_montecarlo(const RunConfig& c, std::ostream& out) {
  const AnyObjective f = require_objective(c);
  const GradientMap<AnyObjective> map(f, resolve_alpha(c, f));
  const std::size_t trials = c.trials.value_or(1000);
  if (trials < 1) throw ContractViolation("--trials must be at least 1");
  MonteCarloOptions opts;
  opts.policy = resolve_policy(c);
  opts.threads = static_cast<unsigned>(c.threads.value_or(0));
  opts.critical_point_seeds = c.seeds.value_or(100);
  const MonteCarloReport rep = monte_carlo(map, trials, c.seed.value_or(0), resolve_init_box(c, f), opts);

  nlohmann::json j = to_json(rep);
  j["objective"] = objective_to_json(f);
  const auto dir = out_dir(c);
  write_file_atomic(dir / "montecarlo_report.json", j.dump(2) + "\n");
  write_file_atomic(dir / "trials.csv", trials_csv(rep));
  write_file_atomic(dir / "basins_plot.csv", basin_plot_csv(rep));
  out << "saddle_hits: " << rep.saddle_hits << "\n";
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    out << "basin_" << i << " (" << to_string(rep.records[i].classification) << "): " << rep.basin_counts[i]
        << "\n";
  }
  out << "diverged: " << rep.diverged << "\nleft_box: " << rep.left_box << "\nunresolved: " << rep.unresolved
      << "\n";
  return kExitOk;
}

inline int cmd_classify(const RunConfig& c, std::ostream& out) {
  const AnyObjective f = require_objective(c);
  const auto search =
      find_critical_points(f, c.seeds.value_or(100), c.seed.value_or(0), c.tol.value_or(1e-10));
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : search.records) arr.push_back(to_json(r));
  out << arr.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_stable_set(const RunConfig& c, std::ostream& out) {
  const AnyObjective f = require_objective(c);
  const GradientMap<AnyObjective> map(f, resolve_alpha(c, f));
  const auto records = find_critical_points(f, c.seeds.value_or(100), c.seed.value_or(0)).records;
  std::vector<const CriticalPointRecord*> saddles;
  for (const auto& r : records)
    if (r.strict_saddle) saddles.push_back(&r);
  const std::size_t which = c.saddle.value_or(0);
  if (which >= saddles.size()) {
    throw ContractViolation("no strict saddle with index " + std::to_string(which) + " (found " +
                            std::to_string(saddles.size()) + ")");
  }
  StableSetOptions opts;
  opts.policy = resolve_policy(c);
  opts.threads = static_cast<unsigned>(c.threads.value_or(0));
  const StableSetSample s = sample_local_stable_set(map, *saddles[which], c.radius.value_or(0.5),
                                                    c.grid.value_or(41), opts);
  const auto dir = out_dir(c);
  write_file_atomic(dir / "stable_set.csv", stable_set_csv(s));
  const nlohmann::json j = {{"saddle", to_json(saddles[which]->location)},
                            {"alpha", map.alpha()},
                            {"grid_points", s.grid_points.size()},
                            {"converged", s.converged_points().size()},
                            {"grid_spacing", s.grid_spacing},
                            {"max_distance_from_subspace", s.max_distance_from_subspace},
                            {"stable_subspace_basis", columns_to_json(s.stable_basis)}};
  out << j.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_invert(const RunConfig& c, std::ostream& out) {
  const AnyObjective f = require_objective(c);
  const GradientMap<AnyObjective> map(f, resolve_alpha(c, f));
  const Vector y = require_point(c.y, f, "--y");
  const ProxSolveReport rep = invert(map, y, c.tol.value_or(1e-10));
  nlohmann::json j = to_json(rep);
  j["preimage"] = j["solution"];
  j["y"] = to_json(y);
  j["alpha"] = map.alpha();
  out << j.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_rates(const RunConfig& c, std::ostream& out) {
  const AnyObjective f = require_objective(c);
  const double alpha = resolve_alpha(c, f);
  const GradientMap<AnyObjective> map(f, alpha);
  Vector x0;
  if (c.x0) {
    x0 = require_point(c.x0, f, "--x0");
  } else {
    const Box box = f.domain_box();
    x0 = Vector::Ones(static_cast<Eigen::Index>(f.dimension())).cwiseMax(box.lower()).cwiseMin(box.upper());
  }
  const Trajectory traj = run(map, x0, resolve_policy(c));
  const auto records = find_critical_points(f, c.seeds.value_or(100), c.seed.value_or(0)).records;
  const BasinLabel label = assign_basin(traj, records);

  nlohmann::json j = {{"objective", objective_to_json(f)},
                      {"alpha", alpha},
                      {"x0", to_json(x0)},
                      {"stop_reason", std::string(to_string(traj.stop_reason))},
                      {"iterations", traj.steps()},
                      {"basin", basin_json(label, records)}};
  // Converged trajectories fit against the matched critical point; the
  // power regime may stop on MaxIters, so fall back to the final iterate
  // only when no record matched and the gradient is small.
  Vector x_star;
  if (label.kind == LabelKind::Basin) {
    x_star = records[label.index].location;
  } else {
    const auto near = std::find_if(records.begin(), records.end(), [&](const CriticalPointRecord& r) {
      return (r.location - traj.final_iterate()).norm() < 1e-1;
    });
    if (near == records.end()) throw ContractViolation("rates: trajectory did not approach a critical point");
    x_star = near->location;
  }
  j["x_star"] = to_json(x_star);
  auto attempt = [&](auto fit) -> nlohmann::json {
    try {
      return to_json(fit());
    } catch (const InsufficientData& e) {
      return {{"error", e.what()}};
    }
  };
  j["linear"] = attempt([&] { return fit_linear_rate(traj, x_star); });
  j["power"] = attempt([&] { return fit_power_rate(traj, x_star); });
  if (!j["linear"].contains("error") && !j["power"].contains("error")) {
    j["selected_regime"] = j["power"]["r_squared"].get<double>() > j["linear"]["r_squared"].get<double>()
                               ? "Power"
                               : "Linear";
  }
  if (c.loj_a && c.loj_m) {
    const auto cert = check_lojasiewicz(f, x_star, *c.loj_a, *c.loj_m, c.radius.value_or(0.5), 10000,
                                        c.seed.value_or(0));
    j["lojasiewicz"] = {{"a", cert.a},
                        {"m", cert.m},
                        {"radius", cert.neighborhood_radius},
                        {"samples", cert.samples},
                        {"considered", cert.considered},
                        {"violations", cert.violations}};
    try {
      const auto pl = path_length_check(traj, cert, alpha);
      j["path_length"] = {{"tail_begin", pl.tail_begin}, {"max_ratio", pl.max_ratio}, {"success", pl.success}};
    } catch (const Inapplicable& e) {
      j["path_length"] = {{"error", e.what()}};
    }
  }
  if (c.out) write_file_atomic(out_dir(c) / "rates.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return kExitOk;
}

inline void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file; command-line flags override its keys");
  sub->add_option("--objective", f.objective,
                  "Objective as name or name:[params], e.g. nesterov or diagonal_quadratic:[1,-1]");
  sub->add_option("--seed", f.seed, "Random seed (default 0)");
  sub->add_option("--out", f.out, "Output directory (default .)");
}

inline void add_step(CLI::App* sub, Flags& f) {
  sub->add_option("--alpha", f.alpha, "Step size; must satisfy alpha * L < 1");
  sub->add_option("--theta", f.theta, "Step size as theta / L (default 0.99 when --alpha is absent)");
}

inline void add_policy(CLI::App* sub, Flags& f) {
  sub->add_option("--tol", f.tol, "Gradient-norm tolerance (default 1e-10)");
  sub->add_option("--max-iters", f.max_iters, "Iteration budget (default 100000)");
}

}  // namespace detail

/// Runs the CLI on `args` (excluding the program name). Returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient descent saddle-avoidance experiments", "saddle_cli"};
  app.require_subcommand(1);
  detail::Flags f;

  auto* run_cmd = app.add_subcommand("run", "Run gradient descent from --x0; writes trajectory.csv and run_summary.json");
  detail::add_common(run_cmd, f);
  detail::add_step(run_cmd, f);
  detail::add_policy(run_cmd, f);
  run_cmd->add_option("--x0", f.x0, "Initial point, comma separated");

  auto* mc_cmd = app.add_subcommand("montecarlo", "Random initialisations; writes montecarlo_report.json, trials.csv, basins_plot.csv");
  detail::add_common(mc_cmd, f);
  detail::add_step(mc_cmd, f);
  detail::add_policy(mc_cmd, f);
  mc_cmd->add_option("--trials", f.trials, "Number of trials (default 1000)");
  mc_cmd->add_option("--init-box", f.init_box, "lo,hi for all coordinates or lo1,hi1,...,lod,hid");
  mc_cmd->add_option("--threads", f.threads, "Worker threads (default: hardware concurrency)");

  auto* cls_cmd = app.add_subcommand("classify", "Find and classify critical points; prints a JSON array");
  detail::add_common(cls_cmd, f);
  cls_cmd->add_option("--tol", f.tol, "Gradient-norm tolerance for roots (default 1e-10)");
  cls_cmd->add_option("--seeds", f.seeds, "Multistart Newton seeds (default 100)");

  auto* ss_cmd = app.add_subcommand("stable-set", "Sample the local stable set of a strict saddle; writes stable_set.csv");
  detail::add_common(ss_cmd, f);
  detail::add_step(ss_cmd, f);
  detail::add_policy(ss_cmd, f);
  ss_cmd->add_option("--radius", f.radius, "Half width of the sampling square (default 0.5)");
  ss_cmd->add_option("--grid", f.grid, "Grid points per axis (default 41)");
  ss_cmd->add_option("--saddle", f.saddle, "Index among the strict saddles found (default 0)");
  ss_cmd->add_option("--threads", f.threads, "Worker threads (default: hardware concurrency)");

  auto* inv_cmd = app.add_subcommand("invert", "Preimage of --y under the gradient map; prints JSON");
  detail::add_common(inv_cmd, f);
  detail::add_step(inv_cmd, f);
  inv_cmd->add_option("--y", f.y, "Point to invert, comma separated");
  inv_cmd->add_option("--tol", f.tol, "Residual tolerance (default 1e-10)");

  auto* rates_cmd = app.add_subcommand("rates", "Fit linear and power convergence rates; prints JSON");
  detail::add_common(rates_cmd, f);
  detail::add_step(rates_cmd, f);
  detail::add_policy(rates_cmd, f);
  rates_cmd->add_option("--x0", f.x0, "Initial point (default: all ones, clipped to the domain box)");
  rates_cmd->add_option("--a", f.loj_a, "Lojasiewicz exponent to certify (with --m)");
  rates_cmd->add_option("--m", f.loj_m, "Lojasiewicz constant to certify (with --a)");
  rates_cmd->add_option("--radius", f.radius, "Certificate neighbourhood radius (default 0.5)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const RunConfig c = detail::resolve(f);
    if (run_cmd->parsed()) return detail::cmd_run(c, out);
    if (mc_cmd->parsed()) return detail::cmd_montecarlo(c, out);
    if (cls_cmd->parsed()) return detail::cmd_classify(c, out);
    if (ss_cmd->parsed()) return detail::cmd_stable_set(c, out);
    if (inv_cmd->parsed()) return detail::cmd_invert(c, out);
    if (rates_cmd->parsed()) return detail::cmd_rates(c, out);
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace saddle::cli
