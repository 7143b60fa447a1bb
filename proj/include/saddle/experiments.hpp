#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "saddle/critical_points.hpp"
#include "saddle/descent_engine.hpp"
#include "saddle/errors.hpp"
#include "saddle/function_zoo.hpp"
#include "saddle/linalg.hpp"
#include "saddle/random.hpp"

namespace saddle {

// ---------------------------------------------------------------------------
// Basin assignment

enum class LabelKind { Basin, Diverged, LeftBox, Unresolved };

inline std::string_view to_string(LabelKind k) {
  switch (k) {
    case LabelKind::Basin: return "Basin";
    case LabelKind::Diverged: return "Diverged";
    case LabelKind::LeftBox: return "LeftBox";
    case LabelKind::Unresolved: return "Unresolved";
  }
  return "?";
}

struct BasinLabel {
  LabelKind kind = LabelKind::Unresolved;
  std::size_t index = 0;  // meaningful for Basin only

  friend bool operator==(const BasinLabel&, const BasinLabel&) = default;
};

inline std::string label_string(const BasinLabel& l) {
  if (l.kind == LabelKind::Basin) return "basin_" + std::to_string(l.index);
  return std::string(to_string(l.kind));
}

inline constexpr double kBasinTolerance = 1e-6;

/// Basin of a finished trajectory: the unique record within tol (infinity
/// norm) of the final iterate, provided the final gradient norm is within tol.
inline BasinLabel assign_basin(const Trajectory& traj, const std::vector<CriticalPointRecord>& records,
                               double tol = kBasinTolerance) {
  if (traj.iterates.empty()) throw ContractViolation("assign_basin: empty trajectory");
  if (traj.stop_reason == StopReason::Diverged) return {LabelKind::Diverged, 0};
  if (traj.stop_reason == StopReason::LeftDomainBox) return {LabelKind::LeftBox, 0};
  if (!(traj.final_grad_norm() <= tol)) return {LabelKind::Unresolved, 0};
  const Vector& x = traj.final_iterate();
  std::optional<std::size_t> hit;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if ((records[i].location - x).lpNorm<Eigen::Infinity>() <= tol) {
      if (hit) throw AmbiguousBasin("assign_basin: records " + std::to_string(*hit) + " and " +
                                    std::to_string(i) + " both lie within tolerance of the limit");
      hit = i;
    }
  }
  if (!hit) return {LabelKind::Unresolved, 0};
  return {LabelKind::Basin, *hit};
}

// ---------------------------------------------------------------------------
// Monte Carlo saddle avoidance

struct TrialSummary {
  std::size_t trial = 0;
  Vector x0;
  BasinLabel label;
  std::size_t iterations = 0;
  double final_grad_norm = 0.0;
};

struct MonteCarloReport {
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  Box init_box;
  std::vector<CriticalPointRecord> records;
  std::vector<std::size_t> basin_counts;  // indexed like records
  std::size_t diverged = 0;
  std::size_t left_box = 0;
  std::size_t unresolved = 0;
  std::size_t saddle_hits = 0;
  std::vector<TrialSummary> trials;

  std::size_t total() const {
    std::size_t s = diverged + left_box + unresolved;
    for (auto c : basin_counts) s += c;
    return s;
  }
};

struct MonteCarloOptions {
  StopPolicy policy{};
  double basin_tol = kBasinTolerance;
  unsigned threads = 0;  // 0: hardware concurrency
  // Critical points to assign basins against; found by multistart Newton
  // when absent.
  std::optional<std::vector<CriticalPointRecord>> records;
  std::size_t critical_point_seeds = 100;
};

/// Uniform random initialisations in init_box, each run to the stop policy
/// and labelled by assign_basin. Trial i draws from stream (seed, i), so the
/// report does not depend on the thread count.
template <Objective F>
MonteCarloReport monte_carlo(const GradientMap<F>& map, std::size_t n_trials, std::uint64_t seed,
                             const Box& init_box, const MonteCarloOptions& opts = {}) {
  const F& f = map.objective();
  if (n_trials < 1) throw ContractViolation("monte_carlo: n_trials must be >= 1");
  if (init_box.dimension() != f.dimension()) throw ContractViolation("monte_carlo: init_box dimension mismatch");
  if (!init_box.bounded()) throw ContractViolation("monte_carlo: init_box must be bounded");
  if (!f.domain_box().contains(init_box)) throw ContractViolation("monte_carlo: init_box must lie in the domain box");

  MonteCarloReport rep;
  rep.n_trials = n_trials;
  rep.seed = seed;
  rep.alpha = map.alpha();
  rep.init_box = init_box;
  rep.records = opts.records ? *opts.records
                             : find_critical_points(f, opts.critical_point_seeds, seed).records;
  rep.basin_counts.assign(rep.records.size(), 0);
  rep.trials.resize(n_trials);

  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n_trials; i += stride) {
      SplitMix64 rng = stream_for(seed, i);
      TrialSummary& t = rep.trials[i];
      t.trial = i;
      t.x0 = uniform_in_box(rng, init_box);
      const Trajectory traj = run(map, t.x0, opts.policy);
      t.label = assign_basin(traj, rep.records, opts.basin_tol);
      t.iterations = traj.steps();
      t.final_grad_norm = traj.final_grad_norm();
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_trials));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  for (const TrialSummary& t : rep.trials) {
    switch (t.label.kind) {
      case LabelKind::Basin:
        ++rep.basin_counts[t.label.index];
        if (rep.records[t.label.index].strict_saddle) ++rep.saddle_hits;
        break;
      case LabelKind::Diverged: ++rep.diverged; break;
      case LabelKind::LeftBox: ++rep.left_box; break;
      case LabelKind::Unresolved: ++rep.unresolved; break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rate fitting

enum class RateRegime { Linear, Power };

inline std::string_view to_string(RateRegime r) { return r == RateRegime::Linear ? "Linear" : "Power"; }

struct FitWindow {
  std::size_t begin = 0;  // first iterate index
  std::size_t end = 0;    // one past the last
};

struct RateFit {
  RateRegime regime = RateRegime::Linear;
  double fitted_b = std::numeric_limits<double>::quiet_NaN();         // Linear
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();  // Power: slope of log err vs log k
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  FitWindow window;
  std::size_t points_used = 0;
};

inline constexpr std::size_t kMinFitPoints = 10;

namespace detail {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return out;
}

// Default window: drop the first 20% of iterates.
inline FitWindow default_window(const Trajectory& traj) {
  const std::size_t n = traj.iterates.size();
  return {n / 5, n};
}

template <typename Abscissa>
RateFit fit_log_error(const Trajectory& traj, const Vector& x_star, std::optional<FitWindow> window,
                      Abscissa abscissa, const char* who) {
  const FitWindow w = window.value_or(default_window(traj));
  const std::size_t end = std::min(w.end, traj.iterates.size());
  const double floor = 100.0 * std::numeric_limits<double>::epsilon();
  std::vector<double> xs, ys;
  for (std::size_t k = w.begin; k < end; ++k) {
    const double err = (traj.iterates[k] - x_star).norm();
    if (!(err >= floor) || !std::isfinite(err)) continue;
    const auto a = abscissa(k);
    if (!a) continue;
    xs.push_back(*a);
    ys.push_back(std::log(err));
  }
  if (xs.size() < kMinFitPoints) {
    throw InsufficientData(std::string(who) + ": only " + std::to_string(xs.size()) +
                           " usable iterates (need " + std::to_string(kMinFitPoints) + ")");
  }
  const LineFit line = least_squares_line(xs, ys);
  RateFit fit;
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.r_squared;
  fit.window = {w.begin, end};
  fit.points_used = xs.size();
  return fit;
}

}  // namespace detail

/// log |x_k - x*| = log C + k log b, fitted by least squares; b = exp(slope).
/// Iterates closer than 100 eps to x* are excluded.
inline RateFit fit_linear_rate(const Trajectory& traj, const Vector& x_star,
                               std::optional<FitWindow> window = std::nullopt) {
  RateFit fit = detail::fit_log_error(
      traj, x_star, window, [](std::size_t k) -> std::optional<double> { return static_cast<double>(k); },
      "fit_linear_rate");
  fit.regime = RateRegime::Linear;
  fit.fitted_b = std::exp(fit.slope);
  return fit;
}

/// log |x_k - x*| = log C + p log k; fitted_exponent = p (negative for decay).
inline RateFit fit_power_rate(const Trajectory& traj, const Vector& x_star,
                              std::optional<FitWindow> window = std::nullopt) {
  RateFit fit = detail::fit_log_error(
      traj, x_star, window,
      [](std::size_t k) -> std::optional<double> {
        if (k == 0) return std::nullopt;
        return std::log(static_cast<double>(k));
      },
      "fit_power_rate");
  fit.regime = RateRegime::Power;
  fit.fitted_exponent = fit.slope;
  return fit;
}

/// The better of the two fits by r^2.
inline RateFit select_rate_model(const Trajectory& traj, const Vector& x_star,
                                 std::optional<FitWindow> window = std::nullopt) {
  const RateFit lin = fit_linear_rate(traj, x_star, window);
  const RateFit pow = fit_power_rate(traj, x_star, window);
  return pow.r_squared > lin.r_squared ? pow : lin;
}

// Power-law exponent of |x_k - x*| predicted for Lojasiewicz exponent a in (1/2, 1).
inline double predicted_power_exponent(double a) { return -(1.0 - a) / (2.0 * a - 1.0); }

// ---------------------------------------------------------------------------
// Lojasiewicz certificates and the path-length bound

struct LojasiewiczCertificate {
  Vector x_star;
  double f_star = 0.0;
  double a = 0.5;
  double m = 0.0;
  double epsilon = std::numeric_limits<double>::infinity();
  double neighborhood_radius = 0.0;
  std::size_t samples = 0;
  std::size_t considered = 0;  // samples with f* < f(x) < f* + epsilon
  std::size_t violations = 0;

  bool ok() const { return violations == 0; }
};

// Relative slack on the comparison so that exact equality cases (such as a
// quadratic along its flattest axis) do not register roundoff as violations.
inline constexpr double kLojasiewiczRelativeSlack = 1e-12;

/// Samples the punctured ball of the given radius around x* and counts points
/// with f* < f(x) < f* + epsilon where |grad f(x)| < m |f(x) - f*|^a.
template <Objective F>
LojasiewiczCertificate check_lojasiewicz(const F& f, const Vector& x_star, double a, double m, double radius,
                                         std::size_t n_samples, std::uint64_t seed,
                                         double epsilon = std::numeric_limits<double>::infinity()) {
  require_dimension(x_star, f.dimension(), "check_lojasiewicz");
  if (!(a >= 0.0 && a < 1.0)) throw ContractViolation("check_lojasiewicz: exponent a must lie in [0, 1)");
  if (!(m >= 0.0)) throw ContractViolation("check_lojasiewicz: m must be non-negative");
  if (!(radius > 0.0)) throw ContractViolation("check_lojasiewicz: radius must be positive");

  LojasiewiczCertificate cert;
  cert.x_star = x_star;
  cert.f_star = f.value(x_star);
  cert.a = a;
  cert.m = m;
  cert.epsilon = epsilon;
  cert.neighborhood_radius = radius;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = uniform_in_ball(rng, x_star, radius);
    ++cert.samples;
    if (x == x_star) continue;
    const double gap = f.value(x) - cert.f_star;
    if (!(gap > 0.0 && gap < epsilon)) continue;
    ++cert.considered;
    const double lhs = f.gradient(x).norm();
    const double rhs = m * std::pow(gap, a);
    if (lhs < rhs * (1.0 - kLojasiewiczRelativeSlack)) ++cert.violations;
  }
  return cert;
}

struct PathLengthReport {
  std::size_t tail_begin = 0;
  std::vector<double> tail_sums;  // e_k for k >= tail_begin
  double max_ratio = 0.0;
  bool tail_sums_monotone = true;
  bool success = false;
};

inline constexpr double kPathLengthSlack = 1e-6;

/// Compares the empirical tail sums e_k = sum_{j>=k} |x_{j+1} - x_j| against
/// 2 (f(x_k) - f*)^{1-a} / (alpha m (1 - a)) on the part of the trajectory
/// that stays inside the certified neighbourhood.
inline PathLengthReport path_length_check(const Trajectory& traj, const LojasiewiczCertificate& cert,
                                          double alpha) {
  if (traj.iterates.empty()) throw Inapplicable("path_length_check: empty trajectory");
  if (traj.stop_reason != StopReason::GradNormBelowTol) {
    throw Inapplicable("path_length_check: trajectory did not converge");
  }
  if (!cert.ok()) throw Inapplicable("path_length_check: certificate has violations");
  if (!(cert.m > 0.0)) throw Inapplicable("path_length_check: certificate needs m > 0");

  const std::size_t n = traj.iterates.size();
  std::size_t tail = n;
  while (tail > 0 && (traj.iterates[tail - 1] - cert.x_star).norm() <= cert.neighborhood_radius) --tail;
  if (tail == n) throw Inapplicable("path_length_check: trajectory tail is outside the certified neighbourhood");

  PathLengthReport rep;
  rep.tail_begin = tail;
  std::vector<double> e(n, 0.0);
  for (std::size_t k = n - 1; k-- > 0;) e[k] = e[k + 1] + (traj.iterates[k + 1] - traj.iterates[k]).norm();
  const double scale = 2.0 / (alpha * cert.m * (1.0 - cert.a));
  for (std::size_t k = tail; k < n; ++k) {
    rep.tail_sums.push_back(e[k]);
    if (k > tail && e[k] > e[k - 1]) rep.tail_sums_monotone = false;
    const double gap = traj.f_values[k] - cert.f_star;
    if (e[k] == 0.0) continue;
    const double ratio = gap > 0.0 ? e[k] / (scale * std::pow(gap, 1.0 - cert.a))
                                   : std::numeric_limits<double>::infinity();
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  rep.success = rep.max_ratio <= 1.0 + kPathLengthSlack;
  return rep;
}

}  // namespace saddle
