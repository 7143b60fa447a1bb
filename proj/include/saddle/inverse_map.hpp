#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "saddle/descent_engine.hpp"
#include "saddle/errors.hpp"
#include "saddle/linalg.hpp"
#include "saddle/random.hpp"

namespace saddle {

struct ProxSolveReport {
  Vector solution;
  double residual = 0.0;  // |g(solution) - y|
  std::size_t inner_iterations = 0;
  double subproblem_modulus = 0.0;  // 1 - alpha L
  std::size_t newton_steps = 0;
  std::size_t gradient_steps = 0;
};

struct InvertOptions {
  std::size_t max_iterations = 200;
  // Start of the inner solve; defaults to y.
  std::optional<Vector> start;
};

/// Preimage of y under the gradient map, computed as the minimiser of the
/// proximal objective phi(x) = 1/2 |x - y|^2 - alpha f(x).
///
/// grad phi(x) = g(x) - y, so the inner stopping rule
/// |grad phi| <= tol (1 - alpha L) certifies the residual and, through the
/// strong-convexity modulus, |x - g^{-1}(y)| <= tol on the certified box.
/// Damped Newton with a residual-decrease line search; when the Newton
/// system is not positive definite or the search fails, a gradient step of
/// length 1 / (1 + alpha L) is taken instead.
template <Objective F>
ProxSolveReport invert(const GradientMap<F>& map, const Vector& y, double tol,
                       const InvertOptions& options = {}) {
  const F& f = map.objective();
  require_dimension(y, f.dimension(), "invert");
  if (!y.allFinite()) throw ContractViolation("invert: y must be finite");
  if (!(tol > 0.0)) throw ContractViolation("invert: tolerance must be positive");

  const double alpha = map.alpha();
  const double lip = f.lipschitz_bound();
  const double modulus = 1.0 - alpha * lip;
  const double stop = tol * modulus;
  const double gradient_step = 1.0 / (1.0 + alpha * lip);
  const auto n = static_cast<Eigen::Index>(f.dimension());

  ProxSolveReport rep;
  rep.subproblem_modulus = modulus;
  Vector x = options.start ? *options.start : y;
  require_dimension(x, f.dimension(), "invert start");
  Vector r = map(x) - y;
  double rnorm = r.norm();
  Vector best = x;
  double best_norm = rnorm;

  for (;;) {
    if (rnorm <= stop) {
      rep.solution = x;
      rep.residual = rnorm;
      return rep;
    }
    if (rep.inner_iterations == options.max_iterations) break;
    ++rep.inner_iterations;

    bool accepted = false;
    const Matrix h = Matrix::Identity(n, n) - alpha * f.hessian(x);
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() == Eigen::Success) {
      const Vector d = -llt.solve(r);
      for (double t = 1.0; t > 1e-10; t *= 0.5) {
        Vector xn = x + t * d;
        Vector rn = map(xn) - y;
        const double nn = rn.norm();
        if (std::isfinite(nn) && nn <= (1.0 - 1e-4 * t) * rnorm) {
          x = std::move(xn);
          r = std::move(rn);
          rnorm = nn;
          accepted = true;
          ++rep.newton_steps;
          break;
        }
      }
    }
    if (!accepted) {
      x -= gradient_step * r;
      r = map(x) - y;
      rnorm = r.norm();
      ++rep.gradient_steps;
      if (!std::isfinite(rnorm)) break;
    }
    if (rnorm < best_norm) {
      best = x;
      best_norm = rnorm;
    }
  }
  throw NonConvergence("invert: inner solver exhausted its budget", best_norm);
}

struct InjectivityReport {
  std::size_t pairs_checked = 0;
  std::size_t pairs_skipped = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double bound = 0.0;  // 1 - alpha L
  std::size_t violations = 0;
};

inline constexpr double kInjectivitySlack = 1e-9;

/// Checks |g(x) - g(y)| >= (1 - alpha L) |x - y| on the given pairs.
/// Pairs with x == y are skipped.
template <Objective F>
InjectivityReport injectivity_margin(const GradientMap<F>& map,
                                     const std::vector<std::pair<Vector, Vector>>& pairs) {
  InjectivityReport rep;
  rep.bound = map.contraction_margin();
  for (const auto& [x, y] : pairs) {
    const double dx = (x - y).norm();
    if (dx == 0.0) {
      ++rep.pairs_skipped;
      continue;
    }
    const double ratio = (map(x) - map(y)).norm() / dx;
    ++rep.pairs_checked;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    if (ratio < rep.bound - kInjectivitySlack) ++rep.violations;
  }
  return rep;
}

// Random pairs drawn uniformly from the (sampling) domain box.
template <Objective F>
InjectivityReport injectivity_margin_check(const GradientMap<F>& map, std::size_t n_pairs,
                                           std::uint64_t seed) {
  if (n_pairs < 1) throw ContractViolation("injectivity_margin_check: n_pairs must be >= 1");
  const Box box = sampling_box(map.objective().domain_box());
  SplitMix64 rng(seed);
  std::vector<std::pair<Vector, Vector>> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    Vector a = uniform_in_box(rng, box);
    Vector b = uniform_in_box(rng, box);
    pairs.emplace_back(std::move(a), std::move(b));
  }
  return injectivity_margin(map, pairs);
}

struct RoundtripReport {
  std::size_t samples = 0;
  double max_forward_residual = 0.0;   // max |g(invert(y)) - y|
  double max_backward_residual = 0.0;  // max |invert(g(x)) - x|
  std::size_t max_inner_iterations = 0;

  double max_residual() const { return std::max(max_forward_residual, max_backward_residual); }
};

/// Samples x in the domain box, maps y = g(x), and inverts y again.
template <Objective F>
RoundtripReport roundtrip_check(const GradientMap<F>& map, std::size_t n_samples, std::uint64_t seed,
                                double tol) {
  const Box box = sampling_box(map.objective().domain_box());
  SplitMix64 rng(seed);
  RoundtripReport rep;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = uniform_in_box(rng, box);
    const Vector y = map(x);
    const ProxSolveReport inv = invert(map, y, tol);
    rep.max_forward_residual = std::max(rep.max_forward_residual, (map(inv.solution) - y).norm());
    rep.max_backward_residual = std::max(rep.max_backward_residual, (inv.solution - x).norm());
    rep.max_inner_iterations = std::max(rep.max_inner_iterations, inv.inner_iterations);
    ++rep.samples;
  }
  return rep;
}

}  // namespace saddle
