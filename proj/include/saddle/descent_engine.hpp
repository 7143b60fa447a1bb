#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "saddle/errors.hpp"
#include "saddle/function_zoo.hpp"
#include "saddle/linalg.hpp"

namespace saddle {

enum class StopReason { GradNormBelowTol, Diverged, MaxIters, LeftDomainBox };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::GradNormBelowTol: return "GradNormBelowTol";
    case StopReason::Diverged: return "Diverged";
    case StopReason::MaxIters: return "MaxIters";
    case StopReason::LeftDomainBox: return "LeftDomainBox";
  }
  return "?";
}

struct StopPolicy {
  double tol = 1e-10;                // on the gradient norm
  double divergence_radius = 1e6;    // on the iterate norm
  std::size_t max_iters = 100000;    // steps taken
};

inline constexpr double kDefaultTheta = 0.99;

/// The gradient map x -> x - alpha * grad f(x) for a fixed objective and step.
/// Construction requires 0 < alpha and alpha * L < 1, where L is certified on
/// the objective's domain box.
template <Objective F>
class GradientMap {
 public:
  GradientMap(F objective, double alpha) : objective_(std::move(objective)), alpha_(alpha) {
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
      throw ContractViolation("GradientMap: step size must be positive and finite");
    }
    if (!(alpha_ * objective_.lipschitz_bound() < 1.0)) {
      throw ContractViolation("GradientMap: step size " + std::to_string(alpha_) +
                              " violates alpha * L < 1 (L = " +
                              std::to_string(objective_.lipschitz_bound()) + ")");
    }
  }

  // Skips the step-size check. Only for validation code that needs alpha = 0
  // or other out-of-regime maps.
  static GradientMap unchecked(F objective, double alpha) {
    return GradientMap(std::move(objective), alpha, Unchecked{});
  }

  const F& objective() const { return objective_; }
  double alpha() const { return alpha_; }
  // 1 - alpha L: lower bound on the singular values of the Jacobian on the box.
  double contraction_margin() const { return 1.0 - alpha_ * objective_.lipschitz_bound(); }

  Vector operator()(const Vector& x) const { return x - alpha_ * objective_.gradient(x); }

  Matrix jacobian(const Vector& x) const {
    const auto n = static_cast<Eigen::Index>(objective_.dimension());
    return Matrix::Identity(n, n) - alpha_ * objective_.hessian(x);
  }

 private:
  struct Unchecked {};
  GradientMap(F objective, double alpha, Unchecked) : objective_(std::move(objective)), alpha_(alpha) {}

  F objective_;
  double alpha_;
};

/// alpha = theta / L.
template <Objective F>
double alpha_from_theta(const F& f, double theta = kDefaultTheta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ContractViolation("theta must lie in (0, 1)");
  const double lip = f.lipschitz_bound();
  if (!(lip > 0.0)) throw ContractViolation("theta/L step needs a positive Lipschitz bound");
  return theta / lip;
}

template <Objective F>
Vector step(const GradientMap<F>& map, const Vector& x) {
  require_dimension(x, map.objective().dimension(), "step");
  return map(x);
}

template <Objective F>
Matrix jacobian(const GradientMap<F>& map, const Vector& x) {
  require_dimension(x, map.objective().dimension(), "jacobian");
  return map.jacobian(x);
}

struct Trajectory {
  std::vector<Vector> iterates;
  std::vector<double> f_values;
  std::vector<double> grad_norms;
  StopReason stop_reason = StopReason::MaxIters;
  double alpha = 0.0;

  std::size_t steps() const { return iterates.empty() ? 0 : iterates.size() - 1; }
  const Vector& final_iterate() const { return iterates.back(); }
  double final_grad_norm() const { return grad_norms.back(); }
};

/// Iterates the gradient map from x0, keeping every iterate. Stop checks run
/// on each iterate in order: gradient tolerance, divergence radius, domain box
/// exit, iteration budget.
template <Objective F>
Trajectory run(const GradientMap<F>& map, const Vector& x0, const StopPolicy& policy = {}) {
  const F& f = map.objective();
  require_dimension(x0, f.dimension(), "run");
  const Box box = f.domain_box();
  if (!box.contains(x0)) throw ContractViolation("run: x0 lies outside the domain box");

  Trajectory traj;
  traj.alpha = map.alpha();
  Vector x = x0;
  for (std::size_t k = 0;; ++k) {
    const double fx = f.value(x);
    Vector grad = f.gradient(x);
    if (!std::isfinite(fx) || !grad.allFinite() || !x.allFinite()) {
      throw NumericalFailure("run: non-finite value or gradient", k);
    }
    const double gnorm = grad.norm();
    traj.iterates.push_back(x);
    traj.f_values.push_back(fx);
    traj.grad_norms.push_back(gnorm);

    if (gnorm <= policy.tol) {
      traj.stop_reason = StopReason::GradNormBelowTol;
      break;
    }
    if (x.norm() >= policy.divergence_radius) {
      traj.stop_reason = StopReason::Diverged;
      break;
    }
    if (!box.contains(x)) {
      traj.stop_reason = StopReason::LeftDomainBox;
      break;
    }
    if (k == policy.max_iters) {
      traj.stop_reason = StopReason::MaxIters;
      break;
    }
    x -= map.alpha() * grad;
  }
  return traj;
}

/// Exact k-th gradient-descent iterate on f(x) = 1/2 sum_i lambda_i x_i^2:
/// x_k = sum_i (1 - alpha lambda_i)^k <e_i, x0> e_i.
inline Vector closed_form_quadratic(const Vector& lambda, double alpha, const Vector& x0, std::size_t k) {
  if (lambda.size() != x0.size()) throw ContractViolation("closed_form_quadratic: length mismatch");
  Vector out(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    out[i] = std::pow(1.0 - alpha * lambda[i], static_cast<double>(k)) * x0[i];
  }
  return out;
}

struct DescentCheck {
  std::size_t checked_steps = 0;
  std::size_t violations = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
};

/// Checks f(x_{k+1}) <= f(x_k) - alpha (1 - alpha L / 2) |grad f(x_k)|^2 + slack
/// on every step whose endpoints both lie in the domain box.
template <Objective F>
DescentCheck check_descent(const F& f, const Trajectory& traj, double slack = 1e-12) {
  DescentCheck out;
  const Box box = f.domain_box();
  const double lip = f.lipschitz_bound();
  const double alpha = traj.alpha;
  const double coeff = alpha * (1.0 - 0.5 * alpha * lip);
  for (std::size_t k = 0; k + 1 < traj.iterates.size(); ++k) {
    if (!box.contains(traj.iterates[k]) || !box.contains(traj.iterates[k + 1])) continue;
    ++out.checked_steps;
    const double g = traj.grad_norms[k];
    const double excess = traj.f_values[k + 1] - (traj.f_values[k] - coeff * g * g);
    out.worst_excess = std::max(out.worst_excess, excess);
    if (excess > slack) ++out.violations;
  }
  return out;
}

}  // namespace saddle
