#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "saddle/errors.hpp"
#include "saddle/linalg.hpp"

namespace saddle {

enum class CriticalClass { LocalMin, LocalMax, StrictSaddle, Degenerate };

inline std::string_view to_string(CriticalClass c) {
  switch (c) {
    case CriticalClass::LocalMin: return "LocalMin";
    case CriticalClass::LocalMax: return "LocalMax";
    case CriticalClass::StrictSaddle: return "StrictSaddle";
    case CriticalClass::Degenerate: return "Degenerate";
  }
  return "?";
}

struct KnownCriticalPoint {
  Vector location;
  CriticalClass expected_class;
};

/// A twice-differentiable test function with analytic derivatives.
///
/// `lipschitz_bound()` is a bound on the gradient's Lipschitz constant that
/// holds on `domain_box()`; outside the box nothing is promised.
template <typename T>
concept Objective = requires(const T& f, const Vector& x) {
  { f.dimension() } -> std::convertible_to<std::size_t>;
  { f.name() } -> std::convertible_to<std::string>;
  { f.params() } -> std::convertible_to<std::vector<double>>;
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vector>;
  { f.hessian(x) } -> std::convertible_to<Matrix>;
  { f.lipschitz_bound() } -> std::convertible_to<double>;
  { f.domain_box() } -> std::convertible_to<Box>;
  { f.known_critical_points() } -> std::convertible_to<std::vector<KnownCriticalPoint>>;
};

namespace detail {

inline CriticalClass class_from_spectrum(const Vector& eig) {
  if (eig.size() == 0) return CriticalClass::Degenerate;
  if ((eig.array() == 0.0).any()) return CriticalClass::Degenerate;
  if ((eig.array() > 0.0).all()) return CriticalClass::LocalMin;
  if ((eig.array() < 0.0).all()) return CriticalClass::LocalMax;
  return CriticalClass::StrictSaddle;
}

}  // namespace detail

/// f(x) = 1/2 sum_i lambda_i x_i^2. The gradient is globally Lipschitz with
/// constant max |lambda_i|, so the certified box is all of R^d.
class DiagonalQuadratic {
 public:
  explicit DiagonalQuadratic(Vector eigenvalues)
      : lambda_(std::move(eigenvalues)), box_(Box::unbounded(static_cast<std::size_t>(lambda_.size()))) {
    if (lambda_.size() == 0) throw ContractViolation("diagonal_quadratic: needs at least one eigenvalue");
    if (!lambda_.allFinite()) throw ContractViolation("diagonal_quadratic: eigenvalues must be finite");
  }
  DiagonalQuadratic(std::initializer_list<double> eigenvalues)
      : DiagonalQuadratic(Eigen::Map<const Vector>(eigenvalues.begin(),
                                                   static_cast<Eigen::Index>(eigenvalues.size()))) {}

  std::size_t dimension() const { return static_cast<std::size_t>(lambda_.size()); }
  std::string name() const { return "diagonal_quadratic"; }
  std::vector<double> params() const { return {lambda_.data(), lambda_.data() + lambda_.size()}; }
  const Vector& eigenvalues() const { return lambda_; }

  double value(const Vector& x) const {
    require_dimension(x, dimension(), "diagonal_quadratic");
    return 0.5 * (lambda_.array() * x.array().square()).sum();
  }
  Vector gradient(const Vector& x) const {
    require_dimension(x, dimension(), "diagonal_quadratic");
    return lambda_.cwiseProduct(x);
  }
  Matrix hessian(const Vector& x) const {
    require_dimension(x, dimension(), "diagonal_quadratic");
    return lambda_.asDiagonal();
  }
  double lipschitz_bound() const { return lambda_.cwiseAbs().maxCoeff(); }
  const Box& domain_box() const { return box_; }

  std::vector<KnownCriticalPoint> known_critical_points() const {
    return {{Vector::Zero(lambda_.size()), detail::class_from_spectrum(lambda_)}};
  }

 private:
  Vector lambda_;
  Box box_;
};

/// Diagonal quadratic with every eigenvalue strictly positive.
class StronglyConvexQuadratic {
 public:
  explicit StronglyConvexQuadratic(Vector eigenvalues) : quad_(std::move(eigenvalues)) {
    if ((quad_.eigenvalues().array() <= 0.0).any()) {
      throw ContractViolation("strongly_convex_quadratic: eigenvalues must be positive");
    }
  }
  StronglyConvexQuadratic(std::initializer_list<double> eigenvalues)
      : StronglyConvexQuadratic(Eigen::Map<const Vector>(
            eigenvalues.begin(), static_cast<Eigen::Index>(eigenvalues.size()))) {}

  std::size_t dimension() const { return quad_.dimension(); }
  std::string name() const { return "strongly_convex_quadratic"; }
  std::vector<double> params() const { return quad_.params(); }
  const Vector& eigenvalues() const { return quad_.eigenvalues(); }
  double strong_convexity() const { return quad_.eigenvalues().minCoeff(); }

  double value(const Vector& x) const { return quad_.value(x); }
  Vector gradient(const Vector& x) const { return quad_.gradient(x); }
  Matrix hessian(const Vector& x) const { return quad_.hessian(x); }
  double lipschitz_bound() const { return quad_.lipschitz_bound(); }
  const Box& domain_box() const { return quad_.domain_box(); }
  std::vector<KnownCriticalPoint> known_critical_points() const {
    return quad_.known_critical_points();
  }

 private:
  DiagonalQuadratic quad_;
};

/// f(x, y) = x^2/2 + y^4/4 - y^2/2: a strict saddle at the origin and minima
/// at (0, +-1). The quartic term makes the gradient non-Lipschitz globally,
/// so the bound is certified on the square [-h, h]^2 only.
class NesterovExample {
 public:
  explicit NesterovExample(double half_width = 2.0)
      : half_width_(half_width), box_(Box::cube(2, -half_width, half_width)) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw ContractViolation("nesterov_example: half width must be positive and finite");
    }
  }

  std::size_t dimension() const { return 2; }
  std::string name() const { return "nesterov_example"; }
  std::vector<double> params() const { return {half_width_}; }

  double value(const Vector& p) const {
    require_dimension(p, 2, "nesterov_example");
    const double x = p[0], y = p[1];
    return 0.5 * x * x + 0.25 * y * y * y * y - 0.5 * y * y;
  }
  Vector gradient(const Vector& p) const {
    require_dimension(p, 2, "nesterov_example");
    const double y = p[1];
    return Vector{{p[0], y * y * y - y}};
  }
  Matrix hessian(const Vector& p) const {
    require_dimension(p, 2, "nesterov_example");
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 3.0 * p[1] * p[1] - 1.0;
    return h;
  }
  // sup over the box of max(1, |3y^2 - 1|); the y-range is symmetric and contains 0.
  double lipschitz_bound() const {
    return std::max(1.0, std::abs(3.0 * half_width_ * half_width_ - 1.0));
  }
  const Box& domain_box() const { return box_; }

  std::vector<KnownCriticalPoint> known_critical_points() const {
    return {{Vector{{0.0, 0.0}}, CriticalClass::StrictSaddle},
            {Vector{{0.0, -1.0}}, CriticalClass::LocalMin},
            {Vector{{0.0, 1.0}}, CriticalClass::LocalMin}};
  }

 private:
  double half_width_;
  Box box_;
};

/// f(x) = sum_ij q_ij x_i^2 x_j^2. The Hessian vanishes at the origin for
/// every Q, so the origin is always a degenerate critical point.
class QuarticCopositive {
 public:
  explicit QuarticCopositive(Matrix q, double half_width = 1.0)
      : q_(std::move(q)), half_width_(half_width) {
    if (q_.rows() == 0 || q_.rows() != q_.cols()) {
      throw ContractViolation("quartic_copositive: Q must be square and non-empty");
    }
    if (!q_.allFinite()) throw ContractViolation("quartic_copositive: Q must be finite");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw ContractViolation("quartic_copositive: half width must be positive and finite");
    }
    sym_ = q_ + q_.transpose();
    box_ = Box::cube(dimension(), -half_width_, half_width_);
  }

  std::size_t dimension() const { return static_cast<std::size_t>(q_.rows()); }
  std::string name() const { return "quartic_copositive"; }
  // Row-major Q entries.
  std::vector<double> params() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(q_.size()));
    for (Eigen::Index i = 0; i < q_.rows(); ++i)
      for (Eigen::Index j = 0; j < q_.cols(); ++j) out.push_back(q_(i, j));
    return out;
  }
  const Matrix& q() const { return q_; }
  double half_width() const { return half_width_; }

  double value(const Vector& x) const {
    require_dimension(x, dimension(), "quartic_copositive");
    const Vector sq = x.array().square();
    return sq.dot(q_ * sq);
  }
  // d f / d x_k = 2 x_k (S x^2)_k with S = Q + Q^T.
  Vector gradient(const Vector& x) const {
    require_dimension(x, dimension(), "quartic_copositive");
    const Vector sq = x.array().square();
    return 2.0 * x.cwiseProduct(sym_ * sq);
  }
  // H = 2 diag(S x^2) + 4 diag(x) S diag(x).
  Matrix hessian(const Vector& x) const {
    require_dimension(x, dimension(), "quartic_copositive");
    const Vector sq = x.array().square();
    Matrix h = 4.0 * x.asDiagonal() * sym_ * x.asDiagonal();
    h.diagonal() += 2.0 * (sym_ * sq);
    return h;
  }
  // Max absolute row sum of the Hessian, maximised term by term over the box.
  // Exact for d = 1 and for diagonal Q.
  double lipschitz_bound() const {
    const Vector r = box_.abs_reach();
    const Matrix abs_s = sym_.cwiseAbs();
    const Vector first = 2.0 * (abs_s * r.cwiseAbs2());
    const Vector second = 4.0 * r.cwiseProduct(abs_s * r);
    return (first + second).maxCoeff();
  }
  const Box& domain_box() const { return box_; }

  std::vector<KnownCriticalPoint> known_critical_points() const {
    return {{Vector::Zero(q_.rows()), CriticalClass::Degenerate}};
  }

 private:
  Matrix q_;
  Matrix sym_;
  double half_width_;
  Box box_;
};

// Free-function forms of the objective operations.
template <Objective F>
double value(const F& f, const Vector& x) { return f.value(x); }
template <Objective F>
Vector gradient(const F& f, const Vector& x) { return f.gradient(x); }
template <Objective F>
Matrix hessian(const F& f, const Vector& x) { return f.hessian(x); }
template <Objective F>
double lipschitz_bound(const F& f) { return f.lipschitz_bound(); }
template <Objective F>
std::vector<KnownCriticalPoint> known_critical_points(const F& f) { return f.known_critical_points(); }

static_assert(Objective<DiagonalQuadratic>);
static_assert(Objective<StronglyConvexQuadratic>);
static_assert(Objective<NesterovExample>);
static_assert(Objective<QuarticCopositive>);

}  // namespace saddle
