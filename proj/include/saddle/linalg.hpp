#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "saddle/errors.hpp"

namespace saddle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void require_dimension(const Vector& x, std::size_t expected, const char* who) {
  if (static_cast<std::size_t>(x.size()) != expected) {
    throw ContractViolation(std::string(who) + ": expected vector of length " +
                            std::to_string(expected) + ", got " + std::to_string(x.size()));
  }
}

inline bool all_finite(const Vector& x) { return x.allFinite(); }

/// Axis-aligned closed box. Sides may be infinite, which means the
/// corresponding coordinate is unrestricted.
class Box {
 public:
  Box() = default;
  Box(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) {
      throw ContractViolation("Box: lower and upper bounds differ in length");
    }
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
      if (std::isnan(lower_[i]) || std::isnan(upper_[i]) || lower_[i] > upper_[i]) {
        throw ContractViolation("Box: invalid interval at coordinate " + std::to_string(i));
      }
    }
  }

  static Box cube(std::size_t dim, double lo, double hi) {
    return Box(Vector::Constant(static_cast<Eigen::Index>(dim), lo),
               Vector::Constant(static_cast<Eigen::Index>(dim), hi));
  }

  static Box unbounded(std::size_t dim) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return cube(dim, -inf, inf);
  }

  std::size_t dimension() const { return static_cast<std::size_t>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool contains(const Vector& x) const {
    if (x.size() != lower_.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
    }
    return true;
  }

  bool contains(const Box& other) const {
    if (other.dimension() != dimension()) return false;
    return (other.lower_.array() >= lower_.array()).all() &&
           (other.upper_.array() <= upper_.array()).all();
  }

  bool bounded() const { return lower_.allFinite() && upper_.allFinite(); }

  // Infinite sides replaced by +-cap.
  Box clipped(double cap) const {
    return Box(lower_.cwiseMax(-cap), upper_.cwiseMin(cap));
  }

  // Largest |coordinate| reachable in the box, per coordinate.
  Vector abs_reach() const { return lower_.cwiseAbs().cwiseMax(upper_.cwiseAbs()); }

  friend bool operator==(const Box& a, const Box& b) {
    return a.lower_.size() == b.lower_.size() && a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  Vector lower_;
  Vector upper_;
};

/// Half-width used when a box with infinite sides must be sampled.
inline constexpr double kUnboundedSamplingHalfWidth = 10.0;

inline Box sampling_box(const Box& box) { return box.clipped(kUnboundedSamplingHalfWidth); }

/// Eigendecomposition of a real symmetric matrix.
/// Eigenvalues ascend; eigenvectors are the matching orthonormal columns.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
  int sweeps = 0;
  double off_diagonal_norm = 0.0;
};

inline double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

// Cyclic Jacobi rotations. Stops when the off-diagonal Frobenius norm is
// at most `tolerance`, when a sweep applies no rotation, or after max_sweeps.
inline SymmetricEigen jacobi_eigen(const Matrix& input, double tolerance = 1e-13,
                                   int max_sweeps = 100) {
  if (input.rows() != input.cols()) {
    throw ContractViolation("jacobi_eigen: matrix is not square");
  }
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);

  SymmetricEigen out;
  for (; out.sweeps < max_sweeps; ++out.sweeps) {
    if (off_diagonal_norm(a) <= tolerance) break;
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        if (s == 0.0) continue;
        rotated = true;
        // A <- J^T A J with J the (p, q) rotation.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    if (!rotated) break;
  }
  out.off_diagonal_norm = off_diagonal_norm(a);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace saddle
