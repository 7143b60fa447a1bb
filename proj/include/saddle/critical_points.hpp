#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "saddle/descent_engine.hpp"
#include "saddle/errors.hpp"
#include "saddle/function_zoo.hpp"
#include "saddle/linalg.hpp"
#include "saddle/random.hpp"

namespace saddle {

struct ClassifyOptions {
  double grad_tol = 1e-8;
  double degeneracy_tol = 1e-8;
};

struct CriticalPointRecord {
  Vector location;
  double grad_norm = 0.0;
  Vector hessian_eigenvalues;   // ascending
  Matrix hessian_eigenvectors;  // orthonormal columns
  CriticalClass classification = CriticalClass::Degenerate;
  // lambda_min < -tol. Also set for LocalMax.
  bool strict_saddle = false;
  // Some |lambda| <= tol: the spectrum alone cannot decide whether these
  // directions attract.
  bool has_center_directions = false;
  Matrix stable_subspace_basis;  // columns span E_s
  std::size_t stable_dimension = 0;
  double degeneracy_tol = 0.0;
};

/// Classification from a sorted spectrum.
///   LocalMax: every eigenvalue < -tol
///   StrictSaddle: some eigenvalue < -tol, not LocalMax
///   LocalMin: every eigenvalue > tol
///   Degenerate: no eigenvalue < -tol and some |eigenvalue| <= tol
inline CriticalClass classify_spectrum(const Vector& ascending, double tol) {
  const double lo = ascending.minCoeff();
  const double hi = ascending.maxCoeff();
  if (hi < -tol) return CriticalClass::LocalMax;
  if (lo < -tol) return CriticalClass::StrictSaddle;
  if (lo > tol) return CriticalClass::LocalMin;
  return CriticalClass::Degenerate;
}

template <Objective F>
CriticalPointRecord classify(const F& f, const Vector& x, const ClassifyOptions& opts = {}) {
  require_dimension(x, f.dimension(), "classify");
  CriticalPointRecord rec;
  rec.location = x;
  rec.grad_norm = f.gradient(x).norm();
  if (!(rec.grad_norm <= opts.grad_tol)) {
    throw ContractViolation("classify: gradient norm " + std::to_string(rec.grad_norm) +
                            " exceeds tolerance; not a critical point");
  }
  const SymmetricEigen eig = jacobi_eigen(f.hessian(x));
  rec.hessian_eigenvalues = eig.values;
  rec.hessian_eigenvectors = eig.vectors;
  rec.degeneracy_tol = opts.degeneracy_tol;
  rec.classification = classify_spectrum(eig.values, opts.degeneracy_tol);
  rec.strict_saddle = eig.values.minCoeff() < -opts.degeneracy_tol;
  rec.has_center_directions = (eig.values.array().abs() <= opts.degeneracy_tol).any();

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] >= -opts.degeneracy_tol) keep.push_back(i);
  }
  rec.stable_dimension = keep.size();
  rec.stable_subspace_basis.resize(eig.values.size(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    rec.stable_subspace_basis.col(static_cast<Eigen::Index>(c)) = eig.vectors.col(keep[c]);
  }
  return rec;
}

struct StableSubspace {
  Matrix basis;             // orthonormal columns
  Vector jacobian_eigenvalues;  // all eigenvalues of Dg(x*), ascending
  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
};

/// Span of the eigenvectors of Dg(x*) = I - alpha H(x*) whose eigenvalue is
/// at most 1 (thickened by alpha * degeneracy_tol).
template <Objective F>
StableSubspace stable_subspace(const GradientMap<F>& map, const CriticalPointRecord& record) {
  const SymmetricEigen eig = jacobi_eigen(map.jacobian(record.location));
  const double cut = 1.0 + map.alpha() * record.degeneracy_tol;
  StableSubspace out;
  out.jacobian_eigenvalues = eig.values;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] <= cut) keep.push_back(i);
  }
  out.basis.resize(eig.values.size(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.basis.col(static_cast<Eigen::Index>(c)) = eig.vectors.col(keep[c]);
  }
  return out;
}

// Distance from p to the affine subspace anchor + span(basis columns).
inline double distance_to_affine_subspace(const Vector& p, const Vector& anchor, const Matrix& basis) {
  const Vector d = p - anchor;
  if (basis.cols() == 0) return d.norm();
  return (d - basis * (basis.transpose() * d)).norm();
}

struct CriticalPointSearchOptions {
  std::size_t max_newton_iters = 200;
  double dedup_radius = 1e-6;  // infinity norm
  ClassifyOptions classify{};
};

struct CriticalPointSearch {
  std::vector<CriticalPointRecord> records;  // sorted lexicographically by location
  std::size_t seeds = 0;
  std::size_t dropped = 0;  // starts that did not converge inside the domain box
};

namespace detail {

// Newton on grad f = 0 with a minimum-norm step for singular Hessians. Keeps
// polishing after the tolerance is met until the step stalls, so roots at
// degenerate points are pinned well inside the deduplication radius.
template <Objective F>
std::optional<Vector> newton_root(const F& f, Vector x, double tol, std::size_t max_iters) {
  for (std::size_t it = 0; it < max_iters; ++it) {
    const Vector g = f.gradient(x);
    if (!g.allFinite()) return std::nullopt;
    const Vector dx = f.hessian(x).completeOrthogonalDecomposition().solve(g);
    if (!dx.allFinite()) return std::nullopt;
    const double gn = g.norm();
    if (gn <= tol && dx.norm() <= 1e-14 * std::max(1.0, x.norm())) break;
    if (gn == 0.0) break;
    x -= dx;
  }
  if (!(f.gradient(x).norm() <= tol)) return std::nullopt;
  return x;
}

// Lexicographic order that treats coordinates within `tie` as equal.
inline bool lex_less(const Vector& a, const Vector& b, double tie) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tie) return a[i] < b[i];
  }
  return false;
}

}  // namespace detail

/// Multistart Newton on grad f = 0 from seeds uniform in the domain box.
/// Roots closer than dedup_radius (infinity norm) are merged, keeping the
/// one with the smaller gradient norm.
template <Objective F>
CriticalPointSearch find_critical_points(const F& f, std::size_t n_seeds, std::uint64_t seed,
                                         double tol = 1e-10,
                                         const CriticalPointSearchOptions& opts = {}) {
  if (n_seeds < 1) throw ContractViolation("find_critical_points: n_seeds must be >= 1");
  const Box domain = f.domain_box();
  const Box box = sampling_box(domain);
  SplitMix64 rng(seed);

  CriticalPointSearch out;
  out.seeds = n_seeds;
  std::vector<std::pair<Vector, double>> roots;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    const Vector x0 = uniform_in_box(rng, box);
    const auto root = detail::newton_root(f, x0, tol, opts.max_newton_iters);
    if (!root || !domain.contains(*root)) {
      ++out.dropped;
      continue;
    }
    const double gn = f.gradient(*root).norm();
    bool merged = false;
    for (auto& [loc, g] : roots) {
      if ((loc - *root).template lpNorm<Eigen::Infinity>() <= opts.dedup_radius) {
        if (gn < g) {
          loc = *root;
          g = gn;
        }
        merged = true;
        break;
      }
    }
    if (!merged) roots.emplace_back(*root, gn);
  }
  std::sort(roots.begin(), roots.end(),
            [&](const auto& a, const auto& b) { return detail::lex_less(a.first, b.first, opts.dedup_radius); });
  ClassifyOptions copts = opts.classify;
  copts.grad_tol = std::max(copts.grad_tol, tol);
  for (const auto& [loc, g] : roots) out.records.push_back(classify(f, loc, copts));
  return out;
}

struct StableSetSample {
  std::vector<Vector> grid_points;
  std::vector<bool> converged_to_saddle;
  double grid_spacing = 0.0;
  double max_distance_from_subspace = 0.0;  // over converged points
  Matrix stable_basis;

  std::vector<Vector> converged_points() const {
    std::vector<Vector> out;
    for (std::size_t i = 0; i < grid_points.size(); ++i)
      if (converged_to_saddle[i]) out.push_back(grid_points[i]);
    return out;
  }
};

struct StableSetOptions {
  StopPolicy policy{};
  double basin_tol = 1e-6;  // infinity norm
  unsigned threads = 0;     // 0: hardware concurrency
};

/// Runs gradient descent from a grid x* + [-r, r]^2 and marks the starts that
/// converge back to the saddle. Grid starts outside the domain box are
/// reported as not converging.
template <Objective F>
StableSetSample sample_local_stable_set(const GradientMap<F>& map, const CriticalPointRecord& record,
                                        double radius, std::size_t grid,
                                        const StableSetOptions& opts = {}) {
  if (!record.strict_saddle) throw ContractViolation("sample_local_stable_set: record is not a strict saddle");
  if (record.location.size() != 2) throw ContractViolation("sample_local_stable_set: only 2-D is supported");
  if (!(radius >= 0.0)) throw ContractViolation("sample_local_stable_set: radius must be non-negative");

  StableSetSample out;
  out.stable_basis = stable_subspace(map, record).basis;
  const Vector& c = record.location;
  if (radius == 0.0 || grid <= 1) {
    out.grid_points.push_back(c);
  } else {
    out.grid_spacing = 2.0 * radius / static_cast<double>(grid - 1);
    for (std::size_t i = 0; i < grid; ++i) {
      for (std::size_t j = 0; j < grid; ++j) {
        const double u = 2.0 * static_cast<double>(i) / static_cast<double>(grid - 1) - 1.0;
        const double v = 2.0 * static_cast<double>(j) / static_cast<double>(grid - 1) - 1.0;
        out.grid_points.push_back(Vector{{c[0] + radius * u, c[1] + radius * v}});
      }
    }
  }

  const Box box = map.objective().domain_box();
  const std::size_t n = out.grid_points.size();
  std::vector<char> hit(n, 0);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      const Vector& x0 = out.grid_points[i];
      if (!box.contains(x0)) continue;
      const Trajectory t = run(map, x0, opts.policy);
      hit[i] = t.stop_reason == StopReason::GradNormBelowTol &&
               (t.final_iterate() - c).template lpNorm<Eigen::Infinity>() <= opts.basin_tol;
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  out.converged_to_saddle.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    out.converged_to_saddle[i] = hit[i] != 0;
    if (hit[i]) {
      out.max_distance_from_subspace = std::max(
          out.max_distance_from_subspace, distance_to_affine_subspace(out.grid_points[i], c, out.stable_basis));
    }
  }
  return out;
}

}  // namespace saddle
