#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "saddle/critical_points.hpp"
#include "saddle/descent_engine.hpp"
#include "saddle/experiments.hpp"
#include "saddle/inverse_map.hpp"
#include "saddle/linalg.hpp"
#include "saddle/objective_spec.hpp"

namespace saddle {

/// Writes `content` to a sibling temp file and renames it over `path`, so a
/// reader never sees a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

// Shortest round-trip decimal form.
inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline nlohmann::json to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline nlohmann::json columns_to_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(to_json(Vector(m.col(c))));
  return out;
}

inline nlohmann::json to_json(const CriticalPointRecord& r) {
  return {{"location", to_json(r.location)},
          {"grad_norm", r.grad_norm},
          {"hessian_eigenvalues", to_json(r.hessian_eigenvalues)},
          {"hessian_eigenvectors", columns_to_json(r.hessian_eigenvectors)},
          {"classification", std::string(to_string(r.classification))},
          {"strict_saddle", r.strict_saddle},
          {"has_center_directions", r.has_center_directions},
          {"stable_subspace_basis", columns_to_json(r.stable_subspace_basis)},
          {"stable_dimension", r.stable_dimension},
          {"degeneracy_tol", r.degeneracy_tol}};
}

inline nlohmann::json to_json(const ProxSolveReport& r) {
  return {{"solution", to_json(r.solution)},
          {"residual", r.residual},
          {"inner_iterations", r.inner_iterations},
          {"subproblem_modulus", r.subproblem_modulus}};
}

inline nlohmann::json to_json(const RateFit& f) {
  nlohmann::json out = {{"regime", std::string(to_string(f.regime))},
                        {"slope", f.slope},
                        {"intercept", f.intercept},
                        {"r_squared", f.r_squared},
                        {"fit_window", {f.window.begin, f.window.end}},
                        {"points_used", f.points_used}};
  if (f.regime == RateRegime::Linear) out["fitted_b"] = f.fitted_b;
  else out["fitted_exponent"] = f.fitted_exponent;
  return out;
}

inline nlohmann::json to_json(const MonteCarloReport& r) {
  nlohmann::json records = nlohmann::json::array();
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    records.push_back({{"index", i},
                       {"location", to_json(r.records[i].location)},
                       {"classification", std::string(to_string(r.records[i].classification))},
                       {"strict_saddle", r.records[i].strict_saddle}});
    counts[std::to_string(i)] = r.basin_counts[i];
  }
  return {{"n_trials", r.n_trials},
          {"seed", r.seed},
          {"alpha", r.alpha},
          {"init_box", box_to_json(r.init_box)},
          {"critical_points", records},
          {"basin_counts", counts},
          {"diverged", r.diverged},
          {"left_box", r.left_box},
          {"unresolved", r.unresolved},
          {"saddle_hits", r.saddle_hits}};
}

namespace detail {

inline std::string coordinate_header(std::size_t d) {
  std::string h;
  for (std::size_t i = 1; i <= d; ++i) {
    if (i > 1) h += ',';
    h += "x_" + std::to_string(i);
  }
  return h;
}

inline void append_vector(std::string& line, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    line += ',';
    line += format_real(v[i]);
  }
}

}  // namespace detail

/// Columns: k, x_1..x_d, f, grad_norm.
inline std::string trajectory_csv(const Trajectory& t) {
  const std::size_t d = t.iterates.empty() ? 0 : static_cast<std::size_t>(t.iterates.front().size());
  std::string out = "k," + detail::coordinate_header(d) + ",f,grad_norm\n";
  for (std::size_t k = 0; k < t.iterates.size(); ++k) {
    std::string line = std::to_string(k);
    detail::append_vector(line, t.iterates[k]);
    line += ',' + format_real(t.f_values[k]) + ',' + format_real(t.grad_norms[k]) + '\n';
    out += line;
  }
  return out;
}

/// Columns: trial, x0_1..x0_d, label, iterations, final_grad_norm.
inline std::string trials_csv(const MonteCarloReport& r) {
  const std::size_t d = r.init_box.dimension();
  std::string out = "trial";
  for (std::size_t i = 1; i <= d; ++i) out += ",x0_" + std::to_string(i);
  out += ",label,iterations,final_grad_norm\n";
  for (const TrialSummary& t : r.trials) {
    std::string line = std::to_string(t.trial);
    detail::append_vector(line, t.x0);
    line += ',' + label_string(t.label) + ',' + std::to_string(t.iterations) + ',' +
            format_real(t.final_grad_norm) + '\n';
    out += line;
  }
  return out;
}

/// One row per outcome, ready for a bar chart.
/// Columns: label, classification, count, fraction.
inline std::string basin_plot_csv(const MonteCarloReport& r) {
  std::string out = "label,classification,count,fraction\n";
  const double n = static_cast<double>(r.n_trials);
  auto row = [&](const std::string& label, std::string_view cls, std::size_t count) {
    out += label + ',' + std::string(cls) + ',' + std::to_string(count) + ',' +
           format_real(static_cast<double>(count) / n) + '\n';
  };
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    row("basin_" + std::to_string(i), to_string(r.records[i].classification), r.basin_counts[i]);
  }
  row("Diverged", "none", r.diverged);
  row("LeftBox", "none", r.left_box);
  row("Unresolved", "none", r.unresolved);
  return out;
}

/// Columns: x_1..x_d, converged_to_saddle (0/1).
inline std::string stable_set_csv(const StableSetSample& s) {
  const std::size_t d = s.grid_points.empty() ? 0 : static_cast<std::size_t>(s.grid_points.front().size());
  std::string out = detail::coordinate_header(d) + ",converged_to_saddle\n";
  for (std::size_t i = 0; i < s.grid_points.size(); ++i) {
    std::string line;
    for (Eigen::Index j = 0; j < s.grid_points[i].size(); ++j) {
      if (j > 0) line += ',';
      line += format_real(s.grid_points[i][j]);
    }
    line += s.converged_to_saddle[i] ? ",1\n" : ",0\n";
    out += line;
  }
  return out;
}

}  // namespace saddle
