#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "saddle/errors.hpp"
#include "saddle/function_zoo.hpp"
#include "saddle/linalg.hpp"

namespace saddle {

/// Runtime-selected zoo objective. Satisfies the Objective concept itself, so
/// every algorithm template accepts it unchanged.
class AnyObjective {
 public:
  using Variant =
      std::variant<DiagonalQuadratic, StronglyConvexQuadratic, NesterovExample, QuarticCopositive>;

  template <typename F>
    requires(!std::same_as<std::remove_cvref_t<F>, AnyObjective> && Objective<std::remove_cvref_t<F>>)
  AnyObjective(F&& f) : impl_(std::forward<F>(f)) {}  // NOLINT(google-explicit-constructor)

 private:
  template <typename Fn>
  decltype(auto) visit(Fn&& fn) const {
    return std::visit(std::forward<Fn>(fn), impl_);
  }

 public:

  std::size_t dimension() const { return visit([](const auto& f) { return f.dimension(); }); }
  std::string name() const { return visit([](const auto& f) { return f.name(); }); }
  std::vector<double> params() const { return visit([](const auto& f) { return f.params(); }); }
  double value(const Vector& x) const { return visit([&](const auto& f) { return f.value(x); }); }
  Vector gradient(const Vector& x) const {
    return visit([&](const auto& f) -> Vector { return f.gradient(x); });
  }
  Matrix hessian(const Vector& x) const {
    return visit([&](const auto& f) -> Matrix { return f.hessian(x); });
  }
  double lipschitz_bound() const { return visit([](const auto& f) { return f.lipschitz_bound(); }); }
  Box domain_box() const { return visit([](const auto& f) -> Box { return f.domain_box(); }); }
  std::vector<KnownCriticalPoint> known_critical_points() const {
    return visit([](const auto& f) { return f.known_critical_points(); });
  }

  const Variant& variant() const { return impl_; }

 private:
  Variant impl_;
};

static_assert(Objective<AnyObjective>);

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\n\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\n\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double symmetric_half_width(const Box& box, const char* who) {
  const double hw = box.upper()[0];
  if (!box.bounded() || !(box.lower().array() == -hw).all() || !(box.upper().array() == hw).all()) {
    throw ContractViolation(std::string(who) + ": domain_box must be a symmetric cube [-h, h]^d");
  }
  return hw;
}

}  // namespace detail

/// Parses a comma-separated list of reals, e.g. "0.5,-1e-3". Brackets optional.
inline std::vector<double> parse_real_list(std::string_view text) {
  std::string s = detail::trim(text);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ContractViolation("unbalanced bracket in list '" + s + "'");
    s = detail::trim(std::string_view(s).substr(1, s.size() - 2));
  }
  std::vector<double> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    const std::string token =
        detail::trim(std::string_view(s).substr(start, comma == std::string::npos ? s.npos : comma - start));
    if (token.empty()) throw ContractViolation("empty entry in list '" + s + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw ContractViolation("not a number: '" + token + "'");
    }
    if (used != token.size()) throw ContractViolation("not a number: '" + token + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Builds a zoo objective from its name and parameter list.
/// `box` optionally overrides the default certified box (symmetric cubes
/// only, and only for objectives whose bound depends on the box).
inline AnyObjective make_objective(std::string_view name, const std::vector<double>& params,
                                   const Box* box = nullptr) {
  if (name == "diagonal_quadratic" || name == "strongly_convex_quadratic") {
    if (box != nullptr && !(*box == Box::unbounded(params.size()))) {
      throw ContractViolation(std::string(name) + ": certified box is all of R^d and cannot be changed");
    }
    if (name == "diagonal_quadratic") return DiagonalQuadratic(to_vector(params));
    return StronglyConvexQuadratic(to_vector(params));
  }
  if (name == "nesterov_example" || name == "nesterov") {
    double hw = 2.0;
    if (params.size() == 1) {
      hw = params[0];
    } else if (!params.empty()) {
      throw ContractViolation("nesterov_example: takes at most one parameter (box half width)");
    }
    if (box != nullptr) {
      if (box->dimension() != 2) throw ContractViolation("nesterov_example: domain_box must be 2-D");
      hw = detail::symmetric_half_width(*box, "nesterov_example");
    }
    return NesterovExample(hw);
  }
  if (name == "quartic_copositive" || name == "quartic") {
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(params.size()))));
    if (d == 0 || d * d != params.size()) {
      throw ContractViolation("quartic_copositive: parameters must be the d*d entries of Q (row-major)");
    }
    Matrix q(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = params[i * d + j];
    double hw = 1.0;
    if (box != nullptr) {
      if (box->dimension() != d) throw ContractViolation("quartic_copositive: domain_box dimension mismatch");
      hw = detail::symmetric_half_width(*box, "quartic_copositive");
    }
    return QuarticCopositive(q, hw);
  }
  throw ContractViolation("unknown objective '" + std::string(name) + "'");
}

/// Parses "name" or "name:[p1,p2,...]".
inline AnyObjective parse_objective(std::string_view text) {
  const std::string s = detail::trim(text);
  const auto colon = s.find(':');
  if (colon == std::string::npos) return make_objective(s, {});
  return make_objective(detail::trim(std::string_view(s).substr(0, colon)),
                        parse_real_list(std::string_view(s).substr(colon + 1)));
}

// Infinite bounds serialize as null.
inline nlohmann::json box_to_json(const Box& box) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < box.dimension(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    nlohmann::json lo = std::isfinite(box.lower()[k]) ? nlohmann::json(box.lower()[k]) : nlohmann::json(nullptr);
    nlohmann::json hi = std::isfinite(box.upper()[k]) ? nlohmann::json(box.upper()[k]) : nlohmann::json(nullptr);
    out.push_back({lo, hi});
  }
  return out;
}

inline Box box_from_json(const nlohmann::json& j) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!j.is_array()) throw ContractViolation("domain_box must be an array of [lo, hi] pairs");
  Vector lo(static_cast<Eigen::Index>(j.size())), hi(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& pair = j[i];
    if (!pair.is_array() || pair.size() != 2) throw ContractViolation("domain_box entries must be [lo, hi]");
    lo[static_cast<Eigen::Index>(i)] = pair[0].is_null() ? -inf : pair[0].get<double>();
    hi[static_cast<Eigen::Index>(i)] = pair[1].is_null() ? inf : pair[1].get<double>();
  }
  return Box(lo, hi);
}

template <Objective F>
nlohmann::json objective_to_json(const F& f) {
  return {{"name", f.name()}, {"params", f.params()}, {"domain_box", box_to_json(f.domain_box())}};
}

inline AnyObjective objective_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_objective(j.get<std::string>());
  if (!j.is_object() || !j.contains("name")) {
    throw ContractViolation("objective JSON must be a string or an object with a name");
  }
  const auto params = j.value("params", std::vector<double>{});
  if (j.contains("domain_box")) {
    const Box box = box_from_json(j.at("domain_box"));
    return make_objective(j.at("name").get<std::string>(), params, &box);
  }
  return make_objective(j.at("name").get<std::string>(), params);
}

}  // namespace saddle
