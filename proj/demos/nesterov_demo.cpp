// Gradient descent on f(x, y) = x^2/2 + y^4/4 - y^2/2 from a point on the
// saddle's stable line and from a point just off it.

#include <cstdio>

#include "saddle/saddle.hpp"

int main() {
  using namespace saddle;
  const NesterovExample f;
  const GradientMap map(f, alpha_from_theta(f));

  for (const Vector& x0 : {Vector{{0.5, 0.0}}, Vector{{0.5, 1e-9}}}) {
    const Trajectory t = run(map, x0);
    const Vector& x = t.final_iterate();
    std::printf("x0 = (%g, %g) -> (%.3g, %.3g) after %zu steps [%s]\n", x0[0], x0[1], x[0], x[1], t.steps(),
                std::string(to_string(t.stop_reason)).c_str());
  }

  const auto search = find_critical_points(f, 100, 1);
  for (const auto& r : search.records) {
    std::printf("critical point (%g, %g): %s, stable dimension %zu\n", r.location[0], r.location[1],
                std::string(to_string(r.classification)).c_str(), r.stable_dimension);
  }
  return 0;
}
