#include <gtest/gtest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "saddle/inverse_map.hpp"
#include "saddle/objective_spec.hpp"

using namespace saddle;

TEST(Invert, FixedPointsAreTheirOwnPreimage) {
  const GradientMap nes(NesterovExample{}, 0.05);
  for (const auto& k : NesterovExample{}.known_critical_points()) {
    const ProxSolveReport r = invert(nes, k.location, 1e-12);
    EXPECT_EQ(r.solution, k.location);
    EXPECT_EQ(r.inner_iterations, 0u);
    EXPECT_EQ(r.residual, 0.0);
  }
}

TEST(Invert, LinearQuadraticInverse) {
  const GradientMap quad(DiagonalQuadratic{1.0, -1.0}, 0.5);
  const ProxSolveReport r = invert(quad, Vector{{0.5, 1.5}}, 1e-12);
  EXPECT_LE((r.solution - Vector{{1.0, 1.0}}).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(r.subproblem_modulus, 0.5);
}

// alpha = 0.1 needs L < 10, so the certified box is [-1.9, 1.9]^2 (L = 9.83).
// g(1, 2) = (0.9, 1.4), but (1, 2) lies outside that box. The y-equation
// 1.1 y - 0.1 y^3 = 1.4 factors as (y - 2)(y^2 + 2y - 7) = 0, and its only
// root inside the box is y = 2 sqrt(2) - 1.
TEST(Invert, NesterovPreimageOfStepExample) {
  const GradientMap nes(NesterovExample{1.9}, 0.1);
  const Vector y{{0.9, 1.4}};
  EXPECT_LE((nes(Vector{{1.0, 2.0}}) - y).norm(), 1e-15);
  const ProxSolveReport r = invert(nes, y, 1e-10);
  EXPECT_LE((r.solution - Vector{{1.0, 2.0 * std::sqrt(2.0) - 1.0}}).norm(), 1e-9);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_LE((nes(r.solution) - y).norm(), 1e-10);
}

// Inside the certified box the inverse reproduces the preimage of a step.
TEST(Invert, NesterovPreimageInsideBox) {
  const GradientMap nes(NesterovExample{1.9}, 0.1);
  const Vector x{{1.0, 1.5}};
  const ProxSolveReport r = invert(nes, nes(x), 1e-12);
  EXPECT_LE((r.solution - x).norm(), 1e-11);
}

TEST(Invert, ErrorsAndBudget) {
  const GradientMap nes(NesterovExample{}, 0.05);
  EXPECT_THROW(invert(nes, Vector{{0.0}}, 1e-10), ContractViolation);
  EXPECT_THROW(invert(nes, Vector{{0.0, std::nan("")}}, 1e-10), ContractViolation);
  EXPECT_THROW(invert(nes, Vector{{0.1, 0.1}}, 0.0), ContractViolation);
  InvertOptions tight;
  tight.max_iterations = 1;
  try {
    invert(nes, Vector{{1.5, 1.7}}, 1e-14, tight);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.best_residual(), 0.0);
  }
}

// Two inner solves from different starts land within 10 tol of each other.
TEST(InvertProperty, UniquePreimage) {
  const GradientMap nes(NesterovExample{}, 0.5 / 11.0);
  SplitMix64 rng(17);
  const double tol = 1e-10;
  for (int i = 0; i < 200; ++i) {
    const Vector y = nes(uniform_in_box(rng, Box::cube(2, -2, 2)));
    Vector dir{{rng.normal(), rng.normal()}};
    InvertOptions alt;
    alt.start = y + 0.1 * dir.normalized();
    const Vector a = invert(nes, y, tol).solution;
    const Vector b = invert(nes, y, tol, alt).solution;
    EXPECT_LE((a - b).norm(), 10 * tol);
  }
}

// The strong-convexity modulus turns the residual into a distance bound:
// |x - g^{-1}(y)| <= |g(x) - y| / (1 - alpha L).
TEST(InvertProperty, ResidualCertifiesDistanceThroughModulus) {
  const GradientMap nes(NesterovExample{}, 0.9 / 11.0);
  SplitMix64 rng(18);
  for (int i = 0; i < 200; ++i) {
    const Vector x = uniform_in_box(rng, Box::cube(2, -2, 2));
    const Vector y = nes(x);
    for (double tol : {1e-2, 1e-6, 1e-10}) {
      const ProxSolveReport r = invert(nes, y, tol);
      EXPECT_LE(r.residual, tol);
      EXPECT_LE((r.solution - x).norm(), r.residual / r.subproblem_modulus + 1e-14);
    }
  }
}

TEST(Injectivity, SkipsCoincidentPairs) {
  const GradientMap quad(DiagonalQuadratic{1.0, -1.0}, 0.5);
  const Vector x{{0.3, 0.4}};
  const InjectivityReport r = injectivity_margin(quad, {{x, x}, {x, Vector{{0.0, 0.0}}}});
  EXPECT_EQ(r.pairs_skipped, 1u);
  EXPECT_EQ(r.pairs_checked, 1u);
}

TEST(Injectivity, QuadraticMarginIsSmallestSingularValue) {
  const GradientMap quad(DiagonalQuadratic{1.0, -1.0}, 0.5);
  const InjectivityReport r = injectivity_margin_check(quad, 1000, 3);
  EXPECT_GE(r.min_ratio, 0.5 - 1e-12);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_DOUBLE_EQ(r.bound, 0.5);
}

TEST(Injectivity, NesterovNoViolations) {
  const GradientMap nes(NesterovExample{}, 0.99 / 11.0);
  const InjectivityReport r = injectivity_margin_check(nes, 1000, 4);
  EXPECT_EQ(r.pairs_checked, 1000u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_THROW(injectivity_margin_check(nes, 0, 4), ContractViolation);
}

TEST(Roundtrip, NesterovSmallStep) {
  const GradientMap nes(NesterovExample{}, 0.05);
  const RoundtripReport r = roundtrip_check(nes, 1000, 5, 1e-10);
  EXPECT_EQ(r.samples, 1000u);
  EXPECT_LE(r.max_residual(), 1e-8);
}

TEST(Roundtrip, QuadraticAtLinearSolvePrecision) {
  const GradientMap quad(DiagonalQuadratic{1.0, -1.0}, 0.5);
  const RoundtripReport r = roundtrip_check(quad, 500, 6, 1e-12);
  EXPECT_LE(r.max_residual(), 1e-12);
}

// invert o step and step o invert are the identity on every zoo objective.
TEST(RoundtripProperty, CompositionIdentityOnZoo) {
  const std::vector<AnyObjective> zoo = {DiagonalQuadratic{1.0, -1.0}, DiagonalQuadratic{2.0, -0.5, 0.7},
                                         StronglyConvexQuadratic{1.0, 3.0}, NesterovExample{},
                                         QuarticCopositive(Matrix::Identity(2, 2)),
                                         QuarticCopositive(Matrix::Constant(1, 1, 0.25))};
  for (const auto& f : zoo) {
    const GradientMap map(f, 0.5 / f.lipschitz_bound());
    const RoundtripReport r = roundtrip_check(map, 300, 8, 1e-10);
    EXPECT_LE(r.max_forward_residual, 1e-10) << f.name();
    EXPECT_LE(r.max_backward_residual, 1e-10) << f.name();
  }
}
