#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "saddle/linalg.hpp"
#include "saddle/random.hpp"

using namespace saddle;

namespace {

Matrix random_symmetric(SplitMix64& rng, Eigen::Index n) {
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.uniform(-5.0, 5.0);
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST(Jacobi, DiagonalInputIsSortedUnchanged) {
  Matrix a = Vector{{3.0, -1.0, 2.0}}.asDiagonal();
  const SymmetricEigen e = jacobi_eigen(a);
  EXPECT_EQ(e.values, (Vector{{-1.0, 2.0, 3.0}}));
  EXPECT_EQ(e.vectors.col(0).cwiseAbs(), (Vector{{0.0, 1.0, 0.0}}));
}

TEST(Jacobi, ZeroMatrix) {
  const SymmetricEigen e = jacobi_eigen(Matrix::Zero(3, 3));
  EXPECT_EQ(e.values, Vector::Zero(3));
  EXPECT_EQ(e.vectors, Matrix::Identity(3, 3));
}

TEST(Jacobi, NonSquareRejected) { EXPECT_THROW(jacobi_eigen(Matrix::Zero(2, 3)), ContractViolation); }

// Eigen's self-adjoint solver is the independent reference.
TEST(JacobiProperty, MatchesReferenceSolver) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(trial % 20);
    const Matrix a = random_symmetric(rng, n);
    const SymmetricEigen e = jacobi_eigen(a);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    EXPECT_LE((e.values - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, a.norm()));
    EXPECT_LE((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).norm(), 1e-10 * std::max(1.0, a.norm()));
    EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::Identity(n, n)).norm(), 1e-12);
    EXPECT_LE(e.off_diagonal_norm, 1e-13);
  }
}

TEST(Box, ContainsAndClip) {
  const Box b = Box::cube(2, -1.0, 1.0);
  EXPECT_TRUE(b.contains(Vector{{1.0, -1.0}}));
  EXPECT_FALSE(b.contains(Vector{{1.0 + 1e-15, 0.0}}));
  EXPECT_FALSE(b.contains(Vector{{0.0}}));
  EXPECT_TRUE(b.contains(Box::cube(2, -0.5, 0.5)));
  const Box u = Box::unbounded(2);
  EXPECT_FALSE(u.bounded());
  EXPECT_TRUE(u.contains(Vector{{1e300, -1e300}}));
  EXPECT_TRUE(sampling_box(u) == Box::cube(2, -10.0, 10.0));
  EXPECT_THROW(Box(Vector{{1.0}}, Vector{{0.0}}), ContractViolation);
}

TEST(Random, StreamsAreReproducibleAndDistinct) {
  SplitMix64 a = stream_for(7, 3), b = stream_for(7, 3), c = stream_for(7, 4);
  const auto va = a(), vb = b(), vc = c();
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  SplitMix64 r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
