// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "failseq/linalg.hpp"
#include "failseq/rng.hpp"

using namespace failseq;

TEST(Rng, SameSeedGivesSameDraws) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.uniform(), b.uniform());
}

TEST(Rng, DifferentSeedsDiverge) {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
  EXPECT_EQ(same, 0);
}

TEST(Rng, UniformMeanAndRange) {
  Rng rng(2024);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

TEST(Rng, KnownSplitMixOutput) {
  // First outputs of SplitMix64 seeded with 0.
  Rng rng(0);
  EXPECT_EQ(rng.next_u64(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next_u64(), 0x6E789E6AA1B965F4ULL);
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng rng(5);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, DerivedSeedsAreDistinct) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
}

TEST(Rng, ShuffleIsPermutationAndDeterministic) {
  std::vector<int> a(50), b(50);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 0);
  Rng r1(3), r2(3);
  shuffle(std::span<int>(a), r1);
  shuffle(std::span<int>(b), r2);
  EXPECT_EQ(a, b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(sorted, expect);
}

TEST(Affine, IdentityMatrix) {
  const Vector y = affine(Matrix::identity(2), Vector{3, -1}, Vector{0, 0});
  EXPECT_EQ(y, (Vector{3, -1}));
}

TEST(Affine, ZeroMatrixReturnsBias) {
  const Vector y = affine(Matrix(2, 3), Vector{7, 8, 9}, Vector{0.5, 0.5});
  EXPECT_EQ(y, (Vector{0.5, 0.5}));
}

TEST(Affine, HandComputedExample) {
  const Matrix w(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(affine(w, Vector{1, 1}, Vector{1, 0}), (Vector{4, 7}));
}

TEST(Affine, LinearInX) {
  Rng rng(11);
  Matrix w(3, 4);
  for (double& v : w.data()) v = rng.uniform(-1, 1);
  Vector x1(4), x2(4), zero(3, 0.0);
  for (auto& v : x1) v = rng.uniform(-1, 1);
  for (auto& v : x2) v = rng.uniform(-1, 1);
  Vector sum(4);
  for (int i = 0; i < 4; ++i) sum[i] = 2.0 * x1[i] + x2[i];
  const Vector lhs = affine(w, sum, zero);
  const Vector a = affine(w, x1, zero), b = affine(w, x2, zero);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(lhs[i], 2.0 * a[i] + b[i], 1e-12);
}

TEST(Affine, RejectsMismatchedShapes) {
  EXPECT_THROW(affine(Matrix(2, 3), Vector{1, 2}, Vector{0, 0}), ShapeError);
  EXPECT_THROW(affine(Matrix(2, 2), Vector{1, 2}, Vector{0}), ShapeError);
}

TEST(Activations, KnownValues) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15);
  EXPECT_EQ(failseq::tanh(Vector{0.0})[0], 0.0);
  const Vector s = sigmoid(Vector{-800.0, 800.0});
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 1.0);
  EXPECT_TRUE(all_finite(s));
}

TEST(Dropout, RateZeroIsAllOnes) {
  Rng rng(1);
  for (double v : dropout_mask(100, 0.0, rng)) EXPECT_EQ(v, 1.0);
}

TEST(Dropout, FractionAndScale) {
  Rng rng(77);
  const Vector m = dropout_mask(100000, 0.4, rng);
  std::size_t zeros = 0;
  for (double v : m) {
    if (v == 0.0) {
      ++zeros;
    } else {
      ASSERT_EQ(v, 1.0 / 0.6);
    }
  }
  EXPECT_NEAR(static_cast<double>(zeros) / 100000.0, 0.4, 0.01);
}

TEST(Dropout, RejectsInvalidRate) {
  Rng rng(1);
  EXPECT_THROW(dropout_mask(4, 1.0, rng), std::invalid_argument);
  EXPECT_THROW(dropout_mask(4, -0.1, rng), std::invalid_argument);
}

TEST(Cholesky, ReconstructsMatrixAndSolves) {
  const Matrix a(3, 3, {4, 2, 0.4, 2, 5, 1, 0.4, 1, 3});
  const Matrix l = cholesky(a);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += l(i, k) * l(j, k);
      EXPECT_NEAR(s, a(i, j), 1e-12);
    }
  }
  const Vector b{1, 2, 3};
  const Vector x = solve_lower_transpose(l, solve_lower(l, b));
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 3; ++j) s += a(i, j) * x[j];
    EXPECT_NEAR(s, b[i], 1e-12);
  }
}

TEST(Cholesky, RejectsIndefinite) {
  EXPECT_THROW(cholesky(Matrix(2, 2, {1, 2, 2, 1})), std::domain_error);
}
