// Copyright 2026 The wmbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// -----------------------------------------------------------------------------

// Block DCT, Haar DWT and the small SVD, each against a direct oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "wmbench/svd.hpp"
#include "wmbench/transforms.hpp"

namespace wmbench {
namespace {

// Textbook 2-D DCT-II with orthonormal scaling, evaluated term by term.
double DirectDct(const std::array<double, 64>& b, int u, int v) {
  const double cu = u == 0 ? std::sqrt(0.125) : 0.5;
  const double cv = v == 0 ? std::sqrt(0.125) : 0.5;
  double s = 0.0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      s += b[y * 8 + x] * std::cos((2 * x + 1) * u * std::numbers::pi / 16) *
           std::cos((2 * y + 1) * v * std::numbers::pi / 16);
  return cu * cv * s;
}

std::array<double, 64> RandomBlock(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::array<double, 64> b;
  for (double& v : b) v = u(rng);
  return b;
}

Image RandomPlane(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image p(w, h, 1);
  for (double& v : p.data()) v = u(rng);
  return p;
}

TEST(Dct8Test, MatchesDirectSum) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto block = RandomBlock(rng);
    auto coeffs = block;
    Dct8Block(coeffs, /*inverse=*/false);
    for (int v = 0; v < 8; ++v)
      for (int u = 0; u < 8; ++u)
        ASSERT_NEAR(coeffs[v * 8 + u], DirectDct(block, u, v), 1e-12);
  }
}

TEST(Dct8Test, InverseRecoversBlockAndPreservesEnergy) {
  std::mt19937_64 rng(8);
  const auto block = RandomBlock(rng);
  auto c = block;
  Dct8Block(c, false);
  double e0 = 0.0, e1 = 0.0;
  for (int i = 0; i < 64; ++i) {
    e0 += block[i] * block[i];
    e1 += c[i] * c[i];
  }
  EXPECT_NEAR(e0, e1, 1e-12);
  Dct8Block(c, true);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(c[i], block[i], 1e-13);
}

TEST(Dct8Test, ZigZagIsAPermutationStartingAtDc) {
  const std::set<int> seen(kZigZag.begin(), kZigZag.end());
  EXPECT_EQ(seen.size(), 64u);
  EXPECT_EQ(kZigZag[0], 0);
  EXPECT_EQ(kZigZag[1], 1);   // (u=1, v=0)
  EXPECT_EQ(kZigZag[2], 8);   // (u=0, v=1)
  EXPECT_EQ(kZigZag[63], 63);
}

TEST(Dct8Test, PlaneRoundTripWithPadding) {
  const Image p = RandomPlane(21, 13, 3);
  const BlockDct t = BlockDct8(p);
  EXPECT_EQ(t.coeffs.width(), 24);
  EXPECT_EQ(t.coeffs.height(), 16);
  const Image back = BlockIdct8(t);
  ASSERT_TRUE(back.SameShape(p));
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back.values()[i], p.values()[i], 1e-12);
  EXPECT_THROW(BlockDct8(p, PadPolicy::kStrict), std::invalid_argument);
}

TEST(Dct8Test, ConstantBlockHasOnlyDc) {
  const Image p(8, 8, 1, 0.5);
  const BlockDct t = BlockDct8(p);
  EXPECT_NEAR(t.at(0, 0, 0), 4.0, 1e-12);  // 8 * 0.5
  for (int k = 1; k < 64; ++k) EXPECT_NEAR(t.coeffs.values()[k], 0.0, 1e-12);
}

//------------------------------------------------------------------------------

TEST(HaarTest, HandComputedFourByFour) {
  Image p(4, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) p.at(x, y) = 1 + x + 4 * y;
  const HaarSubbands s = HaarDwt(p);
  EXPECT_DOUBLE_EQ(s.ll.at(0, 0), 7.0);
  EXPECT_DOUBLE_EQ(s.ll.at(1, 0), 11.0);
  EXPECT_DOUBLE_EQ(s.ll.at(0, 1), 23.0);
  EXPECT_DOUBLE_EQ(s.ll.at(1, 1), 27.0);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) {
      EXPECT_DOUBLE_EQ(s.hl.at(x, y), -1.0);
      EXPECT_DOUBLE_EQ(s.lh.at(x, y), -4.0);
      EXPECT_DOUBLE_EQ(s.hh.at(x, y), 0.0);
    }
  EXPECT_EQ(HaarIdwt(s), p);
}

TEST(HaarTest, OddSizesRoundTrip) {
  const Image p = RandomPlane(9, 5, 4);
  const Image back = HaarIdwt(HaarDwt(p));
  ASSERT_TRUE(back.SameShape(p));
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back.values()[i], p.values()[i], 1e-14);
  EXPECT_THROW(HaarDwt(p, PadPolicy::kStrict), std::invalid_argument);
}

//------------------------------------------------------------------------------

// Cyclic Jacobi eigenvalues of a symmetric matrix, sorted descending.
std::vector<double> JacobiEigenvalues(Matrix a) {
  const int n = a.rows;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

Matrix RandomMatrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix m(r, c);
  for (double& v : m.v) v = n01(rng);
  return m;
}

class SvdShapeTest : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(SvdShapeTest, SingularValuesMatchEigenOracle) {
  const auto [rows, cols] = GetParam();
  std::mt19937_64 rng(rows * 100 + cols);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix m = RandomMatrix(rows, cols, rng);
    const Svd d = SvdSmall(m);
    const int k = std::min(rows, cols);
    ASSERT_EQ(static_cast<int>(d.sigma.size()), k);
    const auto ev = JacobiEigenvalues(m.Transposed() * m);
    for (int i = 0; i < k; ++i) {
      EXPECT_NEAR(d.sigma[i], std::sqrt(std::max(0.0, ev[i])), 1e-9);
      if (i > 0) EXPECT_LE(d.sigma[i], d.sigma[i - 1]);
    }
    const Matrix r = d.Reconstruct();
    for (std::size_t i = 0; i < m.v.size(); ++i) EXPECT_NEAR(r.v[i], m.v[i], 1e-10);
    const Matrix utu = d.u.Transposed() * d.u;
    const Matrix vtv = d.v.Transposed() * d.v;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        EXPECT_NEAR(utu(i, j), i == j ? 1.0 : 0.0, 1e-10);
        EXPECT_NEAR(vtv(i, j), i == j ? 1.0 : 0.0, 1e-10);
      }
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, SvdShapeTest,
                         ::testing::Values(std::pair{8, 8}, std::pair{4, 6},
                                           std::pair{7, 3}, std::pair{1, 5}));

TEST(SvdTest, RankDeficientInputKeepsOrthonormalFactors) {
  Matrix m(4, 4);
  for (int i = 0; i < 4; ++i) m(i, 0) = m(i, 1) = i + 1;  // rank 1
  const Svd d = SvdSmall(m);
  EXPECT_NEAR(d.sigma[0], std::sqrt(2.0 * 30.0), 1e-10);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(d.sigma[i], 0.0, 1e-10);
  const Matrix utu = d.u.Transposed() * d.u;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(utu(i, i), 1.0, 1e-10);
}

TEST(SvdTest, RejectsNonFiniteAndOversized) {
  Matrix m(2, 2);
  m(0, 0) = std::nan("");
  EXPECT_THROW(SvdSmall(m), std::invalid_argument);
  EXPECT_THROW(SvdSmall(Matrix(65, 2)), std::invalid_argument);
}

}  // namespace
}  // namespace wmbench
