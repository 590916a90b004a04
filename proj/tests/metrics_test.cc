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

// ROC, image quality and Wasserstein metrics against brute-force oracles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "wmbench/metrics.hpp"

namespace wmbench {
namespace {

// P(s+ > s-) + P(s+ = s-) / 2 by enumerating every pair.
double PairwiseAuroc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double s = 0.0;
  for (double p : pos)
    for (double n : neg) s += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return s / (static_cast<double>(pos.size()) * neg.size());
}

// Minimum mean matched cost over all n! matchings.
double BruteForceMatching(const Matrix& cost) {
  std::vector<int> perm(cost.rows);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < cost.rows; ++i) s += cost(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / cost.rows;
}

std::vector<std::vector<double>> RandomPoints(int n, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts)
    for (double& v : p) v = g(rng);
  return pts;
}

TEST(RocTest, AurocMatchesPairwiseOracle) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_int_distribution<int> coarse(0, 6);
  std::normal_distribution<double> g;
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<double> pos(size(rng)), neg(size(rng));
    // Every third instance uses a coarse grid so ties are common.
    const bool ties = inst % 3 == 0;
    for (double& v : pos) v = ties ? coarse(rng) : g(rng) + 0.5;
    for (double& v : neg) v = ties ? coarse(rng) : g(rng);
    const RocCurve c = Roc(pos, neg);
    ASSERT_NEAR(c.auroc, PairwiseAuroc(pos, neg), 1e-9) << "instance " << inst;
    EXPECT_EQ(c.points.front().fpr, 0.0);
    EXPECT_EQ(c.points.back().tpr, 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_GE(c.points[i].fpr, c.points[i - 1].fpr);
      EXPECT_GE(c.points[i].tpr, c.points[i - 1].tpr);
    }
  }
}

TEST(RocTest, PerfectAndInvertedSeparation) {
  const std::vector<double> hi{0.9, 0.8}, lo{0.1, 0.2, 0.3};
  EXPECT_DOUBLE_EQ(Roc(hi, lo).auroc, 1.0);
  EXPECT_DOUBLE_EQ(Roc(lo, hi).auroc, 0.0);
  EXPECT_DOUBLE_EQ(MinTotalError(Roc(hi, lo)), 0.0);
  EXPECT_DOUBLE_EQ(MinTotalError(Roc(lo, hi)), 1.0);
  EXPECT_DOUBLE_EQ(TprAtFpr(Roc(hi, lo), 0.0), 1.0);
  EXPECT_THROW(Roc(std::vector<double>{}, lo), std::invalid_argument);
}

TEST(RocTest, MinTotalErrorMatchesThresholdSweep) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> pos(30), neg(25);
  for (double& v : pos) v = g(rng) + 1.0;
  for (double& v : neg) v = g(rng);
  std::vector<double> thresholds = pos;
  thresholds.insert(thresholds.end(), neg.begin(), neg.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());
  double best = 1.0;
  for (double t : thresholds) {
    const double tpr = std::count_if(pos.begin(), pos.end(), [&](double s) { return s >= t; }) /
                       static_cast<double>(pos.size());
    const double fpr = std::count_if(neg.begin(), neg.end(), [&](double s) { return s >= t; }) /
                       static_cast<double>(neg.size());
    best = std::min(best, 1.0 - tpr + fpr);
  }
  EXPECT_NEAR(MinTotalError(Roc(pos, neg)), best, 1e-12);
}

//------------------------------------------------------------------------------

TEST(QualityTest, PsnrClosedFormTwentyDecibels) {
  const Image a(16, 16, 3, 0.3), b(16, 16, 3, 0.4);  // MSE = 0.01
  EXPECT_NEAR(Psnr(a, b), 20.0, 1e-9);
  EXPECT_TRUE(std::isinf(Psnr(a, a)));
}

TEST(QualityTest, SsimOfIdenticalImagesIsOne) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  Image x(40, 33, 3);
  for (double& v : x.data()) v = u(rng);
  EXPECT_DOUBLE_EQ(Ssim(x, x), 1.0);
  EXPECT_DOUBLE_EQ(Quality(x, x).ssim, 1.0);
  EXPECT_DOUBLE_EQ(Quality(x, x).l2, 0.0);
}

TEST(QualityTest, SsimSingleWindowMatchesDirectFormula) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u;
  Image x(11, 11, 1), y(11, 11, 1);
  for (double& v : x.data()) v = u(rng);
  for (double& v : y.data()) v = 0.6 * u(rng) + 0.2;
  // 2-D Gaussian weights, sigma 1.5, normalized over the window.
  double wsum = 0.0;
  std::vector<double> w(121);
  for (int j = 0; j < 11; ++j)
    for (int i = 0; i < 11; ++i) {
      w[j * 11 + i] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      wsum += w[j * 11 + i];
    }
  double mx = 0, my = 0;
  for (int k = 0; k < 121; ++k) {
    mx += w[k] / wsum * x.values()[k];
    my += w[k] / wsum * y.values()[k];
  }
  double vx = 0, vy = 0, cxy = 0;
  for (int k = 0; k < 121; ++k) {
    const double a = x.values()[k] - mx, b = y.values()[k] - my;
    vx += w[k] / wsum * a * a;
    vy += w[k] / wsum * b * b;
    cxy += w[k] / wsum * a * b;
  }
  const double c1 = 1e-4, c2 = 9e-4;
  const double expected =
      (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
  EXPECT_NEAR(Ssim(x, y), expected, 1e-12);
}

TEST(QualityTest, SsimRejectsTinyImages) {
  EXPECT_THROW(Ssim(Image(5, 5, 1), Image(5, 5, 1)), std::invalid_argument);
}

//------------------------------------------------------------------------------

TEST(WassersteinTest, AssignmentMatchesFactorialBruteForce) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> size(1, 6);
  for (int inst = 0; inst < 50; ++inst) {
    const int n = size(rng);
    const auto a = RandomPoints(n, 3, rng);
    const auto b = RandomPoints(n, 3, rng);
    Matrix cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (a[i][k] - b[j][k]) * (a[i][k] - b[j][k]);
        cost(i, j) = std::sqrt(s);
      }
    ASSERT_NEAR(WassersteinExact(a, b), BruteForceMatching(cost), 1e-12) << "instance " << inst;
  }
}

TEST(WassersteinTest, NeverExceedsMeanPairedDistance) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 12);
  for (int inst = 0; inst < 100; ++inst) {
    const int n = size(rng);
    std::vector<Image> a, b;
    for (int i = 0; i < n; ++i) {
      Image x(4, 3, 1), y(4, 3, 1);
      std::uniform_real_distribution<double> u;
      for (double& v : x.data()) v = u(rng);
      for (double& v : y.data()) v = u(rng);
      a.push_back(x);
      b.push_back(y);
    }
    ASSERT_LE(WassersteinExact(a, b), MeanPairedL2(a, b) + 1e-12) << "instance " << inst;
  }
}

TEST(WassersteinTest, PermutedCopyHasZeroDistance) {
  std::mt19937_64 rng(8);
  auto a = RandomPoints(9, 5, rng);
  auto b = a;
  std::shuffle(b.begin(), b.end(), rng);
  EXPECT_NEAR(WassersteinExact(a, b), 0.0, 1e-15);
}

TEST(WassersteinTest, RejectsMismatchedSets) {
  std::mt19937_64 rng(9);
  const auto a = RandomPoints(3, 2, rng);
  const auto b = RandomPoints(4, 2, rng);
  EXPECT_THROW(WassersteinExact(a, b), std::invalid_argument);
  EXPECT_THROW(SolveAssignment(Matrix(2, 3)), std::invalid_argument);
}

}  // namespace
}  // namespace wmbench
