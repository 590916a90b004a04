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

// Robustness estimation, sigma search, rank correlation and the trade-off
// experiment on small synthetic latents.

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "gtest/gtest.h"
#include "wmbench/tradeoff.hpp"

namespace wmbench {
namespace {

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

int SignHead(std::span<const double> z) { return z[0] > 0.0 ? 1 : 0; }

LatentSet Cluster(int n, int dim, double center, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  LatentSet s(n, std::vector<double>(dim));
  for (auto& z : s)
    for (int j = 0; j < dim; ++j) z[j] = (j == 0 ? center : 0.0) + g(rng);
  return s;
}

TEST(RobustnessAlphaTest, ZeroSigmaGivesZeroAlpha) {
  const LatentSet real = Cluster(20, 3, -1.0, 0.5, 1), fake = Cluster(20, 3, 1.0, 0.5, 2);
  EXPECT_EQ(RobustnessAlpha(SignHead, real, fake, 0.0, 3, 1).alpha, 0.0);
}

TEST(RobustnessAlphaTest, ToyHeadMatchesGaussianTail) {
  const LatentSet real(1, {-1.0}), fake(1, {1.0});
  const AlphaEstimate est = RobustnessAlpha(SignHead, real, fake, 1.0, 10000, 5);
  EXPECT_NEAR(est.alpha, NormalCdf(-1.0), 0.02);
  EXPECT_EQ(est.skipped_cells, 2);  // nothing real is called fake and vice versa
  EXPECT_LT(est.consistency[0][1], 0.0);
}

TEST(RobustnessAlphaTest, IncreasesWithSigma) {
  const LatentSet real = Cluster(30, 4, -1.0, 0.3, 3), fake = Cluster(30, 4, 1.0, 0.3, 4);
  const auto bank = NoiseBank::Make(30, 30, 4, 20, 9);
  double prev = -1.0;
  for (double sigma : {0.0, 5.0, 20.0}) {
    const double a = RobustnessAlpha(SignHead, real, fake, sigma, bank).alpha;
    EXPECT_GT(a, prev - 0.01) << "sigma " << sigma;
    prev = a;
  }
  EXPECT_GT(prev, 0.3);
}

TEST(RobustnessAlphaTest, NonDecreasingOnFixedBank) {
  const LatentSet real = Cluster(25, 2, -0.5, 0.5, 5), fake = Cluster(25, 2, 0.5, 0.5, 6);
  const auto bank = NoiseBank::Make(25, 25, 2, 30, 10);
  double prev = 0.0;
  for (double sigma = 0.0; sigma <= 4.0; sigma += 0.25) {
    const double a = RobustnessAlpha(SignHead, real, fake, sigma, bank).alpha;
    EXPECT_GE(a, prev - 0.01) << "sigma " << sigma;
    prev = std::max(prev, a);
  }
}

//------------------------------------------------------------------------------

TEST(BisectSigmaTest, FindsKnownRoot) {
  // alpha(s) = 1 - exp(-s); target 0.2 at s = -log(0.8).
  const auto r = BisectSigma([](double s) { return 1.0 - std::exp(-s); }, 0.2);
  EXPECT_TRUE(r.bracketed);
  EXPECT_NEAR(r.sigma, -std::log(0.8), 0.01 * r.sigma + 1e-12);
  EXPECT_GE(r.alpha, 0.2);
  EXPECT_LE(r.iterations, 30);
}

TEST(BisectSigmaTest, DoublesUpperEnd) {
  const auto r = BisectSigma([](double s) { return s >= 37.0 ? 0.5 : 0.0; }, 0.1);
  EXPECT_TRUE(r.bracketed);
  EXPECT_GE(r.sigma, 37.0);
  EXPECT_LE(r.sigma, 37.0 * 1.011);
}

TEST(BisectSigmaTest, FlagsUnbracketedSearch) {
  SigmaSearch s;
  s.cap = 100.0;
  const auto r = BisectSigma([](double) { return 0.0; }, 0.01, s);
  EXPECT_FALSE(r.bracketed);
  EXPECT_EQ(r.sigma, 100.0);
  EXPECT_THROW(BisectSigma([](double) { return 0.0; }, 0.0), std::invalid_argument);
}

TEST(SpearmanTest, KnownValues) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> up{2, 4, 8, 16, 32}, down{5, 3, 2, 1, 0};
  EXPECT_NEAR(Spearman(a, up), 1.0, 1e-15);
  EXPECT_NEAR(Spearman(a, down), -1.0, 1e-15);
  // Ties: ranks of b are {1.5, 1.5, 3, 4, 5}.
  const std::vector<double> b{7, 7, 8, 9, 10};
  const double ma = 3.0, mb = 3.0;
  const std::vector<double> rb{1.5, 1.5, 3, 4, 5};
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < 5; ++i) {
    sab += (a[i] - ma) * (rb[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  EXPECT_NEAR(Spearman(a, b), sab / std::sqrt(saa * sbb), 1e-15);
  EXPECT_EQ(Spearman(a, std::vector<double>(5, 1.0)), 0.0);
  EXPECT_THROW(Spearman(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}

//------------------------------------------------------------------------------

TEST(TradeoffTest, SmallExperimentIsConsistentAndDeterministic) {
  TradeoffDatasets d;
  d.train_real = Cluster(60, 4, -1.0, 0.8, 11);
  d.train_fake = Cluster(60, 4, 1.0, 0.8, 12);
  d.test_real = Cluster(40, 4, -1.0, 0.8, 13);
  d.test_fake = Cluster(40, 4, 1.0, 0.8, 14);
  TradeoffConfig cfg;
  cfg.train_sigmas = {0.0, 2.0};
  cfg.trials = 2;
  cfg.draws = 4;
  cfg.alpha = 0.05;
  cfg.head_hidden = {8};
  cfg.head_train.epochs = 10;
  cfg.head_train.lr = 0.01;
  cfg.seed = 3;
  const TradeoffResult a = RunTradeoff(cfg, d);
  ASSERT_EQ(a.rows.size(), 4u);
  ASSERT_EQ(a.summary.size(), 2u);
  for (const auto& r : a.rows) {
    EXPECT_GT(r.sigma_at_alpha, 0.0);
    EXPECT_GE(r.alpha, cfg.alpha);
    EXPECT_GE(r.auroc, 0.5);
    EXPECT_NEAR(r.consistency_rhs, r.auroc_noisy_decision / (1 - r.alpha) + r.alpha, 1e-12);
    EXPECT_TRUE(r.consistency_holds);
  }
  cfg.jobs = 3;
  const TradeoffResult b = RunTradeoff(cfg, d);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].sigma_at_alpha, b.rows[i].sigma_at_alpha);
    EXPECT_EQ(a.rows[i].auroc, b.rows[i].auroc);
  }
  EXPECT_THROW(RunTradeoff(cfg, TradeoffDatasets{}), std::invalid_argument);
  cfg.alpha = 0.6;
  EXPECT_THROW(RunTradeoff(cfg, d), std::invalid_argument);
}

TEST(SyntheticLatentsTest, LayoutAndConflictRate) {
  SyntheticLatentSpec spec;
  spec.fragile_spread = 0.0;
  spec.robust_spread = 0.0;
  const LatentSet fake = SyntheticLatents(spec, 4000, 1, 5);
  ASSERT_EQ(fake[0].size(), 9u);
  int conflicts = 0;
  for (const auto& z : fake) {
    for (int j = 0; j < 8; ++j) EXPECT_EQ(z[j], 0.25);
    ASSERT_EQ(std::abs(z[8]), 50.0);
    conflicts += z[8] < 0.0;
  }
  EXPECT_NEAR(conflicts / 4000.0, 0.05, 0.01);
  EXPECT_EQ(SyntheticLatents(spec, 3, 0, 9), SyntheticLatents(spec, 3, 0, 9));
  EXPECT_LT(SyntheticLatents(spec, 1, 0, 9)[0][0], 0.0);
  spec.conflict_rate = 0.5;
  EXPECT_THROW(SyntheticLatents(spec, 3, 0, 9), std::invalid_argument);
  EXPECT_THROW(SyntheticLatents(SyntheticLatentSpec{}, 3, 2, 9), std::invalid_argument);
}

TEST(SyntheticLatentsTest, NoiseTrainingTradesAurocForRobustness) {
  const SyntheticLatentSpec spec;
  TradeoffDatasets d{SyntheticLatents(spec, 200, 0, 1), SyntheticLatents(spec, 200, 1, 2),
                     SyntheticLatents(spec, 200, 0, 3), SyntheticLatents(spec, 200, 1, 4)};
  TradeoffConfig cfg;
  cfg.train_sigmas = {0.0, 10.0};
  cfg.trials = 2;
  const TradeoffResult r = RunTradeoff(cfg, d);
  EXPECT_LT(r.summary[0].sigma_at_alpha, 1.0);
  EXPECT_GT(r.summary[1].sigma_at_alpha, 5.0);
  EXPECT_GT(r.summary[0].auroc, 0.999);
  EXPECT_LT(r.summary[1].auroc, 0.98);
  EXPECT_TRUE(r.consistency_all_hold);
}

//------------------------------------------------------------------------------

SubstituteClassifier TinyClassifier() {
  SubstituteClassifier clf;
  clf.spec = {8, 8};
  clf.norm.mean.assign(clf.spec.dim(), 0.4);
  clf.norm.stddev.assign(clf.spec.dim(), 0.2);
  clf.net = Mlp({clf.spec.dim(), 10, 2}, 4);
  for (double& b : clf.net.mutable_layers()[0].b) b = 0.5;  // keep units active
  return clf;
}

Image Smooth(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.3, 0.7);
  Image img(n, n, 1);
  for (double& v : img.data()) v = u(rng);
  return img;
}

TEST(LatentSearchTest, ZeroTargetLeavesImage) {
  const SubstituteClassifier clf = TinyClassifier();
  const Image img = Smooth(16, 1);
  const auto r = LatentPerturbationSearch(img, clf, 0.0, 0.01, 10);
  EXPECT_EQ(r.image, img);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(LatentSearchTest, ReachesModerateTargets) {
  const SubstituteClassifier clf = TinyClassifier();
  const Image img = Smooth(16, 2);
  double prev_ratio = 0.0;
  for (double eps : {0.5, 1.0, 2.0}) {
    const auto r = LatentPerturbationSearch(img, clf, eps, 0.002, 2000, 0.01, 7);
    EXPECT_TRUE(r.converged) << "eps " << eps;
    EXPECT_NEAR(r.latent_distance, eps, 0.05 * eps);
    EXPECT_GT(r.linf, 0.0);
    for (double v : r.image.data()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    prev_ratio = r.linf / eps;
  }
  EXPECT_GT(prev_ratio, 0.0);
}

}  // namespace
}  // namespace wmbench
