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
//
// Latent-space robustness of a detector head and the robustness/reliability
// experiment built on it.
//
// A head D is (sigma, alpha)-robust when, for every predicted class k and
// every source distribution, P[D(z + n) = k | D(z) = k] >= 1 - alpha with
// n ~ N(0, sigma^2 I). Sources are indexed 0 = real (clean) and
// 1 = fake (watermarked).

#ifndef WMBENCH_TRADEOFF_HPP_
#define WMBENCH_TRADEOFF_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "wmbench/metrics.hpp"
#include "wmbench/mlp.hpp"
#include "wmbench/parallel.hpp"
#include "wmbench/seeding.hpp"
#include "wmbench/substitute.hpp"

namespace wmbench {

using LatentSet = std::vector<std::vector<double>>;

// Standard-normal directions shared across sigma values, so alpha(sigma)
// is evaluated on common random numbers: bank[source][sample][draw] is a
// vector of the latent dimension.
struct NoiseBank {
  std::array<std::vector<std::vector<std::vector<double>>>, 2> xi;

  static NoiseBank Make(std::size_t n_real, std::size_t n_fake, std::size_t dim,
                        int draws, std::uint64_t seed) {
    if (draws < 1) throw std::invalid_argument("robustness: draws must be >= 1");
    NoiseBank b;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    const std::array<std::size_t, 2> counts{n_real, n_fake};
    for (int s = 0; s < 2; ++s) {
      b.xi[s].resize(counts[s]);
      for (auto& sample : b.xi[s]) {
        sample.assign(draws, std::vector<double>(dim));
        for (auto& d : sample)
          for (double& v : d) v = n01(rng);
      }
    }
    return b;
  }
};

struct AlphaEstimate {
  double alpha = 0.0;
  // consistency[k][source]; negative when the cell has no support.
  std::array<std::array<double, 2>, 2> consistency{};
  std::array<std::array<std::size_t, 2>, 2> support{};
  int skipped_cells = 0;
};

// `predict` maps a latent vector to a class in {0, 1}. Cells with no
// support are skipped and counted in skipped_cells.
template <class Predict>
AlphaEstimate RobustnessAlpha(Predict&& predict, std::span<const std::vector<double>> real,
                              std::span<const std::vector<double>> fake, double sigma,
                              const NoiseBank& bank) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("robustness: sigma must be >= 0");
  const std::array<std::span<const std::vector<double>>, 2> src{real, fake};
  std::array<std::array<double, 2>, 2> hits{};
  std::array<std::array<double, 2>, 2> trials{};
  AlphaEstimate est;
  std::vector<double> z;
  for (int s = 0; s < 2; ++s) {
    if (bank.xi[s].size() < src[s].size()) {
      throw std::invalid_argument("robustness: noise bank too small");
    }
    for (std::size_t i = 0; i < src[s].size(); ++i) {
      const auto& x = src[s][i];
      const int k = predict(std::span<const double>(x));
      if (k < 0 || k > 1) throw std::invalid_argument("robustness: predict must return 0 or 1");
      ++est.support[k][s];
      for (const auto& xi : bank.xi[s][i]) {
        if (xi.size() != x.size()) throw std::invalid_argument("robustness: dim mismatch");
        z.resize(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) z[j] = x[j] + sigma * xi[j];
        hits[k][s] += predict(std::span<const double>(z)) == k;
        trials[k][s] += 1.0;
      }
    }
  }
  double worst = 1.0;
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s) {
      if (trials[k][s] == 0.0) {
        est.consistency[k][s] = -1.0;
        ++est.skipped_cells;
        continue;
      }
      est.consistency[k][s] = hits[k][s] / trials[k][s];
      worst = std::min(worst, est.consistency[k][s]);
    }
  est.alpha = 1.0 - worst;
  return est;
}

template <class Predict>
AlphaEstimate RobustnessAlpha(Predict&& predict, std::span<const std::vector<double>> real,
                              std::span<const std::vector<double>> fake, double sigma,
                              int draws, std::uint64_t seed) {
  const std::size_t dim = !real.empty() ? real[0].size() : (!fake.empty() ? fake[0].size() : 0);
  const auto bank = NoiseBank::Make(real.size(), fake.size(), dim, draws, seed);
  return RobustnessAlpha(predict, real, fake, sigma, bank);
}

struct SigmaSearch {
  double rel_tol = 0.01;
  int max_iter = 30;
  double initial_hi = 1.0;
  double cap = 1e4;
};

struct SigmaAtAlpha {
  double sigma = 0.0;
  double alpha = 0.0;  // measured at `sigma`
  bool bracketed = true;
  int iterations = 0;
};

// Bisects the inference sigma at which the measured alpha reaches
// `target`. alpha(0) = 0, and the upper end doubles until alpha >= target
// or the cap is hit, in which case the cap is reported with
// bracketed = false. Returns the upper end of the final bracket.
template <class AlphaAt>
SigmaAtAlpha BisectSigma(AlphaAt&& alpha_at, double target, const SigmaSearch& s = {}) {
  if (!(target > 0.0 && target < 1.0)) {
    throw std::invalid_argument("bisect: target alpha must lie in (0, 1)");
  }
  SigmaAtAlpha r;
  double lo = 0.0, hi = s.initial_hi;
  double a_hi = alpha_at(hi);
  while (a_hi < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > s.cap) {
      r.sigma = s.cap;
      r.alpha = alpha_at(s.cap);
      r.bracketed = false;
      return r;
    }
    a_hi = alpha_at(hi);
  }
  while (r.iterations < s.max_iter && hi - lo > s.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    const double a = alpha_at(mid);
    if (a >= target) {
      hi = mid;
      a_hi = a;
    } else {
      lo = mid;
    }
    ++r.iterations;
  }
  r.sigma = hi;
  r.alpha = a_hi;
  return r;
}

// Spearman rank correlation with average ranks for ties.
inline double Spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("Spearman: need two equal-length series of >= 2");
  }
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

struct TradeoffConfig {
  std::vector<double> train_sigmas = {0.0, 2.5, 5.0, 10.0, 15.0, 20.0};
  double alpha = 0.01;
  int draws = 10;
  int trials = 5;
  std::vector<int> head_hidden = {32};
  TrainConfig head_train = [] {
    TrainConfig t;
    t.optimizer = Optimizer::kAdam;
    t.epochs = 60;
    t.lr = 1e-2;
    t.weight_decay = 0.0;
    t.cosine_decay = true;
    return t;
  }();
  SigmaSearch search;
  double consistency_slack = 0.02;
  std::uint64_t seed = 0;
  int jobs = 1;

  void Validate() const {
    if (train_sigmas.empty()) throw std::invalid_argument("tradeoff: empty sigma grid");
    for (double s : train_sigmas) {
      if (!(s >= 0.0)) throw std::invalid_argument("tradeoff: sigma values must be >= 0");
    }
    if (!(alpha > 0.0 && alpha < 0.5)) {
      throw std::invalid_argument("tradeoff: alpha must lie in (0, 0.5)");
    }
    if (draws < 1 || trials < 1) {
      throw std::invalid_argument("tradeoff: draws and trials must be >= 1");
    }
    for (int h : head_hidden) {
      if (h < 1) throw std::invalid_argument("tradeoff: head layer sizes must be >= 1");
    }
    head_train.Validate();
  }
};

struct TradeoffDatasets {
  LatentSet train_real, train_fake;
  LatentSet test_real, test_fake;
};

// Two synthetic latent classes built from two kinds of coordinates. The
// fragile block separates every sample but only by a small gap. The robust
// coordinate has a wide gap, yet a fixed fraction of samples sits deep on
// the other class's side of it. Heads trained without noise lean on the
// fragile block; heads trained with large noise can only use the robust one.
struct SyntheticLatentSpec {
  int fragile_dims = 8;
  double fragile_gap = 0.5;
  double fragile_spread = 0.05;
  double robust_gap = 100.0;
  double robust_spread = 2.0;
  double conflict_rate = 0.05;

  void Validate() const {
    if (fragile_dims < 0) throw std::invalid_argument("synthetic latents: fragile_dims < 0");
    if (!(fragile_gap >= 0.0) || !(robust_gap >= 0.0) || !(fragile_spread >= 0.0) ||
        !(robust_spread >= 0.0)) {
      throw std::invalid_argument("synthetic latents: gaps and spreads must be >= 0");
    }
    if (!(conflict_rate >= 0.0 && conflict_rate < 0.5)) {
      throw std::invalid_argument("synthetic latents: conflict_rate must be in [0, 0.5)");
    }
  }
};

// Class 0 is centred on the negative side, class 1 on the positive side.
inline LatentSet SyntheticLatents(const SyntheticLatentSpec& spec, std::size_t n, int label,
                                  std::uint64_t seed) {
  spec.Validate();
  if (label != 0 && label != 1) throw std::invalid_argument("synthetic latents: label must be 0 or 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double sign = label == 1 ? 1.0 : -1.0;
  LatentSet out(n);
  for (auto& z : out) {
    z.reserve(static_cast<std::size_t>(spec.fragile_dims) + 1);
    for (int j = 0; j < spec.fragile_dims; ++j)
      z.push_back(sign * 0.5 * spec.fragile_gap + spec.fragile_spread * n01(rng));
    const double side = u01(rng) < spec.conflict_rate ? -sign : sign;
    z.push_back(side * 0.5 * spec.robust_gap + spec.robust_spread * n01(rng));
  }
  return out;
}

struct TradeoffRow {
  double train_sigma = 0.0;
  int trial = 0;
  double sigma_at_alpha = 0.0;
  double alpha = 0.0;       // measured at sigma_at_alpha
  double auroc = 0.0;       // head scores on clean latents
  double auroc_noisy = 0.0; // head scores on latents + N(0, sigma_at_alpha^2)
  // The consistency guarantee is about predicted labels, so its check
  // compares AUROCs of the hard decisions. The score-level version is kept
  // for reporting; it can fail when noise reorders confident scores.
  double auroc_decision = 0.0;
  double auroc_noisy_decision = 0.0;
  double consistency_rhs = 0.0;   // auroc_noisy_decision / (1 - alpha) + alpha
  bool consistency_holds = false;
  bool consistency_holds_scores = false;
  bool bracketed = true;
};

struct TradeoffSummary {
  double train_sigma = 0.0;
  double sigma_at_alpha = 0.0;
  double auroc = 0.0;
};

struct TradeoffResult {
  std::vector<TradeoffRow> rows;           // ordered by (sigma index, trial)
  std::vector<TradeoffSummary> summary;    // trial means per training sigma
  double spearman_train_vs_inference = 0.0;
  double spearman_inference_vs_auroc = 0.0;
  bool consistency_all_hold = true;
};

inline RocCurve HeadRoc(const Mlp& head, const LatentSet& real, const LatentSet& fake) {
  std::vector<double> pos, neg;
  for (const auto& z : fake) pos.push_back(head.Probabilities(z)[1]);
  for (const auto& z : real) neg.push_back(head.Probabilities(z)[1]);
  return Roc(pos, neg);
}

inline RocCurve DecisionRoc(const Mlp& head, const LatentSet& real, const LatentSet& fake) {
  std::vector<double> pos, neg;
  for (const auto& z : fake) pos.push_back(head.Predict(z));
  for (const auto& z : real) neg.push_back(head.Predict(z));
  return Roc(pos, neg);
}

// With `decisions` set the predicted label is used as the score.
inline RocCurve NoisyHeadRoc(const Mlp& head, const LatentSet& real, const LatentSet& fake,
                             double sigma, const NoiseBank& bank, bool decisions = false) {
  std::vector<double> pos, neg;
  std::vector<double> z;
  auto push = [&](const LatentSet& set, int s, std::vector<double>& out) {
    for (std::size_t i = 0; i < set.size(); ++i)
      for (const auto& xi : bank.xi[s][i]) {
        z = set[i];
        for (std::size_t j = 0; j < z.size(); ++j) z[j] += sigma * xi[j];
        out.push_back(decisions ? head.Predict(z) : head.Probabilities(z)[1]);
      }
  };
  push(fake, 1, pos);
  push(real, 0, neg);
  return Roc(pos, neg);
}

// Trains one head per (training sigma, trial) on noisy latents, finds the
// inference sigma at which it is (sigma, alpha)-robust on the test latents,
// and records its AUROC.
inline TradeoffResult RunTradeoff(const TradeoffConfig& cfg, const TradeoffDatasets& data) {
  cfg.Validate();
  if (data.train_real.empty() || data.train_fake.empty() || data.test_real.empty() ||
      data.test_fake.empty()) {
    throw std::invalid_argument("tradeoff: all four latent sets must be non-empty");
  }
  const int dim = static_cast<int>(data.train_real[0].size());
  LatentSet xs;
  std::vector<int> ys;
  for (const auto& z : data.train_real) {
    xs.push_back(z);
    ys.push_back(0);
  }
  for (const auto& z : data.train_fake) {
    xs.push_back(z);
    ys.push_back(1);
  }
  const auto bank = NoiseBank::Make(data.test_real.size(), data.test_fake.size(), dim,
                                    cfg.draws, StageSeed(cfg.seed, "tradeoff-noise", 0));

  const std::size_t n_sig = cfg.train_sigmas.size();
  TradeoffResult result;
  result.rows.resize(n_sig * cfg.trials);
  ParallelFor(result.rows.size(), cfg.jobs, [&](std::size_t job) {
    const std::size_t si = job / cfg.trials;
    const int trial = static_cast<int>(job % cfg.trials);
    TradeoffRow& row = result.rows[job];
    row.train_sigma = cfg.train_sigmas[si];
    row.trial = trial;

    std::vector<int> sizes{dim};
    sizes.insert(sizes.end(), cfg.head_hidden.begin(), cfg.head_hidden.end());
    sizes.push_back(2);
    Mlp head(sizes, StageSeed(cfg.seed, "tradeoff-init", trial));
    TrainConfig tc = cfg.head_train;
    tc.input_noise = row.train_sigma;
    tc.seed = StageSeed(cfg.seed, "tradeoff-train", job);
    TrainLayers(head, 0, xs, ys, tc);

    auto predict = [&](std::span<const double> z) { return head.Predict(z); };
    auto alpha_at = [&](double s) {
      return RobustnessAlpha(predict, data.test_real, data.test_fake, s, bank).alpha;
    };
    const SigmaAtAlpha found = BisectSigma(alpha_at, cfg.alpha, cfg.search);
    row.sigma_at_alpha = found.sigma;
    row.alpha = found.alpha;
    row.bracketed = found.bracketed;
    row.auroc = HeadRoc(head, data.test_real, data.test_fake).auroc;
    row.auroc_noisy =
        NoisyHeadRoc(head, data.test_real, data.test_fake, found.sigma, bank).auroc;
    row.auroc_decision = DecisionRoc(head, data.test_real, data.test_fake).auroc;
    row.auroc_noisy_decision =
        NoisyHeadRoc(head, data.test_real, data.test_fake, found.sigma, bank, true).auroc;
    auto rhs = [&](double noisy) {
      return row.alpha < 1.0 ? noisy / (1.0 - row.alpha) + row.alpha : 1.0;
    };
    row.consistency_rhs = rhs(row.auroc_noisy_decision);
    row.consistency_holds = row.auroc_decision <= row.consistency_rhs + cfg.consistency_slack;
    row.consistency_holds_scores = row.auroc <= rhs(row.auroc_noisy) + cfg.consistency_slack;
  });

  std::vector<double> train_s, inf_s, aur;
  for (std::size_t si = 0; si < n_sig; ++si) {
    TradeoffSummary s{cfg.train_sigmas[si], 0.0, 0.0};
    for (int t = 0; t < cfg.trials; ++t) {
      const auto& r = result.rows[si * cfg.trials + t];
      s.sigma_at_alpha += r.sigma_at_alpha / cfg.trials;
      s.auroc += r.auroc / cfg.trials;
      result.consistency_all_hold = result.consistency_all_hold && r.consistency_holds;
    }
    result.summary.push_back(s);
    train_s.push_back(s.train_sigma);
    inf_s.push_back(s.sigma_at_alpha);
    aur.push_back(s.auroc);
  }
  if (n_sig >= 2) {
    result.spearman_train_vs_inference = Spearman(train_s, inf_s);
    result.spearman_inference_vs_auroc = Spearman(inf_s, aur);
  }
  return result;
}

// Latent representation of each image under the classifier's split.
inline LatentSet LatentsOf(const SubstituteClassifier& clf, std::span<const Image> imgs,
                           int jobs = 1) {
  LatentSet out(imgs.size());
  ParallelFor(imgs.size(), jobs, [&](std::size_t i) { out[i] = clf.Latent(imgs[i]); });
  return out;
}

struct LatentSearchResult {
  Image image;
  double latent_distance = 0.0;
  double linf = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Finds an additive pixel perturbation delta whose latent displacement
// ||phi(x) - phi(x + delta)|| matches `eps_target`, by Adam descent on
// (eps_target - ||phi(x) - phi(x + delta)||)^2. Stops once the relative
// gap is within `tol`; otherwise returns the best iterate with
// converged = false.
inline LatentSearchResult LatentPerturbationSearch(const Image& img,
                                                   const SubstituteClassifier& clf,
                                                   double eps_target, double lr, int iters,
                                                   double tol = 0.01,
                                                   std::uint64_t seed = 0) {
  if (!(eps_target >= 0.0)) throw std::invalid_argument("latent search: eps_target >= 0");
  if (!(lr > 0.0) || iters < 1) {
    throw std::invalid_argument("latent search: need lr > 0 and iters >= 1");
  }
  LatentSearchResult best;
  best.image = img;
  if (eps_target == 0.0) {
    best.converged = true;
    return best;
  }
  const auto z0 = clf.Latent(img);
  Image delta(img.width(), img.height(), img.channels());
  {
    // The objective is flat at delta = 0 (zero displacement has no
    // direction), so start from a tiny random perturbation.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1e-3);
    for (double& v : delta.data()) v = n(rng);
  }
  std::vector<double> m(delta.size(), 0.0), v(delta.size(), 0.0);
  best.objective = eps_target * eps_target;
  const double b1 = 0.9, b2 = 0.999;
  for (int it = 1; it <= iters; ++it) {
    Image x = img;
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += delta.data()[i];
    const auto feats = clf.Features(x);
    Mlp::Tape tape;
    clf.net.ForwardFrom(0, feats, &tape);
    const auto& z = tape.acts[clf.split];
    std::vector<double> diff(z.size());
    double dist2 = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      diff[j] = z[j] - z0[j];
      dist2 += diff[j] * diff[j];
    }
    const double dist = std::sqrt(dist2);
    const double gap = eps_target - dist;
    const double obj = gap * gap;
    if (obj < best.objective || it == 1) {
      best.objective = obj;
      best.latent_distance = dist;
      best.image = x;
      best.iterations = it;
      double mx = 0.0;
      for (double d : delta.data()) mx = std::max(mx, std::abs(d));
      best.linf = mx;
    }
    if (std::abs(gap) <= tol * eps_target) {
      best.converged = true;
      break;
    }
    if (dist == 0.0) continue;
    // d obj / d z = -2 gap (z - z0) / ||z - z0||
    for (double& d : diff) d *= -2.0 * gap / dist;
    const auto gfeat = clf.net.BackwardRange(0, clf.split, tape, diff, nullptr);
    const Image gpix = FeatureVjp(x, clf.spec, clf.norm.Backward(gfeat));
    const double c1 = 1.0 - std::pow(b1, it), c2 = 1.0 - std::pow(b2, it);
    for (std::size_t i = 0; i < delta.size(); ++i) {
      const double g = gpix.data()[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      delta.data()[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + 1e-12);
    }
  }
  best.image = Clamp01(std::move(best.image));
  return best;
}

}  // namespace wmbench

#endif  // WMBENCH_TRADEOFF_HPP_
