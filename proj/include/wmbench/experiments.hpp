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

// Experiment recipes shared by the command-line tool and the acceptance
// suite. Every recipe is a pure function of its config and inputs; rows come
// back in a fixed order whatever the number of worker threads.

#ifndef WMBENCH_EXPERIMENTS_HPP_
#define WMBENCH_EXPERIMENTS_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmbench/attacks.hpp"
#include "wmbench/denoise.hpp"
#include "wmbench/image.hpp"
#include "wmbench/metrics.hpp"
#include "wmbench/parallel.hpp"
#include "wmbench/pgd.hpp"
#include "wmbench/seeding.hpp"
#include "wmbench/substitute.hpp"
#include "wmbench/theory.hpp"
#include "wmbench/watermark.hpp"

namespace wmbench {

// Noise for image i is the same for every scheme, t and denoiser, so a clean
// image and its watermarked copy are purified with identical draws.
inline std::uint64_t PurifyNoiseSeed(std::uint64_t seed, std::size_t index) {
  return StageSeed(seed, "purify-noise", index);
}

inline std::vector<double> Confidences(std::span<const Image> imgs, const WatermarkKey& key,
                                       const WatermarkScheme& scheme, int jobs) {
  std::vector<double> out(imgs.size());
  ParallelFor(imgs.size(), jobs,
              [&](std::size_t i) { out[i] = Detect(imgs[i], key, scheme).confidence; });
  return out;
}

inline std::vector<Image> EmbedAll(std::span<const Image> imgs, const WatermarkKey& key,
                                   const WatermarkScheme& scheme, int jobs) {
  std::vector<Image> out(imgs.size());
  ParallelFor(imgs.size(), jobs, [&](std::size_t i) { out[i] = Embed(imgs[i], key, scheme); });
  return out;
}

//------------------------------------------------------------------------------
// Purification study: AUROC and the certified error sum per (scheme,
// denoiser, t).

struct PurificationStudyConfig {
  std::vector<WatermarkScheme> schemes = {WatermarkScheme::Default(SchemeKind::kSsDct),
                                          WatermarkScheme::Default(SchemeKind::kDwtDct),
                                          WatermarkScheme::Default(SchemeKind::kDwtDctSvd)};
  std::vector<Denoiser> denoisers = {WaveletShrinkDenoiser{}, TvChambolleDenoiser{}};
  std::vector<double> ts = {0.1, 0.2, 0.3};
  DiffusionSchedule schedule;
  WatermarkKey key;
  double slack = 0.05;
  std::uint64_t seed = 0;
  int jobs = 1;

  void Validate() const {
    if (schemes.empty() || denoisers.empty() || ts.empty()) {
      throw std::invalid_argument("purification study: empty scheme, denoiser or t list");
    }
    for (const auto& s : schemes) s.Validate();
    for (const auto& d : denoisers) ValidateDenoiser(d);
    for (double t : ts) PurifyStep(schedule, t);
    if (!(slack >= 0.0)) throw std::invalid_argument("purification study: slack must be >= 0");
  }
};

struct PurificationSchemeSummary {
  WatermarkScheme scheme;
  double paired_l2 = 0.0;      // 0-255 scale
  double wasserstein_01 = 0.0; // paired l2 on the [0,1] scale, used in the bound
  double auroc_clean = 0.0;
};

struct PurificationRow {
  WatermarkScheme scheme;
  std::string denoiser;
  double t = 0.0;
  double auroc = 0.0;
  double min_total_error = 0.0;
  double bound = 0.0;
  bool certified = false;  // min_total_error >= bound - slack
};

struct PurificationStudyResult {
  std::vector<PurificationSchemeSummary> schemes;
  std::vector<PurificationRow> rows;  // ordered by (scheme, denoiser, t)
  bool all_certified = true;
};

inline PurificationStudyResult RunPurificationStudy(const PurificationStudyConfig& cfg,
                                                    std::span<const Image> corpus) {
  cfg.Validate();
  if (corpus.empty()) throw std::invalid_argument("purification study: empty corpus");
  const std::size_t n = corpus.size();
  const std::size_t ns = cfg.schemes.size(), nd = cfg.denoisers.size(), nt = cfg.ts.size();

  PurificationStudyResult res;
  std::vector<std::vector<double>> clean_scores(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    std::vector<double> l2(n), pos(n);
    clean_scores[s] = Confidences(corpus, cfg.key, cfg.schemes[s], cfg.jobs);
    ParallelFor(n, cfg.jobs, [&](std::size_t i) {
      const Image wm = Embed(corpus[i], cfg.key, cfg.schemes[s]);
      l2[i] = L2Distance(wm, corpus[i]);
      pos[i] = Detect(wm, cfg.key, cfg.schemes[s]).confidence;
    });
    PurificationSchemeSummary sum;
    sum.scheme = cfg.schemes[s];
    for (double v : l2) sum.wasserstein_01 += v / static_cast<double>(n);
    sum.paired_l2 = 255.0 * sum.wasserstein_01;
    sum.auroc_clean = Roc(pos, clean_scores[s]).auroc;
    res.schemes.push_back(sum);
  }

  res.rows.resize(ns * nd * nt);
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const double t = cfg.ts[ti];
      // pos[s][i], neg[s][i]
      std::vector<std::vector<double>> pos(ns, std::vector<double>(n));
      std::vector<std::vector<double>> neg(ns, std::vector<double>(n));
      ParallelFor(n, cfg.jobs, [&](std::size_t i) {
        const Image& x = corpus[i];
        const Image eps = StandardNormalNoise(x.width(), x.height(), x.channels(),
                                              PurifyNoiseSeed(cfg.seed, i));
        const Image clean = PurifyWithNoise(x, cfg.schedule, t, cfg.denoisers[d], eps);
        for (std::size_t s = 0; s < ns; ++s) {
          neg[s][i] = Detect(clean, cfg.key, cfg.schemes[s]).confidence;
          const Image wm = Embed(x, cfg.key, cfg.schemes[s]);
          const Image pur = PurifyWithNoise(wm, cfg.schedule, t, cfg.denoisers[d], eps);
          pos[s][i] = Detect(pur, cfg.key, cfg.schemes[s]).confidence;
        }
      });
      for (std::size_t s = 0; s < ns; ++s) {
        const RocCurve roc = Roc(pos[s], neg[s]);
        PurificationRow& row = res.rows[(s * nd + d) * nt + ti];
        row.scheme = cfg.schemes[s];
        row.denoiser = DenoiserName(cfg.denoisers[d]);
        row.t = t;
        row.auroc = roc.auroc;
        row.min_total_error = MinTotalError(roc);
        row.bound = theory::PurificationBound({res.schemes[s].wasserstein_01, cfg.schedule, t});
        row.certified = row.min_total_error >= row.bound - cfg.slack;
        res.all_certified = res.all_certified && row.certified;
      }
    }
  }
  return res;
}

//------------------------------------------------------------------------------
// Spoofing study: confidence of the keyed detector before and after mixing
// watermarked noise into clean images.

struct SpoofStudyConfig {
  WatermarkScheme scheme = WatermarkScheme::Default(SchemeKind::kSsDct);
  WatermarkKey key;
  SpoofConfig spoof;  // its seed is replaced per image
  std::uint64_t seed = 0;
  int jobs = 1;

  void Validate() const {
    scheme.Validate();
    spoof.Validate();
  }
};

struct SpoofRow {
  double confidence_before = 0.0;
  double confidence_after = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
};

struct SpoofStudyResult {
  std::vector<SpoofRow> rows;  // one per image, in input order
  std::vector<Image> spoofed;
  double fraction_increased = 0.0;
  bool all_in_range = true;
};

inline SpoofStudyResult RunSpoofStudy(const SpoofStudyConfig& cfg, std::span<const Image> imgs,
                                      bool keep_images = false) {
  cfg.Validate();
  if (imgs.empty()) throw std::invalid_argument("spoof study: empty image set");
  SpoofStudyResult res;
  res.rows.resize(imgs.size());
  if (keep_images) res.spoofed.resize(imgs.size());
  ParallelFor(imgs.size(), cfg.jobs, [&](std::size_t i) {
    const Image& x = imgs[i];
    SpoofConfig sc = cfg.spoof;
    sc.seed = StageSeed(cfg.seed, "spoof-noise", i);
    const Image z = MakeWatermarkedNoise(x.width(), x.height(), x.channels(), cfg.key,
                                         cfg.scheme, sc);
    Image out = Spoof(x, z);
    SpoofRow& r = res.rows[i];
    r.confidence_before = Detect(x, cfg.key, cfg.scheme).confidence;
    r.confidence_after = Detect(out, cfg.key, cfg.scheme).confidence;
    const auto [lo, hi] = std::minmax_element(out.data().begin(), out.data().end());
    r.min_value = *lo;
    r.max_value = *hi;
    if (keep_images) res.spoofed[i] = std::move(out);
  });
  std::size_t up = 0;
  for (const auto& r : res.rows) {
    up += r.confidence_after > r.confidence_before;
    res.all_in_range = res.all_in_range && r.min_value >= 0.0 && r.max_value <= 1.0;
  }
  res.fraction_increased = static_cast<double>(up) / static_cast<double>(res.rows.size());
  return res;
}

//------------------------------------------------------------------------------
// Model-substitution study: train a substitute on watermarked vs. clean
// images, attack held-out watermarked images with PGD and measure how the
// keyed detector responds, next to uniform noise of twice the budget.

struct AdversarialStudyConfig {
  WatermarkScheme scheme = WatermarkScheme::Default(SchemeKind::kSsDct);
  WatermarkKey key;
  SubstituteTrainConfig substitute = [] {
    SubstituteTrainConfig c;
    c.spec = {256, 0};
    c.hidden = {64};
    c.first_layer_init_scale = 0.01;
    c.train.optimizer = Optimizer::kAdam;
    c.train.epochs = 10;
    c.train.lr = 5e-5;
    c.train.weight_decay = 0.0;
    return c;
  }();
  std::vector<double> epsilons = {0.0, 2.0 / 255.0, 4.0 / 255.0, 8.0 / 255.0};
  PgdConfig pgd;          // epsilon is overwritten per grid point
  double uniform_factor = 2.0;
  std::uint64_t seed = 0;
  int jobs = 1;

  void Validate() const {
    scheme.Validate();
    substitute.Validate();
    if (epsilons.empty()) throw std::invalid_argument("adversarial study: empty epsilon grid");
    for (double e : epsilons) {
      PgdConfig p = pgd;
      p.epsilon = e;
      p.Validate();
    }
    if (!(uniform_factor >= 0.0)) {
      throw std::invalid_argument("adversarial study: uniform_factor must be >= 0");
    }
  }
};

struct AdversarialRow {
  double epsilon = 0.0;
  double auroc_pgd = 0.0;
  double auroc_uniform = 0.0;
  double flip_rate = 0.0;       // substitute predicts clean after the attack
  double mean_confidence = 0.0; // keyed detector on attacked images
  double max_linf = 0.0;
  bool box_ok = true;
};

struct AdversarialStudyResult {
  double validation_accuracy = 0.0;
  double auroc_before = 0.0;
  std::vector<AdversarialRow> rows;
  std::vector<std::vector<Image>> attacked;  // per epsilon, when kept
};

inline AdversarialStudyResult RunAdversarialStudy(const AdversarialStudyConfig& cfg,
                                                  const SubstituteClassifier& clf,
                                                  std::span<const Image> eval_marked,
                                                  std::span<const Image> eval_clean,
                                                  bool keep_images = false) {
  cfg.Validate();
  AdversarialStudyResult res;
  res.validation_accuracy = clf.validation_accuracy;
  const std::vector<Image> marked = EmbedAll(eval_marked, cfg.key, cfg.scheme, cfg.jobs);
  const std::vector<double> neg = Confidences(eval_clean, cfg.key, cfg.scheme, cfg.jobs);
  res.auroc_before = Roc(Confidences(marked, cfg.key, cfg.scheme, cfg.jobs), neg).auroc;

  for (double eps : cfg.epsilons) {
    PgdConfig p = cfg.pgd;
    p.epsilon = eps;
    const std::vector<PgdResult> att = PgdAttackSeries(marked, clf, p, 0);
    AdversarialRow row;
    row.epsilon = eps;
    std::vector<Image> imgs, uni(marked.size());
    std::size_t flips = 0;
    for (std::size_t i = 0; i < att.size(); ++i) {
      imgs.push_back(att[i].image);
      flips += clf.Predict(att[i].image) == 0;
      const auto x0 = marked[i].data();
      const auto xa = att[i].image.data();
      for (std::size_t j = 0; j < xa.size(); ++j) {
        const double d = std::abs(xa[j] - x0[j]);
        row.max_linf = std::max(row.max_linf, d);
        row.box_ok = row.box_ok && xa[j] >= 0.0 && xa[j] <= 1.0 && d <= eps + 1e-9;
      }
    }
    ParallelFor(marked.size(), cfg.jobs, [&](std::size_t i) {
      uni[i] = UniformNoiseAttack(marked[i], cfg.uniform_factor * eps,
                                  StageSeed(cfg.seed, "uniform-noise", i));
    });
    const std::vector<double> pos = Confidences(imgs, cfg.key, cfg.scheme, cfg.jobs);
    row.auroc_pgd = Roc(pos, neg).auroc;
    row.auroc_uniform = Roc(Confidences(uni, cfg.key, cfg.scheme, cfg.jobs), neg).auroc;
    row.flip_rate = static_cast<double>(flips) / static_cast<double>(att.size());
    for (double c : pos) row.mean_confidence += c / static_cast<double>(pos.size());
    res.rows.push_back(row);
    if (keep_images) res.attacked.push_back(std::move(imgs));
  }
  return res;
}

// `train` images are used both as the clean class and, once watermarked, as
// the watermarked class. Evaluation uses `eval_marked` (to be watermarked
// and attacked) against `eval_clean`.
inline AdversarialStudyResult RunAdversarialStudy(const AdversarialStudyConfig& cfg,
                                                  std::span<const Image> train,
                                                  std::span<const Image> eval_marked,
                                                  std::span<const Image> eval_clean,
                                                  bool keep_images = false) {
  cfg.Validate();
  if (eval_marked.empty() || eval_clean.empty()) {
    throw std::invalid_argument("adversarial study: empty evaluation set");
  }
  SubstituteTrainConfig sc = cfg.substitute;
  sc.train.seed = StageSeed(cfg.seed, "substitute-train", 0);
  sc.jobs = cfg.jobs;
  const std::vector<Image> train_wm = EmbedAll(train, cfg.key, cfg.scheme, cfg.jobs);
  const SubstituteClassifier clf = TrainSubstitute(train_wm, train, sc);
  return RunAdversarialStudy(cfg, clf, eval_marked, eval_clean, keep_images);
}

}  // namespace wmbench

#endif  // WMBENCH_EXPERIMENTS_HPP_
