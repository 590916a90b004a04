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
// l-infinity PGD against the substitute classifier and transfer of the
// resulting perturbations to the keyed detector.

#ifndef WMBENCH_PGD_HPP_
#define WMBENCH_PGD_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "wmbench/image.hpp"
#include "wmbench/metrics.hpp"
#include "wmbench/parallel.hpp"
#include "wmbench/substitute.hpp"
#include "wmbench/watermark.hpp"

namespace wmbench {

struct PgdConfig {
  double epsilon = 8.0 / 255.0;
  int steps = 300;
  std::optional<double> step_size;  // default 0.05 * epsilon
  bool warm_start = true;
  int warmup_count = 10;

  double step() const { return step_size ? *step_size : 0.05 * epsilon; }

  void Validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
      throw std::invalid_argument("pgd: epsilon must lie in [0, 1]");
    }
    if (steps < 1) throw std::invalid_argument("pgd: steps must be >= 1");
    if (warmup_count < 0) throw std::invalid_argument("pgd: warmup_count >= 0");
    if (epsilon > 0.0 && !(step() > 0.0 && step() <= epsilon)) {
      throw std::invalid_argument("pgd: need 0 < step_size <= epsilon");
    }
  }
};

struct PgdResult {
  Image image;
  Image delta;  // image - input
};

namespace detail {

// Projects x0 + d onto [x0 - eps, x0 + eps] intersected with [0, 1].
inline void ProjectDelta(std::span<const double> x0, std::span<double> d, double eps) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double lo = std::max(-eps, -x0[i]);
    const double hi = std::min(eps, 1.0 - x0[i]);
    d[i] = std::clamp(d[i], lo, hi);
  }
}

}  // namespace detail

// Signed-gradient descent of the cross-entropy toward `target_label`,
// starting from `init_delta` when given (projected into the feasible box).
// With two classes, descending toward one label follows the same signed
// gradient as ascending the loss of the other.
inline PgdResult PgdAttack(const Image& x0, const SubstituteClassifier& clf,
                           const PgdConfig& cfg, int target_label,
                           const Image* init_delta = nullptr) {
  cfg.Validate();
  Image delta(x0.width(), x0.height(), x0.channels());
  if (cfg.epsilon == 0.0) return {x0, delta};
  if (init_delta) {
    RequireSameShape(x0, *init_delta, "pgd warm start");
    delta = *init_delta;
  }
  const auto x0d = x0.data();
  detail::ProjectDelta(x0d, delta.data(), cfg.epsilon);
  const double step = cfg.step();
  Image x = x0, grad;
  for (int it = 0; it < cfg.steps; ++it) {
    auto xd = x.data();
    const auto dd = delta.data();
    for (std::size_t i = 0; i < xd.size(); ++i) xd[i] = x0d[i] + dd[i];
    clf.LossAndPixelGradient(x, target_label, &grad);
    const auto g = grad.data();
    auto dm = delta.data();
    for (std::size_t i = 0; i < dm.size(); ++i) {
      dm[i] -= step * (g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0));
    }
    detail::ProjectDelta(x0d, dm, cfg.epsilon);
  }
  auto xd = x.data();
  const auto dd = delta.data();
  for (std::size_t i = 0; i < xd.size(); ++i) xd[i] = x0d[i] + dd[i];
  return {std::move(x), std::move(delta)};
}

// Attacks a sequence of images in order. With warm start, each attack
// begins from the previous image's final perturbation, and the first
// warmup_count images are attacked once beforehand with results discarded
// so the first reported image already starts warm.
inline std::vector<PgdResult> PgdAttackSeries(std::span<const Image> images,
                                              const SubstituteClassifier& clf,
                                              const PgdConfig& cfg, int target_label) {
  cfg.Validate();
  std::vector<PgdResult> out;
  out.reserve(images.size());
  if (images.empty()) return out;
  std::optional<Image> carry;
  auto run = [&](const Image& img) {
    const Image* init =
        cfg.warm_start && carry && carry->SameShape(img) ? &*carry : nullptr;
    PgdResult r = PgdAttack(img, clf, cfg, target_label, init);
    if (cfg.warm_start) carry = r.delta;
    return r;
  };
  if (cfg.warm_start && cfg.epsilon > 0.0) {
    const std::size_t warm = std::min<std::size_t>(cfg.warmup_count, images.size());
    for (std::size_t i = 0; i < warm; ++i) run(images[i]);
  }
  for (const auto& img : images) out.push_back(run(img));
  return out;
}

// Adds i.i.d. U[-magnitude, magnitude] noise and clamps to [0, 1].
inline Image UniformNoiseAttack(const Image& img, double magnitude,
                                std::uint64_t seed) {
  if (!(magnitude >= 0.0)) throw std::invalid_argument("uniform noise: magnitude >= 0");
  Image out = img;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-magnitude, magnitude);
  for (double& v : out.data()) v += u(rng);
  return Clamp01(std::move(out));
}

// AUROC of the keyed detector on attacked watermarked images (positives)
// against clean images (negatives).
inline RocCurve TransferEval(std::span<const Image> attacked_watermarked,
                             std::span<const Image> clean, const WatermarkKey& key,
                             const WatermarkScheme& scheme, int jobs = 1) {
  if (attacked_watermarked.empty() || clean.empty()) {
    throw std::invalid_argument("transfer_eval: empty image set");
  }
  std::vector<double> pos(attacked_watermarked.size()), neg(clean.size());
  ParallelFor(pos.size(), jobs, [&](std::size_t i) {
    pos[i] = Detect(attacked_watermarked[i], key, scheme).confidence;
  });
  ParallelFor(neg.size(), jobs, [&](std::size_t i) {
    neg[i] = Detect(clean[i], key, scheme).confidence;
  });
  return Roc(pos, neg);
}

}  // namespace wmbench

#endif  // WMBENCH_PGD_HPP_
