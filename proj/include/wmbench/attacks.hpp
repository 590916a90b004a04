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
// Diffusion purification, watermark spoofing and post-attack mitigations.

#ifndef WMBENCH_ATTACKS_HPP_
#define WMBENCH_ATTACKS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "wmbench/denoise.hpp"
#include "wmbench/filters.hpp"
#include "wmbench/image.hpp"
#include "wmbench/transforms.hpp"
#include "wmbench/watermark.hpp"

namespace wmbench {

// Linear beta schedule; alphas_bar[0] = 1 and
// alphas_bar[k] = prod_{j<=k} (1 - beta_j).
class DiffusionSchedule {
 public:
  static constexpr double kDefaultBetaStart = 0.0008;
  static constexpr double kDefaultBetaEnd = 0.0120;

  DiffusionSchedule() : DiffusionSchedule(1000, kDefaultBetaStart, kDefaultBetaEnd) {}

  DiffusionSchedule(int n_steps, double beta_start, double beta_end)
      : n_steps_(n_steps), beta_start_(beta_start), beta_end_(beta_end) {
    if (n_steps < 1) throw std::invalid_argument("DiffusionSchedule: n_steps >= 1");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
      throw std::invalid_argument(
          "DiffusionSchedule: need 0 < beta_start <= beta_end < 1");
    }
    alphas_bar_.resize(n_steps + 1);
    alphas_bar_[0] = 1.0;
    for (int j = 1; j <= n_steps; ++j) {
      alphas_bar_[j] = alphas_bar_[j - 1] * (1.0 - beta(j));
    }
  }

  int n_steps() const { return n_steps_; }
  double beta_start() const { return beta_start_; }
  double beta_end() const { return beta_end_; }

  // 1-based step index.
  double beta(int j) const {
    if (n_steps_ == 1) return beta_start_;
    return beta_start_ +
           (beta_end_ - beta_start_) * (j - 1) / static_cast<double>(n_steps_ - 1);
  }

  const std::vector<double>& alphas_bar() const { return alphas_bar_; }
  double alpha_bar_at_step(int k) const { return alphas_bar_.at(k); }

  // Continuous t in [0,1] maps to step round(t * n_steps).
  int StepFor(double t) const {
    return static_cast<int>(std::lround(t * n_steps_));
  }

 private:
  int n_steps_;
  double beta_start_;
  double beta_end_;
  std::vector<double> alphas_bar_;
};

// Standard deviation of the noise left after dividing x_t by sqrt(alpha_bar).
inline double RescaledNoiseSigma(double alpha_bar) {
  return std::sqrt((1.0 - alpha_bar) / alpha_bar);
}

inline int PurifyStep(const DiffusionSchedule& sched, double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw std::invalid_argument("purify: t must lie in (0, 1)");
  }
  const int k = sched.StepFor(t);
  if (k < 1) throw std::invalid_argument("purify: t rounds to step 0");
  return k;
}

// Purification with caller-supplied standard-normal noise `eps` (same shape
// as img): x_t = sqrt(ab) x + sqrt(1-ab) eps, rescaled by 1/sqrt(ab),
// denoised and clamped.
inline Image PurifyWithNoise(const Image& img, const DiffusionSchedule& sched,
                             double t, const Denoiser& den, const Image& eps) {
  RequireSameShape(img, eps, "purify");
  const int k = PurifyStep(sched, t);
  const double ab = sched.alpha_bar_at_step(k);
  const double sa = std::sqrt(ab), sn = std::sqrt(1.0 - ab);
  Image xt = img;
  auto d = xt.data();
  const auto e = eps.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (sa * d[i] + sn * e[i]) / sa;
  return Clamp01(Denoise(xt, den, RescaledNoiseSigma(ab)));
}

inline Image StandardNormalNoise(int width, int height, int channels,
                                 std::uint64_t seed) {
  Image eps(width, height, channels);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (double& v : eps.data()) v = n01(rng);
  return eps;
}

inline Image Purify(const Image& img, const DiffusionSchedule& sched, double t,
                    const Denoiser& den, std::uint64_t seed) {
  PurifyStep(sched, t);
  ValidateDenoiser(den);
  return PurifyWithNoise(
      img, sched, t, den,
      StandardNormalNoise(img.width(), img.height(), img.channels(), seed));
}

// Kernel size k with sigma = 0.15 k + 0.35.
inline Image MitigateBlur(const Image& img, int ksize = 5) {
  if (ksize < 3 || ksize % 2 == 0) {
    throw std::invalid_argument("blur mitigation: k must be odd and >= 3");
  }
  return Clamp01(GaussianBlur(img, ksize, 0.15 * ksize + 0.35));
}

inline constexpr std::array<int, 64> kJpegLumaTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

// Luminance table scaled with the usual quality mapping; entry [v*8+u].
inline std::array<int, 64> JpegQuantTable(int quality) {
  if (quality < 1 || quality > 100) {
    throw std::invalid_argument("jpeg mitigation: quality must be in [1, 100]");
  }
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> q{};
  for (int i = 0; i < 64; ++i) {
    q[i] = std::clamp((kJpegLumaTable[i] * scale + 50) / 100, 1, 255);
  }
  return q;
}

// Per channel: level shift, 8x8 DCT, quantize/dequantize with the scaled
// luminance table, inverse DCT, clamp.
inline Image MitigateJpeg(const Image& img, int quality) {
  const auto table = JpegQuantTable(quality);
  return MapChannels(img, [&](const Image& plane) {
    Image shifted = plane;
    for (double& v : shifted.data()) v = v * 255.0 - 128.0;
    BlockDct dct = BlockDct8(shifted);
    for (int b = 0; b < dct.block_count(); ++b)
      for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
          const double q = table[v * 8 + u];
          dct.at(b, u, v) = std::round(dct.at(b, u, v) / q) * q;
        }
    Image out = BlockIdct8(dct);
    for (double& v : out.data()) v = std::clamp((v + 128.0) / 255.0, 0.0, 1.0);
    return out;
  });
}

struct SpoofConfig {
  double mixup_alpha = 0.3;
  double std_lo = 0.1;
  double std_hi = 0.5;
  std::uint64_t seed = 0;

  void Validate() const {
    if (!(mixup_alpha > 0.0 && mixup_alpha <= 1.0)) {
      throw std::invalid_argument("spoof: mixup_alpha must be in (0, 1]");
    }
    if (!(std_lo >= 0.0 && std_lo <= std_hi)) {
      throw std::invalid_argument("spoof: need 0 <= std_lo <= std_hi");
    }
  }
};

// Gaussian noise with per-sample standard deviation ~ U(std_lo, std_hi),
// min-max normalized to [0,1], watermarked, then scaled by mixup_alpha.
inline Image MakeWatermarkedNoise(int width, int height, int channels,
                                  const WatermarkKey& key,
                                  const WatermarkScheme& scheme,
                                  const SpoofConfig& cfg) {
  cfg.Validate();
  std::uint64_t seed = cfg.seed;
  for (;;) {
    Image z(width, height, channels);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sd(cfg.std_lo, cfg.std_hi);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (double& v : z.data()) {
      const double s = sd(rng);
      v = s * n01(rng);
    }
    const auto [lo, hi] = std::minmax_element(z.data().begin(), z.data().end());
    const double zmin = *lo;
    const double range = *hi - zmin;
    if (!(range > 0.0)) {
      ++seed;  // degenerate draw: all samples equal
      continue;
    }
    for (double& v : z.data()) v = (v - zmin) / range;
    Image marked = Embed(z, key, scheme);
    for (double& v : marked.data()) v *= cfg.mixup_alpha;
    return marked;
  }
}

// x' = (1 - max z) x / max x + z. A black image returns z unchanged.
inline Image Spoof(const Image& img, const Image& z) {
  RequireSameShape(img, z, "spoof");
  const double zmax = *std::max_element(z.data().begin(), z.data().end());
  const double xmax = *std::max_element(img.data().begin(), img.data().end());
  if (!(xmax > 0.0)) return z;
  const double gamma = 1.0 - zmax;
  Image out = img;
  auto o = out.data();
  const auto zd = z.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = gamma * o[i] / xmax + zd[i];
  return Clamp01(std::move(out));
}

}  // namespace wmbench

#endif  // WMBENCH_ATTACKS_HPP_
