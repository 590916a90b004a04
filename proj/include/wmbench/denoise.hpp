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
// Classical denoisers used as the reverse step of the purification attack.
// Each one receives the known noise level so adaptive variants can set their
// own thresholds, the way a diffusion denoiser is conditioned on its step.

#ifndef WMBENCH_DENOISE_HPP_
#define WMBENCH_DENOISE_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "wmbench/filters.hpp"
#include "wmbench/image.hpp"
#include "wmbench/transforms.hpp"

namespace wmbench {

struct IdentityDenoiser {};

struct BlurDenoiser {
  int ksize = 5;
  double sigma = 1.1;
};

struct MedianDenoiser {
  int ksize = 3;
};

// Soft thresholding of a multi-level Haar decomposition. Without an explicit
// threshold each detail subband gets the BayesShrink threshold
// sigma_n^2 / sigma_x.
struct WaveletShrinkDenoiser {
  std::optional<double> threshold;
  int levels = 4;
};

// Chambolle's projection algorithm for ROF total-variation denoising. The
// default weight equals the noise standard deviation.
struct TvChambolleDenoiser {
  std::optional<double> weight;
  int iters = 50;
};

using Denoiser = std::variant<IdentityDenoiser, BlurDenoiser, MedianDenoiser,
                              WaveletShrinkDenoiser, TvChambolleDenoiser>;

inline std::string DenoiserName(const Denoiser& d) {
  struct V {
    std::string operator()(const IdentityDenoiser&) const { return "identity"; }
    std::string operator()(const BlurDenoiser&) const { return "blur"; }
    std::string operator()(const MedianDenoiser&) const { return "median"; }
    std::string operator()(const WaveletShrinkDenoiser&) const { return "wavelet"; }
    std::string operator()(const TvChambolleDenoiser&) const { return "tv"; }
  };
  return std::visit(V{}, d);
}

inline void ValidateDenoiser(const Denoiser& d) {
  struct V {
    void operator()(const IdentityDenoiser&) const {}
    void operator()(const BlurDenoiser& b) const {
      if (b.ksize < 3 || b.ksize % 2 == 0 || !(b.sigma > 0.0)) {
        throw std::invalid_argument("blur: ksize must be odd >= 3, sigma > 0");
      }
    }
    void operator()(const MedianDenoiser& m) const {
      if (m.ksize < 3 || m.ksize % 2 == 0) {
        throw std::invalid_argument("median: ksize must be odd >= 3");
      }
    }
    void operator()(const WaveletShrinkDenoiser& w) const {
      if ((w.threshold && !(*w.threshold >= 0.0)) || w.levels < 1 ||
          w.levels > 8) {
        throw std::invalid_argument("wavelet: threshold >= 0, levels in 1..8");
      }
    }
    void operator()(const TvChambolleDenoiser& t) const {
      if ((t.weight && !(*t.weight >= 0.0)) || t.iters < 1) {
        throw std::invalid_argument("tv: weight >= 0, iters >= 1");
      }
    }
  };
  std::visit(V{}, d);
}

namespace detail {

inline double SoftThreshold(double v, double t) {
  return v > t ? v - t : (v < -t ? v + t : 0.0);
}

// Median absolute deviation estimate of the noise level from the finest
// diagonal subband.
inline double MadSigma(const Image& hh) {
  std::vector<double> a(hh.data().begin(), hh.data().end());
  for (double& v : a) v = std::abs(v);
  std::nth_element(a.begin(), a.begin() + a.size() / 2, a.end());
  return a[a.size() / 2] / 0.6745;
}

inline void ShrinkBand(Image& band, std::optional<double> fixed, double sigma_n) {
  double t;
  if (fixed) {
    t = *fixed;
  } else {
    double ms = 0.0;
    for (double v : band.data()) ms += v * v;
    ms /= static_cast<double>(band.size());
    const double sx = std::sqrt(std::max(ms - sigma_n * sigma_n, 0.0));
    t = sx > 0.0 ? sigma_n * sigma_n / sx
                 : std::numeric_limits<double>::infinity();
  }
  for (double& v : band.data()) v = SoftThreshold(v, t);
}

inline Image WaveletShrinkPlane(const Image& plane,
                                const WaveletShrinkDenoiser& cfg,
                                double noise_sigma) {
  const int m = 1 << cfg.levels;
  const int w = (plane.width() + m - 1) / m * m;
  const int h = (plane.height() + m - 1) / m * m;
  std::vector<HaarSubbands> levels;
  Image ll = PadSymmetric(plane, w, h);
  for (int l = 0; l < cfg.levels; ++l) {
    levels.push_back(HaarDwt(ll, PadPolicy::kStrict));
    ll = levels.back().ll;
  }
  double sigma_n = noise_sigma;
  if (!cfg.threshold && !(sigma_n > 0.0)) sigma_n = MadSigma(levels[0].hh);
  for (auto& s : levels) {
    ShrinkBand(s.lh, cfg.threshold, sigma_n);
    ShrinkBand(s.hl, cfg.threshold, sigma_n);
    ShrinkBand(s.hh, cfg.threshold, sigma_n);
  }
  for (int l = cfg.levels - 1; l >= 0; --l) {
    levels[l].ll = ll;
    ll = HaarIdwt(levels[l]);
  }
  return Crop(ll, plane.width(), plane.height());
}

inline Image TvChambollePlane(const Image& f, double weight, int iters) {
  if (weight <= 0.0) return f;
  const int w = f.width(), h = f.height();
  const std::size_t n = f.size();
  std::vector<double> px(n, 0.0), py(n, 0.0), gx(n), gy(n);
  Image out = f;
  const double tau = 0.25;
  for (int it = 0; it < iters; ++it) {
    if (it > 0) {
      // out = f + div(p), backward differences
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          double d = -px[i] - py[i];
          if (x > 0) d += px[i - 1];
          if (y > 0) d += py[i - w];
          out.data()[i] = f.data()[i] + d;
        }
    }
    const auto o = out.data();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        gx[i] = x + 1 < w ? o[i + 1] - o[i] : 0.0;
        gy[i] = y + 1 < h ? o[i + w] - o[i] : 0.0;
      }
    for (std::size_t i = 0; i < n; ++i) {
      const double norm =
          1.0 + std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]) * tau / weight;
      px[i] = (px[i] - tau * gx[i]) / norm;
      py[i] = (py[i] - tau * gy[i]) / norm;
    }
  }
  return out;
}

}  // namespace detail

inline Image Denoise(const Image& img, const Denoiser& den,
                     double noise_sigma) {
  ValidateDenoiser(den);
  struct V {
    const Image& img;
    double sigma;
    Image operator()(const IdentityDenoiser&) const { return img; }
    Image operator()(const BlurDenoiser& b) const {
      return GaussianBlur(img, b.ksize, b.sigma);
    }
    Image operator()(const MedianDenoiser& m) const {
      return MedianFilter(img, m.ksize);
    }
    Image operator()(const WaveletShrinkDenoiser& w) const {
      return MapChannels(img, [&](const Image& p) {
        return detail::WaveletShrinkPlane(p, w, sigma);
      });
    }
    Image operator()(const TvChambolleDenoiser& t) const {
      const double weight = t.weight ? *t.weight : sigma;
      return MapChannels(img, [&](const Image& p) {
        return detail::TvChambollePlane(p, weight, t.iters);
      });
    }
  };
  return std::visit(V{img, noise_sigma}, den);
}

}  // namespace wmbench

#endif  // WMBENCH_DENOISE_HPP_
