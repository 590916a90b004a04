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
// Hand-crafted image features for the substitute classifier, with an exact
// vector-Jacobian product so PGD can push gradients back to pixels.
//
// Layout of a feature vector:
//   [0, target^2)            area-averaged luma on a target x target grid
//   [target^2, target^2 + k) mean |DCT8| over all 8x8 luma blocks at the
//                            first k zig-zag positions

#ifndef WMBENCH_FEATURES_HPP_
#define WMBENCH_FEATURES_HPP_

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "wmbench/image.hpp"
#include "wmbench/transforms.hpp"

namespace wmbench {

struct FeatureSpec {
  int target = 32;
  int dct_k = 64;

  int dim() const { return target * target + dct_k; }

  void Validate() const {
    if (target < 1 || target > 256) {
      throw std::invalid_argument("features: target must be in [1, 256]");
    }
    if (dct_k < 0 || dct_k > 64) {
      throw std::invalid_argument("features: dct_k must be in [0, 64]");
    }
  }
};

namespace detail {

// Cell index of pixel coordinate p along an axis of length n split into t
// cells.
inline int CellOf(int p, int n, int t) {
  return static_cast<int>(static_cast<long long>(p) * t / n);
}

inline void RequireFeatureGeometry(const Image& img, const FeatureSpec& spec) {
  spec.Validate();
  if (img.width() < spec.target || img.height() < spec.target) {
    throw std::invalid_argument("features: image smaller than target grid");
  }
  if (spec.dct_k > 0 && (img.width() < 8 || img.height() < 8)) {
    throw std::invalid_argument("features: image smaller than one DCT block");
  }
}

}  // namespace detail

// Raw (unnormalized) features.
inline std::vector<double> ExtractFeatures(const Image& img,
                                           const FeatureSpec& spec) {
  detail::RequireFeatureGeometry(img, spec);
  const Image y = ToLuma(img);
  const int w = y.width(), h = y.height(), t = spec.target;
  std::vector<double> f(spec.dim(), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(t) * t, 0);
  for (int py = 0; py < h; ++py) {
    const int cy = detail::CellOf(py, h, t);
    for (int px = 0; px < w; ++px) {
      const int cell = cy * t + detail::CellOf(px, w, t);
      f[cell] += y.at(px, py);
      ++counts[cell];
    }
  }
  for (int i = 0; i < t * t; ++i) f[i] /= counts[i];

  if (spec.dct_k > 0) {
    const int bw = w / 8, bh = h / 8;
    double* mag = f.data() + t * t;
    std::array<double, 64> b{};
    for (int by = 0; by < bh; ++by)
      for (int bx = 0; bx < bw; ++bx) {
        for (int j = 0; j < 8; ++j)
          for (int i = 0; i < 8; ++i) b[j * 8 + i] = y.at(bx * 8 + i, by * 8 + j);
        Dct8Block(b, false);
        for (int z = 0; z < spec.dct_k; ++z) mag[z] += std::abs(b[kZigZag[z]]);
      }
    for (int z = 0; z < spec.dct_k; ++z) mag[z] /= static_cast<double>(bw * bh);
  }
  return f;
}

// Pulls a gradient with respect to the raw features back to the pixels of
// `img`. |c| contributes sign(c) (0 at c == 0). For RGB inputs each channel
// receives its luma weight times the luma gradient.
inline Image FeatureVjp(const Image& img, const FeatureSpec& spec,
                        std::span<const double> grad) {
  detail::RequireFeatureGeometry(img, spec);
  if (grad.size() != static_cast<std::size_t>(spec.dim())) {
    throw std::invalid_argument("FeatureVjp: gradient length mismatch");
  }
  const Image y = ToLuma(img);
  const int w = y.width(), h = y.height(), t = spec.target;
  Image gy(w, h, 1);

  std::vector<int> counts(static_cast<std::size_t>(t) * t, 0);
  for (int py = 0; py < h; ++py)
    for (int px = 0; px < w; ++px)
      ++counts[detail::CellOf(py, h, t) * t + detail::CellOf(px, w, t)];
  for (int py = 0; py < h; ++py) {
    const int cy = detail::CellOf(py, h, t);
    for (int px = 0; px < w; ++px) {
      const int cell = cy * t + detail::CellOf(px, w, t);
      gy.at(px, py) = grad[cell] / counts[cell];
    }
  }

  if (spec.dct_k > 0) {
    const int bw = w / 8, bh = h / 8;
    const double inv_blocks = 1.0 / static_cast<double>(bw * bh);
    const double* gmag = grad.data() + t * t;
    std::array<double, 64> b{}, g{};
    for (int by = 0; by < bh; ++by)
      for (int bx = 0; bx < bw; ++bx) {
        for (int j = 0; j < 8; ++j)
          for (int i = 0; i < 8; ++i) b[j * 8 + i] = y.at(bx * 8 + i, by * 8 + j);
        Dct8Block(b, false);
        g.fill(0.0);
        for (int z = 0; z < spec.dct_k; ++z) {
          const double c = b[kZigZag[z]];
          const double s = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
          g[kZigZag[z]] = gmag[z] * s * inv_blocks;
        }
        // The transform is orthonormal, so its adjoint is its inverse.
        Dct8Block(g, true);
        for (int j = 0; j < 8; ++j)
          for (int i = 0; i < 8; ++i) gy.at(bx * 8 + i, by * 8 + j) += g[j * 8 + i];
      }
  }

  if (img.channels() == 1) return gy;
  Image out(w, h, 3);
  auto o = out.data();
  const auto src = gy.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    o[3 * i] = kLumaR * src[i];
    o[3 * i + 1] = kLumaG * src[i];
    o[3 * i + 2] = kLumaB * src[i];
  }
  return out;
}

// Per-feature standardization frozen at training time.
struct FeatureNorm {
  std::vector<double> mean;
  std::vector<double> stddev;

  static constexpr double kMinStd = 1e-8;

  static FeatureNorm Fit(std::span<const std::vector<double>> rows) {
    if (rows.empty()) throw std::invalid_argument("FeatureNorm: no rows");
    const std::size_t d = rows[0].size();
    FeatureNorm n;
    n.mean.assign(d, 0.0);
    n.stddev.assign(d, 0.0);
    for (const auto& r : rows) {
      if (r.size() != d) throw std::invalid_argument("FeatureNorm: ragged rows");
      for (std::size_t i = 0; i < d; ++i) n.mean[i] += r[i];
    }
    for (double& m : n.mean) m /= static_cast<double>(rows.size());
    for (const auto& r : rows)
      for (std::size_t i = 0; i < d; ++i) {
        const double dv = r[i] - n.mean[i];
        n.stddev[i] += dv * dv;
      }
    for (double& s : n.stddev) {
      s = std::sqrt(s / static_cast<double>(rows.size()));
      if (!(s > kMinStd)) s = 1.0;  // constant feature: pass through centered
    }
    return n;
  }

  std::vector<double> Apply(std::span<const double> raw) const {
    if (raw.size() != mean.size()) {
      throw std::invalid_argument("FeatureNorm: dimension mismatch");
    }
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - mean[i]) / stddev[i];
    return out;
  }

  // Gradient w.r.t. normalized features -> gradient w.r.t. raw features.
  std::vector<double> Backward(std::span<const double> g) const {
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] / stddev[i];
    return out;
  }
};

}  // namespace wmbench

#endif  // WMBENCH_FEATURES_HPP_
