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
// Deterministic synthetic corpus with natural-image statistics: smooth
// gradients, soft blobs, hard-edged shapes and filtered-noise texture.

#ifndef WMBENCH_SYNTH_HPP_
#define WMBENCH_SYNTH_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "wmbench/filters.hpp"
#include "wmbench/image.hpp"
#include "wmbench/seeding.hpp"

namespace wmbench {

inline constexpr int kSynthSize = 256;

namespace detail {

inline double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Image TexturePlane(std::mt19937_64& rng, int size, double blur_sigma) {
  Image noise(size, size, 1);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (double& v : noise.data()) v = n01(rng);
  const int radius = static_cast<int>(std::ceil(3.0 * blur_sigma));
  Image t = SeparableFilter(noise, GaussianKernel1D(radius, blur_sigma));
  double ss = 0.0;
  for (double v : t.data()) ss += v * v;
  const double sd = std::sqrt(ss / static_cast<double>(t.size()));
  for (double& v : t.data()) v /= sd;
  return t;
}

}  // namespace detail

// One 256x256 RGB image; identical (seed, index) pairs give identical pixels.
inline Image SynthNaturalImage(std::uint64_t seed, std::uint64_t index,
                               int size = kSynthSize) {
  std::mt19937_64 rng(StageSeed(seed, "synth-natural", index));
  using detail::Uniform;
  Image img(size, size, 3);

  double base[3], grad[3];
  for (int c = 0; c < 3; ++c) base[c] = Uniform(rng, 0.3, 0.7);
  const double theta = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double slope = Uniform(rng, 0.05, 0.35);
  for (int c = 0; c < 3; ++c) grad[c] = slope * Uniform(rng, 0.7, 1.3);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double t = (x / double(size) - 0.5) * std::cos(theta) +
                       (y / double(size) - 0.5) * std::sin(theta);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = base[c] + grad[c] * t;
    }

  const int blobs = static_cast<int>(Uniform(rng, 2, 6));
  for (int b = 0; b < blobs; ++b) {
    const double cx = Uniform(rng, 0, size), cy = Uniform(rng, 0, size);
    const double rad = Uniform(rng, 20, 80);
    double amp[3];
    for (double& a : amp) a = Uniform(rng, -0.2, 0.2);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double d2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (rad * rad);
        const double g = std::exp(-0.5 * d2);
        for (int c = 0; c < 3; ++c) img.at(x, y, c) += amp[c] * g;
      }
  }

  const int shapes = static_cast<int>(Uniform(rng, 3, 9));
  for (int s = 0; s < shapes; ++s) {
    const bool rect = Uniform(rng, 0, 1) < 0.5;
    const double cx = Uniform(rng, 0, size), cy = Uniform(rng, 0, size);
    const double rx = Uniform(rng, 10, 60), ry = Uniform(rng, 10, 60);
    const double alpha = Uniform(rng, 0.4, 0.9);
    double col[3];
    for (double& v : col) v = Uniform(rng, 0.1, 0.9);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        // signed distance-ish in pixels, negative inside; 1px soft edge
        double d;
        if (rect) {
          d = std::max(std::abs(x - cx) - rx, std::abs(y - cy) - ry);
        } else {
          const double nx = (x - cx) / rx, ny = (y - cy) / ry;
          d = (std::sqrt(nx * nx + ny * ny) - 1.0) * std::min(rx, ry);
        }
        const double cover = std::clamp(0.5 - d, 0.0, 1.0) * alpha;
        if (cover <= 0.0) continue;
        for (int c = 0; c < 3; ++c) {
          img.at(x, y, c) += cover * (col[c] - img.at(x, y, c));
        }
      }
  }

  const double tex_sigma = Uniform(rng, 0.7, 3.0);
  const double tex_amp = Uniform(rng, 0.01, 0.05);
  const Image tex = detail::TexturePlane(rng, size, tex_sigma);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) += tex_amp * tex.at(x, y);

  // Per-channel re-centre into [0.35, 0.65] and compress into [0.04, 0.96].
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) mean += img.at(x, y, c);
    mean /= double(size) * size;
    const double target = std::clamp(mean, 0.35, 0.65);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double v = std::clamp(img.at(x, y, c) - mean + target, 0.0, 1.0);
        img.at(x, y, c) = 0.04 + 0.92 * v;
      }
  }
  return img;
}

inline std::vector<Image> SynthNaturalCorpus(std::uint64_t seed, int n,
                                             std::uint64_t first_index = 0) {
  std::vector<Image> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(SynthNaturalImage(seed, first_index + i));
  return out;
}

}  // namespace wmbench

#endif  // WMBENCH_SYNTH_HPP_
