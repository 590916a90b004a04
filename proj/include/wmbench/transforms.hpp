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
// Orthonormal 8x8 block DCT-II and single-level 2-D Haar transforms.

#ifndef WMBENCH_TRANSFORMS_HPP_
#define WMBENCH_TRANSFORMS_HPP_

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wmbench/image.hpp"

namespace wmbench {

// kSymmetric pads odd / non-multiple-of-8 geometries by half-sample
// reflection and crops back on inverse. kStrict throws instead.
enum class PadPolicy { kSymmetric, kStrict };

enum class TransformKind { kDct8, kHaarDwt1 };

// 8x8 block DCT coefficients laid out in place: tile (bx, by) of `coeffs`
// holds the block's coefficients with u along x and v along y.
struct BlockDct {
  static constexpr TransformKind kind = TransformKind::kDct8;
  int source_width = 0;
  int source_height = 0;
  Image coeffs;

  int blocks_x() const { return coeffs.width() / 8; }
  int blocks_y() const { return coeffs.height() / 8; }
  int block_count() const { return blocks_x() * blocks_y(); }
  double& at(int block, int u, int v) {
    return coeffs.at((block % blocks_x()) * 8 + u, (block / blocks_x()) * 8 + v);
  }
  double at(int block, int u, int v) const {
    return coeffs.at((block % blocks_x()) * 8 + u, (block / blocks_x()) * 8 + v);
  }
};

struct HaarSubbands {
  static constexpr TransformKind kind = TransformKind::kHaarDwt1;
  int source_width = 0;
  int source_height = 0;
  Image ll, lh, hl, hh;
};

// JPEG zig-zag scan: entry k is the natural index v*8+u of the k-th
// coefficient.
inline constexpr std::array<int, 64> kZigZag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

namespace detail {

struct Dct8Matrix {
  std::array<double, 64> m{};  // m[u*8+x]
  Dct8Matrix() {
    for (int u = 0; u < 8; ++u) {
      const double a = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        m[u * 8 + x] =
            a * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
  }
};

inline const Dct8Matrix& Dct8() {
  static const Dct8Matrix kMatrix;
  return kMatrix;
}

inline int RoundUp(int v, int m) { return (v + m - 1) / m * m; }

}  // namespace detail

// In-place forward (C B C^T) or inverse (C^T B C) transform of one block
// stored row-major as block[y*8+x].
inline void Dct8Block(std::array<double, 64>& block, bool inverse) {
  const auto& c = detail::Dct8().m;
  std::array<double, 64> tmp{};
  // rows: along x
  for (int y = 0; y < 8; ++y) {
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int x = 0; x < 8; ++x) {
        s += (inverse ? c[x * 8 + u] : c[u * 8 + x]) * block[y * 8 + x];
      }
      tmp[y * 8 + u] = s;
    }
  }
  // columns: along y
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y) {
        s += (inverse ? c[y * 8 + v] : c[v * 8 + y]) * tmp[y * 8 + u];
      }
      block[v * 8 + u] = s;
    }
  }
}

inline void Dct8Tiles(Image& plane, bool inverse) {
  std::array<double, 64> b{};
  for (int by = 0; by < plane.height(); by += 8) {
    for (int bx = 0; bx < plane.width(); bx += 8) {
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) b[y * 8 + x] = plane.at(bx + x, by + y);
      Dct8Block(b, inverse);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) plane.at(bx + x, by + y) = b[y * 8 + x];
    }
  }
}

inline BlockDct BlockDct8(const Image& plane,
                          PadPolicy pad = PadPolicy::kSymmetric) {
  if (plane.channels() != 1) {
    throw std::invalid_argument("BlockDct8: single-channel input required");
  }
  const int w = detail::RoundUp(plane.width(), 8);
  const int h = detail::RoundUp(plane.height(), 8);
  if (pad == PadPolicy::kStrict && (w != plane.width() || h != plane.height())) {
    throw std::invalid_argument("BlockDct8: dimensions must be multiples of 8");
  }
  BlockDct out{plane.width(), plane.height(), PadSymmetric(plane, w, h)};
  Dct8Tiles(out.coeffs, /*inverse=*/false);
  return out;
}

inline Image BlockIdct8(const BlockDct& t) {
  Image plane = t.coeffs;
  Dct8Tiles(plane, /*inverse=*/true);
  return Crop(plane, t.source_width, t.source_height);
}

inline HaarSubbands HaarDwt(const Image& plane,
                            PadPolicy pad = PadPolicy::kSymmetric) {
  if (plane.channels() != 1) {
    throw std::invalid_argument("HaarDwt: single-channel input required");
  }
  const int w = detail::RoundUp(plane.width(), 2);
  const int h = detail::RoundUp(plane.height(), 2);
  if (pad == PadPolicy::kStrict && (w != plane.width() || h != plane.height())) {
    throw std::invalid_argument("HaarDwt: odd dimensions");
  }
  const Image p = PadSymmetric(plane, w, h);
  HaarSubbands s{plane.width(), plane.height(), Image(w / 2, h / 2, 1),
                 Image(w / 2, h / 2, 1), Image(w / 2, h / 2, 1),
                 Image(w / 2, h / 2, 1)};
  for (int y = 0; y < h / 2; ++y) {
    for (int x = 0; x < w / 2; ++x) {
      const double a = p.at(2 * x, 2 * y), b = p.at(2 * x + 1, 2 * y);
      const double c = p.at(2 * x, 2 * y + 1), d = p.at(2 * x + 1, 2 * y + 1);
      s.ll.at(x, y) = 0.5 * (a + b + c + d);
      s.hl.at(x, y) = 0.5 * (a - b + c - d);  // detail across x
      s.lh.at(x, y) = 0.5 * (a + b - c - d);  // detail across y
      s.hh.at(x, y) = 0.5 * (a - b - c + d);
    }
  }
  return s;
}

inline Image HaarIdwt(const HaarSubbands& s) {
  const int w = s.ll.width() * 2;
  const int h = s.ll.height() * 2;
  Image p(w, h, 1);
  for (int y = 0; y < h / 2; ++y) {
    for (int x = 0; x < w / 2; ++x) {
      const double ll = s.ll.at(x, y), hl = s.hl.at(x, y);
      const double lh = s.lh.at(x, y), hh = s.hh.at(x, y);
      p.at(2 * x, 2 * y) = 0.5 * (ll + hl + lh + hh);
      p.at(2 * x + 1, 2 * y) = 0.5 * (ll - hl + lh - hh);
      p.at(2 * x, 2 * y + 1) = 0.5 * (ll + hl - lh - hh);
      p.at(2 * x + 1, 2 * y + 1) = 0.5 * (ll - hl - lh + hh);
    }
  }
  return Crop(p, s.source_width, s.source_height);
}

}  // namespace wmbench

#endif  // WMBENCH_TRANSFORMS_HPP_
