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

#ifndef WMBENCH_FILTERS_HPP_
#define WMBENCH_FILTERS_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wmbench/image.hpp"

namespace wmbench {

// Normalized 1-D Gaussian taps of length 2*radius+1.
inline std::vector<double> GaussianKernel1D(int radius, double sigma) {
  if (radius < 0 || !(sigma > 0.0)) {
    throw std::invalid_argument("GaussianKernel1D: bad radius/sigma");
  }
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution with half-sample symmetric borders, per channel.
inline Image SeparableFilter(const Image& img, const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size()) / 2;
  const int w = img.width(), h = img.height(), ch = img.channels();
  Image tmp(w, h, ch), out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int i = -r; i <= r; ++i) {
          s += taps[i + r] * img.at(ReflectIndex(x + i, w), y, c);
        }
        tmp.at(x, y, c) = s;
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int i = -r; i <= r; ++i) {
          s += taps[i + r] * tmp.at(x, ReflectIndex(y + i, h), c);
        }
        out.at(x, y, c) = s;
      }
  return out;
}

inline Image GaussianBlur(const Image& img, int ksize, double sigma) {
  if (ksize < 1 || ksize % 2 == 0) {
    throw std::invalid_argument("GaussianBlur: kernel size must be odd");
  }
  return SeparableFilter(img, GaussianKernel1D(ksize / 2, sigma));
}

inline Image MedianFilter(const Image& img, int ksize) {
  if (ksize < 3 || ksize % 2 == 0) {
    throw std::invalid_argument("MedianFilter: kernel size must be odd and >= 3");
  }
  const int r = ksize / 2;
  const int w = img.width(), h = img.height(), ch = img.channels();
  Image out(w, h, ch);
  std::vector<double> win(static_cast<std::size_t>(ksize) * ksize);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        std::size_t n = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            win[n++] = img.at(ReflectIndex(x + dx, w), ReflectIndex(y + dy, h), c);
        std::nth_element(win.begin(), win.begin() + n / 2, win.end());
        out.at(x, y, c) = win[n / 2];
      }
  return out;
}

}  // namespace wmbench

#endif  // WMBENCH_FILTERS_HPP_
