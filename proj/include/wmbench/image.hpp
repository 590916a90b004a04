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
// Float raster shared by every embed / attack / metric routine.

#ifndef WMBENCH_IMAGE_HPP_
#define WMBENCH_IMAGE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wmbench {

// Row-major, channel-interleaved intensities. Nominal range is [0,1];
// intermediate results may leave it and are clamped at I/O and attack
// output boundaries.
class Image {
 public:
  Image() = default;

  Image(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels) {
    Validate();
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  Image(int width, int height, int channels, std::vector<double> data)
      : width_(width), height_(height), channels_(channels),
        data_(std::move(data)) {
    Validate();
    if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
      throw std::invalid_argument("Image: data length does not match "
                                  "width*height*channels");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  double at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool SameShape(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ &&
           channels_ == o.channels_;
  }

  bool AllFinite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  void Validate() const {
    if (width_ <= 0 || height_ <= 0) {
      throw std::invalid_argument("Image: zero or negative dimension");
    }
    if (channels_ != 1 && channels_ != 3) {
      throw std::invalid_argument("Image: channels must be 1 or 3");
    }
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

inline void RequireSameShape(const Image& a, const Image& b,
                             const char* where) {
  if (!a.SameShape(b)) {
    throw std::invalid_argument(std::string(where) + ": shape mismatch");
  }
}

inline Image Clamp01(Image img) {
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

// ITU-R BT.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline Image ToLuma(const Image& img) {
  if (img.channels() == 1) return img;
  Image y(img.width(), img.height(), 1);
  const auto src = img.data();
  auto dst = y.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = kLumaR * src[3 * i] + kLumaG * src[3 * i + 1] +
             kLumaB * src[3 * i + 2];
  }
  return y;
}

// Adding the same offset to R, G and B changes Y by that offset and leaves
// Cb/Cr untouched.
inline Image AddLumaDelta(const Image& img, const Image& delta) {
  if (delta.channels() != 1 || delta.width() != img.width() ||
      delta.height() != img.height()) {
    throw std::invalid_argument("AddLumaDelta: geometry mismatch");
  }
  Image out = img;
  auto o = out.data();
  const auto d = delta.data();
  const int ch = img.channels();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (int c = 0; c < ch; ++c) o[i * ch + c] += d[i];
  }
  return out;
}

inline Image Subtract(const Image& a, const Image& b) {
  RequireSameShape(a, b, "Subtract");
  Image out = a;
  auto o = out.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

inline double L2Distance(const Image& a, const Image& b) {
  RequireSameShape(a, b, "L2Distance");
  const auto ad = a.data();
  const auto bd = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) {
    const double d = ad[i] - bd[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Half-sample symmetric index reflection: -1 -> 0, n -> n-1.
inline int ReflectIndex(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

inline Image PadSymmetric(const Image& img, int width, int height) {
  if (width < img.width() || height < img.height()) {
    throw std::invalid_argument("PadSymmetric: target smaller than source");
  }
  if (width == img.width() && height == img.height()) return img;
  Image out(width, height, img.channels());
  for (int y = 0; y < height; ++y) {
    const int sy = ReflectIndex(y, img.height());
    for (int x = 0; x < width; ++x) {
      const int sx = ReflectIndex(x, img.width());
      for (int c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = img.at(sx, sy, c);
      }
    }
  }
  return out;
}

inline Image Crop(const Image& img, int width, int height) {
  if (width > img.width() || height > img.height()) {
    throw std::invalid_argument("Crop: target larger than source");
  }
  if (width == img.width() && height == img.height()) return img;
  Image out(width, height, img.channels());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = img.at(x, y, c);
      }
    }
  }
  return out;
}

inline Image ExtractChannel(const Image& img, int c) {
  Image out(img.width(), img.height(), 1);
  auto o = out.data();
  const auto s = img.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = s[i * img.channels() + c];
  return out;
}

inline void InsertChannel(Image& img, const Image& plane, int c) {
  const auto p = plane.data();
  auto d = img.data();
  for (std::size_t i = 0; i < p.size(); ++i) d[i * img.channels() + c] = p[i];
}

// Applies a single-plane filter independently to each channel.
template <class PlaneFn>
Image MapChannels(const Image& img, PlaneFn&& fn) {
  if (img.channels() == 1) return fn(img);
  Image out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    InsertChannel(out, fn(ExtractChannel(img, c)), c);
  }
  return out;
}

}  // namespace wmbench

#endif  // WMBENCH_IMAGE_HPP_
