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
// Keyed embed/detect for four classical watermark families. Every scheme
// carries the 64 key bits; the same bits seed the chip sequence, so a wrong
// key decodes to chance-level bits.

#ifndef WMBENCH_WATERMARK_HPP_
#define WMBENCH_WATERMARK_HPP_

#include <bitset>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wmbench/image.hpp"
#include "wmbench/image_io.hpp"
#include "wmbench/svd.hpp"
#include "wmbench/transforms.hpp"

namespace wmbench {

inline constexpr int kKeyBits = 64;

class WatermarkKey {
 public:
  WatermarkKey() = default;
  explicit WatermarkKey(std::uint64_t value, std::string id = {})
      : bits_(value), id_(std::move(id)) {}

  // Exactly 64 characters of '0'/'1'; the first character is the most
  // significant bit.
  static WatermarkKey Parse(std::string_view text, std::string id = {}) {
    if (text.size() != kKeyBits) {
      throw std::invalid_argument("WatermarkKey: expected 64 bits, got " +
                                  std::to_string(text.size()));
    }
    std::uint64_t v = 0;
    for (char c : text) {
      if (c != '0' && c != '1') {
        throw std::invalid_argument("WatermarkKey: key must be binary");
      }
      v = (v << 1) | static_cast<std::uint64_t>(c - '0');
    }
    return WatermarkKey(v, std::move(id));
  }

  // i = 0 is the most significant (first written) bit.
  bool bit(int i) const { return bits_[kKeyBits - 1 - i]; }
  std::uint64_t ToU64() const { return bits_.to_ullong(); }
  const std::string& id() const { return id_; }

  std::string ToString() const {
    std::string s(kKeyBits, '0');
    for (int i = 0; i < kKeyBits; ++i) s[i] = bit(i) ? '1' : '0';
    return s;
  }

  friend bool operator==(const WatermarkKey& a, const WatermarkKey& b) {
    return a.bits_ == b.bits_;
  }

 private:
  std::bitset<kKeyBits> bits_;
  std::string id_;
};

// Key files hold one 64-character binary string per line; blank lines and
// lines starting with '#' are skipped.
inline std::vector<WatermarkKey> LoadKeys(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open key file " + path.string());
  std::vector<WatermarkKey> keys;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') continue;
    keys.push_back(WatermarkKey::Parse(
        line, path.filename().string() + ":" + std::to_string(lineno)));
  }
  if (keys.empty()) throw std::runtime_error("no keys in " + path.string());
  return keys;
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// +1 when the top bit of the next SplitMix64 output is set, else -1.
inline std::vector<int> ExpandKey(const WatermarkKey& key, std::size_t n) {
  if (n == 0) throw std::invalid_argument("ExpandKey: n must be >= 1");
  SplitMix64 rng(key.ToU64());
  std::vector<int> chips(n);
  for (auto& c : chips) c = (rng.Next() >> 63) ? 1 : -1;
  return chips;
}

enum class SchemeKind { kLsb, kSsDct, kDwtDct, kDwtDctSvd };

inline std::string_view SchemeName(SchemeKind k) {
  switch (k) {
    case SchemeKind::kLsb: return "lsb";
    case SchemeKind::kSsDct: return "ssdct";
    case SchemeKind::kDwtDct: return "dwtdct";
    case SchemeKind::kDwtDctSvd: return "dwtdctsvd";
  }
  return "?";
}

inline SchemeKind ParseSchemeKind(std::string_view name) {
  for (auto k : {SchemeKind::kLsb, SchemeKind::kSsDct, SchemeKind::kDwtDct,
                 SchemeKind::kDwtDctSvd}) {
    if (name == SchemeName(k)) return k;
  }
  throw std::invalid_argument("unknown watermark scheme '" +
                              std::string(name) + "'");
}

// Defaults calibrated on 100 images of the synthetic corpus (seed 2024) so
// the mean paired l2 in [0,1] units is 6, inside the 4..8 low-perturbation
// band; see tools/calibrate_strengths.cpp. LSB has no strength knob.
inline double DefaultStrength(SchemeKind k) {
  switch (k) {
    case SchemeKind::kLsb: return 1.0;
    case SchemeKind::kSsDct: return 0.02257;
    case SchemeKind::kDwtDct: return 0.04515;
    case SchemeKind::kDwtDctSvd: return 0.376;
  }
  return 1.0;
}

// Width and height multiple that a scheme handles without padding. Other
// sizes are symmetric-padded and cropped back; strict callers reject them.
inline int BlockAlignment(SchemeKind k) {
  switch (k) {
    case SchemeKind::kLsb: return 1;
    case SchemeKind::kSsDct: return 8;
    case SchemeKind::kDwtDct:
    case SchemeKind::kDwtDctSvd: return 16;
  }
  return 1;
}

struct WatermarkScheme {
  SchemeKind kind = SchemeKind::kSsDct;
  double strength = DefaultStrength(SchemeKind::kSsDct);

  static WatermarkScheme Default(SchemeKind k) { return {k, DefaultStrength(k)}; }

  void Validate() const {
    if (!std::isfinite(strength) || strength < 0.0) {
      throw std::invalid_argument("WatermarkScheme: strength must be > 0");
    }
    // Zero strength is a no-op for the additive schemes; the quantizer
    // step of the singular-value scheme cannot be zero.
    if (strength == 0.0 && kind != SchemeKind::kSsDct &&
        kind != SchemeKind::kDwtDct) {
      throw std::invalid_argument("WatermarkScheme: strength must be > 0");
    }
  }
};

struct DetectionResult {
  double confidence = 0.0;
  double bit_accuracy = 0.0;
};

// Zig-zag band [6, 28] of each 8x8 block carries the spread-spectrum chips.
inline constexpr int kBandFirst = 6;
inline constexpr int kBandLast = 28;
inline constexpr int kBandSize = kBandLast - kBandFirst + 1;

class WatermarkCapacityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline int Redundancy(std::size_t carriers) {
  const auto r = static_cast<int>(carriers / kKeyBits);
  if (r < 1) {
    throw WatermarkCapacityError(
        "image too small: " + std::to_string(carriers) +
        " carriers cannot hold 64 bits");
  }
  return r;
}

// Majority vote with ties decoded as 0.
inline DetectionResult Decode(const std::vector<int>& votes_for_one,
                              int redundancy, const WatermarkKey& key) {
  int correct = 0;
  for (int i = 0; i < kKeyBits; ++i) {
    const bool decoded = 2 * votes_for_one[i] > redundancy;
    correct += decoded == key.bit(i);
  }
  const double acc = static_cast<double>(correct) / kKeyBits;
  return {acc, acc};
}

inline DetectionResult DecodeCorrelation(const std::vector<double>& sums,
                                         const WatermarkKey& key) {
  int correct = 0;
  for (int i = 0; i < kKeyBits; ++i) correct += (sums[i] > 0.0) == key.bit(i);
  const double acc = static_cast<double>(correct) / kKeyBits;
  return {acc, acc};
}

// Luma-domain carrier plane for the DCT-band schemes: the luma itself for
// SSDCT, the LL Haar subband for DWTDCT.
struct BandCarrier {
  HaarSubbands haar;  // only used when via_haar
  BlockDct dct;
  bool via_haar = false;
};

inline BandCarrier ForwardBand(const Image& luma, bool via_haar) {
  BandCarrier c;
  c.via_haar = via_haar;
  if (via_haar) {
    c.haar = HaarDwt(luma);
    c.dct = BlockDct8(c.haar.ll);
  } else {
    c.dct = BlockDct8(luma);
  }
  return c;
}

inline Image InverseBand(BandCarrier& c) {
  if (!c.via_haar) return BlockIdct8(c.dct);
  c.haar.ll = BlockIdct8(c.dct);
  return HaarIdwt(c.haar);
}

inline double& BandCoeff(BlockDct& dct, std::size_t j) {
  const int block = static_cast<int>(j / kBandSize);
  const int zz = kZigZag[kBandFirst + static_cast<int>(j % kBandSize)];
  return dct.at(block, zz % 8, zz / 8);
}

inline Image EmbedBand(const Image& img, const WatermarkKey& key,
                       double strength, bool via_haar) {
  const Image luma = ToLuma(img);
  BandCarrier c = ForwardBand(luma, via_haar);
  const std::size_t carriers =
      static_cast<std::size_t>(c.dct.block_count()) * kBandSize;
  const int r = Redundancy(carriers);
  const std::size_t used = static_cast<std::size_t>(r) * kKeyBits;
  const auto chips = ExpandKey(key, used);
  for (std::size_t j = 0; j < used; ++j) {
    const double sign = key.bit(static_cast<int>(j % kKeyBits)) ? 1.0 : -1.0;
    BandCoeff(c.dct, j) += strength * chips[j] * sign;
  }
  const Image marked = InverseBand(c);
  return Clamp01(AddLumaDelta(img, Subtract(marked, luma)));
}

inline DetectionResult DetectBand(const Image& img, const WatermarkKey& key,
                                  bool via_haar) {
  BandCarrier c = ForwardBand(ToLuma(img), via_haar);
  const std::size_t carriers =
      static_cast<std::size_t>(c.dct.block_count()) * kBandSize;
  const int r = Redundancy(carriers);
  const std::size_t used = static_cast<std::size_t>(r) * kKeyBits;
  const auto chips = ExpandKey(key, used);
  std::vector<double> sums(kKeyBits, 0.0);
  for (std::size_t j = 0; j < used; ++j) {
    sums[j % kKeyBits] += chips[j] * BandCoeff(c.dct, j);
  }
  return DecodeCorrelation(sums, key);
}

inline std::vector<std::size_t> KeyedPermutation(const WatermarkKey& key,
                                                 std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  SplitMix64 rng(key.ToU64() ^ 0xA5A5A5A55A5A5A5AULL);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(p[i], p[rng.Next() % (i + 1)]);
  }
  return p;
}

// Payload bit for carrier j: key bit XOR chip bit.
inline int TargetBit(const WatermarkKey& key, const std::vector<int>& chips,
                     std::size_t j) {
  return static_cast<int>(key.bit(static_cast<int>(j % kKeyBits))) ^
         (chips[j] > 0 ? 1 : 0);
}

inline Image EmbedLsb(const Image& img, const WatermarkKey& key) {
  const int r = Redundancy(img.size());
  const std::size_t used = static_cast<std::size_t>(r) * kKeyBits;
  const auto perm = KeyedPermutation(key, img.size());
  const auto chips = ExpandKey(key, used);
  auto bytes = ImageToBytes(img);
  for (std::size_t j = 0; j < used; ++j) {
    auto& b = bytes[perm[j]];
    b = static_cast<std::uint8_t>((b & 0xFE) | TargetBit(key, chips, j));
  }
  return ImageFromBytes(img.width(), img.height(), img.channels(), bytes);
}

inline DetectionResult DetectLsb(const Image& img, const WatermarkKey& key) {
  const int r = Redundancy(img.size());
  const std::size_t used = static_cast<std::size_t>(r) * kKeyBits;
  const auto perm = KeyedPermutation(key, img.size());
  const auto chips = ExpandKey(key, used);
  const auto d = img.data();
  std::vector<int> ones(kKeyBits, 0);
  for (std::size_t j = 0; j < used; ++j) {
    const int raw = QuantizeTo8Bit(d[perm[j]]) & 1;
    ones[j % kKeyBits] += raw ^ (chips[j] > 0 ? 1 : 0);
  }
  return Decode(ones, r, key);
}

inline Matrix BlockMatrix(const BlockDct& dct, int block) {
  Matrix m(8, 8);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) m(v, u) = dct.at(block, u, v);
  return m;
}

// Moves s into the nearest quantizer cell of step `step` whose index parity
// equals `bit`, landing on the cell centre.
inline double QimSnap(double s, double step, int bit) {
  double q = std::floor(s / step);
  if ((static_cast<long long>(q) & 1) != bit) {
    const double frac = s / step - q;
    q += (frac < 0.5 && q >= 1.0) ? -1.0 : 1.0;
  }
  return (q + 0.5) * step;
}

inline int QimBit(double s, double step) {
  return static_cast<int>(static_cast<long long>(std::floor(s / step)) & 1);
}

inline Image EmbedSvd(const Image& img, const WatermarkKey& key, double step) {
  const Image luma = ToLuma(img);
  BandCarrier c = ForwardBand(luma, /*via_haar=*/true);
  const int r = Redundancy(static_cast<std::size_t>(c.dct.block_count()));
  const std::size_t used = static_cast<std::size_t>(r) * kKeyBits;
  const auto chips = ExpandKey(key, used);
  for (std::size_t j = 0; j < used; ++j) {
    const int block = static_cast<int>(j);
    Svd svd = SvdSmall(BlockMatrix(c.dct, block));
    const int bit = TargetBit(key, chips, j);
    double s1 = QimSnap(svd.sigma[0], step, bit);
    // keep the modulated value the largest singular value
    while (s1 < svd.sigma[1]) s1 += 2.0 * step;
    svd.sigma[0] = s1;
    const Matrix m = svd.Reconstruct();
    for (int v = 0; v < 8; ++v)
      for (int u = 0; u < 8; ++u) c.dct.at(block, u, v) = m(v, u);
  }
  const Image marked = InverseBand(c);
  return Clamp01(AddLumaDelta(img, Subtract(marked, luma)));
}

inline DetectionResult DetectSvd(const Image& img, const WatermarkKey& key,
                                 double step) {
  BandCarrier c = ForwardBand(ToLuma(img), /*via_haar=*/true);
  const int r = Redundancy(static_cast<std::size_t>(c.dct.block_count()));
  const std::size_t used = static_cast<std::size_t>(r) * kKeyBits;
  const auto chips = ExpandKey(key, used);
  std::vector<int> ones(kKeyBits, 0);
  for (std::size_t j = 0; j < used; ++j) {
    const Svd svd = SvdSmall(BlockMatrix(c.dct, static_cast<int>(j)));
    ones[j % kKeyBits] += QimBit(svd.sigma[0], step) ^ (chips[j] > 0 ? 1 : 0);
  }
  return Decode(ones, r, key);
}

}  // namespace detail

// Watermarked copy of `img`, clamped to [0,1]. Colour images are marked
// through their BT.601 luma; LSB marks every 8-bit sample.
inline Image Embed(const Image& img, const WatermarkKey& key,
                   const WatermarkScheme& scheme) {
  scheme.Validate();
  if (scheme.strength == 0.0 && scheme.kind != SchemeKind::kLsb) return img;
  switch (scheme.kind) {
    case SchemeKind::kLsb: return detail::EmbedLsb(img, key);
    case SchemeKind::kSsDct:
      return detail::EmbedBand(img, key, scheme.strength, false);
    case SchemeKind::kDwtDct:
      return detail::EmbedBand(img, key, scheme.strength, true);
    case SchemeKind::kDwtDctSvd:
      return detail::EmbedSvd(img, key, scheme.strength);
  }
  throw std::logic_error("Embed: bad scheme");
}

// Confidence is the bit accuracy.
inline DetectionResult Detect(const Image& img, const WatermarkKey& key,
                              const WatermarkScheme& scheme) {
  scheme.Validate();
  switch (scheme.kind) {
    case SchemeKind::kLsb: return detail::DetectLsb(img, key);
    case SchemeKind::kSsDct: return detail::DetectBand(img, key, false);
    case SchemeKind::kDwtDct: return detail::DetectBand(img, key, true);
    case SchemeKind::kDwtDctSvd:
      return detail::DetectSvd(img, key, scheme.strength);
  }
  throw std::logic_error("Detect: bad scheme");
}

// Mean pairwise l2 distance reported in the 0-255 intensity scale.
inline double PairedL2(std::span<const Image> xs, std::span<const Image> ys) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw std::invalid_argument("PairedL2: sets must be non-empty and equal size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sum += L2Distance(xs[i], ys[i]);
  return 255.0 * sum / static_cast<double>(xs.size());
}

// Bisects the strength whose mean paired l2 (0-255 scale) hits `target`.
inline double CalibrateStrength(std::span<const Image> images,
                                const WatermarkKey& key, SchemeKind kind,
                                double target, double hi = 4.0,
                                int iters = 40) {
  auto l2_at = [&](double s) {
    std::vector<Image> marked;
    marked.reserve(images.size());
    for (const auto& im : images) marked.push_back(Embed(im, key, {kind, s}));
    return PairedL2(marked, images);
  };
  double lo = 1e-6;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    (l2_at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace wmbench

#endif  // WMBENCH_WATERMARK_HPP_
