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
// Substitute detector: hand-crafted features -> standardization -> MLP.
// Label 1 is "watermarked", label 0 is "clean".
//
// Checkpoint layout (all integers u32, all reals IEEE-754 binary64, both
// little-endian):
//   magic "WMBSUB01" (8 bytes)
//   feature target, dct_k, layer count L, split s
//   L + 1 layer sizes
//   per layer: weights (out x in, row-major) then biases
//   feature mean[d], feature stddev[d]
//   validation accuracy (f64)

#ifndef WMBENCH_SUBSTITUTE_HPP_
#define WMBENCH_SUBSTITUTE_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmbench/features.hpp"
#include "wmbench/image.hpp"
#include "wmbench/image_io.hpp"
#include "wmbench/mlp.hpp"
#include "wmbench/parallel.hpp"

namespace wmbench {

struct SubstituteClassifier {
  FeatureSpec spec;
  FeatureNorm norm;
  Mlp net;
  int split = 1;
  TrainingLog log;
  double validation_accuracy = 0.0;

  std::vector<double> Features(const Image& img) const {
    return norm.Apply(ExtractFeatures(img, spec));
  }

  std::vector<double> Latent(const Image& img) const {
    return net.Latent(Features(img), split);
  }

  // Probability of the watermarked class.
  double Score(const Image& img) const { return net.Probabilities(Features(img))[1]; }

  int Predict(const Image& img) const { return net.Predict(Features(img)); }

  // Cross-entropy against `label` and its gradient w.r.t. the pixels.
  double LossAndPixelGradient(const Image& img, int label, Image* grad) const {
    std::vector<double> dx;
    const double loss =
        LossAndInputGradient(net, Features(img), label, grad ? &dx : nullptr);
    if (grad) *grad = FeatureVjp(img, spec, norm.Backward(dx));
    return loss;
  }

  // Head D applied to a latent vector, returning the logits.
  std::vector<double> HeadLogits(std::span<const double> z) const {
    return net.ForwardFrom(split, z);
  }
  int HeadPredict(std::span<const double> z) const {
    const auto l = HeadLogits(z);
    return static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
  }
  double HeadScore(std::span<const double> z) const {
    const auto l = HeadLogits(z);
    std::vector<double> p(l.size());
    Softmax(l, p);
    return p[1];
  }
};

struct SubstituteTrainConfig {
  FeatureSpec spec;
  std::vector<int> hidden = {64};
  int split = 1;
  TrainConfig train;
  // Pixel-space Gaussian augmentation: every training image also appears
  // with N(0, sigma^2) noise added.
  double noise_aug_sigma = 0.0;
  double validation_fraction = 0.2;
  double first_layer_init_scale = 1.0;
  int jobs = 1;

  void Validate() const {
    spec.Validate();
    train.Validate();
    if (hidden.empty()) throw std::invalid_argument("substitute: need a hidden layer");
    if (split < 1 || split > static_cast<int>(hidden.size())) {
      throw std::invalid_argument("substitute: split must lie in [1, hidden layers]");
    }
    if (!(noise_aug_sigma >= 0.0)) {
      throw std::invalid_argument("substitute: noise_aug_sigma must be >= 0");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
      throw std::invalid_argument("substitute: validation_fraction in (0, 1)");
    }
  }
};

inline constexpr std::size_t kMinSamplesPerClass = 100;

inline std::vector<std::vector<double>> ExtractFeatureSet(std::span<const Image> imgs,
                                                          const FeatureSpec& spec,
                                                          int jobs) {
  std::vector<std::vector<double>> out(imgs.size());
  ParallelFor(imgs.size(), jobs,
              [&](std::size_t i) { out[i] = ExtractFeatures(imgs[i], spec); });
  return out;
}

// Splits each class by index: the last validation_fraction of each list is
// held out, so the train and validation sets are disjoint.
inline SubstituteClassifier TrainSubstitute(std::span<const Image> watermarked,
                                            std::span<const Image> clean,
                                            const SubstituteTrainConfig& cfg) {
  cfg.Validate();
  if (watermarked.size() < kMinSamplesPerClass || clean.size() < kMinSamplesPerClass) {
    throw std::invalid_argument("substitute: need >= 100 samples per class");
  }
  auto split_at = [&](std::size_t n) {
    return n - static_cast<std::size_t>(std::ceil(cfg.validation_fraction * n));
  };
  const std::size_t nw = split_at(watermarked.size()), nc = split_at(clean.size());

  std::vector<Image> train_imgs;
  std::vector<int> train_y;
  std::mt19937_64 aug_rng(cfg.train.seed ^ 0x5DEECE66DULL);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto add = [&](const Image& im, int y) {
    train_imgs.push_back(im);
    train_y.push_back(y);
    if (cfg.noise_aug_sigma > 0.0) {
      Image noisy = im;
      for (double& v : noisy.data()) v += cfg.noise_aug_sigma * n01(aug_rng);
      train_imgs.push_back(Clamp01(std::move(noisy)));
      train_y.push_back(y);
    }
  };
  for (std::size_t i = 0; i < nw; ++i) add(watermarked[i], 1);
  for (std::size_t i = 0; i < nc; ++i) add(clean[i], 0);

  std::vector<Image> val_imgs;
  std::vector<int> val_y;
  for (std::size_t i = nw; i < watermarked.size(); ++i) {
    val_imgs.push_back(watermarked[i]);
    val_y.push_back(1);
  }
  for (std::size_t i = nc; i < clean.size(); ++i) {
    val_imgs.push_back(clean[i]);
    val_y.push_back(0);
  }

  SubstituteClassifier clf;
  clf.spec = cfg.spec;
  clf.split = cfg.split;
  auto raw = ExtractFeatureSet(train_imgs, cfg.spec, cfg.jobs);
  clf.norm = FeatureNorm::Fit(raw);
  for (auto& r : raw) r = clf.norm.Apply(r);

  std::vector<int> sizes{cfg.spec.dim()};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(2);
  clf.net = Mlp(sizes, cfg.train.seed, cfg.first_layer_init_scale);
  clf.log = TrainLayers(clf.net, 0, raw, train_y, cfg.train);

  auto val = ExtractFeatureSet(val_imgs, cfg.spec, cfg.jobs);
  for (auto& r : val) r = clf.norm.Apply(r);
  clf.validation_accuracy = Accuracy(clf.net, 0, val, val_y);
  return clf;
}

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'W', 'M', 'B', 'S', 'U', 'B', '0', '1'};

inline void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void PutF64(std::vector<unsigned char>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> b) : b_(b) {}
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  double F64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::span<const unsigned char> Bytes(std::size_t n) {
    Need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void Need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw std::runtime_error("checkpoint: truncated");
  }
  std::span<const unsigned char> b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> SerializeSubstitute(const SubstituteClassifier& c) {
  std::vector<unsigned char> out(std::begin(detail::kCheckpointMagic),
                                 std::end(detail::kCheckpointMagic));
  detail::PutU32(out, static_cast<std::uint32_t>(c.spec.target));
  detail::PutU32(out, static_cast<std::uint32_t>(c.spec.dct_k));
  detail::PutU32(out, static_cast<std::uint32_t>(c.net.layer_count()));
  detail::PutU32(out, static_cast<std::uint32_t>(c.split));
  for (int s : c.net.sizes()) detail::PutU32(out, static_cast<std::uint32_t>(s));
  for (const auto& l : c.net.layers()) {
    for (double v : l.w) detail::PutF64(out, v);
    for (double v : l.b) detail::PutF64(out, v);
  }
  for (double v : c.norm.mean) detail::PutF64(out, v);
  for (double v : c.norm.stddev) detail::PutF64(out, v);
  detail::PutF64(out, c.validation_accuracy);
  return out;
}

inline SubstituteClassifier DeserializeSubstitute(std::span<const unsigned char> bytes) {
  detail::ByteReader r(bytes);
  const auto magic = r.Bytes(8);
  if (!std::equal(magic.begin(), magic.end(), std::begin(detail::kCheckpointMagic))) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  SubstituteClassifier c;
  c.spec.target = static_cast<int>(r.U32());
  c.spec.dct_k = static_cast<int>(r.U32());
  c.spec.Validate();
  const int layers = static_cast<int>(r.U32());
  c.split = static_cast<int>(r.U32());
  if (layers < 2 || layers > 16) throw std::runtime_error("checkpoint: bad layer count");
  std::vector<int> sizes(layers + 1);
  for (int& s : sizes) {
    s = static_cast<int>(r.U32());
    if (s < 1 || s > (1 << 20)) throw std::runtime_error("checkpoint: bad layer size");
  }
  if (sizes.front() != c.spec.dim() || sizes.back() != 2) {
    throw std::runtime_error("checkpoint: sizes disagree with feature spec");
  }
  std::vector<DenseLayer> ls;
  for (int l = 0; l < layers; ++l) {
    DenseLayer d(sizes[l], sizes[l + 1]);
    for (double& v : d.w) v = r.F64();
    for (double& v : d.b) v = r.F64();
    ls.push_back(std::move(d));
  }
  c.net = Mlp(std::move(ls));
  if (c.split < 1 || c.split >= layers) throw std::runtime_error("checkpoint: bad split");
  c.norm.mean.resize(sizes.front());
  c.norm.stddev.resize(sizes.front());
  for (double& v : c.norm.mean) v = r.F64();
  for (double& v : c.norm.stddev) {
    v = r.F64();
    if (!(v > 0.0) || !std::isfinite(v)) throw std::runtime_error("checkpoint: bad stddev");
  }
  c.validation_accuracy = r.F64();
  if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return c;
}

inline void SaveSubstitute(const SubstituteClassifier& c, const std::filesystem::path& p) {
  const auto bytes = SerializeSubstitute(c);
  WriteFileAtomic(p, bytes.data(), bytes.size());
}

inline SubstituteClassifier LoadSubstitute(const std::filesystem::path& p) {
  return DeserializeSubstitute(detail::ReadAll(p));
}

}  // namespace wmbench

#endif  // WMBENCH_SUBSTITUTE_HPP_
