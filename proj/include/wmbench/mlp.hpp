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
// Fully connected network with ReLU hidden layers and a softmax output,
// trained by mini-batch SGD with momentum (or Adam) on softmax
// cross-entropy.
// Gradients are derived by hand.

#ifndef WMBENCH_MLP_HPP_
#define WMBENCH_MLP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wmbench {

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out

  DenseLayer() = default;
  DenseLayer(int in_dim, int out_dim)
      : in(in_dim), out(out_dim), w(static_cast<std::size_t>(in_dim) * out_dim),
        b(out_dim) {}

  bool operator==(const DenseLayer&) const = default;
};

inline void Softmax(std::span<const double> logits, std::span<double> out) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
}

class Mlp {
 public:
  Mlp() = default;

  // sizes = {input, hidden..., classes}. He-normal weights, zero biases.
  // `first_layer_scale` multiplies the initial weights of layer 0; a small
  // value lets learned structure dominate the random initialization in
  // very wide input layers.
  Mlp(const std::vector<int>& sizes, std::uint64_t seed,
      double first_layer_scale = 1.0) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need >= 2 sizes");
    for (int s : sizes) {
      if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be >= 1");
    }
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      DenseLayer layer(sizes[l], sizes[l + 1]);
      const double scale = l == 0 ? first_layer_scale : 1.0;
      std::normal_distribution<double> n(0.0, scale * std::sqrt(2.0 / sizes[l]));
      for (double& v : layer.w) v = n(rng);
      layers_.push_back(std::move(layer));
    }
  }

  explicit Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("Mlp: no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& L = layers_[l];
      if (L.w.size() != static_cast<std::size_t>(L.in) * L.out ||
          L.b.size() != static_cast<std::size_t>(L.out) ||
          (l > 0 && layers_[l - 1].out != L.in)) {
        throw std::invalid_argument("Mlp: inconsistent layer shapes");
      }
    }
  }

  int input_dim() const { return layers_.front().in; }
  int classes() const { return layers_.back().out; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  std::vector<int> sizes() const {
    std::vector<int> s{input_dim()};
    for (const auto& l : layers_) s.push_back(l.out);
    return s;
  }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.w.size() + l.b.size();
    return n;
  }

  // Activations entering each layer; acts[l] feeds layer l and
  // acts[layer_count()] holds the logits. Hidden activations are post-ReLU.
  struct Tape {
    std::vector<std::vector<double>> acts;
  };

  // Runs layers [first, layer_count()) on `x`, which must be the input of
  // layer `first`.
  std::vector<double> ForwardFrom(int first, std::span<const double> x,
                                  Tape* tape = nullptr) const {
    CheckLayer(first);
    if (x.size() != static_cast<std::size_t>(layers_[first].in)) {
      throw std::invalid_argument("Mlp: input dimension mismatch");
    }
    std::vector<double> a(x.begin(), x.end());
    if (tape) {
      tape->acts.assign(layers_.size() + 1, {});
      tape->acts[first] = a;
    }
    for (int l = first; l < layer_count(); ++l) {
      a = Affine(l, a);
      if (l + 1 < layer_count()) {
        for (double& v : a) v = std::max(v, 0.0);
      }
      if (tape) tape->acts[l + 1] = a;
    }
    return a;
  }

  std::vector<double> Logits(std::span<const double> x) const {
    return ForwardFrom(0, x);
  }

  // Output of layers [0, split): the latent representation.
  std::vector<double> Latent(std::span<const double> x, int split) const {
    CheckSplit(split);
    std::vector<double> a(x.begin(), x.end());
    for (int l = 0; l < split; ++l) {
      a = Affine(l, a);
      for (double& v : a) v = std::max(v, 0.0);
    }
    return a;
  }

  std::vector<double> Probabilities(std::span<const double> x) const {
    const auto z = Logits(x);
    std::vector<double> p(z.size());
    Softmax(z, p);
    return p;
  }

  int Predict(std::span<const double> x) const {
    const auto z = Logits(x);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }

  // Backpropagates dL/dlogits through layers [first, layer_count()).
  // Accumulates parameter gradients into `grads` (same shapes as layers, may
  // be null) and returns dL/d(input of layer first).
  std::vector<double> Backward(int first, const Tape& tape,
                               std::span<const double> dlogits,
                               std::vector<DenseLayer>* grads) const {
    return BackwardRange(first, layer_count(), tape, dlogits, grads);
  }

  // Same for layers [first, last), where `dout` is the gradient w.r.t. the
  // output of layer last - 1 (post-ReLU unless it is the final layer). The
  // tape must come from a forward pass that started at or before `first`.
  std::vector<double> BackwardRange(int first, int last, const Tape& tape,
                                    std::span<const double> dout,
                                    std::vector<DenseLayer>* grads) const {
    if (first < 0 || first >= last || last > layer_count()) {
      throw std::out_of_range("Mlp: bad backward range");
    }
    std::vector<double> g(dout.begin(), dout.end());
    for (int l = last - 1; l >= first; --l) {
      const DenseLayer& L = layers_[l];
      if (l + 1 < layer_count()) {
        const auto& post = tape.acts[l + 1];
        for (int o = 0; o < L.out; ++o) {
          if (!(post[o] > 0.0)) g[o] = 0.0;
        }
      }
      const auto& in = tape.acts[l];
      if (grads) {
        DenseLayer& G = (*grads)[l];
        for (int o = 0; o < L.out; ++o) {
          if (g[o] == 0.0) continue;
          double* row = G.w.data() + static_cast<std::size_t>(o) * L.in;
          for (int i = 0; i < L.in; ++i) row[i] += g[o] * in[i];
          G.b[o] += g[o];
        }
      }
      std::vector<double> prev(L.in, 0.0);
      for (int o = 0; o < L.out; ++o) {
        if (g[o] == 0.0) continue;
        const double* row = L.w.data() + static_cast<std::size_t>(o) * L.in;
        for (int i = 0; i < L.in; ++i) prev[i] += g[o] * row[i];
      }
      g = std::move(prev);
    }
    return g;
  }

  std::vector<DenseLayer> ZeroGrads() const {
    std::vector<DenseLayer> g;
    for (const auto& l : layers_) g.emplace_back(l.in, l.out);
    return g;
  }

  bool operator==(const Mlp&) const = default;

 private:
  void CheckLayer(int l) const {
    if (l < 0 || l >= layer_count()) throw std::out_of_range("Mlp: layer index");
  }
  void CheckSplit(int s) const {
    if (s < 1 || s >= layer_count()) {
      throw std::invalid_argument("Mlp: split must satisfy 1 <= s < layer count");
    }
  }

  // Four independent partial sums in a fixed order: deterministic, and
  // enough instruction-level parallelism for wide input layers.
  static double Dot(const double* w, const double* a, int n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int i = 0;
    for (; i + 4 <= n; i += 4) {
      s0 += w[i] * a[i];
      s1 += w[i + 1] * a[i + 1];
      s2 += w[i + 2] * a[i + 2];
      s3 += w[i + 3] * a[i + 3];
    }
    for (; i < n; ++i) s0 += w[i] * a[i];
    return (s0 + s1) + (s2 + s3);
  }

  std::vector<double> Affine(int l, std::span<const double> a) const {
    const DenseLayer& L = layers_[l];
    std::vector<double> z(L.b);
    for (int o = 0; o < L.out; ++o) {
      z[o] += Dot(L.w.data() + static_cast<std::size_t>(o) * L.in, a.data(), L.in);
    }
    return z;
  }

  std::vector<DenseLayer> layers_;
};

// Softmax cross-entropy of one example; writes dL/dlogits into `dlogits`.
inline double CrossEntropy(std::span<const double> logits, int label,
                           std::span<double> dlogits) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw std::invalid_argument("CrossEntropy: label out of range");
  }
  Softmax(logits, dlogits);
  const double loss = -std::log(std::max(dlogits[label], 1e-300));
  dlogits[label] -= 1.0;
  return loss;
}

// Loss and dL/dinput for one example through the whole network.
inline double LossAndInputGradient(const Mlp& net, std::span<const double> x,
                                   int label, std::vector<double>* dx) {
  Mlp::Tape tape;
  const auto z = net.ForwardFrom(0, x, &tape);
  std::vector<double> dz(z.size());
  const double loss = CrossEntropy(z, label, dz);
  if (dx) *dx = net.Backward(0, tape, dz, nullptr);
  return loss;
}

enum class Optimizer { kSgdMomentum, kAdam };

struct TrainConfig {
  Optimizer optimizer = Optimizer::kSgdMomentum;
  int epochs = 60;
  int batch = 32;
  double lr = 0.05;
  double momentum = 0.9;  // SGD momentum, or Adam's beta1
  double beta2 = 0.999;   // Adam only
  double weight_decay = 1e-4;
  // Std-dev of Gaussian noise added to every input at each visit; used to
  // train heads on noisy latents.
  double input_noise = 0.0;
  // Cosine decay of the learning rate from lr to 0 over the epochs.
  bool cosine_decay = false;
  std::uint64_t seed = 0;

  void Validate() const {
    if (epochs < 1 || batch < 1) {
      throw std::invalid_argument("train: epochs and batch must be >= 1");
    }
    if (!(lr > 0.0) || !(momentum >= 0.0 && momentum < 1.0) ||
        !(beta2 >= 0.0 && beta2 < 1.0) ||
        !(weight_decay >= 0.0) || !(input_noise >= 0.0)) {
      throw std::invalid_argument(
          "train: need lr > 0, momentum in [0,1), weight_decay >= 0, noise >= 0");
    }
  }
};

struct TrainingLog {
  std::vector<double> epoch_loss;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, Mlp last_finite)
      : std::runtime_error(what), last_finite_(std::move(last_finite)) {}
  const Mlp& last_finite() const { return last_finite_; }

 private:
  Mlp last_finite_;
};

// Trains layers [first, layer_count()) of `net` in place; layers below
// `first` are frozen and `xs` are inputs of layer `first`. Deterministic for
// a given config.
inline TrainingLog TrainLayers(Mlp& net, int first,
                               std::span<const std::vector<double>> xs,
                               std::span<const int> ys, const TrainConfig& cfg) {
  cfg.Validate();
  if (xs.size() != ys.size() || xs.empty()) {
    throw std::invalid_argument("train: need matching non-empty inputs and labels");
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  auto& layers = net.mutable_layers();
  std::vector<DenseLayer> first_moment = net.ZeroGrads();
  std::vector<DenseLayer> second_moment = net.ZeroGrads();
  long long updates = 0;
  TrainingLog log;
  Mlp last_finite = net;
  std::vector<double> noisy, dz;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr =
        cfg.cosine_decay
            ? 0.5 * cfg.lr * (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs))
            : cfg.lr;
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      std::vector<DenseLayer> grads = net.ZeroGrads();
      for (std::size_t k = start; k < end; ++k) {
        const auto& x = xs[order[k]];
        noisy.assign(x.begin(), x.end());
        if (cfg.input_noise > 0.0) {
          for (double& v : noisy) v += cfg.input_noise * n01(rng);
        }
        Mlp::Tape tape;
        const auto z = net.ForwardFrom(first, noisy, &tape);
        dz.resize(z.size());
        total += CrossEntropy(z, ys[order[k]], dz);
        net.Backward(first, tape, dz, &grads);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      ++updates;
      const double bc1 = 1.0 - std::pow(cfg.momentum, static_cast<double>(updates));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(updates));
      for (int l = first; l < net.layer_count(); ++l) {
        auto step = [&](std::vector<double>& p, std::vector<double>& m,
                        std::vector<double>& v, const std::vector<double>& g,
                        bool decay) {
          for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g[i] * scale + (decay ? cfg.weight_decay * p[i] : 0.0);
            if (cfg.optimizer == Optimizer::kAdam) {
              m[i] = cfg.momentum * m[i] + (1.0 - cfg.momentum) * gi;
              v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
              p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + 1e-8);
            } else {
              m[i] = cfg.momentum * m[i] - lr * gi;
              p[i] += m[i];
            }
          }
        };
        step(layers[l].w, first_moment[l].w, second_moment[l].w, grads[l].w, true);
        step(layers[l].b, first_moment[l].b, second_moment[l].b, grads[l].b, false);
      }
    }
    const double mean = total / static_cast<double>(xs.size());
    if (!std::isfinite(mean)) {
      throw TrainingDiverged("train: loss became non-finite at epoch " +
                                 std::to_string(epoch),
                             last_finite);
    }
    last_finite = net;
    log.epoch_loss.push_back(mean);
  }
  return log;
}

inline double Accuracy(const Mlp& net, int first,
                       std::span<const std::vector<double>> xs,
                       std::span<const int> ys) {
  if (xs.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto z = net.ForwardFrom(first, xs[i]);
    const int pred = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    hit += pred == ys[i];
  }
  return static_cast<double>(hit) / static_cast<double>(xs.size());
}

}  // namespace wmbench

#endif  // WMBENCH_MLP_HPP_
