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
// ROC / AUROC, image quality metrics and exact empirical Wasserstein
// distance between equal-size sets.

#ifndef WMBENCH_METRICS_HPP_
#define WMBENCH_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wmbench/filters.hpp"
#include "wmbench/image.hpp"
#include "wmbench/parallel.hpp"
#include "wmbench/svd.hpp"

namespace wmbench {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  // Scores >= threshold are called positive; +inf for the (0,0) point.
  double threshold = std::numeric_limits<double>::infinity();
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) ... (1,1)
  double auroc = 0.5;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// Threshold sweep over the union of scores. The trapezoid area equals
// P(s+ > s-) + P(s+ = s-)/2 because tied scores move TPR and FPR together.
inline RocCurve Roc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("Roc: both score sets must be non-empty");
  }
  std::vector<double> p(pos.begin(), pos.end()), n(neg.begin(), neg.end());
  std::sort(p.begin(), p.end(), std::greater<>());
  std::sort(n.begin(), n.end(), std::greater<>());
  RocCurve c;
  c.positives = p.size();
  c.negatives = n.size();
  c.points.push_back({0.0, 0.0});
  std::size_t ip = 0, in = 0;
  double area = 0.0;
  while (ip < p.size() || in < n.size()) {
    double t = -std::numeric_limits<double>::infinity();
    if (ip < p.size()) t = std::max(t, p[ip]);
    if (in < n.size()) t = std::max(t, n[in]);
    while (ip < p.size() && p[ip] >= t) ++ip;
    while (in < n.size() && n[in] >= t) ++in;
    const RocPoint pt{static_cast<double>(in) / n.size(),
                      static_cast<double>(ip) / p.size(), t};
    const RocPoint& prev = c.points.back();
    area += (pt.fpr - prev.fpr) * (pt.tpr + prev.tpr) * 0.5;
    c.points.push_back(pt);
  }
  c.auroc = std::clamp(area, 0.0, 1.0);
  return c;
}

// TPR at the largest achieved FPR not above the target (step convention).
inline double TprAtFpr(const RocCurve& curve, double fpr_target) {
  double best = 0.0;
  for (const auto& pt : curve.points) {
    if (pt.fpr <= fpr_target) best = std::max(best, pt.tpr);
  }
  return best;
}

// Minimum over all thresholds of evasion + spoofing error, (1 - TPR) + FPR,
// with positives being the watermarked class.
inline double MinTotalError(const RocCurve& curve) {
  double best = 1.0;
  for (const auto& pt : curve.points) best = std::min(best, 1.0 - pt.tpr + pt.fpr);
  return best;
}

inline double Mse(const Image& x, const Image& y) {
  RequireSameShape(x, y, "Mse");
  const double d = L2Distance(x, y);
  return d * d / static_cast<double>(x.size());
}

// Peak 1.0; identical images return +infinity.
inline double Psnr(const Image& x, const Image& y) {
  const double mse = Mse(x, y);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

namespace detail {

// Valid-mode separable correlation with symmetric taps.
inline Image ValidFilter(const Image& p, const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int w = p.width() - k + 1, h = p.height() - k + 1;
  Image tmp(w, p.height(), 1), out(w, h, 1);
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += taps[i] * p.at(x + i, y);
      tmp.at(x, y) = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += taps[i] * tmp.at(x, y + i);
      out.at(x, y) = s;
    }
  return out;
}

}  // namespace detail

// Local SSIM over every fully-contained Gaussian window, one map per channel
// stacked into the channels of the result.
inline Image SsimMap(const Image& x, const Image& y, const SsimParams& prm = {}) {
  RequireSameShape(x, y, "Ssim");
  if (x.width() < prm.window || x.height() < prm.window) {
    throw std::invalid_argument("Ssim: image smaller than the window");
  }
  const auto taps = GaussianKernel1D(prm.window / 2, prm.sigma);
  const double c1 = std::pow(prm.k1 * prm.dynamic_range, 2);
  const double c2 = std::pow(prm.k2 * prm.dynamic_range, 2);
  Image result(x.width() - prm.window + 1, x.height() - prm.window + 1,
               x.channels());
  for (int c = 0; c < x.channels(); ++c) {
    const Image a = ExtractChannel(x, c), b = ExtractChannel(y, c);
    Image aa = a, bb = b, ab = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
      aa.data()[i] = a.data()[i] * a.data()[i];
      bb.data()[i] = b.data()[i] * b.data()[i];
      ab.data()[i] = a.data()[i] * b.data()[i];
    }
    const Image mu_a = detail::ValidFilter(a, taps);
    const Image mu_b = detail::ValidFilter(b, taps);
    const Image e_aa = detail::ValidFilter(aa, taps);
    const Image e_bb = detail::ValidFilter(bb, taps);
    const Image e_ab = detail::ValidFilter(ab, taps);
    Image map(mu_a.width(), mu_a.height(), 1);
    for (std::size_t i = 0; i < map.size(); ++i) {
      const double ma = mu_a.data()[i], mb = mu_b.data()[i];
      const double va = e_aa.data()[i] - ma * ma;
      const double vb = e_bb.data()[i] - mb * mb;
      const double cov = e_ab.data()[i] - ma * mb;
      map.data()[i] = ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                      ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    InsertChannel(result, map, c);
  }
  return result;
}

inline double Ssim(const Image& x, const Image& y, const SsimParams& prm = {}) {
  const Image m = SsimMap(x, y, prm);
  double s = 0.0;
  for (double v : m.data()) s += v;
  return s / static_cast<double>(m.size());
}

struct QualityReport {
  double psnr = 0.0;  // +inf for identical inputs
  double ssim = 1.0;
  double l2 = 0.0;    // 0-255 scale
};

inline QualityReport Quality(const Image& reference, const Image& test) {
  return {Psnr(reference, test), Ssim(reference, test),
          255.0 * L2Distance(reference, test)};
}

// Minimum-cost perfect matching on a square cost matrix (Hungarian method
// with row/column potentials). Returns assignment[row] = column.
inline std::vector<int> SolveAssignment(const Matrix& cost) {
  if (cost.rows != cost.cols) {
    throw std::invalid_argument("SolveAssignment: cost matrix must be square");
  }
  const int n = cost.rows;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

inline double WassersteinFromCost(const Matrix& cost) {
  const auto a = SolveAssignment(cost);
  double s = 0.0;
  for (int i = 0; i < cost.rows; ++i) s += cost(i, a[i]);
  return s / cost.rows;
}

inline constexpr std::size_t kMaxWassersteinSet = 512;

// Empirical 1-Wasserstein (l2 ground cost) between two uniform empirical
// measures of equal size, in native intensity units.
inline double WassersteinExact(std::span<const Image> a, std::span<const Image> b,
                               int jobs = 1) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("WassersteinExact: sets must be non-empty and equal size");
  }
  if (a.size() > kMaxWassersteinSet) {
    throw std::invalid_argument("WassersteinExact: at most 512 elements per set");
  }
  const int n = static_cast<int>(a.size());
  Matrix cost(n, n);
  ParallelFor(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
    for (int j = 0; j < n; ++j) cost(static_cast<int>(i), j) = L2Distance(a[i], b[j]);
  });
  return WassersteinFromCost(cost);
}

inline double WassersteinExact(std::span<const std::vector<double>> a,
                               std::span<const std::vector<double>> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("WassersteinExact: sets must be non-empty and equal size");
  }
  const int n = static_cast<int>(a.size());
  Matrix cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (a[i].size() != b[j].size()) {
        throw std::invalid_argument("WassersteinExact: dimension mismatch");
      }
      double s = 0.0;
      for (std::size_t k = 0; k < a[i].size(); ++k) {
        const double d = a[i][k] - b[j][k];
        s += d * d;
      }
      cost(i, j) = std::sqrt(s);
    }
  return WassersteinFromCost(cost);
}

// Mean l2 over index-paired elements, native units. The identity pairing is
// a feasible coupling, so this upper-bounds WassersteinExact.
inline double MeanPairedL2(std::span<const Image> a, std::span<const Image> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("MeanPairedL2: sets must be non-empty and equal size");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += L2Distance(a[i], b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace wmbench

#endif  // WMBENCH_METRICS_HPP_
