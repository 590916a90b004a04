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
// Closed-form error bounds.
//
// Purification: after x_t ~ N(sqrt(ab) x, (1-ab) I) and any post-processing,
//   e0 + e1 >= 1 - erf(sqrt(ab) W / (2 sqrt(2 (1-ab))))
// where W is the l2 Wasserstein distance between the clean and watermarked
// image distributions.
//
// Robust detectors: a (sigma, alpha)-robust detector with latent Wasserstein
// distance W_phi satisfies
//   AUROC <= (psi - psi^2/2) / (1-alpha) + (1 + 2 alpha - 2 alpha^2) / (2 (1-alpha))
// with psi = erf(W_phi / (2 sqrt(2) sigma)).

#ifndef WMBENCH_THEORY_HPP_
#define WMBENCH_THEORY_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wmbench/attacks.hpp"

namespace wmbench::theory {

inline double Erf(double x) { return std::erf(x); }

// alpha_bar at step round(t * n_steps); t = 0 gives 1.
inline double AlphaBar(const DiffusionSchedule& sched, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("AlphaBar: t must lie in [0, 1]");
  }
  return sched.alpha_bar_at_step(sched.StepFor(t));
}

struct BoundQuery {
  double wasserstein = 0.0;
  DiffusionSchedule schedule;
  double t = 0.5;
};

// Closed form in terms of alpha_bar directly. alpha_bar == 1 (no noise) is
// the limit: 1 when W == 0, else 0.
inline double PurificationBoundAt(double wasserstein, double alpha_bar) {
  if (!(wasserstein >= 0.0)) {
    throw std::invalid_argument("bound: Wasserstein distance must be >= 0");
  }
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) {
    throw std::invalid_argument("bound: alpha_bar must lie in (0, 1]");
  }
  if (alpha_bar == 1.0) return wasserstein == 0.0 ? 1.0 : 0.0;
  const double arg = std::sqrt(alpha_bar) * wasserstein /
                     (2.0 * std::sqrt(2.0 * (1.0 - alpha_bar)));
  // erfc keeps relative precision once 1 - erf rounds to zero.
  return std::clamp(std::erfc(arg), 0.0, 1.0);
}

inline double PurificationBound(const BoundQuery& q) {
  if (!(q.t > 0.0 && q.t < 1.0)) {
    throw std::invalid_argument("PurificationBound: t must lie in (0, 1)");
  }
  return PurificationBoundAt(q.wasserstein, AlphaBar(q.schedule, q.t));
}

// Same bound with the Wasserstein distance measured between latent
// encodings, for purification carried out in an autoencoder's latent space.
inline double LatentPurificationBound(double w_latent,
                                      const DiffusionSchedule& sched, double t) {
  return PurificationBound({w_latent, sched, t});
}

// Total variation between N(a, sigma^2 I) and N(b, sigma^2 I) with
// |a - b| = d.
inline double PsiSigma(double d, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("PsiSigma: sigma must be > 0");
  if (!(d >= 0.0)) throw std::invalid_argument("PsiSigma: distance must be >= 0");
  return Erf(d / (2.0 * std::numbers::sqrt2 * sigma));
}

struct TradeoffBoundQuery {
  double wasserstein_latent = 0.0;
  double sigma = 1.0;
  double alpha = 0.0;
};

inline double RobustAurocBoundFromPsi(double psi, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("RobustAurocBound: alpha must lie in [0, 1)");
  }
  return (psi - psi * psi / 2.0) / (1.0 - alpha) +
         (1.0 + 2.0 * alpha - 2.0 * alpha * alpha) / (2.0 * (1.0 - alpha));
}

// Uncapped value; may exceed 1.
inline double RobustAurocBoundRaw(const TradeoffBoundQuery& q) {
  return RobustAurocBoundFromPsi(PsiSigma(q.wasserstein_latent, q.sigma), q.alpha);
}

inline double RobustAurocBound(const TradeoffBoundQuery& q) {
  return std::min(1.0, RobustAurocBoundRaw(q));
}

// 1 - (e0 + e1): the detector advantage that lower-bounds total variation.
inline double DetectorAdvantage(double e0, double e1) {
  if (!(e0 >= 0.0 && e0 <= 1.0 && e1 >= 0.0 && e1 <= 1.0)) {
    throw std::invalid_argument("DetectorAdvantage: errors must lie in [0, 1]");
  }
  return 1.0 - (e0 + e1);
}

// Certification holds iff the advantage does not exceed the erf term,
// i.e. e0 + e1 >= bound.
inline bool Certifies(double e0, double e1, double bound, double slack = 0.0) {
  return DetectorAdvantage(e0, e1) <= (1.0 - bound) + slack;
}

}  // namespace wmbench::theory

#endif  // WMBENCH_THEORY_HPP_
