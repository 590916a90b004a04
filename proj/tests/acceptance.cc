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

// Acceptance suite. Each check runs at full size and prints one PASS or FAIL
// line; the exit status is nonzero when any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wmbench/wmbench.hpp"

namespace wmbench {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

const WatermarkKey kKey(0xB5AD4ECEDA1CE2A9ULL);

struct Verdict {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void Note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

//------------------------------------------------------------------------------
// Oracles.

// Maclaurin series up to |x| = 3 and a continued fraction for the tail,
// both in long double.
double SeriesErf(double xd) {
  const long double x = xd;
  const long double ax = std::fabs(x);
  if (ax <= 3.0L) {
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
      term *= -x * x / n;
      const long double add = term / (2 * n + 1);
      sum += add;
      if (std::fabs(add) < 1e-22L) break;
    }
    return static_cast<double>(sum * 2.0L / std::sqrt(std::numbers::pi_v<long double>));
  }
  long double f = ax;
  for (int k = 200; k >= 1; --k) f = ax + (k / 2.0L) / f;
  const long double v =
      1.0L - std::exp(-ax * ax) / std::sqrt(std::numbers::pi_v<long double>) / f;
  return static_cast<double>(x < 0 ? -v : v);
}

double QuadratureTv(double d, double sigma) {
  const double mu = d / sigma;
  const double lo = -12.0, hi = mu + 12.0;
  const int n = 200000;
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (i + 0.5) * h;
    s += std::abs(std::exp(-0.5 * x * x) - std::exp(-0.5 * (x - mu) * (x - mu)));
  }
  return 0.5 * s * h / std::sqrt(2.0 * std::numbers::pi);
}

double PairwiseAuroc(std::span<const double> pos, std::span<const double> neg) {
  double s = 0.0;
  for (double p : pos)
    for (double n : neg) s += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return s / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double BruteForceMatching(const Matrix& cost) {
  std::vector<int> perm(cost.rows);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < cost.rows; ++i) s += cost(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / cost.rows;
}

Image RandomImage(int w, int h, int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u;
  Image img(w, h, c);
  for (double& v : img.data()) v = u(rng);
  return img;
}

//------------------------------------------------------------------------------

struct Context {
  int jobs = 1;
  std::vector<Image> corpus;  // 100 natural-looking RGB images, 256x256
};

Verdict Certification(const Context& ctx) {
  Verdict v;
  PurificationStudyConfig cfg;
  cfg.key = kKey;
  cfg.seed = 11;
  cfg.jobs = ctx.jobs;
  const auto t0 = Clock::now();
  const auto res = RunPurificationStudy(cfg, ctx.corpus);
  const double secs = Seconds(t0);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : res.rows) {
    worst = std::min(worst, r.min_total_error - r.bound);
    v.Require(r.certified, std::string(SchemeName(r.scheme.kind)) + "/" + r.denoiser +
                               Fmt(" t=%.2f", r.t) + Fmt(" e0+e1=%.3f", r.min_total_error) +
                               Fmt(" < bound %.4f", r.bound));
  }
  v.Note(std::to_string(res.rows.size()) + " settings, worst margin " + Fmt("%.4f", worst));
  v.Note(Fmt("%.1f s", secs));
  v.Require(secs <= 300.0, "runtime over 300 s");
  return v;
}

Verdict Purification(const Context& ctx) {
  Verdict v;
  PurificationStudyConfig cfg;
  cfg.schemes = {WatermarkScheme::Default(SchemeKind::kSsDct)};
  cfg.denoisers = {WaveletShrinkDenoiser{}};
  cfg.ts = {0.05, 0.1, 0.2, 0.3};
  cfg.key = kKey;
  cfg.seed = 11;
  cfg.jobs = ctx.jobs;
  const auto res = RunPurificationStudy(cfg, ctx.corpus);
  const double before = res.schemes[0].auroc_clean;
  v.Require(before >= 0.99, Fmt("pre-attack AUROC %.4f < 0.99", before));
  std::string curve = Fmt("AUROC %.3f ->", before);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    curve += Fmt(" %.3f", res.rows[i].auroc);
    if (i > 0) {
      v.Require(res.rows[i].auroc < res.rows[i - 1].auroc + 0.02,
                Fmt("no decrease at t=%.2f", res.rows[i].t));
    }
  }
  v.Note(curve);
  v.Require(res.rows.back().auroc <= 0.75, "AUROC at t=0.3 above 0.75");
  return v;
}

Verdict Bounds() {
  Verdict v;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = -6.0 + 12.0 * i / 999.0;
    worst = std::max(worst, std::abs(theory::Erf(x) - SeriesErf(x)));
  }
  v.Require(worst <= 1e-7, Fmt("erf error %.2e", worst));
  v.Note(Fmt("erf max error %.1e", worst));

  const DiffusionSchedule s;
  int violations = 0;
  const std::vector<double> ws{0.05, 0.1, 0.25, 0.5, 1, 2, 4, 8};
  for (int k = 1; k <= 9; ++k) {
    const double t = 0.1 * k;
    for (std::size_t i = 1; i < ws.size(); ++i)
      violations += !(theory::PurificationBound({ws[i], s, t}) <
                      theory::PurificationBound({ws[i - 1], s, t}));
    if (k > 1)
      for (double w : ws)
        violations += !(theory::PurificationBound({w, s, t}) >
                        theory::PurificationBound({w, s, t - 0.1}));
  }
  const std::vector<double> sigmas{0.25, 0.5, 1, 2, 4, 8, 16};
  const std::vector<double> lw{0.1, 0.5, 1, 2, 4};
  for (double alpha : {0.0, 0.01, 0.1}) {
    for (double w : lw)
      for (std::size_t i = 1; i < sigmas.size(); ++i)
        violations += !(theory::RobustAurocBoundRaw({w, sigmas[i], alpha}) <
                        theory::RobustAurocBoundRaw({w, sigmas[i - 1], alpha}));
    for (double sigma : sigmas)
      for (std::size_t i = 1; i < lw.size(); ++i)
        violations += !(theory::RobustAurocBoundRaw({lw[i], sigma, alpha}) >
                        theory::RobustAurocBoundRaw({lw[i - 1], sigma, alpha}));
  }
  v.Require(violations == 0, std::to_string(violations) + " monotonicity violations");
  v.Note("0 monotonicity violations");
  v.Require(theory::RobustAurocBoundFromPsi(0.0, 0.0) == 0.5, "value at psi=0 is not 0.5");
  v.Require(theory::RobustAurocBoundFromPsi(1.0, 0.0) == 1.0, "value at psi=1 is not 1");
  return v;
}

Verdict Psi() {
  Verdict v;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double d = 0.1 + 0.5 * i;
    for (int j = 0; j < 20; ++j) {
      const double sigma = 0.25 + 0.5 * j;
      worst = std::max(worst, std::abs(theory::PsiSigma(d, sigma) - QuadratureTv(d, sigma)));
    }
  }
  v.Require(worst <= 1e-4, Fmt("max error %.2e", worst));
  v.Note(Fmt("400 grid points, max error %.1e", worst));
  return v;
}

Verdict Metrics() {
  Verdict v;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> size(1, 40), coarse(0, 6);
  double auroc_err = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<double> pos(size(rng)), neg(size(rng));
    const bool ties = inst % 3 == 0;
    for (double& x : pos) x = ties ? coarse(rng) : g(rng) + 0.5;
    for (double& x : neg) x = ties ? coarse(rng) : g(rng);
    auroc_err = std::max(auroc_err, std::abs(Roc(pos, neg).auroc - PairwiseAuroc(pos, neg)));
  }
  v.Require(auroc_err <= 1e-9, Fmt("AUROC error %.2e", auroc_err));

  std::uniform_int_distribution<int> small(1, 6);
  double w_err = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const int n = small(rng);
    std::vector<std::vector<double>> a(n, std::vector<double>(3)), b = a;
    for (auto* set : {&a, &b})
      for (auto& p : *set)
        for (double& x : p) x = g(rng);
    Matrix cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (a[i][k] - b[j][k]) * (a[i][k] - b[j][k]);
        cost(i, j) = std::sqrt(s);
      }
    w_err = std::max(w_err, std::abs(WassersteinExact(a, b) - BruteForceMatching(cost)));
  }
  v.Require(w_err <= 1e-9, Fmt("Wasserstein error %.2e", w_err));

  int above = 0;
  std::uniform_int_distribution<int> pairs(1, 12);
  for (int inst = 0; inst < 100; ++inst) {
    const int n = pairs(rng);
    std::vector<Image> a, b;
    for (int i = 0; i < n; ++i) {
      a.push_back(RandomImage(4, 3, 1, rng));
      b.push_back(RandomImage(4, 3, 1, rng));
    }
    above += WassersteinExact(a, b) > MeanPairedL2(a, b) + 1e-12;
  }
  v.Require(above == 0, std::to_string(above) + " cases with W above paired l2");

  const Image p(16, 16, 3, 0.3), q(16, 16, 3, 0.4);
  const double psnr = Psnr(p, q);
  v.Require(std::abs(psnr - 20.0) <= 1e-9, Fmt("PSNR %.12f != 20", psnr));
  const Image x = RandomImage(40, 33, 3, rng);
  v.Require(Ssim(x, x) == 1.0, "SSIM(x, x) != 1");
  v.Note(Fmt("AUROC err %.1e", auroc_err) + Fmt(", W err %.1e", w_err));
  return v;
}

Verdict SpoofCheck(const Context& ctx) {
  Verdict v;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u;
  std::uniform_int_distribution<int> dim(1, 9);
  int outside = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int w = dim(rng), h = dim(rng), c = trial % 2 ? 3 : 1;
    Image x(w, h, c), z(w, h, c);
    const double xs = u(rng), zs = u(rng);
    for (double& e : x.data()) e = xs * u(rng);
    for (double& e : z.data()) e = zs * u(rng);
    const Image out = Spoof(x, z);
    for (double e : out.data()) outside += e < 0.0 || e > 1.0;
  }
  v.Require(outside == 0, std::to_string(outside) + " values outside [0,1]");

  SpoofStudyConfig cfg;
  cfg.key = kKey;
  cfg.seed = 5;
  cfg.jobs = ctx.jobs;
  const auto res = RunSpoofStudy(cfg, ctx.corpus);
  v.Require(res.all_in_range, "spoofed image outside [0,1]");
  v.Require(res.fraction_increased >= 0.8,
            Fmt("confidence rose on %.2f of images", res.fraction_increased));
  v.Note(Fmt("confidence rose on %.0f%% of images", 100.0 * res.fraction_increased));
  return v;
}

Verdict Substitute(const Context& ctx) {
  Verdict v;
  AdversarialStudyConfig cfg;
  cfg.key = kKey;
  cfg.seed = 3;
  cfg.jobs = ctx.jobs;
  const std::vector<Image> train = SynthNaturalCorpus(7, 200);
  const std::vector<Image> eval = SynthNaturalCorpus(8, 40);
  const std::span<const Image> ev(eval);

  SubstituteTrainConfig sc = cfg.substitute;
  sc.train.seed = StageSeed(cfg.seed, "substitute-train", 0);
  sc.jobs = ctx.jobs;
  const auto t0 = Clock::now();
  const SubstituteClassifier clf =
      TrainSubstitute(EmbedAll(train, cfg.key, cfg.scheme, ctx.jobs), train, sc);
  v.Require(clf.validation_accuracy >= 0.95,
            Fmt("validation accuracy %.3f", clf.validation_accuracy));

  // Central differences on random pixels of a watermarked evaluation image,
  // for the loss toward the clean label.
  const Image probe = Embed(eval[0], cfg.key, cfg.scheme);
  Image grad;
  clf.LossAndPixelGradient(probe, 0, &grad);
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> pick(0, probe.size() - 1);
  double grad_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t i = pick(rng);
    Image p = probe, m = probe;
    p.values()[i] += 1e-6;
    m.values()[i] -= 1e-6;
    const double fd = (clf.LossAndPixelGradient(p, 0, nullptr) -
                       clf.LossAndPixelGradient(m, 0, nullptr)) / 2e-6;
    const double a = grad.values()[i];
    grad_err = std::max(grad_err, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8}));
  }
  v.Require(grad_err <= 1e-4, Fmt("gradient relative error %.2e", grad_err));

  const auto res = RunAdversarialStudy(cfg, clf, ev.first(20), ev.last(20));
  std::string curve = Fmt("val acc %.3f, AUROC", clf.validation_accuracy);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    curve += Fmt(" %.3f", r.auroc_pgd);
    v.Require(r.box_ok, Fmt("box violated at eps=%.4f", r.epsilon));
    if (i > 0) {
      v.Require(r.auroc_pgd <= res.rows[i - 1].auroc_pgd + 0.02,
                Fmt("AUROC rose at eps=%.4f", r.epsilon));
    }
    // A strict win is required at the largest budget; below it both attacks
    // can leave the detector untouched, so ties are accepted.
    const bool last = i + 1 == res.rows.size();
    v.Require(last ? r.auroc_pgd < r.auroc_uniform : r.auroc_pgd <= r.auroc_uniform,
              Fmt("uniform noise stronger at eps=%.4f", r.epsilon));
  }
  const double drop = res.rows.front().auroc_pgd - res.rows.back().auroc_pgd;
  v.Require(drop >= 0.2, Fmt("AUROC drop %.3f < 0.2", drop));
  curve += Fmt(" (uniform at 2x: %.3f)", res.rows.back().auroc_uniform);
  v.Note(curve);
  v.Note(Fmt("grad err %.1e", grad_err) + Fmt(", %.0f s", Seconds(t0)));
  return v;
}

Verdict Tradeoff(const Context& ctx) {
  Verdict v;
  const SyntheticLatentSpec spec;
  const TradeoffDatasets data{SyntheticLatents(spec, 300, 0, 101), SyntheticLatents(spec, 300, 1, 102),
                              SyntheticLatents(spec, 300, 0, 103), SyntheticLatents(spec, 300, 1, 104)};
  TradeoffConfig cfg;
  cfg.seed = 17;
  cfg.jobs = ctx.jobs;
  const auto t0 = Clock::now();
  const TradeoffResult res = RunTradeoff(cfg, data);
  const double secs = Seconds(t0);
  v.Require(res.spearman_train_vs_inference >= 0.8,
            Fmt("train/inference rank correlation %.3f", res.spearman_train_vs_inference));
  v.Require(res.spearman_inference_vs_auroc <= -0.8,
            Fmt("inference/AUROC rank correlation %.3f", res.spearman_inference_vs_auroc));
  for (const auto& r : res.rows) {
    v.Require(r.consistency_holds, Fmt("consistency bound fails at train sigma %.1f", r.train_sigma));
  }
  v.Require(secs <= 600.0, "runtime over 600 s");
  v.Note(Fmt("rank corr %.3f", res.spearman_train_vs_inference) +
         Fmt(" / %.3f", res.spearman_inference_vs_auroc) + Fmt(", %.1f s", secs));
  return v;
}

// Small versions of the studies, run twice, rendered to CSV and compared.
std::string DeterminismRender(int jobs) {
  const std::vector<Image> imgs = SynthNaturalCorpus(21, 8);
  std::string out;

  PurificationStudyConfig pc;
  pc.schemes = {WatermarkScheme::Default(SchemeKind::kSsDct),
                WatermarkScheme::Default(SchemeKind::kDwtDct)};
  pc.denoisers = {WaveletShrinkDenoiser{}};
  pc.ts = {0.1, 0.3};
  pc.key = kKey;
  pc.seed = 4;
  pc.jobs = jobs;
  CsvTable pt({"scheme", "denoiser", "t", "auroc", "min_total_error", "bound"});
  for (const auto& r : RunPurificationStudy(pc, imgs).rows) {
    pt.AddRow({std::string(SchemeName(r.scheme.kind)), r.denoiser, FormatDouble(r.t),
               FormatDouble(r.auroc), FormatDouble(r.min_total_error), FormatDouble(r.bound)});
  }
  out += pt.Render();

  SpoofStudyConfig sc;
  sc.key = kKey;
  sc.seed = 4;
  sc.jobs = jobs;
  CsvTable st({"before", "after", "min", "max"});
  for (const auto& r : RunSpoofStudy(sc, imgs).rows) {
    st.AddRow({FormatDouble(r.confidence_before), FormatDouble(r.confidence_after),
               FormatDouble(r.min_value), FormatDouble(r.max_value)});
  }
  out += st.Render();

  const SyntheticLatentSpec spec;
  const TradeoffDatasets data{SyntheticLatents(spec, 60, 0, 1), SyntheticLatents(spec, 60, 1, 2),
                              SyntheticLatents(spec, 60, 0, 3), SyntheticLatents(spec, 60, 1, 4)};
  TradeoffConfig tc;
  tc.train_sigmas = {0.0, 10.0};
  tc.trials = 2;
  tc.head_train.epochs = 10;
  tc.seed = 4;
  tc.jobs = jobs;
  CsvTable tt({"train_sigma", "trial", "sigma_at_alpha", "alpha", "auroc"});
  for (const auto& r : RunTradeoff(tc, data).rows) {
    tt.AddRow({FormatDouble(r.train_sigma), FormatInt(r.trial), FormatDouble(r.sigma_at_alpha),
               FormatDouble(r.alpha), FormatDouble(r.auroc)});
  }
  out += tt.Render();
  return out;
}

Verdict Determinism(const Context& ctx) {
  Verdict v;
  const std::string a = DeterminismRender(ctx.jobs);
  const std::string b = DeterminismRender(ctx.jobs);
  const std::string c = DeterminismRender(ctx.jobs == 1 ? 3 : 1);
  v.Require(a == b, "repeat run differs");
  v.Require(a == c, "output depends on thread count");
  v.Note(std::to_string(a.size()) + " CSV bytes identical across runs");
  return v;
}

}  // namespace
}  // namespace wmbench

int main(int argc, char** argv) {
  using namespace wmbench;
  CLI::App app{"wmbench acceptance suite"};
  Context ctx;
  ctx.jobs = DefaultJobs();
  app.add_option("-j,--jobs", ctx.jobs, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  ctx.corpus = SynthNaturalCorpus(2024, 100);

  struct Check {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Check> checks = {
      {"certification", [&] { return Certification(ctx); }},
      {"purification", [&] { return Purification(ctx); }},
      {"bound calculators", [] { return Bounds(); }},
      {"psi quadrature", [] { return Psi(); }},
      {"metrics", [] { return Metrics(); }},
      {"spoofing", [&] { return SpoofCheck(ctx); }},
      {"substitute attack", [&] { return Substitute(ctx); }},
      {"robustness trade-off", [&] { return Tradeoff(ctx); }},
      {"determinism", [&] { return Determinism(ctx); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Verdict v;
    try {
      v = checks[i].run();
    } catch (const std::exception& e) {
      v.Require(false, std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::printf("[%s] %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, checks[i].name,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu checks passed\n", checks.size() - failed, checks.size());
  return failed == 0 ? 0 : 1;
}
