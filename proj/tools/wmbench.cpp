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
// wmbench: command-line driver for the watermark robustness benchmark.
// Each subcommand reads a JSON config, validates it and every input it names,
// then runs and writes CSV tables, optional images and manifest.json.
// Exit codes: 0 success, 1 runtime failure (or a failed certificate),
// 2 invalid config or inputs (nothing written).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "cli_support.hpp"

namespace wmbench::cli {
namespace {

std::string D(double v) { return FormatDouble(v); }
std::string I(std::int64_t v) { return FormatInt(v); }
std::string B(bool v) { return FormatBool(v); }

class Command {
 public:
  virtual ~Command() = default;
  // Parses `f` and loads every input. Throws ValidationError.
  virtual void Prepare(Fields& f, const GlobalOptions& opt) = 0;
  // Returns the process exit code.
  virtual int Execute(RunContext& ctx) = 0;

  fs::path output_dir;
  std::map<std::string, std::string> inputs;  // role -> description
  std::map<std::string, std::uint64_t> seeds;

 protected:
  ImageSet Load(Fields& parent, const std::string& key, const GlobalOptions& opt) {
    const ImageSource src = ParseSource(parent.Sub(key), opt.seed, key, fs::current_path());
    inputs[key] = src.Describe();
    if (!src.dir) seeds["corpus-" + key] = src.seed;
    return LoadSource(src, parent.Path(key), opt.jobs);
  }
};

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

//------------------------------------------------------------------------------

class SynthCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    n_ = f.Require<int>("n");
    size_ = f.Get<int>("size", kSynthSize);
    if (n_ < 1) throw ValidationError(f.Path("n") + ": must be >= 1");
    if (size_ < 16 || size_ > 4096) throw ValidationError(f.Path("size") + ": in [16, 4096]");
    seed_ = opt.seed;
    seeds["corpus"] = seed_;
  }

  int Execute(RunContext& ctx) override {
    ctx.SetStage("generate");
    ImageSource src;
    src.n = n_;
    src.size = size_;
    src.seed = seed_;
    const ImageSet set = LoadSource(src, "synth", ctx.jobs());
    ctx.SetStage("write");
    ctx.SaveImages("images", set);
    CsvTable t({"id", "width", "height", "mean_r", "mean_g", "mean_b", "std", "content_hash"});
    for (std::size_t i = 0; i < set.images.size(); ++i) {
      const Image& im = set.images[i];
      double m[3] = {0, 0, 0}, mean = 0.0, ss = 0.0;
      for (int y = 0; y < im.height(); ++y)
        for (int x = 0; x < im.width(); ++x)
          for (int c = 0; c < 3; ++c) m[c] += im.at(x, y, c);
      const double px = static_cast<double>(im.width()) * im.height();
      for (double v : im.data()) mean += v;
      mean /= static_cast<double>(im.size());
      for (double v : im.data()) ss += (v - mean) * (v - mean);
      const auto bytes = ImageToBytes(im);
      t.AddRow({set.ids[i], I(im.width()), I(im.height()), D(m[0] / px), D(m[1] / px),
                D(m[2] / px), D(std::sqrt(ss / static_cast<double>(im.size()))),
                Hex64(Fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                               bytes.size())))});
    }
    ctx.WriteCsv("synth.csv", t);
    return 0;
  }

 private:
  int n_ = 0, size_ = kSynthSize;
  std::uint64_t seed_ = 0;
};

//------------------------------------------------------------------------------

class EmbedCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    scheme_ = ParseScheme(f.Sub("scheme"));
    key_ = ParseKey(f, fs::current_path());
    save_images_ = f.Get<bool>("save_images", true);
    input_ = Load(f, "input", opt);
    RequireAligned(input_, BlockAlignment(scheme_.kind), opt.strict_dims, f.Path("input"));
  }

  int Execute(RunContext& ctx) override {
    ctx.SetStage("embed");
    ImageSet out{input_.ids, EmbedAll(input_.images, key_, scheme_, ctx.jobs())};
    const std::size_t n = out.images.size();
    std::vector<double> l2(n), psnr(n), ssim(n), acc(n), acc8(n);
    ParallelFor(n, ctx.jobs(), [&](std::size_t i) {
      const Image& x = input_.images[i];
      const Image& w = out.images[i];
      l2[i] = 255.0 * L2Distance(w, x);
      psnr[i] = Psnr(x, w);
      ssim[i] = (x.width() >= 11 && x.height() >= 11) ? Ssim(x, w) : std::nan("");
      acc[i] = Detect(w, key_, scheme_).bit_accuracy;
      const Image q = ImageFromBytes(w.width(), w.height(), w.channels(), ImageToBytes(w));
      acc8[i] = Detect(q, key_, scheme_).bit_accuracy;
    });
    ctx.SetStage("write");
    if (save_images_) ctx.SaveImages("images", out);
    CsvTable t({"id", "l2_255", "psnr_db", "ssim", "bit_accuracy", "bit_accuracy_8bit"});
    for (std::size_t i = 0; i < n; ++i) {
      t.AddRow({out.ids[i], D(l2[i]), D(psnr[i]), D(ssim[i]), D(acc[i]), D(acc8[i])});
    }
    ctx.WriteCsv("embed.csv", t);
    CsvTable s({"scheme", "strength", "n", "paired_l2_255", "mean_psnr_db", "mean_ssim",
                "min_bit_accuracy"});
    s.AddRow({std::string(SchemeName(scheme_.kind)), D(scheme_.strength), I(n), D(Mean(l2)),
              D(Mean(psnr)), D(Mean(ssim)), D(*std::min_element(acc.begin(), acc.end()))});
    ctx.WriteCsv("embed_summary.csv", s);
    return 0;
  }

 private:
  WatermarkScheme scheme_;
  WatermarkKey key_;
  bool save_images_ = true;
  ImageSet input_;
};

//------------------------------------------------------------------------------

class DetectCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    scheme_ = ParseScheme(f.Sub("scheme"));
    key_ = ParseKey(f, fs::current_path());
    threshold_ = f.Get<double>("threshold", 0.75);
    if (!(threshold_ >= 0.0 && threshold_ <= 1.0)) {
      throw ValidationError(f.Path("threshold") + ": must lie in [0, 1]");
    }
    input_ = Load(f, "input", opt);
    RequireAligned(input_, BlockAlignment(scheme_.kind), opt.strict_dims, f.Path("input"));
  }

  int Execute(RunContext& ctx) override {
    ctx.SetStage("detect");
    std::vector<DetectionResult> r(input_.images.size());
    ParallelFor(r.size(), ctx.jobs(),
                [&](std::size_t i) { r[i] = Detect(input_.images[i], key_, scheme_); });
    ctx.SetStage("write");
    CsvTable t({"id", "confidence", "bit_accuracy", "detected"});
    for (std::size_t i = 0; i < r.size(); ++i) {
      t.AddRow({input_.ids[i], D(r[i].confidence), D(r[i].bit_accuracy),
                B(r[i].confidence >= threshold_)});
    }
    ctx.WriteCsv("detect.csv", t);
    return 0;
  }

 private:
  WatermarkScheme scheme_;
  WatermarkKey key_;
  double threshold_ = 0.75;
  ImageSet input_;
};

//------------------------------------------------------------------------------

// Optional scheme + key pair used to report detector confidence.
struct OptionalDetector {
  std::optional<WatermarkScheme> scheme;
  WatermarkKey key;

  void Parse(Fields& f) {
    if (f.Has("scheme")) {
      scheme = ParseScheme(f.Sub("scheme"));
      key = ParseKey(f, fs::current_path());
    } else {
      f.Optional<json>("scheme");
      f.Optional<json>("key");
      f.Optional<json>("key_file");
      if (f.Has("key") || f.Has("key_file")) {
        throw ValidationError(f.where() + ": a key needs a scheme");
      }
    }
  }
  double Confidence(const Image& img) const { return Detect(img, key, *scheme).confidence; }
};

class PurifyCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    schedule_ = ParseSchedule(f);
    t_ = f.Require<double>("t");
    Checked(f.Path("t"), [&] { PurifyStep(schedule_, t_); });
    denoiser_ = ParseDenoiser(f.Sub("denoiser"));
    det_.Parse(f);
    save_images_ = f.Get<bool>("save_images", true);
    input_ = Load(f, "input", opt);
    if (det_.scheme) {
      RequireAligned(input_, BlockAlignment(det_.scheme->kind), opt.strict_dims,
                     f.Path("input"));
    }
    seeds["purify-noise"] = StageSeed(opt.seed, "purify");
  }

  int Execute(RunContext& ctx) override {
    ctx.SetStage("purify");
    const std::uint64_t seed = seeds["purify-noise"];
    const std::size_t n = input_.images.size();
    ImageSet out{input_.ids, std::vector<Image>(n)};
    std::vector<double> l2(n), psnr(n), before(n), after(n);
    ParallelFor(n, ctx.jobs(), [&](std::size_t i) {
      const Image& x = input_.images[i];
      out.images[i] = Purify(x, schedule_, t_, denoiser_, PurifyNoiseSeed(seed, i));
      l2[i] = 255.0 * L2Distance(out.images[i], x);
      psnr[i] = Psnr(x, out.images[i]);
      if (det_.scheme) {
        before[i] = det_.Confidence(x);
        after[i] = det_.Confidence(out.images[i]);
      }
    });
    ctx.SetStage("write");
    if (save_images_) ctx.SaveImages("images", out);
    std::vector<std::string> header{"id", "l2_255", "psnr_db"};
    if (det_.scheme) {
      header.push_back("confidence_before");
      header.push_back("confidence_after");
    }
    CsvTable t(header);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row{out.ids[i], D(l2[i]), D(psnr[i])};
      if (det_.scheme) {
        row.push_back(D(before[i]));
        row.push_back(D(after[i]));
      }
      t.AddRow(row);
    }
    ctx.WriteCsv("purify.csv", t);
    CsvTable s({"t", "step", "alpha_bar", "denoiser", "n", "mean_l2_255", "mean_psnr_db"});
    const int step = PurifyStep(schedule_, t_);
    s.AddRow({D(t_), I(step), D(schedule_.alpha_bar_at_step(step)), DenoiserName(denoiser_),
              I(n), D(Mean(l2)), D(Mean(psnr))});
    ctx.WriteCsv("purify_summary.csv", s);
    return 0;
  }

 private:
  DiffusionSchedule schedule_;
  double t_ = 0.0;
  Denoiser denoiser_;
  OptionalDetector det_;
  bool save_images_ = true;
  ImageSet input_;
};

//------------------------------------------------------------------------------

class MitigateCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    Fields m = f.Sub("method");
    kind_ = m.Require<std::string>("kind");
    if (kind_ == "blur") {
      ksize_ = m.Get<int>("ksize", 5);
      if (ksize_ < 3 || ksize_ % 2 == 0) throw ValidationError(m.Path("ksize") + ": odd >= 3");
    } else if (kind_ == "jpeg") {
      quality_ = m.Get<int>("quality", 75);
      if (quality_ < 1 || quality_ > 100) throw ValidationError(m.Path("quality") + ": 1..100");
    } else {
      throw ValidationError(m.Path("kind") + ": must be 'blur' or 'jpeg'");
    }
    m.Finish();
    det_.Parse(f);
    save_images_ = f.Get<bool>("save_images", true);
    input_ = Load(f, "input", opt);
    if (det_.scheme) {
      RequireAligned(input_, BlockAlignment(det_.scheme->kind), opt.strict_dims,
                     f.Path("input"));
    }
  }

  int Execute(RunContext& ctx) override {
    ctx.SetStage("mitigate");
    const std::size_t n = input_.images.size();
    ImageSet out{input_.ids, std::vector<Image>(n)};
    std::vector<double> psnr(n), before(n), after(n);
    ParallelFor(n, ctx.jobs(), [&](std::size_t i) {
      const Image& x = input_.images[i];
      out.images[i] = kind_ == "blur" ? MitigateBlur(x, ksize_) : MitigateJpeg(x, quality_);
      psnr[i] = Psnr(x, out.images[i]);
      if (det_.scheme) {
        before[i] = det_.Confidence(x);
        after[i] = det_.Confidence(out.images[i]);
      }
    });
    ctx.SetStage("write");
    if (save_images_) ctx.SaveImages("images", out);
    std::vector<std::string> header{"id", "psnr_db"};
    if (det_.scheme) {
      header.push_back("confidence_before");
      header.push_back("confidence_after");
    }
    CsvTable t(header);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row{out.ids[i], D(psnr[i])};
      if (det_.scheme) {
        row.push_back(D(before[i]));
        row.push_back(D(after[i]));
      }
      t.AddRow(row);
    }
    ctx.WriteCsv("mitigate.csv", t);
    return 0;
  }

 private:
  std::string kind_;
  int ksize_ = 5, quality_ = 75;
  OptionalDetector det_;
  bool save_images_ = true;
  ImageSet input_;
};

//------------------------------------------------------------------------------

class SpoofCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    cfg_.scheme = ParseScheme(f.Sub("scheme"));
    cfg_.key = ParseKey(f, fs::current_path());
    cfg_.spoof.mixup_alpha = f.Get<double>("mixup_alpha", cfg_.spoof.mixup_alpha);
    cfg_.spoof.std_lo = f.Get<double>("std_lo", cfg_.spoof.std_lo);
    cfg_.spoof.std_hi = f.Get<double>("std_hi", cfg_.spoof.std_hi);
    Checked(f.where(), [&] { cfg_.Validate(); });
    save_images_ = f.Get<bool>("save_images", false);
    input_ = Load(f, "input", opt);
    RequireAligned(input_, BlockAlignment(cfg_.scheme.kind), opt.strict_dims, f.Path("input"));
    cfg_.seed = StageSeed(opt.seed, "spoof");
    seeds["spoof"] = cfg_.seed;
  }

  int Execute(RunContext& ctx) override {
    ctx.SetStage("spoof");
    cfg_.jobs = ctx.jobs();
    SpoofStudyResult r = RunSpoofStudy(cfg_, input_.images, save_images_);
    ctx.SetStage("write");
    if (save_images_) ctx.SaveImages("images", ImageSet{input_.ids, std::move(r.spoofed)});
    CsvTable t({"id", "confidence_before", "confidence_after", "increased", "min_value",
                "max_value"});
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const SpoofRow& row = r.rows[i];
      t.AddRow({input_.ids[i], D(row.confidence_before), D(row.confidence_after),
                B(row.confidence_after > row.confidence_before), D(row.min_value),
                D(row.max_value)});
    }
    ctx.WriteCsv("spoof.csv", t);
    CsvTable s({"scheme", "mixup_alpha", "n", "fraction_increased", "all_in_range"});
    s.AddRow({std::string(SchemeName(cfg_.scheme.kind)), D(cfg_.spoof.mixup_alpha),
              I(r.rows.size()), D(r.fraction_increased), B(r.all_in_range)});
    ctx.WriteCsv("spoof_summary.csv", s);
    return 0;
  }

 private:
  SpoofStudyConfig cfg_;
  bool save_images_ = false;
  ImageSet input_;
};

//------------------------------------------------------------------------------

void ParseSubstitute(Fields& parent, SubstituteTrainConfig& c) {
  if (!parent.Has("substitute")) {
    parent.Optional<json>("substitute");
    return;
  }
  Fields f = parent.Sub("substitute");
  c.spec.target = f.Get<int>("feature_size", c.spec.target);
  c.spec.dct_k = f.Get<int>("dct_coefficients", c.spec.dct_k);
  c.hidden = f.Get<std::vector<int>>("hidden", c.hidden);
  c.split = f.Get<int>("split", c.split);
  c.noise_aug_sigma = f.Get<double>("noise_aug_sigma", c.noise_aug_sigma);
  c.validation_fraction = f.Get<double>("validation_fraction", c.validation_fraction);
  c.first_layer_init_scale = f.Get<double>("first_layer_init_scale", c.first_layer_init_scale);
  ParseTrain(f, "train", c.train);
  f.Finish();
  Checked(f.where(), [&] { c.Validate(); });
}

class AdversarialCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    cfg_.scheme = ParseScheme(f.Sub("scheme"));
    cfg_.key = ParseKey(f, fs::current_path());
    ParseSubstitute(f, cfg_.substitute);
    if (f.Has("pgd")) {
      Fields p = f.Sub("pgd");
      cfg_.pgd.steps = p.Get<int>("steps", cfg_.pgd.steps);
      step_fraction_ = p.Get<double>("step_fraction", step_fraction_);
      cfg_.pgd.warm_start = p.Get<bool>("warm_start", cfg_.pgd.warm_start);
      cfg_.pgd.warmup_count = p.Get<int>("warmup_count", cfg_.pgd.warmup_count);
      p.Finish();
    } else {
      f.Optional<json>("pgd");
    }
    std::vector<double> eps255 = f.Get<std::vector<double>>("epsilons_255", {0, 2, 4, 8});
    cfg_.epsilons.clear();
    for (double e : eps255) cfg_.epsilons.push_back(e / 255.0);
    cfg_.uniform_factor = f.Get<double>("uniform_factor", cfg_.uniform_factor);
    if (!(step_fraction_ > 0.0 && step_fraction_ <= 1.0)) {
      throw ValidationError(f.Path("pgd.step_fraction") + ": must lie in (0, 1]");
    }
    Checked(f.where(), [&] { cfg_.Validate(); });
    save_images_ = f.Get<bool>("save_images", false);
    if (auto ck = f.Optional<std::string>("checkpoint")) {
      checkpoint_ = Checked(f.Path("checkpoint"), [&] { return LoadSubstitute(*ck); });
      inputs["checkpoint"] = *ck;
    } else {
      train_ = Load(f, "train", opt);
    }
    eval_marked_ = Load(f, "eval_marked", opt);
    eval_clean_ = Load(f, "eval_clean", opt);
    const int align = BlockAlignment(cfg_.scheme.kind);
    for (const auto* s : {&train_, &eval_marked_, &eval_clean_}) {
      RequireAligned(*s, align, opt.strict_dims, f.where());
      for (const Image& im : s->images) {
        if (im.width() < cfg_.substitute.spec.target || im.height() < cfg_.substitute.spec.target) {
          throw ValidationError(f.where() + ": images smaller than substitute.feature_size");
        }
      }
    }
    cfg_.seed = opt.seed;
    seeds["substitute-train"] = StageSeed(opt.seed, "substitute-train", 0);
    seeds["uniform-noise"] = StageSeed(opt.seed, "uniform-noise", 0);
  }

  int Execute(RunContext& ctx) override {
    cfg_.jobs = ctx.jobs();
    cfg_.pgd.step_size.reset();
    SubstituteClassifier clf;
    if (checkpoint_) {
      clf = *checkpoint_;
    } else {
      ctx.SetStage("train-substitute");
      SubstituteTrainConfig sc = cfg_.substitute;
      sc.train.seed = seeds["substitute-train"];
      sc.jobs = ctx.jobs();
      const auto wm = EmbedAll(train_.images, cfg_.key, cfg_.scheme, ctx.jobs());
      clf = TrainSubstitute(wm, train_.images, sc);
    }
    ctx.SetStage("attack");
    std::vector<AdversarialRow> rows;
    AdversarialStudyResult res;
    // The step is a fraction of each epsilon, so run one grid point at a
    // time.
    for (double eps : cfg_.epsilons) {
      AdversarialStudyConfig one = cfg_;
      one.epsilons = {eps};
      if (eps > 0.0) one.pgd.step_size = step_fraction_ * eps;
      AdversarialStudyResult r =
          RunAdversarialStudy(one, clf, eval_marked_.images, eval_clean_.images, save_images_);
      res.validation_accuracy = r.validation_accuracy;
      res.auroc_before = r.auroc_before;
      res.rows.push_back(r.rows.front());
      if (save_images_) res.attacked.push_back(std::move(r.attacked.front()));
    }
    ctx.SetStage("write");
    if (!checkpoint_) {
      SaveSubstitute(clf, ctx.out_dir() / "substitute.bin");
    }
    if (save_images_) {
      for (std::size_t k = 0; k < res.attacked.size(); ++k) {
        ctx.SaveImages("images_eps" + D(cfg_.epsilons[k] * 255.0),
                       ImageSet{eval_marked_.ids, std::move(res.attacked[k])});
      }
    }
    CsvTable t({"epsilon_255", "auroc_pgd", "auroc_uniform", "flip_rate", "mean_confidence",
                "max_linf_255", "box_ok"});
    for (const auto& r : res.rows) {
      t.AddRow({D(r.epsilon * 255.0), D(r.auroc_pgd), D(r.auroc_uniform), D(r.flip_rate),
                D(r.mean_confidence), D(r.max_linf * 255.0), B(r.box_ok)});
    }
    ctx.WriteCsv("adv.csv", t);
    CsvTable s({"validation_accuracy", "auroc_before", "uniform_factor"});
    s.AddRow({D(res.validation_accuracy), D(res.auroc_before), D(cfg_.uniform_factor)});
    ctx.WriteCsv("adv_summary.csv", s);
    return 0;
  }

 private:
  AdversarialStudyConfig cfg_;
  double step_fraction_ = 0.05;
  bool save_images_ = false;
  std::optional<SubstituteClassifier> checkpoint_;
  ImageSet train_, eval_marked_, eval_clean_;
};

//------------------------------------------------------------------------------

class EvalRocCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    scheme_ = ParseScheme(f.Sub("scheme"));
    key_ = ParseKey(f, fs::current_path());
    svg_ = f.Get<bool>("svg", true);
    pos_ = Load(f, "positive", opt);
    neg_ = Load(f, "negative", opt);
    RequireAligned(pos_, BlockAlignment(scheme_.kind), opt.strict_dims, f.Path("positive"));
    RequireAligned(neg_, BlockAlignment(scheme_.kind), opt.strict_dims, f.Path("negative"));
  }

  int Execute(RunContext& ctx) override {
    ctx.SetStage("score");
    const auto pos = Confidences(pos_.images, key_, scheme_, ctx.jobs());
    const auto neg = Confidences(neg_.images, key_, scheme_, ctx.jobs());
    const RocCurve roc = Roc(pos, neg);
    ctx.SetStage("write");
    CsvTable scores({"id", "label", "score"});
    for (std::size_t i = 0; i < pos.size(); ++i) scores.AddRow({pos_.ids[i], "1", D(pos[i])});
    for (std::size_t i = 0; i < neg.size(); ++i) scores.AddRow({neg_.ids[i], "0", D(neg[i])});
    ctx.WriteCsv("scores.csv", scores);
    CsvTable curve({"threshold", "fpr", "tpr"});
    for (const auto& p : roc.points) curve.AddRow({D(p.threshold), D(p.fpr), D(p.tpr)});
    ctx.WriteCsv("roc.csv", curve);
    CsvTable s({"auroc", "min_total_error", "tpr_at_fpr_0.01", "tpr_at_fpr_0.05", "positives",
                "negatives"});
    s.AddRow({D(roc.auroc), D(MinTotalError(roc)), D(TprAtFpr(roc, 0.01)),
              D(TprAtFpr(roc, 0.05)), I(roc.positives), I(roc.negatives)});
    ctx.WriteCsv("roc_summary.csv", s);
    if (svg_) ctx.WriteText("roc.svg", RocSvg(roc, std::string(SchemeName(scheme_.kind))));
    return 0;
  }

 private:
  WatermarkScheme scheme_;
  WatermarkKey key_;
  bool svg_ = true;
  ImageSet pos_, neg_;
};

//------------------------------------------------------------------------------

class TheoryBoundCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions&) override {
    schedule_ = ParseSchedule(f);
    if (f.Has("purification")) {
      Fields p = f.Sub("purification");
      w_ = p.Get<std::vector<double>>("w_values", w_);
      t_ = p.Get<std::vector<double>>("t_values", t_);
      p.Finish();
    } else {
      f.Optional<json>("purification");
    }
    if (f.Has("tradeoff")) {
      Fields p = f.Sub("tradeoff");
      wl_ = p.Get<std::vector<double>>("w_latent_values", wl_);
      sig_ = p.Get<std::vector<double>>("sigma_values", sig_);
      alpha_ = p.Get<double>("alpha", alpha_);
      p.Finish();
    } else {
      f.Optional<json>("tradeoff");
    }
    for (double w : w_) if (!(w >= 0.0)) throw ValidationError(f.where() + ": w_values >= 0");
    for (double t : t_) {
      if (!(t > 0.0 && t < 1.0)) throw ValidationError(f.where() + ": t_values in (0, 1)");
    }
    for (double w : wl_) if (!(w >= 0.0)) throw ValidationError(f.where() + ": w_latent >= 0");
    for (double s : sig_) if (!(s > 0.0)) throw ValidationError(f.where() + ": sigma > 0");
    if (!(alpha_ >= 0.0 && alpha_ < 0.5)) throw ValidationError(f.where() + ": alpha in [0, 0.5)");
  }

  int Execute(RunContext& ctx) override {
    ctx.SetStage("purification-grid");
    CsvTable p({"w", "t", "alpha_bar", "bound"});
    std::vector<std::vector<double>> grid(w_.size(), std::vector<double>(t_.size()));
    for (std::size_t i = 0; i < w_.size(); ++i)
      for (std::size_t j = 0; j < t_.size(); ++j) {
        grid[i][j] = theory::PurificationBound({w_[i], schedule_, t_[j]});
        p.AddRow({D(w_[i]), D(t_[j]), D(theory::AlphaBar(schedule_, t_[j])), D(grid[i][j])});
      }
    ctx.SetStage("tradeoff-grid");
    CsvTable q({"w_latent", "sigma", "alpha", "psi", "bound"});
    std::vector<std::vector<double>> g2(wl_.size(), std::vector<double>(sig_.size()));
    for (std::size_t i = 0; i < wl_.size(); ++i)
      for (std::size_t j = 0; j < sig_.size(); ++j) {
        g2[i][j] = theory::RobustAurocBound({wl_[i], sig_[j], alpha_});
        q.AddRow({D(wl_[i]), D(sig_[j]), D(alpha_), D(theory::PsiSigma(wl_[i], sig_[j])),
                  D(g2[i][j])});
      }
    // Violations of the expected orderings on the sorted axes: the first
    // bound falls as W grows and rises with t; the second falls as sigma
    // grows and rises with W.
    auto violations = [](const std::vector<double>& rows, const std::vector<double>& cols,
                         const std::vector<std::vector<double>>& g, int row_dir, int col_dir) {
      std::vector<std::size_t> ri(rows.size()), ci(cols.size());
      std::iota(ri.begin(), ri.end(), 0);
      std::iota(ci.begin(), ci.end(), 0);
      std::sort(ri.begin(), ri.end(), [&](auto a, auto b) { return rows[a] < rows[b]; });
      std::sort(ci.begin(), ci.end(), [&](auto a, auto b) { return cols[a] < cols[b]; });
      int v = 0;
      for (std::size_t a = 0; a < ri.size(); ++a)
        for (std::size_t b = 0; b < ci.size(); ++b) {
          const double x = g[ri[a]][ci[b]];
          if (a + 1 < ri.size() && rows[ri[a + 1]] > rows[ri[a]] &&
              (g[ri[a + 1]][ci[b]] - x) * row_dir < 0.0) ++v;
          if (b + 1 < ci.size() && cols[ci[b + 1]] > cols[ci[b]] &&
              (g[ri[a]][ci[b + 1]] - x) * col_dir < 0.0) ++v;
        }
      return v;
    };
    ctx.SetStage("write");
    ctx.WriteCsv("purification_bound.csv", p);
    ctx.WriteCsv("tradeoff_bound.csv", q);
    CsvTable s({"grid", "cells", "order_violations"});
    s.AddRow({"purification", I(w_.size() * t_.size()), I(violations(w_, t_, grid, -1, +1))});
    s.AddRow({"tradeoff", I(wl_.size() * sig_.size()), I(violations(wl_, sig_, g2, +1, -1))});
    ctx.WriteCsv("bound_summary.csv", s);
    return 0;
  }

 private:
  DiffusionSchedule schedule_;
  std::vector<double> w_ = {0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 16.0};
  std::vector<double> t_ = {0.1, 0.2, 0.3, 0.5};
  std::vector<double> wl_ = {0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> sig_ = {0.5, 1.0, 2.5, 5.0, 10.0, 20.0};
  double alpha_ = 0.01;
};

//------------------------------------------------------------------------------

class TradeoffCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    cfg_.train_sigmas = f.Get<std::vector<double>>("train_sigmas", cfg_.train_sigmas);
    cfg_.alpha = f.Get<double>("alpha", cfg_.alpha);
    cfg_.draws = f.Get<int>("draws", cfg_.draws);
    cfg_.trials = f.Get<int>("trials", cfg_.trials);
    cfg_.head_hidden = f.Get<std::vector<int>>("head_hidden", cfg_.head_hidden);
    ParseTrain(f, "head_train", cfg_.head_train);
    if (f.Has("search")) {
      Fields s = f.Sub("search");
      cfg_.search.rel_tol = s.Get<double>("rel_tol", cfg_.search.rel_tol);
      cfg_.search.max_iter = s.Get<int>("max_iter", cfg_.search.max_iter);
      cfg_.search.initial_hi = s.Get<double>("initial_hi", cfg_.search.initial_hi);
      cfg_.search.cap = s.Get<double>("cap", cfg_.search.cap);
      s.Finish();
    } else {
      f.Optional<json>("search");
    }
    cfg_.seed = StageSeed(opt.seed, "tradeoff");
    seeds["tradeoff"] = cfg_.seed;
    Checked(f.where(), [&] { cfg_.Validate(); });

    Fields d = f.Sub("dataset");
    kind_ = d.Require<std::string>("kind");
    if (kind_ == "synthetic") {
      SyntheticLatentSpec spec;
      spec.fragile_dims = d.Get<int>("fragile_dims", spec.fragile_dims);
      spec.fragile_gap = d.Get<double>("fragile_gap", spec.fragile_gap);
      spec.fragile_spread = d.Get<double>("fragile_spread", spec.fragile_spread);
      spec.robust_gap = d.Get<double>("robust_gap", spec.robust_gap);
      spec.robust_spread = d.Get<double>("robust_spread", spec.robust_spread);
      spec.conflict_rate = d.Get<double>("conflict_rate", spec.conflict_rate);
      const int n_train = d.Get<int>("n_train", 300);
      const int n_test = d.Get<int>("n_test", 300);
      d.Finish();
      if (n_train < 1 || n_test < 1) throw ValidationError(d.where() + ": n_train, n_test >= 1");
      Checked(d.where(), [&] { spec.Validate(); });
      const std::uint64_t s = StageSeed(opt.seed, "tradeoff-latents");
      seeds["tradeoff-latents"] = s;
      data_ = {SyntheticLatents(spec, n_train, 0, s + 1), SyntheticLatents(spec, n_train, 1, s + 2),
               SyntheticLatents(spec, n_test, 0, s + 3), SyntheticLatents(spec, n_test, 1, s + 4)};
      inputs["dataset"] = "synthetic";
    } else if (kind_ == "substitute") {
      const std::string ck = d.Require<std::string>("checkpoint");
      clf_ = Checked(d.Path("checkpoint"), [&] { return LoadSubstitute(ck); });
      inputs["checkpoint"] = ck;
      scheme_ = ParseScheme(d.Sub("scheme"));
      key_ = ParseKey(d, fs::current_path());
      train_fraction_ = d.Get<double>("train_fraction", 0.5);
      if (!(train_fraction_ > 0.0 && train_fraction_ < 1.0)) {
        throw ValidationError(d.Path("train_fraction") + ": must lie in (0, 1)");
      }
      clean_ = Load(d, "clean", opt);
      d.Finish();
      if (clean_.images.size() < 4) throw ValidationError(d.Path("clean") + ": need >= 4 images");
      for (const Image& im : clean_.images) {
        if (im.width() < clf_->spec.target || im.height() < clf_->spec.target) {
          throw ValidationError(d.Path("clean") + ": images smaller than the feature map");
        }
      }
    } else {
      throw ValidationError(d.Path("kind") + ": must be 'synthetic' or 'substitute'");
    }
  }

  int Execute(RunContext& ctx) override {
    cfg_.jobs = ctx.jobs();
    if (kind_ == "substitute") {
      ctx.SetStage("latents");
      const auto marked = EmbedAll(clean_.images, key_, scheme_, ctx.jobs());
      const LatentSet real = LatentsOf(*clf_, clean_.images, ctx.jobs());
      const LatentSet fake = LatentsOf(*clf_, marked, ctx.jobs());
      const std::size_t cut = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::lround(train_fraction_ * real.size())), 1,
          real.size() - 1);
      data_.train_real.assign(real.begin(), real.begin() + cut);
      data_.test_real.assign(real.begin() + cut, real.end());
      data_.train_fake.assign(fake.begin(), fake.begin() + cut);
      data_.test_fake.assign(fake.begin() + cut, fake.end());
    }
    ctx.SetStage("tradeoff");
    const TradeoffResult r = RunTradeoff(cfg_, data_);
    ctx.SetStage("write");
    CsvTable rows({"train_sigma", "trial", "sigma_at_alpha", "alpha", "bracketed", "auroc",
                   "auroc_noisy", "auroc_decision", "auroc_noisy_decision", "consistency_rhs",
                   "consistency_holds", "consistency_holds_scores"});
    for (const auto& x : r.rows) {
      rows.AddRow({D(x.train_sigma), I(x.trial), D(x.sigma_at_alpha), D(x.alpha),
                   B(x.bracketed), D(x.auroc), D(x.auroc_noisy), D(x.auroc_decision),
                   D(x.auroc_noisy_decision), D(x.consistency_rhs), B(x.consistency_holds),
                   B(x.consistency_holds_scores)});
    }
    ctx.WriteCsv("tradeoff_rows.csv", rows);
    CsvTable sum({"train_sigma", "sigma_at_alpha", "auroc"});
    for (const auto& s : r.summary) {
      sum.AddRow({D(s.train_sigma), D(s.sigma_at_alpha), D(s.auroc)});
    }
    ctx.WriteCsv("tradeoff_summary.csv", sum);
    CsvTable st({"spearman_train_vs_inference", "spearman_inference_vs_auroc",
                 "consistency_all_hold"});
    st.AddRow({D(r.spearman_train_vs_inference), D(r.spearman_inference_vs_auroc),
               B(r.consistency_all_hold)});
    ctx.WriteCsv("tradeoff_stats.csv", st);
    return 0;
  }

 private:
  TradeoffConfig cfg_;
  std::string kind_;
  TradeoffDatasets data_;
  std::optional<SubstituteClassifier> clf_;
  WatermarkScheme scheme_;
  WatermarkKey key_;
  double train_fraction_ = 0.5;
  ImageSet clean_;
};

//------------------------------------------------------------------------------

class CertifyCommand : public Command {
 public:
  void Prepare(Fields& f, const GlobalOptions& opt) override {
    cfg_.key = ParseKey(f, fs::current_path());
    cfg_.schedule = ParseSchedule(f);
    if (f.Has("schemes")) {
      cfg_.schemes.clear();
      const json& arr = f.Raw("schemes");
      if (!arr.is_array()) throw ValidationError(f.Path("schemes") + ": expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        cfg_.schemes.push_back(ParseScheme(Fields(arr[i], f.Path("schemes") + "[" + I(i) + "]")));
      }
    } else {
      f.Optional<json>("schemes");
    }
    if (f.Has("denoisers")) {
      cfg_.denoisers.clear();
      const json& arr = f.Raw("denoisers");
      if (!arr.is_array()) throw ValidationError(f.Path("denoisers") + ": expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        cfg_.denoisers.push_back(
            ParseDenoiser(Fields(arr[i], f.Path("denoisers") + "[" + I(i) + "]")));
      }
    } else {
      f.Optional<json>("denoisers");
    }
    cfg_.ts = f.Get<std::vector<double>>("ts", cfg_.ts);
    cfg_.slack = f.Get<double>("slack", cfg_.slack);
    cfg_.seed = StageSeed(opt.seed, "purify");
    seeds["purify-noise"] = cfg_.seed;
    Checked(f.where(), [&] { cfg_.Validate(); });
    input_ = Load(f, "input", opt);
    for (const auto& s : cfg_.schemes) {
      RequireAligned(input_, BlockAlignment(s.kind), opt.strict_dims, f.Path("input"));
    }
  }

  int Execute(RunContext& ctx) override {
    ctx.SetStage("purify-and-detect");
    cfg_.jobs = ctx.jobs();
    const PurificationStudyResult r = RunPurificationStudy(cfg_, input_.images);
    ctx.SetStage("write");
    CsvTable t({"scheme", "strength", "denoiser", "t", "auroc", "min_total_error", "bound",
                "slack", "certified"});
    for (const auto& row : r.rows) {
      t.AddRow({std::string(SchemeName(row.scheme.kind)), D(row.scheme.strength), row.denoiser,
                D(row.t), D(row.auroc), D(row.min_total_error), D(row.bound), D(cfg_.slack),
                row.certified ? "pass" : "FAIL"});
    }
    ctx.WriteCsv("certify.csv", t);
    CsvTable s({"scheme", "strength", "paired_l2_255", "w_01", "auroc_clean"});
    for (const auto& x : r.schemes) {
      s.AddRow({std::string(SchemeName(x.scheme.kind)), D(x.scheme.strength), D(x.paired_l2),
                D(x.wasserstein_01), D(x.auroc_clean)});
    }
    ctx.WriteCsv("certify_schemes.csv", s);
    for (const auto& row : r.rows) {
      std::printf("%-10s %-8s t=%-5s min(e0+e1)=%-8s bound=%-10s %s\n",
                  std::string(SchemeName(row.scheme.kind)).c_str(), row.denoiser.c_str(),
                  D(row.t).c_str(), D(row.min_total_error).c_str(), D(row.bound).c_str(),
                  row.certified ? "pass" : "FAIL");
    }
    if (!r.all_certified) {
      ctx.SetStage("certificate");
      throw std::runtime_error("certificate violated for at least one row");
    }
    return 0;
  }

 private:
  PurificationStudyConfig cfg_;
  ImageSet input_;
};

//------------------------------------------------------------------------------

std::unique_ptr<Command> MakeCommand(const std::string& name) {
  if (name == "synth") return std::make_unique<SynthCommand>();
  if (name == "embed") return std::make_unique<EmbedCommand>();
  if (name == "detect") return std::make_unique<DetectCommand>();
  if (name == "attack-purify") return std::make_unique<PurifyCommand>();
  if (name == "attack-adv") return std::make_unique<AdversarialCommand>();
  if (name == "attack-spoof") return std::make_unique<SpoofCommand>();
  if (name == "mitigate") return std::make_unique<MitigateCommand>();
  if (name == "eval-roc") return std::make_unique<EvalRocCommand>();
  if (name == "theory-bound") return std::make_unique<TheoryBoundCommand>();
  if (name == "tradeoff") return std::make_unique<TradeoffCommand>();
  if (name == "certify") return std::make_unique<CertifyCommand>();
  return nullptr;
}

struct Invocation {
  std::string command;
  GlobalOptions opt;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> jobs_flag;
  std::string output_flag;
};

int Run(const Invocation& inv) {
  GlobalOptions opt = inv.opt;
  json config;
  {
    std::ifstream in(opt.config_path);
    if (!in) {
      std::fprintf(stderr, "wmbench: cannot read config %s\n", opt.config_path.string().c_str());
      return 2;
    }
    try {
      config = json::parse(in);
    } catch (const json::exception& e) {
      std::fprintf(stderr, "wmbench: config is not valid JSON: %s\n", e.what());
      return 2;
    }
  }

  auto cmd = MakeCommand(inv.command);
  fs::path out_dir;
  try {
    Fields root(config, "config");
    const std::string kind = root.Get<std::string>("experiment", inv.command);
    if (kind != inv.command) {
      throw ValidationError("config.experiment: '" + kind + "' does not match subcommand '" +
                            inv.command + "'");
    }
    opt.seed = inv.seed_flag ? *inv.seed_flag : root.Get<std::uint64_t>("seed", 0);
    if (inv.jobs_flag) {
      opt.jobs = *inv.jobs_flag;
    } else {
      opt.jobs = root.Get<int>("jobs", DefaultJobs());
    }
    if (opt.jobs < 1) throw ValidationError("jobs must be >= 1");
    const auto cfg_out = root.Optional<std::string>("output_dir");
    if (!inv.output_flag.empty()) {
      out_dir = inv.output_flag;
    } else if (cfg_out) {
      out_dir = *cfg_out;
    } else {
      throw ValidationError("config.output_dir: required (or pass --output-dir)");
    }
    std::error_code ec;
    if (fs::exists(out_dir, ec) && !fs::is_directory(out_dir, ec)) {
      throw ValidationError("output_dir exists and is not a directory: " + out_dir.string());
    }
    cmd->Prepare(root, opt);
    root.Finish();
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "wmbench %s: invalid config: %s\n", inv.command.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wmbench %s: invalid config: %s\n", inv.command.c_str(), e.what());
    return 2;
  }

  RunContext ctx(inv.command, config, opt, out_dir);
  for (const auto& [k, v] : cmd->seeds) ctx.NoteSeed(k, v);
  for (const auto& [k, v] : cmd->inputs) ctx.NoteInput(k, v);
  try {
    ctx.Begin();
    const int code = cmd->Execute(ctx);
    ctx.Finish(code == 0);
    return code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wmbench %s: failed: %s\n", inv.command.c_str(), e.what());
    ctx.Finish(false, e.what());
    return 1;
  }
}

}  // namespace
}  // namespace wmbench::cli

int main(int argc, char** argv) {
  using namespace wmbench::cli;
  CLI::App app{"wmbench: watermark robustness benchmark"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Invocation inv;
  const std::pair<const char*, const char*> kCommands[] = {
      {"synth", "Generate a synthetic image corpus"},
      {"embed", "Watermark a set of images"},
      {"detect", "Run the keyed detector on a set of images"},
      {"attack-purify", "Noise-then-denoise purification attack"},
      {"attack-adv", "Substitute-classifier PGD attack and transfer evaluation"},
      {"attack-spoof", "Mix watermarked noise into clean images"},
      {"mitigate", "Post-attack blur or JPEG recompression"},
      {"eval-roc", "ROC of the keyed detector on positive vs. negative sets"},
      {"theory-bound", "Tabulate the purification and robust-AUROC bounds"},
      {"tradeoff", "Robustness vs. AUROC experiment on latent heads"},
      {"certify", "Check the purification error-sum certificate on a corpus"},
  };
  std::uint64_t seed = 0;
  int jobs = 0;
  for (const auto& [name, help] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", inv.opt.config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Run seed (overrides config.seed)");
    sub->add_option("-j,--jobs", jobs, "Worker threads (default: all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("-o,--output-dir", inv.output_flag, "Output directory (overrides config)");
    sub->add_flag("--strict-dims", inv.opt.strict_dims,
                  "Reject images whose size is not a multiple of the scheme's block size");
    sub->callback([&inv, &seed, &jobs, sub, name = std::string(name)] {
      inv.command = name;
      if (sub->count("--seed")) inv.seed_flag = seed;
      if (sub->count("--jobs")) inv.jobs_flag = jobs;
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return Run(inv);
}
