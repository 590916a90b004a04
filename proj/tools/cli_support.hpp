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

// Config reading, input discovery and output bookkeeping for the wmbench
// command-line tool.

#ifndef WMBENCH_TOOLS_CLI_SUPPORT_HPP_
#define WMBENCH_TOOLS_CLI_SUPPORT_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wmbench/wmbench.hpp"

#ifndef WMBENCH_VERSION
#define WMBENCH_VERSION "0.0.0"
#endif

namespace wmbench::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr char kToolVersion[] = WMBENCH_VERSION;

// Anything wrong with the config or the inputs it names. Reported before
// any output is written.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  fs::path config_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool strict_dims = false;
};

// Typed access to one JSON object. Every key must be read before Finish(),
// so misspelled keys are reported instead of silently ignored.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ValidationError(where_ + ": expected an object");
  }

  bool Has(const std::string& key) const { return obj_.contains(key); }

  template <class T>
  T Get(const std::string& key, T fallback) {
    if (!Has(key)) {
      seen_.insert(key);
      return fallback;
    }
    return Require<T>(key);
  }

  template <class T>
  T Require(const std::string& key) {
    seen_.insert(key);
    if (!Has(key)) throw ValidationError(Path(key) + ": required");
    try {
      return obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(Path(key) + ": wrong type (" + obj_.at(key).dump() + ")");
    }
  }

  template <class T>
  std::optional<T> Optional(const std::string& key) {
    seen_.insert(key);
    if (!Has(key) || obj_.at(key).is_null()) return std::nullopt;
    return Require<T>(key);
  }

  Fields Sub(const std::string& key) {
    seen_.insert(key);
    if (!Has(key)) throw ValidationError(Path(key) + ": required");
    return Fields(obj_.at(key), Path(key));
  }

  const json& Raw(const std::string& key) {
    seen_.insert(key);
    if (!Has(key)) throw ValidationError(Path(key) + ": required");
    return obj_.at(key);
  }

  std::string Path(const std::string& key) const { return where_ + "." + key; }
  const std::string& where() const { return where_; }

  void Finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ValidationError(Path(k) + ": unknown key");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

// Runs `fn`, turning library argument errors into validation errors that
// name the config location.
template <class Fn>
auto Checked(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

//------------------------------------------------------------------------------
// Inputs.

struct ImageSet {
  std::vector<std::string> ids;
  std::vector<Image> images;
};

inline bool IsImageFile(const fs::path& p) {
  std::string ext = p.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

inline std::vector<fs::path> ListImages(const fs::path& dir, const std::string& where) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw ValidationError(where + ": not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && IsImageFile(e.path())) files.push_back(e.path());
  }
  if (ec) throw ValidationError(where + ": cannot list " + dir.string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError(where + ": no images in " + dir.string());
  return files;
}

// A source is {"dir": path} or {"synth": {"n": .., "size": .., "seed": ..,
// "first_index": ..}}. A synthetic source without a seed derives one from
// the run seed and the source's role.
struct ImageSource {
  std::optional<fs::path> dir;
  int n = 0;
  int size = kSynthSize;
  std::uint64_t seed = 0;
  std::uint64_t first_index = 0;

  std::string Describe() const {
    if (dir) return "dir:" + dir->string();
    return "synth:n=" + std::to_string(n) + ",size=" + std::to_string(size) +
           ",seed=" + std::to_string(seed) + ",first_index=" + std::to_string(first_index);
  }
};

inline ImageSource ParseSource(Fields f, std::uint64_t run_seed, const std::string& role,
                               const fs::path& base) {
  ImageSource src;
  if (f.Has("dir") == f.Has("synth")) {
    throw ValidationError(f.where() + ": give exactly one of 'dir' or 'synth'");
  }
  if (f.Has("dir")) {
    fs::path p = f.Require<std::string>("dir");
    src.dir = p.is_absolute() ? p : base / p;
  } else {
    Fields s = f.Sub("synth");
    src.n = s.Require<int>("n");
    src.size = s.Get<int>("size", kSynthSize);
    src.seed = s.Get<std::uint64_t>("seed", StageSeed(run_seed, "corpus-" + role));
    src.first_index = s.Get<std::uint64_t>("first_index", 0);
    s.Finish();
    if (src.n < 1) throw ValidationError(s.Path("n") + ": must be >= 1");
    if (src.size < 16 || src.size > 4096) {
      throw ValidationError(s.Path("size") + ": must lie in [16, 4096]");
    }
  }
  f.Finish();
  return src;
}

inline ImageSet LoadSource(const ImageSource& src, const std::string& where, int jobs) {
  ImageSet set;
  if (src.dir) {
    const auto files = ListImages(*src.dir, where);
    set.images.resize(files.size());
    for (const auto& f : files) set.ids.push_back(f.stem().string());
    std::vector<std::string> errors(files.size());
    ParallelFor(files.size(), jobs, [&](std::size_t i) {
      try {
        set.images[i] = LoadImage(files[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    for (const auto& e : errors) {
      if (!e.empty()) throw ValidationError(where + ": " + e);
    }
    return set;
  }
  set.images.resize(src.n);
  ParallelFor(static_cast<std::size_t>(src.n), jobs, [&](std::size_t i) {
    set.images[i] = SynthNaturalImage(src.seed, src.first_index + i, src.size);
  });
  char buf[32];
  for (int i = 0; i < src.n; ++i) {
    std::snprintf(buf, sizeof(buf), "synth_%05llu",
                  static_cast<unsigned long long>(src.first_index + i));
    set.ids.emplace_back(buf);
  }
  return set;
}

inline void RequireAligned(const ImageSet& set, int multiple, bool strict,
                           const std::string& where) {
  if (!strict || multiple <= 1) return;
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    const Image& im = set.images[i];
    if (im.width() % multiple != 0 || im.height() % multiple != 0) {
      throw ValidationError(where + ": " + set.ids[i] + " is " + std::to_string(im.width()) +
                            "x" + std::to_string(im.height()) +
                            ", not a multiple of " + std::to_string(multiple) +
                            " (strict dims)");
    }
  }
}

//------------------------------------------------------------------------------
// Parameter blocks.

inline WatermarkScheme ParseScheme(Fields f) {
  WatermarkScheme s;
  s.kind = Checked(f.Path("kind"), [&] { return ParseSchemeKind(f.Require<std::string>("kind")); });
  s.strength = f.Get<double>("strength", DefaultStrength(s.kind));
  f.Finish();
  Checked(f.where(), [&] { s.Validate(); });
  return s;
}

// "key" holds 64 binary digits; "key_file" names a file whose first key is
// used.
inline WatermarkKey ParseKey(Fields& f, const fs::path& base) {
  if (f.Has("key") == f.Has("key_file")) {
    throw ValidationError(f.where() + ": give exactly one of 'key' or 'key_file'");
  }
  if (f.Has("key")) {
    const std::string k = f.Require<std::string>("key");
    return Checked(f.Path("key"), [&] { return WatermarkKey::Parse(k); });
  }
  fs::path p = f.Require<std::string>("key_file");
  if (!p.is_absolute()) p = base / p;
  return Checked(f.Path("key_file"), [&] {
    const auto keys = LoadKeys(p);
    if (keys.empty()) throw std::invalid_argument("no keys in " + p.string());
    return keys.front();
  });
}

inline DiffusionSchedule ParseSchedule(Fields& parent) {
  if (!parent.Has("schedule")) {
    parent.Optional<json>("schedule");
    return DiffusionSchedule();
  }
  Fields f = parent.Sub("schedule");
  const int n = f.Get<int>("n_steps", 1000);
  const double b0 = f.Get<double>("beta_start", DiffusionSchedule::kDefaultBetaStart);
  const double b1 = f.Get<double>("beta_end", DiffusionSchedule::kDefaultBetaEnd);
  f.Finish();
  return Checked(f.where(), [&] { return DiffusionSchedule(n, b0, b1); });
}

inline Denoiser ParseDenoiser(Fields f) {
  const std::string kind = f.Require<std::string>("kind");
  Denoiser d;
  if (kind == "identity") {
    d = IdentityDenoiser{};
  } else if (kind == "blur") {
    d = BlurDenoiser{f.Get<int>("ksize", 5), f.Get<double>("sigma", 1.1)};
  } else if (kind == "median") {
    d = MedianDenoiser{f.Get<int>("ksize", 3)};
  } else if (kind == "wavelet") {
    d = WaveletShrinkDenoiser{f.Optional<double>("threshold"), f.Get<int>("levels", 4)};
  } else if (kind == "tv") {
    d = TvChambolleDenoiser{f.Optional<double>("weight"), f.Get<int>("iters", 50)};
  } else {
    throw ValidationError(f.Path("kind") + ": unknown denoiser '" + kind + "'");
  }
  f.Finish();
  Checked(f.where(), [&] { ValidateDenoiser(d); });
  return d;
}

inline Optimizer ParseOptimizer(const std::string& s, const std::string& where) {
  if (s == "adam") return Optimizer::kAdam;
  if (s == "sgd") return Optimizer::kSgdMomentum;
  throw ValidationError(where + ": optimizer must be 'adam' or 'sgd'");
}

inline std::string OptimizerName(Optimizer o) { return o == Optimizer::kAdam ? "adam" : "sgd"; }

// Overrides the given TrainConfig from an optional object.
inline void ParseTrain(Fields& parent, const std::string& key, TrainConfig& t) {
  if (!parent.Has(key)) {
    parent.Optional<json>(key);
    return;
  }
  Fields f = parent.Sub(key);
  t.optimizer = ParseOptimizer(f.Get<std::string>("optimizer", OptimizerName(t.optimizer)),
                               f.Path("optimizer"));
  t.epochs = f.Get<int>("epochs", t.epochs);
  t.batch = f.Get<int>("batch", t.batch);
  t.lr = f.Get<double>("lr", t.lr);
  t.momentum = f.Get<double>("momentum", t.momentum);
  t.weight_decay = f.Get<double>("weight_decay", t.weight_decay);
  t.cosine_decay = f.Get<bool>("cosine_decay", t.cosine_decay);
  f.Finish();
  Checked(f.where(), [&] { t.Validate(); });
}

//------------------------------------------------------------------------------
// Outputs.

inline std::string Hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Owns the output directory for one run: creates it, writes files
// atomically, remembers per-stage seeds and writes manifest.json at the end.
class RunContext {
 public:
  RunContext(std::string command, const json& config, const GlobalOptions& opt,
             fs::path out_dir)
      : command_(std::move(command)), opt_(opt), out_dir_(std::move(out_dir)) {
    config_hash_ = Fnv1a64(config.dump() + "|seed=" + std::to_string(opt.seed));
  }

  const fs::path& out_dir() const { return out_dir_; }
  std::uint64_t run_seed() const { return opt_.seed; }
  int jobs() const { return opt_.jobs; }

  std::uint64_t Seed(const std::string& stage) {
    const std::uint64_t s = StageSeed(opt_.seed, stage);
    stage_seeds_[stage] = s;
    return s;
  }
  void NoteSeed(const std::string& stage, std::uint64_t s) { stage_seeds_[stage] = s; }
  void NoteInput(const std::string& role, const std::string& description) {
    inputs_[role] = description;
  }

  void Begin() {
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir_.string());
  }

  void SetStage(std::string s) {
    stage_ = std::move(s);
    std::fprintf(stderr, "[%s] %s\n", command_.c_str(), stage_.c_str());
  }

  void WriteCsv(const std::string& name, const CsvTable& t) {
    t.Write(out_dir_ / name);
    outputs_[name] = static_cast<long long>(t.rows().size());
  }

  void WriteText(const std::string& name, const std::string& text) {
    WriteFileAtomic(out_dir_ / name, text.data(), text.size());
    outputs_[name] = -1;
  }

  void SaveImages(const std::string& subdir, const ImageSet& set) {
    const fs::path dir = out_dir_ / subdir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string());
    ParallelFor(set.images.size(), opt_.jobs, [&](std::size_t i) {
      SaveImage(set.images[i], dir / (set.ids[i] + ".png"));
    });
    outputs_[subdir + "/"] = static_cast<long long>(set.images.size());
  }

  void Finish(bool ok, const std::string& error = {}) {
    json m;
    m["tool"] = "wmbench";
    m["version"] = kToolVersion;
    m["command"] = command_;
    m["config_path"] = opt_.config_path.string();
    m["config_hash"] = Hex64(config_hash_);
    m["seed"] = opt_.seed;
    m["jobs"] = opt_.jobs;
    m["strict_dims"] = opt_.strict_dims;
    json seeds = json::object();
    for (const auto& [k, v] : stage_seeds_) seeds[k] = v;
    m["stage_seeds"] = seeds;
    m["inputs"] = inputs_;
    json outs = json::object();
    for (const auto& [k, v] : outputs_) outs[k] = v < 0 ? json(nullptr) : json(v);
    m["outputs"] = outs;
    m["status"] = ok ? "ok" : "failed";
    if (!ok) {
      m["failed_stage"] = stage_;
      m["error"] = error;
    }
    const std::string text = m.dump(2) + "\n";
    try {
      std::error_code ec;
      fs::create_directories(out_dir_, ec);
      WriteFileAtomic(out_dir_ / "manifest.json", text.data(), text.size());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "wmbench: cannot write manifest: %s\n", e.what());
    }
  }

 private:
  std::string command_;
  GlobalOptions opt_;
  fs::path out_dir_;
  std::uint64_t config_hash_ = 0;
  std::string stage_ = "setup";
  std::map<std::string, std::uint64_t> stage_seeds_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, long long> outputs_;
};

}  // namespace wmbench::cli

#endif  // WMBENCH_TOOLS_CLI_SUPPORT_HPP_
