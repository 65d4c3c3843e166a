// Copyright 2026 The regionsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "regionsep/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "regionsep/dataset_builder.h"
#include "regionsep/errors.h"
#include "regionsep/metrics.h"
#include "regionsep/parallel.h"
#include "regionsep/signal_io.h"

namespace regionsep {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

void RunConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  require(jobs >= 1, "jobs >= 1");
  require(fft_size > 0 && (fft_size & (fft_size - 1)) == 0, "fft_size is a power of two");
  require(hop > 0 && hop <= fft_size, "0 < hop <= fft_size");
  require(f_aliasing > 0.0 && f_aliasing < kDefaultSampleRate / 2.0,
          "f_aliasing in (0, sample_rate/2)");
  require(sigma_th > 0.0, "sigma_th > 0");
  require(!sigma_dual || *sigma_dual > 0.0, "sigma_dual > 0");
  require(delta_tau_min >= 0.0, "delta_tau_min >= 0");
  require(alpha > 1.0, "alpha > 1");
  require(energy_floor_db <= 0.0, "energy_floor_db <= 0");
  require(em_max_iterations > 0, "em_max_iterations > 0");
  require(em_restarts >= 0, "em_restarts >= 0");
  require(head_itd_max > 0.0, "head_itd_max > 0");
  require(bank_step > 0.0 && bank_step <= 180.0, "bank_step in (0, 180]");
  require(hrir_taps >= 64, "hrir_taps >= 64");
  require(k_min >= 1 && k_max >= k_min, "1 <= k_min <= k_max");
  require(scenes >= 0, "scenes >= 0");
  require(duration > 0.0, "duration > 0");
  require(pool_size >= 2, "pool_size >= 2");
  require(pool_duration > 0.0, "pool_duration > 0");
  require(mixtures >= 0, "mixtures >= 0");
  require(tuples >= 0, "tuples >= 0");
  require(clean_ratio >= 0.0 && clean_ratio <= 1.0, "clean_ratio in [0, 1]");
  require(!max_duration || *max_duration > 0.0, "max_duration > 0");
  require(snr_max_db > 0.0, "snr_max_db > 0");
}

SeparationConfig RunConfig::Separation() const {
  SeparationConfig cfg;
  cfg.stft = StftConfig{fft_size, hop, WindowType::kHannPeriodic, kDefaultSampleRate};
  cfg.f_aliasing = f_aliasing;
  cfg.thresholds = ItdThresholds{sigma_th, sigma_dual.value_or(sigma_th), delta_tau_min};
  cfg.alpha = alpha;
  cfg.energy_floor_db = energy_floor_db;
  cfg.em.max_iterations = em_max_iterations;
  cfg.em.restarts = em_restarts;
  cfg.em.seed = seed;
  return cfg;
}

#define REGIONSEP_CONFIG_FIELDS(X)                                                     \
  X(seed) X(jobs) X(fft_size) X(hop) X(f_aliasing) X(sigma_th) X(sigma_dual)           \
  X(delta_tau_min) X(alpha) X(energy_floor_db) X(em_max_iterations) X(em_restarts)     \
  X(head_itd_max) X(bank_step) X(hrir_taps) X(k_min) X(k_max) X(scenes) X(duration)    \
  X(pool_size) X(pool_duration) X(mixtures) X(tuples) X(clean_ratio) X(max_duration)   \
  X(snr_max_db)

namespace {

template <typename T>
void ReadField(const nlohmann::json& j, const char* key, T* out) {
  *out = j.get<T>();
  (void)key;
}
template <typename T>
void ReadField(const nlohmann::json& j, const char* key, std::optional<T>* out) {
  if (j.is_null()) {
    out->reset();
  } else {
    T v;
    ReadField(j, key, &v);
    *out = v;
  }
}
template <typename T>
nlohmann::ordered_json FieldJson(const T& v) {
  return nlohmann::ordered_json(v);
}
template <typename T>
nlohmann::ordered_json FieldJson(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json RunConfig::ToJson() const {
  nlohmann::ordered_json j;
#define X(name) j[#name] = FieldJson(name);
  REGIONSEP_CONFIG_FIELDS(X)
#undef X
  return j;
}

RunConfig RunConfigFromJson(const nlohmann::json& j, RunConfig cfg) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    try {
#define X(name)                                 \
  if (key == #name) {                           \
    ReadField(value, #name, &cfg.name);         \
    known = true;                               \
  }
      REGIONSEP_CONFIG_FIELDS(X)
#undef X
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config field '" + key + "': " + e.what());
    }
    if (!known) throw ConfigError("unknown config field '" + key + "'");
  }
  return cfg;
}

RunConfig LoadRunConfig(const fs::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return RunConfigFromJson(j, std::move(base));
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace {

struct Overrides {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<double> f_aliasing, sigma_th, delta_tau_min, alpha, energy_floor_db,
      clean_ratio;
  std::optional<int> fft_size, hop, jobs;
  std::string out;
};

void AddCommonOptions(CLI::App* cmd, Overrides* o) {
  cmd->add_option("--config", o->config, "JSON config file");
  cmd->add_option("--seed", o->seed, "Top-level random seed");
  cmd->add_option("--f-aliasing", o->f_aliasing, "Aliasing frequency (Hz)");
  cmd->add_option("--sigma-th", o->sigma_th, "ITD std threshold (s)");
  cmd->add_option("--delta-tau-min", o->delta_tau_min, "Minimum ITD peak gap (s)");
  cmd->add_option("--alpha", o->alpha, "Frame dominance factor");
  cmd->add_option("--fft-size", o->fft_size, "STFT size");
  cmd->add_option("--hop", o->hop, "STFT hop");
  cmd->add_option("--energy-floor-db", o->energy_floor_db, "Energy floor relative to peak (dB)");
  cmd->add_option("--clean-ratio", o->clean_ratio, "Probability of using the clean source");
  cmd->add_option("--jobs", o->jobs, "Worker threads");
  cmd->add_option("--out", o->out, "Output directory")->required();
}

RunConfig ResolveConfig(const Overrides& o) {
  RunConfig cfg;
  if (!o.config.empty()) cfg = LoadRunConfig(o.config, cfg);
  if (o.seed) cfg.seed = *o.seed;
  if (o.f_aliasing) cfg.f_aliasing = *o.f_aliasing;
  if (o.sigma_th) cfg.sigma_th = *o.sigma_th;
  if (o.delta_tau_min) cfg.delta_tau_min = *o.delta_tau_min;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.fft_size) cfg.fft_size = *o.fft_size;
  if (o.hop) cfg.hop = *o.hop;
  if (o.energy_floor_db) cfg.energy_floor_db = *o.energy_floor_db;
  if (o.clean_ratio) cfg.clean_ratio = *o.clean_ratio;
  if (o.jobs) cfg.jobs = *o.jobs;
  cfg.Validate();
  return cfg;
}

std::string Numbered(const char* prefix, int i, int width = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i);
  return buf;
}

std::string RegionFile(int region) { return "region" + std::to_string(region) + ".wav"; }

void WriteJson(const nlohmann::ordered_json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void WriteLines(const std::vector<std::string>& lines, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

void WriteMaskText(const BinMask& mask, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index t = 0; t < mask.rows(); ++t) {
    for (Eigen::Index k = 0; k < mask.cols(); ++k) out << (k ? " " : "") << (mask(t, k) ? 1 : 0);
    out << '\n';
  }
}

// Worker count is left out so output trees do not depend on it.
void WriteConfig(const RunConfig& cfg, const fs::path& path) {
  nlohmann::ordered_json j = cfg.ToJson();
  j.erase("jobs");
  WriteJson(j, path);
}

std::string FormatDouble(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

SourcePool LoadPool(const std::string& dir, const RunConfig& cfg) {
  if (dir.empty())
    return SyntheticVoicePool(cfg.pool_size, cfg.pool_duration, JobSeed(cfg.seed, 0x706f6f6c));
  if (!fs::is_directory(dir)) throw IoError("pool directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".wav") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  SourcePool pool;
  for (const auto& f : files) {
    Waveform w = ReadWavMono(f);
    if (w.sample_rate != kDefaultSampleRate)
      throw ConfigError(f.string() + ": sample rate " + std::to_string(w.sample_rate) +
                        " is not 16000 Hz");
    pool.emplace(f.stem().string(), std::move(w));
  }
  if (pool.empty()) throw ConfigError("pool directory has no .wav files: " + dir);
  return pool;
}

std::pair<HrirBank, std::string> LoadBank(const std::string& path, const RunConfig& cfg) {
  if (path.empty())
    return {SphericalHrirBank(cfg.bank_step, cfg.head_itd_max, kDefaultSampleRate, cfg.hrir_taps),
            "spherical"};
  HrirBank bank = LoadHrirBank(path);
  if (bank.sample_rate != kDefaultSampleRate)
    throw ConfigError("HRIR bank sample rate must be 16000 Hz");
  return {std::move(bank), fs::path(path).filename().string()};
}

std::vector<std::string> SceneDirs(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("directory not found: " + root.string());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "mixture.wav"))
      names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

RegionMixtureSet LoadReferences(const fs::path& dir) {
  RegionMixtureSet set;
  set.mixture = ReadWavBinaural(dir / "mixture.wav");
  for (int r = 1; fs::exists(dir / RegionFile(r)); ++r)
    set.regions.push_back(ReadWavBinaural(dir / RegionFile(r)));
  if (set.regions.empty()) throw IoError(dir.string() + ": no region references");
  std::vector<bool> active;
  if (fs::exists(dir / "scene.json")) {
    std::ifstream in(dir / "scene.json");
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("active"))
      for (const auto& a : j["active"]) active.push_back(a.get<bool>());
  }
  if (active.size() != set.regions.size()) {
    active.clear();
    for (const auto& y : set.regions)
      active.push_back(y.left.samples.squaredNorm() + y.right.samples.squaredNorm() > 0.0);
  }
  set.active = std::move(active);
  return set;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string pool, hrir;
  std::optional<int> count, k_min, k_max;
  std::optional<double> duration;
};

void CmdSynth(const Overrides& o, const SynthArgs& a) {
  RunConfig cfg = ResolveConfig(o);
  if (a.count) cfg.scenes = *a.count;
  if (a.k_min) cfg.k_min = *a.k_min;
  if (a.k_max) cfg.k_max = *a.k_max;
  if (a.duration) cfg.duration = *a.duration;
  cfg.Validate();
  const SourcePool pool = LoadPool(a.pool, cfg);
  const auto [bank, bank_id] = LoadBank(a.hrir, cfg);
  const RegionLayout layout = DefaultLayoutR3();
  std::vector<std::string> ids;
  for (const auto& p : pool) ids.push_back(p.first);

  const fs::path out(o.out);
  EnsureDir(out);
  ParallelFor(cfg.scenes, cfg.jobs, [&](int i) {
    const SceneSpec spec = RandomScene(KRange{cfg.k_min, cfg.k_max}, layout, bank, ids,
                                       cfg.duration, JobSeed(cfg.seed, i), bank_id);
    const RegionMixtureSet set = SynthScene(spec, pool, bank, layout);
    const fs::path dir = out / Numbered("scene_", i);
    EnsureDir(dir);
    WriteWav(set.mixture, dir / "mixture.wav");
    for (int r = 0; r < set.num_regions(); ++r) WriteWav(set.regions[r], dir / RegionFile(r + 1));
    nlohmann::ordered_json j = ToJson(spec);
    j["active"] = set.active;
    WriteJson(j, dir / "scene.json");
  });
  WriteConfig(cfg, out / "config.json");
  spdlog::info("synth: wrote {} scenes to {}", cfg.scenes, out.string());
}

struct SeparateArgs {
  std::vector<std::string> inputs;
};

void CmdSeparate(const Overrides& o, const SeparateArgs& a) {
  const RunConfig cfg = ResolveConfig(o);
  const SeparationConfig sep = cfg.Separation();
  const fs::path out(o.out);
  EnsureDir(out);
  std::vector<std::vector<ManifestRecord>> per_input(a.inputs.size());
  std::map<std::string, int> stem_count;
  for (const auto& in : a.inputs) ++stem_count[fs::path(in).stem().string()];
  ParallelFor(static_cast<int>(a.inputs.size()), cfg.jobs, [&](int i) {
    const fs::path input(a.inputs[i]);
    const BinauralSignal m = ReadWavBinaural(input);
    const SeparationOutcome outcome = Separate(m, sep);
    std::string stem = input.stem().string();
    if (stem_count.at(stem) > 1)
      stem = fs::absolute(input).parent_path().filename().string() + "_" + stem;
    const fs::path dir = out / stem;
    const fs::path diag = dir / "diagnostics";
    EnsureDir(diag);
    auto& recs = per_input[i];
    if (const auto* p = std::get_if<Passthrough>(&outcome.result)) {
      fs::copy_file(input, dir / "passthrough.wav", fs::copy_options::overwrite_existing);
      recs.push_back({stem + "/passthrough.wav", p->itd, RegionOfItd(p->itd, cfg.head_itd_max),
                      "passthrough", stem, ""});
    } else if (const auto* s = std::get_if<Separated>(&outcome.result)) {
      for (int k = 0; k < 2; ++k) {
        const std::string name = "source" + std::to_string(k + 1) + ".wav";
        WriteWav(s->sources[k], dir / name);
        recs.push_back({stem + "/" + name, s->itds[k], RegionOfItd(s->itds[k], cfg.head_itd_max),
                        "separated", stem, ""});
      }
      WriteMaskText(outcome.masks->first, diag / "mask1.txt");
      WriteMaskText(outcome.masks->second, diag / "mask2.txt");
    } else {
      recs.push_back({"", std::nullopt, std::nullopt, "discarded", stem,
                      ToString(std::get<Discarded>(outcome.result).reason)});
    }

    nlohmann::ordered_json v;
    v["outcome"] = outcome.kind_name();
    v["verdict"] = ToString(outcome.verdict.kind);
    v["reason"] = ToString(outcome.verdict.kind == VerdictKind::kDiscard
                               ? outcome.verdict.reason
                               : (outcome.is_discarded()
                                      ? std::get<Discarded>(outcome.result).reason
                                      : DiscardReason::kNone));
    if (outcome.verdict.single)
      v["single"] = {{"mean", outcome.verdict.single->mean}, {"std", outcome.verdict.single->std}};
    if (outcome.verdict.gmm) {
      auto& g = v["gmm"];
      g["log_likelihood"] = outcome.verdict.gmm->log_likelihood;
      for (const auto& c : outcome.verdict.gmm->components)
        g["components"].push_back({{"mean", c.mean}, {"std", c.std}, {"weight", c.weight}});
    }
    if (outcome.final_alpha) v["final_alpha"] = *outcome.final_alpha;
    WriteJson(v, diag / "verdict.json");

    const SeparationConfig& c = sep;
    const Spectrogram sl = Stft(m.left, c.stft), sr = Stft(m.right, c.stft);
    std::vector<std::string> itd_lines;
    for (double x : ComputeFeatures(sl, sr, c.f_aliasing, c.energy_floor_db).ItdSamples())
      itd_lines.push_back(FormatDouble(x));
    WriteLines(itd_lines, diag / "itd_samples.txt");
  });
  std::vector<ManifestRecord> all;
  for (auto& r : per_input) all.insert(all.end(), r.begin(), r.end());
  WriteManifest(all, out / "manifest.jsonl");
}

struct EvalArgs {
  std::string estimates, references;
};

void CmdEval(const Overrides& o, const EvalArgs& a) {
  const RunConfig cfg = ResolveConfig(o);
  const std::vector<std::string> scenes = SceneDirs(a.references);
  std::vector<nlohmann::ordered_json> records(scenes.size());
  ParallelFor(static_cast<int>(scenes.size()), cfg.jobs, [&](int i) {
    const RegionMixtureSet refs = LoadReferences(fs::path(a.references) / scenes[i]);
    std::vector<BinauralSignal> est;
    for (int r = 1; r <= refs.num_regions(); ++r)
      est.push_back(ReadWavBinaural(fs::path(a.estimates) / scenes[i] / RegionFile(r)));
    nlohmann::ordered_json j;
    j["scene"] = scenes[i];
    const nlohmann::ordered_json report = EvaluateRegions(refs, est).ToJson();
    for (const auto& [k, v] : report.items()) j[k] = v;
    j["region_loss"] = RegionLoss(refs, est, LossConfig{cfg.snr_max_db});
    records[i] = std::move(j);
  });

  const fs::path out(o.out);
  EnsureDir(out);
  std::vector<std::string> lines;
  std::map<std::string, std::pair<double, int>> by_metric;
  for (const auto& r : records) {
    lines.push_back(r.dump());
    auto& acc = by_metric[r["metric"].get<std::string>()];
    acc.first += r["aggregate"].get<double>();
    acc.second += 1;
  }
  WriteLines(lines, out / "report.jsonl");
  nlohmann::ordered_json summary;
  summary["scenes"] = records.size();
  for (const auto& [metric, acc] : by_metric)
    summary["mean"][metric] = {{"value", acc.first / acc.second}, {"scenes", acc.second}};
  WriteJson(summary, out / "summary.json");
}

void CmdOracle(const Overrides& o, const std::string& references) {
  const RunConfig cfg = ResolveConfig(o);
  const std::vector<std::string> scenes = SceneDirs(references);
  const StftConfig stft = cfg.Separation().stft;
  ParallelFor(static_cast<int>(scenes.size()), cfg.jobs, [&](int i) {
    const RegionMixtureSet refs = LoadReferences(fs::path(references) / scenes[i]);
    const auto est = OracleMaskEstimates(refs, stft);
    const fs::path dir = fs::path(o.out) / scenes[i];
    EnsureDir(dir);
    for (std::size_t r = 0; r < est.size(); ++r)
      WriteWav(est[r], dir / RegionFile(static_cast<int>(r) + 1));
  });
}

struct DatasetArgs {
  std::string pool, hrir;
  std::optional<int> mixtures, tuples;
  std::optional<double> max_duration;
};

void CmdDataset(const Overrides& o, const DatasetArgs& a) {
  RunConfig cfg = ResolveConfig(o);
  if (a.mixtures) cfg.mixtures = *a.mixtures;
  if (a.tuples) cfg.tuples = *a.tuples;
  if (a.max_duration) cfg.max_duration = *a.max_duration;
  cfg.Validate();
  const SourcePool pool = LoadPool(a.pool, cfg);
  const auto [bank, bank_id] = LoadBank(a.hrir, cfg);

  DirtyBuildConfig dirty;
  dirty.separation = cfg.Separation();
  dirty.delta_tau_min = cfg.delta_tau_min;
  dirty.count = cfg.mixtures;
  dirty.seed = cfg.seed;
  dirty.head_itd_max = cfg.head_itd_max;
  dirty.max_duration = cfg.max_duration;
  dirty.jobs = cfg.jobs;
  const DirtyBuildResult built = BuildDirtySources(pool, bank, dirty);

  const fs::path out(o.out);
  EnsureDir(out / "sources");
  std::vector<ManifestRecord> manifest;
  std::map<std::string, int> per_scene;
  for (const auto& rec : built.records) {
    const std::string name =
        rec.origin_scene + "_" + std::to_string(per_scene[rec.origin_scene]++) + ".wav";
    WriteWav(rec.signal, out / "sources" / name);
    manifest.push_back({"sources/" + name, rec.itd, rec.region,
                        rec.provenance == Provenance::kStage1Single ? "passthrough" : "separated",
                        rec.source_id, ""});
  }
  WriteManifest(manifest, out / "manifest.jsonl");
  WriteJson(built.stats.ToJson(), out / "stats.json");

  if (cfg.tuples > 0 && built.records.empty()) {
    spdlog::warn("dataset: no stage-1 sources harvested; skipping training tuples");
  } else if (cfg.tuples > 0) {
    TupleBuildConfig tcfg;
    tcfg.k_range = KRange{cfg.k_min, cfg.k_max};
    tcfg.clean_ratio = cfg.clean_ratio;
    tcfg.count = cfg.tuples;
    tcfg.seed = JobSeed(cfg.seed, 0x7475706c);
    const auto tuples = BuildTrainingTuples(built.records, DefaultLayoutR3(), tcfg);
    ParallelFor(static_cast<int>(tuples.size()), cfg.jobs, [&](int i) {
      const auto& t = tuples[i];
      const fs::path dir = out / "tuples" / Numbered("tuple_", i, 5);
      EnsureDir(dir);
      WriteWav(t.mixture, dir / "mixture.wav");
      for (std::size_t r = 0; r < t.references.size(); ++r)
        WriteWav(t.references[r], dir / RegionFile(static_cast<int>(r) + 1));
      nlohmann::ordered_json j;
      j["active"] = t.active;
      j["source_ids"] = t.source_ids;
      for (auto p : t.used) j["provenance"].push_back(ToString(p));
      WriteJson(j, dir / "scene.json");
    });
  }
  WriteConfig(cfg, out / "config.json");
}

struct BankArgs {
  std::optional<double> step, head_itd_max;
  std::optional<int> taps;
};

void CmdMakeBank(const Overrides& o, const BankArgs& a) {
  RunConfig cfg = ResolveConfig(o);
  if (a.step) cfg.bank_step = *a.step;
  if (a.head_itd_max) cfg.head_itd_max = *a.head_itd_max;
  if (a.taps) cfg.hrir_taps = *a.taps;
  cfg.Validate();
  const fs::path out(o.out);
  if (out.has_parent_path()) EnsureDir(out.parent_path());
  SaveHrirBank(SphericalHrirBank(cfg.bank_step, cfg.head_itd_max, kDefaultSampleRate,
                                 cfg.hrir_taps),
               out);
}

void CmdMakePool(const Overrides& o, std::optional<int> count, std::optional<double> duration) {
  RunConfig cfg = ResolveConfig(o);
  if (count) cfg.pool_size = *count;
  if (duration) cfg.pool_duration = *duration;
  cfg.Validate();
  const fs::path out(o.out);
  EnsureDir(out);
  for (const auto& [id, w] : LoadPool("", cfg)) WriteWav(w, out / (id + ".wav"));
}

void ConfigureLogging() {
  auto logger = spdlog::stderr_color_mt("regionsep");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("REGION_SEP_LOG"))
    spdlog::set_level(spdlog::level::from_str(env));
}

}  // namespace

int RunCli(int argc, char** argv) {
  if (!spdlog::get("regionsep")) ConfigureLogging();

  CLI::App app{"Region-based binaural voice separation tools"};
  app.require_subcommand(1);

  Overrides synth_o, sep_o, eval_o, oracle_o, data_o, bank_o, pool_o;
  SynthArgs synth_a;
  SeparateArgs sep_a;
  EvalArgs eval_a;
  std::string oracle_refs;
  DatasetArgs data_a;
  BankArgs bank_a;
  std::optional<int> pool_count;
  std::optional<double> pool_duration;

  auto* synth = app.add_subcommand("synth", "Render random region scenes");
  AddCommonOptions(synth, &synth_o);
  synth->add_option("--pool", synth_a.pool, "Directory of mono 16 kHz source WAVs");
  synth->add_option("--hrir", synth_a.hrir, "HRIR bank file");
  synth->add_option("--count", synth_a.count, "Number of scenes");
  synth->add_option("--k-min", synth_a.k_min, "Minimum sources per scene");
  synth->add_option("--k-max", synth_a.k_max, "Maximum sources per scene");
  synth->add_option("--duration", synth_a.duration, "Scene duration (s)");

  auto* sep = app.add_subcommand("separate", "Run selective spatial separation");
  AddCommonOptions(sep, &sep_o);
  sep->add_option("inputs", sep_a.inputs, "Binaural WAV recordings")->required();

  auto* eval = app.add_subcommand("eval", "Region-wise SNR / SNRi report");
  AddCommonOptions(eval, &eval_o);
  eval->add_option("--estimates", eval_a.estimates, "Estimates directory")->required();
  eval->add_option("--references", eval_a.references, "References directory")->required();

  auto* oracle = app.add_subcommand("oracle", "Ideal-binary-mask region estimates");
  AddCommonOptions(oracle, &oracle_o);
  oracle->add_option("--references", oracle_refs, "References directory")->required();

  auto* data = app.add_subcommand("dataset", "Build the stage-1 source database and tuples");
  AddCommonOptions(data, &data_o);
  data->add_option("--pool", data_a.pool, "Directory of mono 16 kHz source WAVs");
  data->add_option("--hrir", data_a.hrir, "HRIR bank file");
  data->add_option("--mixtures", data_a.mixtures, "Two-source mixtures to separate");
  data->add_option("--tuples", data_a.tuples, "Training tuples to synthesize");
  data->add_option("--max-duration", data_a.max_duration, "Harvest budget (s)");

  auto* bank = app.add_subcommand("make-bank", "Write a synthetic spherical-head HRIR bank");
  AddCommonOptions(bank, &bank_o);
  bank->add_option("--step", bank_a.step, "Azimuth step (deg)");
  bank->add_option("--head-itd-max", bank_a.head_itd_max, "Maximum interaural delay (s)");
  bank->add_option("--taps", bank_a.taps, "Impulse response length");

  auto* pool = app.add_subcommand("make-pool", "Write synthetic voice-like sources");
  AddCommonOptions(pool, &pool_o);
  pool->add_option("--count", pool_count, "Number of sources");
  pool->add_option("--duration", pool_duration, "Source duration (s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth) CmdSynth(synth_o, synth_a);
    if (*sep) CmdSeparate(sep_o, sep_a);
    if (*eval) CmdEval(eval_o, eval_a);
    if (*oracle) CmdOracle(oracle_o, oracle_refs);
    if (*data) CmdDataset(data_o, data_a);
    if (*bank) CmdMakeBank(bank_o, bank_a);
    if (*pool) CmdMakePool(pool_o, pool_count, pool_duration);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace regionsep
