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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "regionsep/errors.h"
#include "regionsep/scene_synthesis.h"
#include "regionsep/signal_io.h"
#include "test_support.h"

namespace regionsep {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the CLI with stderr captured to `log`; returns the exit status.
int Cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(REGIONSEP_CLI_PATH) + " " + args + " > /dev/null 2> '" + log.string() + "'";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void WriteText(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

nlohmann::json ReadJson(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

// Binaural image of voice sources at the given azimuths.
fs::path Scene(const fs::path& path, std::vector<double> azimuths) {
  const HrirBank bank = SphericalHrirBank(5.0, kDefaultHeadItdMax, kDefaultSampleRate);
  const SourcePool pool = SyntheticVoicePool(4, 3.0, 17);
  auto it = pool.begin();
  BinauralSignal m = BinauralSignal::Zeros(3 * kDefaultSampleRate, kDefaultSampleRate);
  for (double az : azimuths) {
    const BinauralSignal img = Spatialize((it++)->second, bank, az, 1.0, m.size());
    m.left.samples += img.left.samples;
    m.right.samples += img.right.samples;
  }
  WriteWav(m, path);
  return path;
}

TEST_CASE("run config JSON") {
  RunConfig c = RunConfigFromJson(nlohmann::json::parse(R"({"alpha": 3.0, "sigma_dual": 6e-4})"));
  CHECK(c.alpha == 3.0);
  CHECK(c.sigma_dual.value() == 6e-4);
  CHECK(c.Separation().thresholds.sigma_dual == 6e-4);
  CHECK(c.Separation().thresholds.sigma_single == 7e-5);
  const RunConfig back = RunConfigFromJson(nlohmann::json::parse(c.ToJson().dump()));
  CHECK(back.ToJson() == c.ToJson());
  CHECK_THROWS_WITH_AS(RunConfigFromJson(nlohmann::json::parse(R"({"alpah": 3})")),
                       doctest::Contains("unknown config field"), ConfigError);
  CHECK_THROWS_AS(RunConfigFromJson(nlohmann::json::parse(R"({"alpha": "x"})")), ConfigError);
  CHECK_THROWS_AS(RunConfigFromJson(nlohmann::json::parse("[1]")), ConfigError);

  RunConfig bad;
  bad.alpha = 1.0;
  CHECK_THROWS_WITH_AS(bad.Validate(), doctest::Contains("alpha > 1"), ConfigError);
  bad = RunConfig{};
  bad.hop = 2048;
  CHECK_THROWS_AS(bad.Validate(), ConfigError);
  CHECK_NOTHROW(RunConfig{}.Validate());
}

TEST_CASE("CLI exit codes") {
  testing::TempDir dir("cli_codes");
  const fs::path log = dir / "log.txt";
  CHECK(Cli("", log) == 2);
  CHECK(Cli("separate --out " + (dir / "o").string(), log) == 2);
  CHECK(Cli("--help", log) == 0);

  WriteText(dir / "bad.json", R"({"alpha": 1.0})");
  const fs::path in = Scene(dir / "in.wav", {40.0});
  CHECK(Cli("separate --config " + (dir / "bad.json").string() + " --out " +
                (dir / "o").string() + " " + in.string(), log) == 2);
  CHECK(Slurp(log).find("alpha > 1") != std::string::npos);
  CHECK(Cli("separate --alpha 0.5 --out " + (dir / "o").string() + " " + in.string(), log) == 2);

  CHECK(Cli("separate --out " + (dir / "o").string() + " " + (dir / "missing.wav").string(),
            log) == 3);
  WriteText(dir / "junk.wav", "not a wav file at all");
  CHECK(Cli("separate --out " + (dir / "o").string() + " " + (dir / "junk.wav").string(), log) == 3);
}

TEST_CASE("passthrough copies the input") {
  testing::TempDir dir("cli_pass");
  const fs::path in = Scene(dir / "front.wav", {40.0});
  REQUIRE(Cli("separate --out " + (dir / "out").string() + " " + in.string(), dir / "log") == 0);
  CHECK(Slurp(dir / "out/front/passthrough.wav") == Slurp(in));
  const auto v = ReadJson(dir / "out/front/diagnostics/verdict.json");
  CHECK(v["outcome"] == "passthrough");
  CHECK(v["verdict"] == "single_peak");
  const auto recs = ReadManifest(dir / "out/manifest.jsonl");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].kind == "passthrough");
  CHECK(std::abs(*recs[0].itd - SphericalItd(40.0, kDefaultHeadItdMax)) < 2e-5);
  CHECK(recs[0].region == 1);
  CHECK(fs::file_size(dir / "out/front/diagnostics/itd_samples.txt") > 0);
}

TEST_CASE("two sources separate with a relaxed config") {
  testing::TempDir dir("cli_sep");
  const fs::path in = Scene(dir / "pair.wav", {0.0, 90.0});
  WriteText(dir / "cfg.json", R"({"sigma_dual": 6e-4, "delta_tau_min": 3e-4})");
  REQUIRE(Cli("separate --config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "out").string() + " " + in.string(), dir / "log") == 0);
  const auto recs = ReadManifest(dir / "out/manifest.jsonl");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].kind == "separated");
  CHECK(recs[0].region == 3);
  CHECK(recs[1].region == 1);
  for (const char* f : {"source1.wav", "source2.wav", "diagnostics/mask1.txt",
                        "diagnostics/mask2.txt"})
    CHECK(fs::exists(dir / "out/pair" / f));
  const BinauralSignal s1 = ReadWavBinaural(dir / "out/pair/source1.wav");
  CHECK(s1.size() == 3 * kDefaultSampleRate);
}

TEST_CASE("close sources are discarded") {
  testing::TempDir dir("cli_close");
  const fs::path in = Scene(dir / "close.wav", {355.0, 5.0});
  REQUIRE(Cli("separate --out " + (dir / "out").string() + " " + in.string(), dir / "log") == 0);
  const auto v = ReadJson(dir / "out/close/diagnostics/verdict.json");
  CHECK(v["outcome"] == "discarded");
  CHECK(v["reason"] == "peaks_too_close");
  const auto recs = ReadManifest(dir / "out/manifest.jsonl");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].reason == "peaks_too_close");
  CHECK(recs[0].file.empty());
}

TEST_CASE("synth, separate and eval are deterministic") {
  testing::TempDir dir("cli_det");
  const fs::path log = dir / "log";
  for (const char* run : {"a", "b"})
    REQUIRE(Cli("synth --seed 7 --count 3 --duration 1.5 --out " + (dir / run).string(), log) == 0);
  for (int i = 0; i < 3; ++i) {
    const std::string scene = "scene_000" + std::to_string(i);
    CHECK(Slurp(dir / "a" / scene / "mixture.wav") == Slurp(dir / "b" / scene / "mixture.wav"));
    CHECK(Slurp(dir / "a" / scene / "scene.json") == Slurp(dir / "b" / scene / "scene.json"));
    const RegionMixtureSet set = [&] {
      RegionMixtureSet s;
      s.mixture = ReadWavBinaural(dir / "a" / scene / "mixture.wav");
      return s;
    }();
    CHECK(set.mixture.size() == 24000);
  }
  std::string inputs;
  for (int i = 0; i < 3; ++i) inputs += " " + (dir / "a" / ("scene_000" + std::to_string(i)) / "mixture.wav").string();
  REQUIRE(Cli("separate --seed 7 --out " + (dir / "s1").string() + inputs, log) == 0);
  REQUIRE(Cli("separate --seed 7 --jobs 3 --out " + (dir / "s2").string() + inputs, log) == 0);
  CHECK(Slurp(dir / "s1/manifest.jsonl") == Slurp(dir / "s2/manifest.jsonl"));
  CHECK(ReadManifest(dir / "s1/manifest.jsonl").size() >= 3);
  CHECK(fs::exists(dir / "s1/scene_0000_mixture/diagnostics/verdict.json"));
}

TEST_CASE("eval against references and mixtures") {
  testing::TempDir dir("cli_eval");
  const fs::path log = dir / "log";
  REQUIRE(Cli("synth --seed 3 --count 3 --duration 1.0 --k-min 2 --k-max 4 --out " +
                  (dir / "ref").string(), log) == 0);
  REQUIRE(Cli("eval --estimates " + (dir / "ref").string() + " --references " +
                  (dir / "ref").string() + " --out " + (dir / "e1").string(), log) == 0);
  std::ifstream lines(dir / "e1/report.jsonl");
  int n = 0;
  for (std::string line; std::getline(lines, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["clamped"] == true);
    if (j["metric"] == "S-SNR") CHECK(j["aggregate"] == 100.0);
  }
  CHECK(n == 3);

  // Every region estimate set to the mixture scores exactly 0 dB SNRi.
  fs::create_directories(dir / "mix");
  for (const auto& e : fs::directory_iterator(dir / "ref")) {
    if (!e.is_directory()) continue;
    fs::create_directories(dir / "mix" / e.path().filename());
    for (int r = 1; r <= 3; ++r)
      fs::copy_file(e.path() / "mixture.wav",
                    dir / "mix" / e.path().filename() / ("region" + std::to_string(r) + ".wav"));
  }
  REQUIRE(Cli("eval --estimates " + (dir / "mix").string() + " --references " +
                  (dir / "ref").string() + " --out " + (dir / "e2").string(), log) == 0);
  std::ifstream lines2(dir / "e2/report.jsonl");
  for (std::string line; std::getline(lines2, line);) {
    const auto j = nlohmann::json::parse(line);
    if (j["metric"] != "S-SNR") CHECK(j["aggregate"] == 0.0);
  }
  CHECK(ReadJson(dir / "e2/summary.json")["scenes"] == 3);

  REQUIRE(Cli("oracle --references " + (dir / "ref").string() + " --out " +
                  (dir / "or").string(), log) == 0);
  CHECK(fs::exists(dir / "or/scene_0000/region3.wav"));
}

TEST_CASE("bank, pool and dataset commands") {
  testing::TempDir dir("cli_data");
  const fs::path log = dir / "log";
  REQUIRE(Cli("make-bank --step 30 --out " + (dir / "bank.bin").string(), log) == 0);
  CHECK(LoadHrirBank(dir / "bank.bin").entries.size() == 12);
  REQUIRE(Cli("make-pool --count 3 --duration 2 --out " + (dir / "pool").string(), log) == 0);
  CHECK(ReadWavMono(dir / "pool/voice001.wav").size() == 32000);

  WriteText(dir / "cfg.json", R"({"sigma_dual": 6e-4, "delta_tau_min": 3e-4})");
  REQUIRE(Cli("dataset --config " + (dir / "cfg.json").string() + " --pool " +
                  (dir / "pool").string() + " --hrir " + (dir / "bank.bin").string() +
                  " --mixtures 4 --tuples 3 --out " + (dir / "ds").string(), log) == 0);
  const auto stats = ReadJson(dir / "ds/stats.json");
  CHECK(stats["mixtures"] == 4);
  const auto recs = ReadManifest(dir / "ds/manifest.jsonl");
  for (const auto& r : recs) CHECK(fs::exists(dir / "ds" / r.file));
  if (!recs.empty()) CHECK(fs::exists(dir / "ds/tuples/tuple_00002/mixture.wav"));
  CHECK(ReadJson(dir / "ds/config.json")["sigma_dual"] == 6e-4);
}

}  // namespace
}  // namespace regionsep
