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

#ifndef REGIONSEP_PIPELINE_H_
#define REGIONSEP_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "regionsep/scene_synthesis.h"
#include "regionsep/selective_separation.h"

namespace regionsep {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitIo = 3,
  kExitInternal = 4,
};

// Experiment parameters. The config file is a flat JSON object whose keys
// are the field names below; command-line flags override file values.
struct RunConfig {
  uint64_t seed = 0;
  int jobs = 1;

  // selective separation
  int fft_size = 1024;
  int hop = 512;
  double f_aliasing = 562.0;
  double sigma_th = 7e-5;
  std::optional<double> sigma_dual;  // defaults to sigma_th
  double delta_tau_min = 6e-4;
  double alpha = 5.0;
  double energy_floor_db = -40.0;
  int em_max_iterations = 200;
  int em_restarts = 3;

  // head / HRIRs
  double head_itd_max = kDefaultHeadItdMax;
  double bank_step = 5.0;
  int hrir_taps = kDefaultHrirTaps;

  // scenes and synthetic pool
  int k_min = 2;
  int k_max = 5;
  int scenes = 10;
  double duration = 3.0;
  int pool_size = 8;
  double pool_duration = 3.0;

  // dataset
  int mixtures = 20;
  int tuples = 10;
  double clean_ratio = 0.5;
  std::optional<double> max_duration;

  double snr_max_db = 30.0;

  // Throws ConfigError naming the violated invariant.
  void Validate() const;
  SeparationConfig Separation() const;
  nlohmann::ordered_json ToJson() const;
};

RunConfig RunConfigFromJson(const nlohmann::json& j, RunConfig base = {});
RunConfig LoadRunConfig(const std::filesystem::path& path, RunConfig base = {});

// Entry point of the `regionsep` tool. Returns an ExitCode.
int RunCli(int argc, char** argv);

}  // namespace regionsep

#endif  // REGIONSEP_PIPELINE_H_
