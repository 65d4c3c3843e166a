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

#ifndef REGIONSEP_DATASET_BUILDER_H_
#define REGIONSEP_DATASET_BUILDER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regionsep/scene_synthesis.h"
#include "regionsep/selective_separation.h"

namespace regionsep {

enum class Provenance { kClean, kStage1Single, kStage1Separated };
std::string ToString(Provenance p);

struct SourceRecord {
  BinauralSignal signal;
  double itd = 0.0;  // seconds
  int region = 1;
  Provenance provenance = Provenance::kClean;
  std::string origin_scene;
  std::string source_id;
  // Clean binaural image of the matched source, when known.
  std::optional<BinauralSignal> clean;
};

struct DirtyBuildConfig {
  SeparationConfig separation;
  double delta_tau_min = 6e-4;  // minimum ITD gap between the two sources
  int count = 1;                // two-source mixtures to create
  uint64_t seed = 0;
  double head_itd_max = kDefaultHeadItdMax;  // for the ITD -> region map
  std::optional<double> max_duration;        // seconds of harvested audio
  int jobs = 1;
};

struct DirtyBuildStats {
  int mixtures = 0;
  int passthrough = 0;
  int separated = 0;
  int discarded = 0;
  std::map<std::string, int> discard_reasons;
  double harvested_seconds = 0.0;

  double acceptance_rate() const {
    return mixtures > 0 ? static_cast<double>(passthrough + separated) / mixtures : 0.0;
  }
  nlohmann::ordered_json ToJson() const;
};

struct DirtyBuildResult {
  std::vector<SourceRecord> records;
  DirtyBuildStats stats;
};

// Mixes each clean source with a random interferer at HRIR azimuths whose
// ITDs differ by at least delta_tau_min, runs selective separation and keeps
// the passthrough / separated outputs. Jobs are seeded by index, so results
// do not depend on `jobs`.
DirtyBuildResult BuildDirtySources(const SourcePool& pool, const HrirBank& bank,
                                   const DirtyBuildConfig& cfg);

// Clean records for every pool source at every bank azimuth (useful as a
// fully supervised database).
std::vector<SourceRecord> CleanRecords(const SourcePool& pool, const HrirBank& bank,
                                       double head_itd_max);

struct TrainingTuple {
  BinauralSignal mixture;
  std::vector<BinauralSignal> references;  // one per region
  std::vector<bool> active;
  std::vector<Provenance> used;            // provenance of each drawn source
  std::vector<std::string> source_ids;
};

struct TupleBuildConfig {
  KRange k_range;
  double clean_ratio = 0.5;
  int count = 1;
  uint64_t seed = 0;
  int max_retries = 100;
};

std::vector<TrainingTuple> BuildTrainingTuples(const std::vector<SourceRecord>& db,
                                               const RegionLayout& layout,
                                               const TupleBuildConfig& cfg);

// Largest |ITD| across the bank's entries.
double BankItdMax(const HrirBank& bank);

}  // namespace regionsep

#endif  // REGIONSEP_DATASET_BUILDER_H_
