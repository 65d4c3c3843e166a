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

#ifndef REGIONSEP_SCENE_SYNTHESIS_H_
#define REGIONSEP_SCENE_SYNTHESIS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regionsep/signal_io.h"

namespace regionsep {

// Azimuths are degrees in [0, 360): 0 = front, clockwise, 90 = right.
// Region ids are 1-based.

struct AzimuthInterval {
  double lo = 0.0;  // inclusive
  double hi = 0.0;  // exclusive
  bool Contains(double az) const { return az >= lo && az < hi; }
};

struct Region {
  std::vector<AzimuthInterval> intervals;
  bool Contains(double az) const;
};

struct RegionLayout {
  std::vector<Region> regions;

  int num_regions() const { return static_cast<int>(regions.size()); }
  // Throws ConfigError unless the intervals partition [0, 360) and there are
  // at least two regions.
  void Validate() const;
};

// Region 1: front and back cones, [315,45) and [135,225). Region 2: left,
// [225,315). Region 3: right, [45,135).
RegionLayout DefaultLayoutR3();

int RegionOfAzimuth(const RegionLayout& layout, double azimuth_deg);

// Maps an ITD (positive = left leads) to the R=3 layout through the
// spherical-head model itd = delta_tau_max * sin(angle from front).
// |itd| > delta_tau_max is clamped with a warning.
int RegionOfItd(double itd, double delta_tau_max);

double WrapAzimuth(double azimuth_deg);

// ITD of a spherical head for a given azimuth, positive when the left ear
// leads.
double SphericalItd(double azimuth_deg, double delta_tau_max);

// ---------------------------------------------------------------------------
// HRIRs
// ---------------------------------------------------------------------------

inline constexpr double kDefaultHeadItdMax = 8.0e-4;  // seconds
inline constexpr int kDefaultHrirTaps = 128;

// Fractional-delay pair with the interaural delay split symmetrically
// between ears plus a zero-phase head-shadow shelf on the far ear, so the
// interaural phase is exactly the construction delay at low frequency while
// ILD grows with frequency and laterality.
HrirPair SynthSphericalHrir(double azimuth_deg, double delta_tau_max, int sample_rate,
                            int taps = kDefaultHrirTaps);

HrirBank SphericalHrirBank(double step_deg, double delta_tau_max, int sample_rate,
                           int taps = kDefaultHrirTaps);

// Interaural delay of an HRIR pair from the weighted cross-spectrum phase
// below max_hz.
double EstimateHrirItd(const HrirPair& pair, int sample_rate, double max_hz = 500.0);

// Nearest bank azimuth on the circle; ConfigError beyond tolerance_deg.
double SnapAzimuth(const HrirBank& bank, double azimuth_deg, double tolerance_deg = 10.0);

// Full linear convolution truncated (or zero-extended) to `length`.
Eigen::VectorXd Convolve(const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                         Eigen::Index length);

// Source rendered through the HRIR at the snapped azimuth, scaled by gain.
BinauralSignal Spatialize(const Waveform& source, const HrirBank& bank, double azimuth_deg,
                          double gain, Eigen::Index length);

// ---------------------------------------------------------------------------
// Scenes
// ---------------------------------------------------------------------------

using SourcePool = std::map<std::string, Waveform>;

struct SceneSource {
  std::string waveform_id;
  double azimuth = 0.0;
  double gain = 1.0;
};

struct SceneSpec {
  std::vector<SceneSource> sources;
  std::string hrir_bank_id;
  uint64_t seed = 0;
  double duration = 0.0;  // seconds
};

nlohmann::ordered_json ToJson(const SceneSpec& spec);
SceneSpec SceneSpecFromJson(const nlohmann::json& j);
void SaveSceneSpec(const SceneSpec& spec, const std::filesystem::path& path);
SceneSpec LoadSceneSpec(const std::filesystem::path& path);

// Per-region ground truth and the full mixture, which is the region sum.
struct RegionMixtureSet {
  std::vector<BinauralSignal> regions;
  BinauralSignal mixture;
  std::vector<bool> active;

  int num_regions() const { return static_cast<int>(regions.size()); }
  int num_active() const;
};

// Sums per-region references into a mixture, region order.
BinauralSignal SumRegions(const std::vector<BinauralSignal>& regions);

RegionMixtureSet SynthScene(const SceneSpec& spec, const SourcePool& pool,
                            const HrirBank& bank, const RegionLayout& layout);

struct KRange {
  int lo = 2;
  int hi = 5;
};

// K uniform in the range; per source a uniform region, then a uniform bank
// azimuth inside it, and a pool waveform (distinct while the pool allows).
SceneSpec RandomScene(KRange k_range, const RegionLayout& layout, const HrirBank& bank,
                      const std::vector<std::string>& pool_ids, double duration,
                      uint64_t seed, const std::string& bank_id = "bank");

// Deterministic voice-like test signal: a harmonic complex with a drifting
// fundamental, formant-shaped spectrum and syllabic on/off envelope.
Waveform SynthVoiceLike(uint64_t seed, double duration, int sample_rate = kDefaultSampleRate);

SourcePool SyntheticVoicePool(int count, double duration, uint64_t seed,
                              int sample_rate = kDefaultSampleRate);

}  // namespace regionsep

#endif  // REGIONSEP_SCENE_SYNTHESIS_H_
