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

// Selective spatial separation of a binaural recording.
//
// The recording is accepted only when its low-frequency ITD distribution
// shows one narrow peak (returned unchanged, labelled with the peak's ITD)
// or two narrow, well separated peaks. In the two-peak case the
// unaliased bins are clustered by GMM posterior, frames where one cluster
// dominates the other by a factor alpha give per-frequency ILD templates
// for both sources, and the aliased bins are split at the midpoint of the
// two templates. Anything else is discarded.

#ifndef REGIONSEP_SELECTIVE_SEPARATION_H_
#define REGIONSEP_SELECTIVE_SEPARATION_H_

#include <array>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "regionsep/binaural_features.h"
#include "regionsep/itd_model.h"
#include "regionsep/stft.h"

namespace regionsep {

struct SeparationConfig {
  StftConfig stft = StftConfig::Clustering();
  double f_aliasing = 562.0;  // Hz
  ItdThresholds thresholds;   // sigma_th = 7e-5 s, delta_tau_min = 6e-4 s
  double alpha = 5.0;         // frame dominance factor
  double energy_floor_db = kDefaultEnergyFloorDb;
  EmSettings em;

  void Validate() const;
};

struct Passthrough {
  BinauralSignal signal;
  double itd = 0.0;
};

struct Separated {
  std::array<BinauralSignal, 2> sources;  // ITD ascending
  std::array<double, 2> itds{};
};

struct Discarded {
  DiscardReason reason = DiscardReason::kNone;
};

using MaskPair = std::pair<BinMask, BinMask>;

struct SeparationOutcome {
  std::variant<Passthrough, Separated, Discarded> result;
  ItdVerdict verdict;
  std::optional<MaskPair> masks;       // set for Separated
  BinMask excluded;                    // bins assigned to neither source
  std::optional<double> final_alpha;

  bool is_passthrough() const { return std::holds_alternative<Passthrough>(result); }
  bool is_separated() const { return std::holds_alternative<Separated>(result); }
  bool is_discarded() const { return std::holds_alternative<Discarded>(result); }
  std::string kind_name() const;
};

SeparationOutcome Separate(const BinauralSignal& mixture, const SeparationConfig& cfg);

// Posterior clustering of the itd_valid bins. Ties go to the lower-mean
// component (index 0). Other bins are false in both masks.
MaskPair LowFrequencyMasks(const FeatureGrid& features,
                           const std::array<GaussianComponent, 2>& components);

struct DominanceResult {
  std::vector<Eigen::Index> frames1;
  std::vector<Eigen::Index> frames2;
  double final_alpha = 0.0;
};

// Frames where one source's energy exceeds alpha times the other's. alpha
// shrinks by 0.9 until both sets are non-empty; nullopt once it would fall
// below 1.
std::optional<DominanceResult> DominanceSets(const Eigen::VectorXd& e1,
                                             const Eigen::VectorXd& e2, double alpha);

// Per-frame energy under a mask.
Eigen::VectorXd MaskedFrameEnergy(const RealMatrix& energy, const BinMask& mask);

// Splits bins at or above aliasing_bin by the midpoint between the two
// sources' mean ILD over their dominant frames. Ties and degenerate
// thresholds go to source 1.
MaskPair AliasedFrequencyMasks(const RealMatrix& ild, Eigen::Index aliasing_bin,
                               const std::vector<Eigen::Index>& frames1,
                               const std::vector<Eigen::Index>& frames2);
MaskPair AliasedFrequencyMasks(const Spectrogram& left, const Spectrogram& right,
                               const std::vector<Eigen::Index>& frames1,
                               const std::vector<Eigen::Index>& frames2,
                               double f_aliasing);

}  // namespace regionsep

#endif  // REGIONSEP_SELECTIVE_SEPARATION_H_
