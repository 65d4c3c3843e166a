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

#ifndef REGIONSEP_BINAURAL_FEATURES_H_
#define REGIONSEP_BINAURAL_FEATURES_H_

#include <vector>

#include "regionsep/stft.h"

namespace regionsep {

inline constexpr double kMagnitudeFloor = 1e-12;
inline constexpr double kDefaultEnergyFloorDb = -40.0;

// Lowest frequency at which a phase difference may map to more than one
// delay for a head with maximum interaural delay `delta_tau_max` seconds.
double AliasingFrequency(double delta_tau_max);

// First bin whose centre frequency is >= f_aliasing. Bins 1..AliasingBin-1
// carry an unambiguous ITD.
Eigen::Index AliasingBin(double f_aliasing, const StftConfig& cfg);

// Per-bin interaural cues. Sign convention: positive IPD/ITD means the left
// channel leads (source nearer the left ear); positive ILD means the left
// channel is louder.
struct FeatureGrid {
  RealMatrix ipd;     // radians in (-pi, pi]
  RealMatrix itd;     // seconds; zero outside 0 < bin < aliasing_bin
  RealMatrix ild;     // dB
  RealMatrix energy;  // |L|^2 + |R|^2
  BinMask active;     // above the energy floor and not DC
  BinMask itd_valid;  // active and 0 < bin < aliasing_bin
  Eigen::Index aliasing_bin = 0;

  Eigen::Index num_frames() const { return ipd.rows(); }
  Eigen::Index num_bins() const { return ipd.cols(); }

  // ITD values of all itd_valid bins, frame-major.
  std::vector<double> ItdSamples() const;
};

// energy_floor_db is relative to the loudest bin of the grid (e.g. -40).
FeatureGrid ComputeFeatures(const Spectrogram& left, const Spectrogram& right,
                            double f_aliasing,
                            double energy_floor_db = kDefaultEnergyFloorDb);

}  // namespace regionsep

#endif  // REGIONSEP_BINAURAL_FEATURES_H_
