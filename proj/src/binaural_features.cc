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

#include "regionsep/binaural_features.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "regionsep/errors.h"

namespace regionsep {

double AliasingFrequency(double delta_tau_max) {
  if (!(delta_tau_max > 0.0))
    throw ConfigError("delta_tau_max must be positive, got " + std::to_string(delta_tau_max));
  return 1.0 / (2.0 * delta_tau_max);
}

Eigen::Index AliasingBin(double f_aliasing, const StftConfig& cfg) {
  if (!(f_aliasing > 0.0)) throw ConfigError("f_aliasing must be positive");
  const auto k = static_cast<Eigen::Index>(std::ceil(f_aliasing / cfg.bin_hz()));
  return std::min<Eigen::Index>(k, cfg.num_bins());
}

std::vector<double> FeatureGrid::ItdSamples() const {
  std::vector<double> out;
  for (Eigen::Index t = 0; t < itd.rows(); ++t)
    for (Eigen::Index k = 1; k < aliasing_bin; ++k)
      if (itd_valid(t, k)) out.push_back(itd(t, k));
  return out;
}

FeatureGrid ComputeFeatures(const Spectrogram& left, const Spectrogram& right,
                            double f_aliasing, double energy_floor_db) {
  if (left.bins.rows() != right.bins.rows() || left.bins.cols() != right.bins.cols())
    throw ConfigError("left/right spectrogram shape mismatch");
  if (!(left.config == right.config))
    throw ConfigError("left/right spectrograms use different STFT configs");
  if (!(energy_floor_db <= 0.0)) throw ConfigError("energy_floor_db must be <= 0");

  const Eigen::Index frames = left.num_frames();
  const Eigen::Index bins = left.num_bins();
  const StftConfig& cfg = left.config;

  FeatureGrid g;
  g.aliasing_bin = AliasingBin(f_aliasing, cfg);
  g.ipd.resize(frames, bins);
  g.itd = RealMatrix::Zero(frames, bins);
  g.ild.resize(frames, bins);
  g.energy = left.bins.cwiseAbs2() + right.bins.cwiseAbs2();

  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index k = 0; k < bins; ++k) {
      const std::complex<double> l = left.bins(t, k);
      const std::complex<double> r = right.bins(t, k);
      // arg(L * conj(R)), spelled out so swapping channels negates exactly.
      const double re = l.real() * r.real() + l.imag() * r.imag();
      const double im = l.imag() * r.real() - l.real() * r.imag();
      double phase = std::atan2(im, re);
      if (phase <= -std::numbers::pi) phase = std::numbers::pi;
      g.ipd(t, k) = phase;
      const double ml = std::max(std::abs(l), kMagnitudeFloor);
      const double mr = std::max(std::abs(r), kMagnitudeFloor);
      g.ild(t, k) = 20.0 * (std::log10(ml) - std::log10(mr));
      if (k > 0 && k < g.aliasing_bin)
        g.itd(t, k) = phase / (2.0 * std::numbers::pi * cfg.BinFrequency(k));
    }
  }

  const double peak = frames > 0 ? g.energy.maxCoeff() : 0.0;
  const double floor = peak * std::pow(10.0, energy_floor_db / 10.0);
  g.active = (g.energy.array() >= floor) && (g.energy.array() > 0.0);
  g.active.col(0).setConstant(false);
  g.itd_valid = BinMask::Constant(frames, bins, false);
  if (g.aliasing_bin > 1)
    g.itd_valid.middleCols(1, g.aliasing_bin - 1) = g.active.middleCols(1, g.aliasing_bin - 1);
  return g;
}

}  // namespace regionsep
