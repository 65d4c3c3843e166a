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

#ifndef REGIONSEP_STFT_H_
#define REGIONSEP_STFT_H_

#include <Eigen/Core>

#include "regionsep/signal_io.h"

namespace regionsep {

enum class WindowType { kHannPeriodic };

struct StftConfig {
  int fft_size = 1024;
  int hop = 512;
  WindowType window = WindowType::kHannPeriodic;
  int sample_rate = kDefaultSampleRate;

  // 1024-point frames, 50% overlap, periodic Hann: the clustering preset.
  static StftConfig Clustering(int sample_rate = kDefaultSampleRate) {
    return StftConfig{1024, 512, WindowType::kHannPeriodic, sample_rate};
  }

  int num_bins() const { return fft_size / 2 + 1; }
  double bin_hz() const { return static_cast<double>(sample_rate) / fft_size; }
  double BinFrequency(Eigen::Index k) const { return k * bin_hz(); }
  // Zeros prepended so that every input sample lies under at least two
  // windows; istft() removes them again.
  int left_pad() const { return fft_size - hop; }
  void Validate() const;
};

bool operator==(const StftConfig& a, const StftConfig& b);

using ComplexMatrix = Eigen::MatrixXcd;           // (frame, bin)
using RealMatrix = Eigen::MatrixXd;               // (frame, bin)
using BinMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Spectrogram {
  ComplexMatrix bins;
  StftConfig config;
  Eigen::Index original_length = 0;

  Eigen::Index num_frames() const { return bins.rows(); }
  Eigen::Index num_bins() const { return bins.cols(); }
};

// Number of frames produced for an input of `length` samples.
Eigen::Index NumFrames(Eigen::Index length, const StftConfig& cfg);

Eigen::VectorXd MakeWindow(const StftConfig& cfg);

Spectrogram Stft(const Waveform& x, const StftConfig& cfg);

// Weighted overlap-add with the analysis window as synthesis window, divided
// by the overlapped squared-window sum. Throws InvariantError if that sum
// drops below 1e-12 at a retained sample.
Waveform Istft(const Spectrogram& spec);

// Elementwise product of a spectrogram with a binary mask.
Spectrogram ApplyMask(const Spectrogram& spec, const BinMask& mask);

// Sum of |X(t,f)|^2 over all bins.
double SpectralEnergy(const Spectrogram& spec);

}  // namespace regionsep

#endif  // REGIONSEP_STFT_H_
