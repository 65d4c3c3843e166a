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

#include "regionsep/stft.h"

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "regionsep/errors.h"

namespace regionsep {

void StftConfig::Validate() const {
  if (fft_size <= 0 || (fft_size & (fft_size - 1)) != 0)
    throw ConfigError("fft_size must be a power of two, got " + std::to_string(fft_size));
  if (hop <= 0 || hop > fft_size)
    throw ConfigError("hop must satisfy 0 < hop <= fft_size, got " + std::to_string(hop));
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
}

bool operator==(const StftConfig& a, const StftConfig& b) {
  return a.fft_size == b.fft_size && a.hop == b.hop && a.window == b.window &&
         a.sample_rate == b.sample_rate;
}

Eigen::Index NumFrames(Eigen::Index length, const StftConfig& cfg) {
  const Eigen::Index padded = length + cfg.left_pad();
  const Eigen::Index excess = std::max<Eigen::Index>(0, padded - cfg.fft_size);
  return 1 + (excess + cfg.hop - 1) / cfg.hop;
}

Eigen::VectorXd MakeWindow(const StftConfig& cfg) {
  Eigen::VectorXd w(cfg.fft_size);
  for (int n = 0; n < cfg.fft_size; ++n)
    w(n) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / cfg.fft_size);
  return w;
}

Spectrogram Stft(const Waveform& x, const StftConfig& cfg) {
  cfg.Validate();
  if (x.sample_rate != cfg.sample_rate)
    throw ConfigError("stft: signal sample rate " + std::to_string(x.sample_rate) +
                      " does not match config " + std::to_string(cfg.sample_rate));
  const Eigen::Index frames = NumFrames(x.size(), cfg);
  const Eigen::Index n = cfg.fft_size;
  const Eigen::VectorXd window = MakeWindow(cfg);

  Eigen::VectorXd padded = Eigen::VectorXd::Zero((frames - 1) * cfg.hop + n);
  padded.segment(cfg.left_pad(), x.size()) = x.samples;

  Spectrogram spec;
  spec.config = cfg;
  spec.original_length = x.size();
  spec.bins.resize(frames, cfg.num_bins());

  Eigen::FFT<double> fft;
  std::vector<double> frame(n);
  std::vector<std::complex<double>> out;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) frame[i] = padded(t * cfg.hop + i) * window(i);
    fft.fwd(out, frame);
    for (Eigen::Index k = 0; k < cfg.num_bins(); ++k) spec.bins(t, k) = out[k];
  }
  return spec;
}

Waveform Istft(const Spectrogram& spec) {
  const StftConfig& cfg = spec.config;
  cfg.Validate();
  const Eigen::Index frames = spec.num_frames();
  const Eigen::Index n = cfg.fft_size;
  if (spec.num_bins() != cfg.num_bins())
    throw ConfigError("istft: bin count does not match config");
  const Eigen::VectorXd window = MakeWindow(cfg);

  const Eigen::Index total = (frames - 1) * cfg.hop + n;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(total);
  Eigen::VectorXd norm = Eigen::VectorXd::Zero(total);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> half(cfg.num_bins());
  std::vector<double> frame;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index k = 0; k < cfg.num_bins(); ++k) half[k] = spec.bins(t, k);
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    fft.inv(frame, half, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      acc(t * cfg.hop + i) += frame[i] * window(i);
      norm(t * cfg.hop + i) += window(i) * window(i);
    }
  }

  Waveform out(Eigen::VectorXd(spec.original_length), cfg.sample_rate);
  for (Eigen::Index i = 0; i < spec.original_length; ++i) {
    const Eigen::Index j = i + cfg.left_pad();
    if (j >= total || norm(j) < 1e-12)
      throw InvariantError("istft: squared-window sum below 1e-12 at sample " +
                           std::to_string(i));
    out.samples(i) = acc(j) / norm(j);
  }
  return out;
}

Spectrogram ApplyMask(const Spectrogram& spec, const BinMask& mask) {
  if (mask.rows() != spec.bins.rows() || mask.cols() != spec.bins.cols())
    throw ConfigError("mask shape does not match spectrogram");
  Spectrogram out = spec;
  out.bins = mask.select(spec.bins.array(), std::complex<double>(0.0, 0.0)).matrix();
  return out;
}

double SpectralEnergy(const Spectrogram& spec) { return spec.bins.squaredNorm(); }

}  // namespace regionsep
