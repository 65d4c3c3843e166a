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

#ifndef REGIONSEP_ITD_MODEL_H_
#define REGIONSEP_ITD_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace regionsep {

inline constexpr double kStdFloor = 1e-9;  // seconds
inline constexpr std::size_t kMinItdSamples = 10;

struct GaussianComponent {
  double mean = 0.0;  // seconds
  double std = kStdFloor;
  double weight = 1.0;
};

struct EmSettings {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  int restarts = 3;
  double min_responsibility_mass = 1e-6;
  uint64_t seed = 0;
};

struct Gmm2Fit {
  std::array<GaussianComponent, 2> components;  // mean ascending
  double log_likelihood = 0.0;
  int iterations = 0;
  int restarts_used = 0;
};

// Raised when every EM attempt ends with a component owning (almost) no
// responsibility mass.
class EmFailure : public std::runtime_error {
 public:
  explicit EmFailure(const std::string& what) : std::runtime_error(what) {}
};

// Maximum-likelihood Gaussian: sample mean and population std (floored at
// kStdFloor). Needs at least 2 samples.
GaussianComponent FitSingleGaussian(std::span<const double> samples);

double GaussianLogLikelihood(std::span<const double> samples, const GaussianComponent& g);
double MixtureLogLikelihood(std::span<const double> samples,
                            const std::array<GaussianComponent, 2>& comps);

// EM for a two-component 1-D mixture. Initialization: means at the 25th and
// 75th percentiles, stds at half the sample std, equal weights. If a
// component collapses the means are re-jittered (seeded) up to
// settings.restarts times. The result never scores below the one-component
// fit. Needs at least kMinItdSamples samples.
Gmm2Fit FitGmm2(std::span<const double> samples, const EmSettings& settings = {});

// Linear-interpolation percentile (q in [0,1]) of unsorted data.
double Percentile(std::span<const double> samples, double q);

enum class VerdictKind { kSinglePeak, kTwoPeaks, kDiscard };

enum class DiscardReason {
  kNone,
  kWideSingleAndBadGmm,  // single peak too wide and EM could not fit two peaks
  kComponentsTooWide,
  kPeaksTooClose,
  kTooFewSamples,
  kNoDominantFrames,  // dominance search exhausted (separation stage)
};

std::string ToString(VerdictKind kind);
std::string ToString(DiscardReason reason);

struct ItdThresholds {
  double sigma_single = 7e-5;  // seconds, single-peak acceptance
  double sigma_dual = 7e-5;    // seconds, per-component bound for two peaks
  double delta_tau_min = 6e-4; // seconds, minimum peak separation
};

struct ItdVerdict {
  VerdictKind kind = VerdictKind::kDiscard;
  DiscardReason reason = DiscardReason::kNone;
  std::optional<GaussianComponent> single;
  std::optional<Gmm2Fit> gmm;
};

ItdVerdict ClassifyItds(std::span<const double> samples, const ItdThresholds& thresholds,
                        const EmSettings& em = {});

inline ItdVerdict ClassifyItds(std::span<const double> samples, double sigma_th,
                               double delta_tau_min, const EmSettings& em = {}) {
  return ClassifyItds(samples, ItdThresholds{sigma_th, sigma_th, delta_tau_min}, em);
}

}  // namespace regionsep

#endif  // REGIONSEP_ITD_MODEL_H_
