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

#include "regionsep/itd_model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "regionsep/errors.h"

namespace regionsep {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double LogNormal(double x, double mean, double std) {
  const double z = (x - mean) / std;
  return -std::log(std) - kHalfLog2Pi - 0.5 * z * z;
}

double LogSumExp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct EmRun {
  std::array<GaussianComponent, 2> comps;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool degenerate = false;
};

EmRun RunEm(std::span<const double> x, std::array<GaussianComponent, 2> comps,
            const EmSettings& s) {
  const std::size_t n = x.size();
  std::vector<double> resp(n);  // responsibility of component 0
  EmRun run;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < s.max_iterations; ++it) {
    // E step
    const double lw0 = std::log(comps[0].weight), lw1 = std::log(comps[1].weight);
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = lw0 + LogNormal(x[i], comps[0].mean, comps[0].std);
      const double b = lw1 + LogNormal(x[i], comps[1].mean, comps[1].std);
      const double lse = LogSumExp(a, b);
      resp[i] = std::exp(a - lse);
      ll += lse;
    }
    run.iterations = it + 1;
    run.log_likelihood = ll;
    run.comps = comps;
    if (it > 0 && std::abs(ll - prev) < s.relative_tolerance * std::abs(prev)) break;
    prev = ll;

    // M step
    double mass0 = 0.0, sum0 = 0.0, sum1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass0 += resp[i];
      sum0 += resp[i] * x[i];
      sum1 += (1.0 - resp[i]) * x[i];
    }
    const double mass1 = static_cast<double>(n) - mass0;
    if (mass0 < s.min_responsibility_mass || mass1 < s.min_responsibility_mass) {
      run.degenerate = true;
      return run;
    }
    const double mu0 = sum0 / mass0, mu1 = sum1 / mass1;
    double var0 = 0.0, var1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      var0 += resp[i] * (x[i] - mu0) * (x[i] - mu0);
      var1 += (1.0 - resp[i]) * (x[i] - mu1) * (x[i] - mu1);
    }
    comps[0] = {mu0, std::max(std::sqrt(var0 / mass0), kStdFloor), mass0 / n};
    comps[1] = {mu1, std::max(std::sqrt(var1 / mass1), kStdFloor), mass1 / n};
  }
  return run;
}

}  // namespace

double Percentile(std::span<const double> samples, double q) {
  if (samples.empty()) throw ConfigError("percentile of empty sample set");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

GaussianComponent FitSingleGaussian(std::span<const double> samples) {
  if (samples.size() < 2) throw ConfigError("single Gaussian fit needs >= 2 samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  return {mean, std::max(std::sqrt(var / n), kStdFloor), 1.0};
}

double GaussianLogLikelihood(std::span<const double> samples, const GaussianComponent& g) {
  double ll = 0.0;
  for (double v : samples) ll += LogNormal(v, g.mean, g.std);
  return ll;
}

double MixtureLogLikelihood(std::span<const double> samples,
                            const std::array<GaussianComponent, 2>& c) {
  const double lw0 = std::log(c[0].weight), lw1 = std::log(c[1].weight);
  double ll = 0.0;
  for (double v : samples)
    ll += LogSumExp(lw0 + LogNormal(v, c[0].mean, c[0].std),
                    lw1 + LogNormal(v, c[1].mean, c[1].std));
  return ll;
}

Gmm2Fit FitGmm2(std::span<const double> samples, const EmSettings& settings) {
  if (samples.size() < kMinItdSamples)
    throw ConfigError("GMM fit needs >= " + std::to_string(kMinItdSamples) + " samples");
  const GaussianComponent single = FitSingleGaussian(samples);
  const double spread = single.std;
  const double init_std = std::max(0.5 * spread, kStdFloor);
  std::array<GaussianComponent, 2> init{
      GaussianComponent{Percentile(samples, 0.25), init_std, 0.5},
      GaussianComponent{Percentile(samples, 0.75), init_std, 0.5}};

  std::mt19937_64 rng(settings.seed);
  std::normal_distribution<double> jitter(0.0, 0.5);
  EmRun run = RunEm(samples, init, settings);
  int restarts = 0;
  while (run.degenerate && restarts < settings.restarts) {
    ++restarts;
    auto jittered = init;
    for (auto& c : jittered) c.mean += jitter(rng) * spread;
    run = RunEm(samples, jittered, settings);
  }
  if (run.degenerate)
    throw EmFailure("EM collapsed to a single component after " +
                    std::to_string(restarts) + " restarts");

  Gmm2Fit fit;
  fit.components = run.comps;
  fit.log_likelihood = run.log_likelihood;
  fit.iterations = run.iterations;
  fit.restarts_used = restarts;
  // The one-component model is a special case of the two-component one.
  const double single_ll = GaussianLogLikelihood(samples, single);
  if (fit.log_likelihood < single_ll) {
    fit.components = {GaussianComponent{single.mean, single.std, 0.5},
                      GaussianComponent{single.mean, single.std, 0.5}};
    fit.log_likelihood = single_ll;
  }
  if (fit.components[1].mean < fit.components[0].mean)
    std::swap(fit.components[0], fit.components[1]);
  return fit;
}

std::string ToString(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kSinglePeak: return "single_peak";
    case VerdictKind::kTwoPeaks: return "two_peaks";
    case VerdictKind::kDiscard: return "discard";
  }
  return "unknown";
}

std::string ToString(DiscardReason reason) {
  switch (reason) {
    case DiscardReason::kNone: return "none";
    case DiscardReason::kWideSingleAndBadGmm: return "wide_single_and_bad_gmm";
    case DiscardReason::kComponentsTooWide: return "components_too_wide";
    case DiscardReason::kPeaksTooClose: return "peaks_too_close";
    case DiscardReason::kTooFewSamples: return "too_few_samples";
    case DiscardReason::kNoDominantFrames: return "no_dominant_frames";
  }
  return "unknown";
}

ItdVerdict ClassifyItds(std::span<const double> samples, const ItdThresholds& th,
                        const EmSettings& em) {
  ItdVerdict verdict;
  if (samples.size() < kMinItdSamples) {
    verdict.reason = DiscardReason::kTooFewSamples;
    return verdict;
  }
  verdict.single = FitSingleGaussian(samples);
  if (verdict.single->std < th.sigma_single) {
    verdict.kind = VerdictKind::kSinglePeak;
    return verdict;
  }
  try {
    verdict.gmm = FitGmm2(samples, em);
  } catch (const EmFailure&) {
    verdict.reason = DiscardReason::kWideSingleAndBadGmm;
    return verdict;
  }
  const auto& c = verdict.gmm->components;
  if (std::abs(c[1].mean - c[0].mean) < th.delta_tau_min) {
    verdict.reason = DiscardReason::kPeaksTooClose;
  } else if (c[0].std > th.sigma_dual || c[1].std > th.sigma_dual) {
    verdict.reason = DiscardReason::kComponentsTooWide;
  } else {
    verdict.kind = VerdictKind::kTwoPeaks;
  }
  return verdict;
}

}  // namespace regionsep
