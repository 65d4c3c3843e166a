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

#include "regionsep/selective_separation.h"

#include <cmath>
#include <numbers>

#include "regionsep/errors.h"

namespace regionsep {

void SeparationConfig::Validate() const {
  stft.Validate();
  if (!(alpha > 1.0)) throw ConfigError("alpha must be > 1, got " + std::to_string(alpha));
  if (!(f_aliasing > 0.0 && f_aliasing < stft.sample_rate / 2.0))
    throw ConfigError("f_aliasing must lie in (0, sample_rate/2), got " +
                      std::to_string(f_aliasing));
  if (!(thresholds.sigma_single > 0.0) || !(thresholds.sigma_dual > 0.0))
    throw ConfigError("sigma_th must be positive");
  if (!(thresholds.delta_tau_min >= 0.0))
    throw ConfigError("delta_tau_min must be non-negative");
  if (!(energy_floor_db <= 0.0)) throw ConfigError("energy_floor_db must be <= 0");
  if (em.max_iterations <= 0 || em.restarts < 0)
    throw ConfigError("EM settings must have positive iterations and non-negative restarts");
}

std::string SeparationOutcome::kind_name() const {
  if (is_passthrough()) return "passthrough";
  if (is_separated()) return "separated";
  return "discarded";
}

MaskPair LowFrequencyMasks(const FeatureGrid& f,
                           const std::array<GaussianComponent, 2>& c) {
  const Eigen::Index frames = f.num_frames(), bins = f.num_bins();
  MaskPair masks{BinMask::Constant(frames, bins, false),
                 BinMask::Constant(frames, bins, false)};
  auto log_post = [](double x, const GaussianComponent& g) {
    const double z = (x - g.mean) / g.std;
    return std::log(g.weight) - std::log(g.std) - 0.5 * z * z;
  };
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index k = 1; k < f.aliasing_bin; ++k) {
      if (!f.itd_valid(t, k)) continue;
      const double x = f.itd(t, k);
      if (log_post(x, c[0]) >= log_post(x, c[1]))
        masks.first(t, k) = true;
      else
        masks.second(t, k) = true;
    }
  }
  return masks;
}

Eigen::VectorXd MaskedFrameEnergy(const RealMatrix& energy, const BinMask& mask) {
  return mask.select(energy.array(), 0.0).rowwise().sum().matrix();
}

std::optional<DominanceResult> DominanceSets(const Eigen::VectorXd& e1,
                                             const Eigen::VectorXd& e2, double alpha) {
  if (e1.size() != e2.size()) throw ConfigError("dominance: energy length mismatch");
  if (!(alpha > 1.0)) throw ConfigError("dominance: alpha must be > 1");
  if ((e1.array() < 0.0).any() || (e2.array() < 0.0).any())
    throw ConfigError("dominance: energies must be non-negative");
  while (alpha >= 1.0) {
    DominanceResult r;
    for (Eigen::Index t = 0; t < e1.size(); ++t) {
      if (e1(t) > alpha * e2(t)) r.frames1.push_back(t);
      if (e2(t) > alpha * e1(t)) r.frames2.push_back(t);
    }
    if (!r.frames1.empty() && !r.frames2.empty()) {
      r.final_alpha = alpha;
      return r;
    }
    alpha *= 0.9;
  }
  return std::nullopt;
}

MaskPair AliasedFrequencyMasks(const RealMatrix& ild, Eigen::Index aliasing_bin,
                               const std::vector<Eigen::Index>& frames1,
                               const std::vector<Eigen::Index>& frames2) {
  if (frames1.empty() || frames2.empty())
    throw ConfigError("aliased masks need non-empty dominance sets");
  const Eigen::Index frames = ild.rows(), bins = ild.cols();
  MaskPair masks{BinMask::Constant(frames, bins, false),
                 BinMask::Constant(frames, bins, false)};
  auto mean_ild = [&](const std::vector<Eigen::Index>& ts, Eigen::Index k) {
    double s = 0.0;
    for (Eigen::Index t : ts) s += ild(t, k);
    return s / static_cast<double>(ts.size());
  };
  for (Eigen::Index k = aliasing_bin; k < bins; ++k) {
    const double ild1 = mean_ild(frames1, k);
    const double ild2 = mean_ild(frames2, k);
    const double threshold = 0.5 * (ild1 + ild2);
    const double side1 = ild1 - threshold;
    for (Eigen::Index t = 0; t < frames; ++t) {
      const double d = ild(t, k) - threshold;
      const bool to_first = side1 == 0.0 || d == 0.0 || ((d > 0.0) == (side1 > 0.0));
      (to_first ? masks.first : masks.second)(t, k) = true;
    }
  }
  return masks;
}

MaskPair AliasedFrequencyMasks(const Spectrogram& left, const Spectrogram& right,
                               const std::vector<Eigen::Index>& frames1,
                               const std::vector<Eigen::Index>& frames2,
                               double f_aliasing) {
  const FeatureGrid f = ComputeFeatures(left, right, f_aliasing);
  return AliasedFrequencyMasks(f.ild, f.aliasing_bin, frames1, frames2);
}

SeparationOutcome Separate(const BinauralSignal& m, const SeparationConfig& cfg) {
  cfg.Validate();
  m.Validate();
  if (m.sample_rate() != cfg.stft.sample_rate)
    throw ConfigError("separate: recording sample rate " + std::to_string(m.sample_rate()) +
                      " differs from configured " + std::to_string(cfg.stft.sample_rate));
  if (NumFrames(m.size(), cfg.stft) < 4)
    throw ConfigError("separate: recording shorter than 4 STFT frames");

  // Step 1: features and ITD distribution of the unaliased bins.
  const Spectrogram sl = Stft(m.left, cfg.stft);
  const Spectrogram sr = Stft(m.right, cfg.stft);
  const FeatureGrid features = ComputeFeatures(sl, sr, cfg.f_aliasing, cfg.energy_floor_db);
  const std::vector<double> itds = features.ItdSamples();

  SeparationOutcome out;
  out.excluded = !features.active;
  // Steps 2-3: one narrow peak, two separable peaks, or discard.
  out.verdict = ClassifyItds(itds, cfg.thresholds, cfg.em);
  switch (out.verdict.kind) {
    case VerdictKind::kSinglePeak:
      out.result = Passthrough{m, out.verdict.single->mean};
      return out;
    case VerdictKind::kDiscard:
      out.result = Discarded{out.verdict.reason};
      return out;
    case VerdictKind::kTwoPeaks:
      break;
  }
  const auto& comps = out.verdict.gmm->components;

  // Step 4: unaliased bins by GMM posterior.
  const MaskPair low = LowFrequencyMasks(features, comps);

  // Step 5: frames where one source dominates.
  const auto dominance = DominanceSets(MaskedFrameEnergy(features.energy, low.first),
                                       MaskedFrameEnergy(features.energy, low.second),
                                       cfg.alpha);
  if (!dominance) {
    out.result = Discarded{DiscardReason::kNoDominantFrames};
    return out;
  }
  out.final_alpha = dominance->final_alpha;

  // Step 6: aliased bins by per-frequency ILD threshold.
  const MaskPair high = AliasedFrequencyMasks(features.ild, features.aliasing_bin,
                                              dominance->frames1, dominance->frames2);

  // Step 7: concatenate, apply to both ears, invert.
  MaskPair masks{(low.first || high.first) && features.active,
                 (low.second || high.second) && features.active};
  Separated sep;
  for (int i = 0; i < 2; ++i) {
    const BinMask& mask = i == 0 ? masks.first : masks.second;
    sep.sources[i] = BinauralSignal(Istft(ApplyMask(sl, mask)), Istft(ApplyMask(sr, mask)));
    sep.itds[i] = comps[i].mean;
  }
  out.result = std::move(sep);
  out.masks = std::move(masks);
  return out;
}

}  // namespace regionsep
