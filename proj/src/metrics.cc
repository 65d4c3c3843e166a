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

#include "regionsep/metrics.h"

namespace regionsep {

namespace {

void CheckEstimates(const RegionMixtureSet& refs, const std::vector<BinauralSignal>& est) {
  if (static_cast<int>(est.size()) != refs.num_regions())
    throw ConfigError("expected " + std::to_string(refs.num_regions()) +
                      " region estimates, got " + std::to_string(est.size()));
  for (const auto& e : est)
    if (e.size() != refs.mixture.size())
      throw ConfigError("region estimate length differs from the mixture");
}

}  // namespace

double RegionLoss(const RegionMixtureSet& refs, const std::vector<BinauralSignal>& est,
                  const LossConfig& cfg) {
  cfg.Validate();
  CheckEstimates(refs, est);
  double total = 0.0;
  for (int i = 0; i < refs.num_regions(); ++i) {
    if (refs.active[i]) {
      total += LossSnr(refs.regions[i].left.samples, est[i].left.samples, cfg);
      total += LossSnr(refs.regions[i].right.samples, est[i].right.samples, cfg);
    } else {
      total += LossInactive(refs.mixture.left.samples, est[i].left.samples, cfg);
      total += LossInactive(refs.mixture.right.samples, est[i].right.samples, cfg);
    }
  }
  return total;
}

nlohmann::ordered_json RegionEvalReport::ToJson() const {
  nlohmann::ordered_json j;
  j["metric"] = metric;
  j["aggregate"] = aggregate;
  j["num_active"] = num_active;
  j["clamped"] = clamped;
  auto& regions = j["regions"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < active.size(); ++i) {
    nlohmann::ordered_json r;
    r["region"] = i + 1;
    r["active"] = static_cast<bool>(active[i]);
    r["left"] = left[i] ? nlohmann::ordered_json(*left[i]) : nlohmann::ordered_json(nullptr);
    r["right"] = right[i] ? nlohmann::ordered_json(*right[i]) : nlohmann::ordered_json(nullptr);
    regions.push_back(std::move(r));
  }
  return j;
}

RegionEvalReport EvaluateRegions(const RegionMixtureSet& refs,
                                 const std::vector<BinauralSignal>& est) {
  CheckEstimates(refs, est);
  RegionEvalReport report;
  report.active = refs.active;
  report.num_active = refs.num_active();
  report.left.assign(refs.num_regions(), std::nullopt);
  report.right.assign(refs.num_regions(), std::nullopt);
  if (report.num_active == 0) throw ConfigError("evaluation needs at least one active region");
  report.metric = report.num_active == 1 ? "S-SNR" : std::to_string(report.num_active) + "-SNRi";

  const auto& m = refs.mixture;
  double sum = 0.0;
  for (int i = 0; i < refs.num_regions(); ++i) {
    if (!refs.active[i]) continue;
    const auto& y = refs.regions[i];
    double l, r;
    if (report.num_active == 1) {
      l = Snr(y.left.samples, est[i].left.samples);
      r = Snr(y.right.samples, est[i].right.samples);
    } else {
      l = Snri(y.left.samples, est[i].left.samples, m.left.samples);
      r = Snri(y.right.samples, est[i].right.samples, m.right.samples);
    }
    report.clamped = report.clamped || SnrClamped(y.left.samples, est[i].left.samples) ||
                     SnrClamped(y.right.samples, est[i].right.samples);
    report.left[i] = l;
    report.right[i] = r;
    sum += 0.5 * (l + r);
  }
  report.aggregate = sum / report.num_active;
  return report;
}

std::vector<BinauralSignal> OracleMaskEstimates(const RegionMixtureSet& refs,
                                                const StftConfig& cfg) {
  const Spectrogram ml = Stft(refs.mixture.left, cfg);
  const Spectrogram mr = Stft(refs.mixture.right, cfg);
  std::vector<RealMatrix> energy;
  for (const auto& y : refs.regions)
    energy.push_back(Stft(y.left, cfg).bins.cwiseAbs2() + Stft(y.right, cfg).bins.cwiseAbs2());

  std::vector<BinMask> masks(refs.regions.size(),
                             BinMask::Constant(ml.num_frames(), ml.num_bins(), false));
  for (Eigen::Index t = 0; t < ml.num_frames(); ++t) {
    for (Eigen::Index k = 0; k < ml.num_bins(); ++k) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < energy.size(); ++i)
        if (energy[i](t, k) > energy[best](t, k)) best = i;
      masks[best](t, k) = true;
    }
  }
  std::vector<BinauralSignal> out;
  for (const auto& mask : masks)
    out.emplace_back(Istft(ApplyMask(ml, mask)), Istft(ApplyMask(mr, mask)));
  return out;
}

}  // namespace regionsep
