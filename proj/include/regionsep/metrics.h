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

#ifndef REGIONSEP_METRICS_H_
#define REGIONSEP_METRICS_H_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "regionsep/errors.h"
#include "regionsep/scene_synthesis.h"
#include "regionsep/stft.h"

namespace regionsep {

inline constexpr double kSnrClampDb = 100.0;
inline constexpr double kLossFloorDb = -300.0;

struct LossConfig {
  double snr_max_db = 30.0;
  double tau() const { return std::pow(10.0, -snr_max_db / 10.0); }
  void Validate() const {
    if (!(snr_max_db > 0.0)) throw ConfigError("snr_max_db must be positive");
  }
};

namespace internal {
template <typename A, typename B>
void CheckSameLength(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.size() != b.size()) throw ConfigError("signal length mismatch");
}
inline double FlooredDb(double power) {
  return std::max(10.0 * std::log10(std::max(power, 0.0)), kLossFloorDb);
}
}  // namespace internal

// True when the residual is small enough for Snr() to report the clamp.
template <typename A, typename B>
bool SnrClamped(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& xhat) {
  internal::CheckSameLength(x, xhat);
  return (x - xhat).squaredNorm() < x.squaredNorm() * 1e-10;
}

// 10 log10(|x|^2 / |x - xhat|^2), clamped to +100 dB.
template <typename A, typename B>
double Snr(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& xhat) {
  internal::CheckSameLength(x, xhat);
  const double ref = x.squaredNorm();
  if (!(ref > 0.0)) throw ConfigError("snr: zero reference");
  if (SnrClamped(x, xhat)) return kSnrClampDb;
  return std::min(10.0 * std::log10(ref / (x - xhat).squaredNorm()), kSnrClampDb);
}

// SNR of the estimate minus SNR of the unprocessed mixture.
template <typename A, typename B, typename C>
double Snri(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& xhat,
            const Eigen::MatrixBase<C>& m) {
  internal::CheckSameLength(x, m);
  if (!((x - m).squaredNorm() > 0.0)) throw ConfigError("snri: mixture equals reference");
  return Snr(x, xhat) - Snr(x, m);
}

// 10 log10(|y - yhat|^2 + tau |y|^2); floored at -300.
template <typename A, typename B>
double LossSnr(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& yhat,
               const LossConfig& cfg = {}) {
  internal::CheckSameLength(y, yhat);
  return internal::FlooredDb((y - yhat).squaredNorm() + cfg.tau() * y.squaredNorm());
}

// 10 log10(|yhat|^2 + tau |x|^2) with x the mixture; floored at -300.
template <typename A, typename B>
double LossInactive(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& yhat,
                    const LossConfig& cfg = {}) {
  internal::CheckSameLength(x, yhat);
  return internal::FlooredDb(yhat.squaredNorm() + cfg.tau() * x.squaredNorm());
}

// Active regions contribute LossSnr on both ears, inactive ones
// LossInactive against the mixture. Estimates are matched by index.
double RegionLoss(const RegionMixtureSet& refs, const std::vector<BinauralSignal>& estimates,
                  const LossConfig& cfg = {});

struct RegionEvalReport {
  // Per region, per ear: SNR when one region is active, SNRi otherwise.
  // Empty for inactive regions.
  std::vector<std::optional<double>> left;
  std::vector<std::optional<double>> right;
  std::vector<bool> active;
  int num_active = 0;
  std::string metric;  // "S-SNR", "2-SNRi", "3-SNRi", ...
  double aggregate = 0.0;
  bool clamped = false;  // some SNR hit the +100 dB clamp

  nlohmann::ordered_json ToJson() const;
};

RegionEvalReport EvaluateRegions(const RegionMixtureSet& refs,
                                 const std::vector<BinauralSignal>& estimates);

// Ideal-binary-mask estimates: each bin goes to the region with the largest
// reference energy |Y_l|^2 + |Y_r|^2 and the mask is applied to the mixture.
std::vector<BinauralSignal> OracleMaskEstimates(const RegionMixtureSet& refs,
                                                const StftConfig& cfg);

}  // namespace regionsep

#endif  // REGIONSEP_METRICS_H_
