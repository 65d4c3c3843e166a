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

#include <doctest.h>

#include "regionsep/errors.h"
#include "regionsep/metrics.h"
#include "regionsep/scene_synthesis.h"
#include "test_support.h"

namespace regionsep {
namespace {

struct Fixture {
  HrirBank bank = SphericalHrirBank(5.0, kDefaultHeadItdMax, kDefaultSampleRate);
  SourcePool pool = SyntheticVoicePool(4, 3.0, 17);

  const Waveform& Voice(int i) const {
    auto it = pool.begin();
    std::advance(it, i);
    return it->second;
  }
  BinauralSignal Image(int i, double az) const {
    return Spatialize(Voice(i), bank, az, 1.0, Voice(0).size());
  }
};

const Fixture& Shared() {
  static const Fixture f;
  return f;
}

BinauralSignal Sum(const BinauralSignal& a, const BinauralSignal& b) {
  return SumRegions({a, b});
}

// Relaxed thresholds for the two-source cases: overlapping bins broaden the
// mixture components and pull their means together.
SeparationConfig TwoSourceConfig() {
  SeparationConfig cfg;
  cfg.thresholds.sigma_dual = 6e-4;
  cfg.thresholds.delta_tau_min = 3e-4;
  return cfg;
}

double MeanSnri(const BinauralSignal& ref, const BinauralSignal& est, const BinauralSignal& m) {
  return 0.5 * (Snri(ref.left.samples, est.left.samples, m.left.samples) +
                Snri(ref.right.samples, est.right.samples, m.right.samples));
}

FeatureGrid ManualGrid(const std::vector<std::vector<double>>& itd, double energy = 1.0) {
  FeatureGrid f;
  const auto frames = static_cast<Eigen::Index>(itd.size());
  const auto bins = static_cast<Eigen::Index>(itd[0].size()) + 1;
  f.aliasing_bin = bins;
  f.itd = RealMatrix::Zero(frames, bins);
  f.ipd = f.ild = f.itd;
  f.energy = RealMatrix::Constant(frames, bins, energy);
  f.active = BinMask::Constant(frames, bins, true);
  f.active.col(0).setConstant(false);
  for (Eigen::Index t = 0; t < frames; ++t)
    for (Eigen::Index k = 1; k < bins; ++k) f.itd(t, k) = itd[t][k - 1];
  f.itd_valid = f.active;
  return f;
}

TEST_CASE("config validation") {
  SeparationConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.f_aliasing = 9000.0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
}

TEST_CASE("low-frequency masks follow the larger posterior") {
  const std::array<GaussianComponent, 2> c{GaussianComponent{-3e-4, 5e-5, 0.5},
                                           GaussianComponent{3e-4, 5e-5, 0.5}};
  FeatureGrid f = ManualGrid({{-3e-4, 0.0, 3e-4, 1e-4}, {2e-5, -2e-5, 6e-4, -9e-4}});
  f.itd_valid.row(1).setConstant(false);
  const MaskPair m = LowFrequencyMasks(f, c);
  CHECK(m.first(0, 1));   // at mu1
  CHECK(m.first(0, 2));   // equal posterior: lower-mean component
  CHECK(m.second(0, 3));
  CHECK(m.second(0, 4));
  CHECK_FALSE(m.first.row(1).any());   // excluded frame
  CHECK_FALSE(m.second.row(1).any());
  CHECK_FALSE((m.first && m.second).any());
  CHECK_FALSE(m.first.col(0).any());
}

TEST_CASE("dominance sets") {
  Eigen::VectorXd e1(3), e2(3);
  e1 << 10, 1, 5;
  e2 << 1, 10, 5;
  auto r = DominanceSets(e1, e2, 5.0);
  REQUIRE(r.has_value());
  CHECK(r->frames1 == std::vector<Eigen::Index>{0});
  CHECK(r->frames2 == std::vector<Eigen::Index>{1});
  CHECK(r->final_alpha == 5.0);

  Eigen::VectorXd a(2), b(2);
  a << 2, 1;
  b << 1, 2;
  r = DominanceSets(a, b, 5.0);
  REQUIRE(r.has_value());
  CHECK(r->final_alpha == doctest::Approx(5.0 * std::pow(0.9, 9)));
  CHECK(r->frames1 == std::vector<Eigen::Index>{0});
  CHECK(r->frames2 == std::vector<Eigen::Index>{1});

  CHECK_FALSE(DominanceSets(e1, e1, 5.0).has_value());
  CHECK_THROWS_AS(DominanceSets(e1, e2, 1.0), ConfigError);
  CHECK_THROWS_AS(DominanceSets(e1, a, 5.0), ConfigError);
}

TEST_CASE("aliased masks split at the mean ILD") {
  // Frames 0 and 1 dominate for source 1 and 2. Bin 0 is below aliasing.
  RealMatrix ild(5, 3);
  ild << 0, 6, 4,
         0, -6, 4,
         0, 3, 4,
         0, 0, 4,
         0, -1, 4;
  const MaskPair m = AliasedFrequencyMasks(ild, 1, {0}, {1});
  CHECK_FALSE(m.first.col(0).any());
  CHECK_FALSE(m.second.col(0).any());
  CHECK(m.first(2, 1));   // +3 dB, threshold 0
  CHECK(m.first(3, 1));   // at the threshold
  CHECK(m.second(4, 1));
  CHECK(m.second(1, 1));
  CHECK(m.first.col(2).all());  // equal ILD means: everything to source 1
  CHECK_FALSE((m.first && m.second).any());
  CHECK_THROWS_AS(AliasedFrequencyMasks(ild, 1, {}, {1}), ConfigError);
}

TEST_CASE("aliased masks keep source 1 on its own side when its ILD is lower") {
  RealMatrix ild(3, 2);
  ild << 0, -6,
         0, 6,
         0, -2;
  const MaskPair m = AliasedFrequencyMasks(ild, 1, {0}, {1});
  CHECK(m.first(0, 1));
  CHECK(m.first(2, 1));
  CHECK(m.second(1, 1));
}

TEST_CASE("single source is passed through untouched") {
  const auto& fx = Shared();
  const BinauralSignal m = fx.Image(0, 40.0);
  const SeparationOutcome out = Separate(m, SeparationConfig{});
  REQUIRE(out.is_passthrough());
  const auto& p = std::get<Passthrough>(out.result);
  CHECK(p.signal == m);
  CHECK(std::abs(p.itd - SphericalItd(40.0, kDefaultHeadItdMax)) < 2e-5);
  CHECK(out.kind_name() == "passthrough");
}

TEST_CASE("sources 90 degrees apart are separated") {
  const auto& fx = Shared();
  const BinauralSignal a = fx.Image(0, 315.0), b = fx.Image(1, 45.0);
  const BinauralSignal m = Sum(a, b);
  const SeparationOutcome out = Separate(m, TwoSourceConfig());
  REQUIRE(out.is_separated());
  const auto& s = std::get<Separated>(out.result);
  CHECK(s.itds[0] < s.itds[1]);
  // The right-hand source has the negative ITD.
  CHECK(std::abs(s.itds[0] - SphericalItd(45.0, kDefaultHeadItdMax)) < 1e-4);
  CHECK(std::abs(s.itds[1] - SphericalItd(315.0, kDefaultHeadItdMax)) < 1e-4);
  CHECK(MeanSnri(b, s.sources[0], m) > 5.0);
  CHECK(MeanSnri(a, s.sources[1], m) > 5.0);
}

TEST_CASE("masks are disjoint, complete and conserve energy") {
  const auto& fx = Shared();
  const BinauralSignal m = Sum(fx.Image(2, 300.0), fx.Image(3, 60.0));
  const SeparationOutcome out = Separate(m, TwoSourceConfig());
  REQUIRE(out.is_separated());
  const auto& [m1, m2] = *out.masks;
  CHECK_FALSE((m1 && m2).any());
  CHECK(((m1 || m2) == !out.excluded).all());
  for (const Waveform* ch : {&m.left, &m.right}) {
    const Spectrogram spec = Stft(*ch, SeparationConfig{}.stft);
    const Spectrogram a = ApplyMask(spec, m1), b = ApplyMask(spec, m2);
    const Spectrogram kept = ApplyMask(spec, !out.excluded);
    CHECK((a.bins + b.bins) == kept.bins);
    CHECK(SpectralEnergy(a) + SpectralEnergy(b) ==
          doctest::Approx(SpectralEnergy(kept)).epsilon(1e-12));
  }
}

TEST_CASE("ten degrees apart is discarded as too close") {
  const auto& fx = Shared();
  const BinauralSignal m = Sum(fx.Image(0, 355.0), fx.Image(1, 5.0));
  const SeparationOutcome out = Separate(m, SeparationConfig{});
  REQUIRE(out.is_discarded());
  CHECK(std::get<Discarded>(out.result).reason == DiscardReason::kPeaksTooClose);
  CHECK_FALSE(out.masks.has_value());
}

TEST_CASE("swapping channels mirrors the outcome") {
  const auto& fx = Shared();
  const BinauralSignal m = Sum(fx.Image(0, 330.0), fx.Image(1, 90.0));
  const SeparationOutcome a = Separate(m, TwoSourceConfig());
  const SeparationOutcome b = Separate(m.Swapped(), TwoSourceConfig());
  REQUIRE(a.is_separated());
  REQUIRE(b.is_separated());
  const auto& sa = std::get<Separated>(a.result);
  const auto& sb = std::get<Separated>(b.result);
  for (int i = 0; i < 2; ++i) {
    CHECK(sb.itds[i] == doctest::Approx(-sa.itds[1 - i]).epsilon(1e-9));
    const BinauralSignal mirrored = sa.sources[1 - i].Swapped();
    CHECK((sb.sources[i].left.samples - mirrored.left.samples).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((sb.sources[i].right.samples - mirrored.right.samples).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("separation is deterministic") {
  const auto& fx = Shared();
  const BinauralSignal m = Sum(fx.Image(2, 270.0), fx.Image(3, 30.0));
  const SeparationOutcome a = Separate(m, TwoSourceConfig());
  const SeparationOutcome b = Separate(m, TwoSourceConfig());
  CHECK(a.kind_name() == b.kind_name());
  if (a.is_separated()) {
    for (int i = 0; i < 2; ++i)
      CHECK(std::get<Separated>(a.result).sources[i] == std::get<Separated>(b.result).sources[i]);
  }
}

TEST_CASE("preconditions") {
  const BinauralSignal tiny = BinauralSignal::Zeros(1000, kDefaultSampleRate);
  CHECK_THROWS_AS(Separate(tiny, SeparationConfig{}), ConfigError);
  const BinauralSignal slow = BinauralSignal::Zeros(40000, 8000);
  CHECK_THROWS_AS(Separate(slow, SeparationConfig{}), ConfigError);
}

TEST_CASE("silence is discarded for lack of samples") {
  const BinauralSignal z = BinauralSignal::Zeros(16000, kDefaultSampleRate);
  const SeparationOutcome out = Separate(z, SeparationConfig{});
  REQUIRE(out.is_discarded());
  CHECK(std::get<Discarded>(out.result).reason == DiscardReason::kTooFewSamples);
}

}  // namespace
}  // namespace regionsep
