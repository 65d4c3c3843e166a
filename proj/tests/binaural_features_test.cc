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

#include <cmath>
#include <complex>

#include <doctest.h>

#include "regionsep/errors.h"
#include "test_support.h"

namespace regionsep {
namespace {

constexpr double kPi = 3.14159265358979323846;

Spectrogram Blank(Eigen::Index frames) {
  Spectrogram s;
  s.config = StftConfig{};
  s.bins = ComplexMatrix::Zero(frames, s.config.num_bins());
  return s;
}

Spectrogram RandomSpectrogram(Eigen::Index frames, uint64_t seed) {
  Spectrogram s = Blank(frames);
  const Eigen::VectorXd re = testing::GaussianNoise(s.bins.size(), seed);
  const Eigen::VectorXd im = testing::GaussianNoise(s.bins.size(), seed + 1);
  for (Eigen::Index i = 0; i < s.bins.size(); ++i) s.bins(i) = {re(i), im(i)};
  return s;
}

// Right channel delayed by tau relative to left.
Spectrogram Delayed(const Spectrogram& left, double tau) {
  Spectrogram r = left;
  for (Eigen::Index k = 0; k < r.num_bins(); ++k)
    r.bins.col(k) *= std::polar(1.0, -2.0 * kPi * left.config.BinFrequency(k) * tau);
  return r;
}

TEST_CASE("aliasing frequency") {
  CHECK(AliasingFrequency(0.0005) == doctest::Approx(1000.0));
  CHECK(AliasingFrequency(0.00089) == doctest::Approx(561.8).epsilon(1e-4));
  CHECK(AliasingFrequency(0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(AliasingFrequency(0.0), ConfigError);
  CHECK_THROWS_AS(AliasingFrequency(-1e-4), ConfigError);
}

TEST_CASE("aliasing bin") {
  CHECK(AliasingBin(562.0, StftConfig{}) == 36);
  CHECK(AliasingBin(1000.0, StftConfig{}) == 64);
  CHECK(AliasingBin(15.625, StftConfig{}) == 1);
}

TEST_CASE("delayed right channel gives positive ITD") {
  const Spectrogram l = RandomSpectrogram(6, 1);
  const FeatureGrid f = ComputeFeatures(l, Delayed(l, 0.0005), 562.0, -300.0);
  CHECK(f.ipd(2, 16) == doctest::Approx(2.0 * kPi * 250.0 * 0.0005));
  CHECK(f.ipd(2, 16) == doctest::Approx(0.7854).epsilon(1e-4));
  CHECK(f.itd(2, 16) == doctest::Approx(0.0005));
  for (Eigen::Index t = 0; t < f.num_frames(); ++t)
    for (Eigen::Index k = 1; k < f.aliasing_bin; ++k)
      if (f.itd_valid(t, k)) CHECK(std::abs(f.itd(t, k) - 0.0005) < 1e-7);
}

TEST_CASE("identical channels give zero features") {
  const Spectrogram l = RandomSpectrogram(5, 3);
  const FeatureGrid f = ComputeFeatures(l, l, 562.0);
  for (Eigen::Index t = 0; t < f.num_frames(); ++t)
    for (Eigen::Index k = 0; k < f.num_bins(); ++k)
      if (f.active(t, k)) {
        CHECK(f.ipd(t, k) == 0.0);
        CHECK(f.itd(t, k) == 0.0);
        CHECK(f.ild(t, k) == 0.0);
      }
}

TEST_CASE("ILD of a 2:1 magnitude ratio") {
  Spectrogram l = Blank(4), r = Blank(4);
  l.bins(1, 40) = {2.0, 0.0};
  r.bins(1, 40) = {0.0, 1.0};
  const FeatureGrid f = ComputeFeatures(l, r, 562.0);
  CHECK(f.ild(1, 40) == doctest::Approx(6.0206).epsilon(1e-4));
  CHECK(f.ipd(1, 40) == doctest::Approx(-kPi / 2.0));
}

TEST_CASE("ILD stays finite on silent bins") {
  Spectrogram l = Blank(3), r = Blank(3);
  l.bins(0, 5) = {1.0, 0.0};
  const FeatureGrid f = ComputeFeatures(l, r, 562.0);
  CHECK(f.ild.allFinite());
  CHECK(f.ild(0, 5) == doctest::Approx(240.0));
  CHECK(f.ild(1, 1) == 0.0);
}

TEST_CASE("IPD wraps to (-pi, pi]") {
  Spectrogram l = Blank(2), r = Blank(2);
  l.bins(0, 3) = {-1.0, 0.0};
  r.bins(0, 3) = {1.0, 0.0};
  l.bins(0, 4) = {-1.0, -0.0};
  r.bins(0, 4) = {1.0, 0.0};
  const FeatureGrid f = ComputeFeatures(l, r, 562.0);
  CHECK(f.ipd(0, 3) == doctest::Approx(kPi));
  CHECK(f.ipd(0, 4) == doctest::Approx(kPi));
  const Spectrogram a = RandomSpectrogram(7, 9), b = RandomSpectrogram(7, 19);
  const FeatureGrid g = ComputeFeatures(a, b, 562.0);
  CHECK((g.ipd.array() > -kPi).all());
  CHECK((g.ipd.array() <= kPi).all());
}

TEST_CASE("swapping channels negates the features") {
  const Spectrogram a = RandomSpectrogram(7, 5), b = RandomSpectrogram(7, 15);
  const FeatureGrid f = ComputeFeatures(a, b, 562.0);
  const FeatureGrid g = ComputeFeatures(b, a, 562.0);
  CHECK(g.ipd == -f.ipd);
  CHECK(g.itd == -f.itd);
  CHECK(g.ild == -f.ild);
  CHECK((g.active == f.active).all());
}

TEST_CASE("no ITD at or above the aliasing bin, none at DC") {
  const Spectrogram l = RandomSpectrogram(4, 7);
  const FeatureGrid f = ComputeFeatures(l, Delayed(l, 2e-4), 562.0, -300.0);
  CHECK(f.aliasing_bin == 36);
  CHECK(f.itd.rightCols(f.num_bins() - 36).cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(f.itd_valid.rightCols(f.num_bins() - 36).any());
  CHECK_FALSE(f.active.col(0).any());
  CHECK_FALSE(f.itd_valid.col(0).any());
  CHECK(f.ItdSamples().size() == static_cast<std::size_t>(4 * 35));
}

TEST_CASE("energy floor excludes quiet bins") {
  Spectrogram l = Blank(2), r = Blank(2);
  l.bins(0, 10) = {1.0, 0.0};
  l.bins(0, 11) = {0.011, 0.0};   // -39.2 dB
  l.bins(0, 12) = {0.009, 0.0};   // -40.9 dB
  const FeatureGrid f = ComputeFeatures(l, r, 562.0);
  CHECK(f.active(0, 10));
  CHECK(f.active(0, 11));
  CHECK_FALSE(f.active(0, 12));
  CHECK_FALSE(f.active(1, 10));
  CHECK(f.ItdSamples().size() == 2);
}

TEST_CASE("shape and config mismatches are rejected") {
  CHECK_THROWS_AS(ComputeFeatures(Blank(3), Blank(4), 562.0), ConfigError);
  Spectrogram other = Blank(3);
  other.config.sample_rate = 8000;
  CHECK_THROWS_AS(ComputeFeatures(Blank(3), other, 562.0), ConfigError);
  CHECK_THROWS_AS(ComputeFeatures(Blank(3), Blank(3), 562.0, 3.0), ConfigError);
}

}  // namespace
}  // namespace regionsep
