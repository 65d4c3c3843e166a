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

#include "regionsep/scene_synthesis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <spdlog/spdlog.h>
#include <unsupported/Eigen/FFT>

#include "regionsep/errors.h"

namespace regionsep {

namespace {
constexpr double kPi = std::numbers::pi;
double Deg2Rad(double d) { return d * kPi / 180.0; }
}  // namespace

bool Region::Contains(double az) const {
  return std::any_of(intervals.begin(), intervals.end(),
                     [az](const AzimuthInterval& i) { return i.Contains(az); });
}

void RegionLayout::Validate() const {
  if (regions.size() < 2) throw ConfigError("region layout needs at least two regions");
  std::vector<AzimuthInterval> all;
  for (const auto& r : regions) {
    if (r.intervals.empty()) throw ConfigError("region without intervals");
    for (const auto& i : r.intervals) {
      if (!(i.lo >= 0.0 && i.hi <= 360.0 && i.lo < i.hi))
        throw ConfigError("invalid azimuth interval");
      all.push_back(i);
    }
  }
  std::sort(all.begin(), all.end(),
            [](const AzimuthInterval& a, const AzimuthInterval& b) { return a.lo < b.lo; });
  double edge = 0.0;
  for (const auto& i : all) {
    if (i.lo != edge) throw ConfigError("region intervals do not partition [0,360)");
    edge = i.hi;
  }
  if (edge != 360.0) throw ConfigError("region intervals do not cover [0,360)");
}

RegionLayout DefaultLayoutR3() {
  RegionLayout layout;
  layout.regions = {
      Region{{{315.0, 360.0}, {0.0, 45.0}, {135.0, 225.0}}},
      Region{{{225.0, 315.0}}},
      Region{{{45.0, 135.0}}},
  };
  return layout;
}

double WrapAzimuth(double az) {
  double w = std::fmod(az, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w = 0.0;
  return w;
}

int RegionOfAzimuth(const RegionLayout& layout, double azimuth_deg) {
  const double az = WrapAzimuth(azimuth_deg);
  for (int r = 0; r < layout.num_regions(); ++r)
    if (layout.regions[r].Contains(az)) return r + 1;
  throw InvariantError("azimuth " + std::to_string(az) + " not covered by layout");
}

int RegionOfItd(double itd, double delta_tau_max) {
  if (!(delta_tau_max > 0.0)) throw ConfigError("delta_tau_max must be positive");
  if (std::abs(itd) > delta_tau_max) {
    spdlog::warn("ITD {:.3g} s exceeds delta_tau_max {:.3g} s; clamped", itd, delta_tau_max);
    itd = std::clamp(itd, -delta_tau_max, delta_tau_max);
  }
  if (std::abs(itd) < delta_tau_max * std::sin(Deg2Rad(45.0))) return 1;
  return itd > 0.0 ? 2 : 3;
}

double SphericalItd(double azimuth_deg, double delta_tau_max) {
  return -delta_tau_max * std::sin(Deg2Rad(azimuth_deg));
}

// ---------------------------------------------------------------------------

namespace {

// Blackman-windowed sinc centred at `delay` samples, unit DC gain.
Eigen::VectorXd FractionalDelay(double delay, int taps, double half_width) {
  Eigen::VectorXd h(taps);
  for (int n = 0; n < taps; ++n) {
    const double u = n - delay;
    if (std::abs(u) >= half_width) {
      h(n) = 0.0;
      continue;
    }
    const double sinc = u == 0.0 ? 1.0 : std::sin(kPi * u) / (kPi * u);
    const double w = 0.42 + 0.5 * std::cos(kPi * u / half_width) +
                     0.08 * std::cos(2.0 * kPi * u / half_width);
    h(n) = sinc * w;
  }
  return h / h.sum();
}

constexpr double kSpeedOfSound = 343.0;  // m/s
constexpr int kShadowHalfLength = 16;

// Woodworth: delta_tau_max = (a / c) * (1 + pi / 2).
double HeadRadius(double delta_tau_max) {
  return delta_tau_max * kSpeedOfSound / (1.0 + kPi / 2.0);
}

// Magnitude of the one-pole/one-zero spherical head shadow for an ear that
// sees the source at `incidence_deg` from its axis.
double ShadowMagnitude(double f, double incidence_deg, double radius) {
  constexpr double kAlphaMin = 0.1, kThetaMin = 150.0;
  const double alpha = (1.0 + kAlphaMin / 2.0) +
                       (1.0 - kAlphaMin / 2.0) * std::cos(Deg2Rad(incidence_deg * 180.0 / kThetaMin));
  const double x = kPi * f * radius / kSpeedOfSound;  // omega / (2 omega_0)
  return std::sqrt((1.0 + alpha * alpha * x * x) / (1.0 + x * x));
}

// Zero-phase FIR (2 * kShadowHalfLength + 1 taps) sampled from the shadow
// magnitude, Hann-windowed and normalised to unit DC gain.
Eigen::VectorXd ShadowKernel(double incidence_deg, double radius, int sample_rate) {
  constexpr int kGrid = 256;
  Eigen::VectorXd g(2 * kShadowHalfLength + 1);
  for (int n = -kShadowHalfLength; n <= kShadowHalfLength; ++n) {
    double acc = 0.0;
    for (int k = 0; k <= kGrid / 2; ++k) {
      const double mag = ShadowMagnitude(static_cast<double>(k) * sample_rate / kGrid,
                                         incidence_deg, radius);
      const double scale = (k == 0 || k == kGrid / 2) ? 1.0 : 2.0;
      acc += scale * mag * std::cos(2.0 * kPi * k * n / kGrid);
    }
    const double w = 0.5 + 0.5 * std::cos(kPi * n / (kShadowHalfLength + 1));
    g(n + kShadowHalfLength) = w * acc / kGrid;
  }
  return g / g.sum();
}

// "Same"-length convolution with a centred odd-length kernel.
Eigen::VectorXd ApplyCentred(const Eigen::VectorXd& h, const Eigen::VectorXd& g) {
  const Eigen::Index half = g.size() / 2;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(h.size());
  for (Eigen::Index n = 0; n < h.size(); ++n)
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      const Eigen::Index m = n - (j - half);
      if (m >= 0 && m < h.size()) out(n) += g(j) * h(m);
    }
  return out;
}

double IncidenceAngle(double azimuth_deg, double ear_deg) {
  const double d = std::abs(WrapAzimuth(azimuth_deg - ear_deg));
  return d > 180.0 ? 360.0 - d : d;
}

}  // namespace

HrirPair SynthSphericalHrir(double azimuth_deg, double delta_tau_max, int sample_rate,
                            int taps) {
  if (taps < 64) throw ConfigError("synthetic HRIR needs >= 64 taps");
  if (!(delta_tau_max >= 0.0)) throw ConfigError("delta_tau_max must be non-negative");
  const double itd = SphericalItd(azimuth_deg, delta_tau_max);
  const double half_delay = 0.5 * itd * sample_rate;
  const double centre = taps / 2.0;
  const double half_width = centre - std::ceil(std::abs(half_delay)) - 2.0 - kShadowHalfLength;
  if (half_width < 8.0) throw ConfigError("too few taps for the requested interaural delay");
  // Left leads when itd > 0.
  Eigen::VectorXd left = FractionalDelay(centre - half_delay, taps, half_width);
  Eigen::VectorXd right = FractionalDelay(centre + half_delay, taps, half_width);

  const double radius = HeadRadius(delta_tau_max);
  left = ApplyCentred(left, ShadowKernel(IncidenceAngle(azimuth_deg, 270.0), radius, sample_rate));
  right = ApplyCentred(right, ShadowKernel(IncidenceAngle(azimuth_deg, 90.0), radius, sample_rate));
  return HrirPair{Waveform(std::move(left), sample_rate), Waveform(std::move(right), sample_rate)};
}

HrirBank SphericalHrirBank(double step_deg, double delta_tau_max, int sample_rate, int taps) {
  if (!(step_deg > 0.0 && step_deg <= 180.0)) throw ConfigError("bank step must be in (0,180]");
  HrirBank bank;
  bank.sample_rate = sample_rate;
  bank.head_radius_m = HeadRadius(delta_tau_max);
  const int count = static_cast<int>(std::floor(360.0 / step_deg + 1e-9));
  for (int i = 0; i < count; ++i) {
    const double az = i * step_deg;
    if (az >= 360.0) break;
    AddHrir(&bank, az, SynthSphericalHrir(az, delta_tau_max, sample_rate, taps));
  }
  return bank;
}

double EstimateHrirItd(const HrirPair& pair, int sample_rate, double max_hz) {
  int n = 1024;
  while (n < 2 * pair.left.size()) n *= 2;
  std::vector<double> l(n, 0.0), r(n, 0.0);
  for (Eigen::Index i = 0; i < pair.left.size(); ++i) {
    l[i] = pair.left.samples(i);
    r[i] = pair.right.samples(i);
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fl, fr;
  fft.fwd(fl, l);
  fft.fwd(fr, r);
  double num = 0.0, den = 0.0;
  for (int k = 1; k < n / 2; ++k) {
    const double f = static_cast<double>(k) * sample_rate / n;
    if (f >= max_hz) break;
    const std::complex<double> c = fl[k] * std::conj(fr[k]);
    const double w = std::abs(c);
    num += w * std::arg(c) / (2.0 * kPi * f);
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

double SnapAzimuth(const HrirBank& bank, double azimuth_deg, double tolerance_deg) {
  if (bank.entries.empty()) throw ConfigError("empty HRIR bank");
  const double az = WrapAzimuth(azimuth_deg);
  double best = 0.0, best_dist = std::numeric_limits<double>::infinity();
  for (const auto& [entry, pair] : bank.entries) {
    double d = std::abs(entry - az);
    d = std::min(d, 360.0 - d);
    if (d < best_dist) {
      best_dist = d;
      best = entry;
    }
  }
  if (best_dist > tolerance_deg)
    throw ConfigError("azimuth " + std::to_string(az) + " is " + std::to_string(best_dist) +
                      " deg from the nearest HRIR (tolerance " +
                      std::to_string(tolerance_deg) + ")");
  return best;
}

Eigen::VectorXd Convolve(const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                         Eigen::Index length) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(length);
  for (Eigen::Index n = 0; n < length; ++n) {
    const Eigen::Index k_lo = std::max<Eigen::Index>(0, n - x.size() + 1);
    const Eigen::Index k_hi = std::min<Eigen::Index>(h.size() - 1, n);
    double acc = 0.0;
    for (Eigen::Index k = k_lo; k <= k_hi; ++k) acc += h(k) * x(n - k);
    y(n) = acc;
  }
  return y;
}

BinauralSignal Spatialize(const Waveform& source, const HrirBank& bank, double azimuth_deg,
                          double gain, Eigen::Index length) {
  if (source.sample_rate != bank.sample_rate)
    throw ConfigError("source sample rate " + std::to_string(source.sample_rate) +
                      " differs from HRIR bank rate " + std::to_string(bank.sample_rate));
  if (!(gain > 0.0)) throw ConfigError("source gain must be positive");
  const HrirPair& h = bank.entries.at(SnapAzimuth(bank, azimuth_deg));
  Eigen::VectorXd l = gain * Convolve(source.samples, h.left.samples, length);
  Eigen::VectorXd r = gain * Convolve(source.samples, h.right.samples, length);
  return BinauralSignal(Waveform(std::move(l), bank.sample_rate),
                        Waveform(std::move(r), bank.sample_rate));
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json ToJson(const SceneSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["duration"] = spec.duration;
  j["hrir_bank"] = spec.hrir_bank_id;
  j["sources"] = nlohmann::ordered_json::array();
  for (const auto& s : spec.sources)
    j["sources"].push_back({{"id", s.waveform_id}, {"azimuth", s.azimuth}, {"gain", s.gain}});
  return j;
}

SceneSpec SceneSpecFromJson(const nlohmann::json& j) {
  SceneSpec spec;
  try {
    spec.seed = j.value("seed", uint64_t{0});
    spec.duration = j.at("duration").get<double>();
    spec.hrir_bank_id = j.value("hrir_bank", "");
    for (const auto& s : j.at("sources"))
      spec.sources.push_back(SceneSource{s.at("id").get<std::string>(),
                                         s.at("azimuth").get<double>(),
                                         s.value("gain", 1.0)});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scene spec: ") + e.what());
  }
  return spec;
}

void SaveSceneSpec(const SceneSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << ToJson(spec).dump(2) << '\n';
}

SceneSpec LoadSceneSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return SceneSpecFromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

int RegionMixtureSet::num_active() const {
  return static_cast<int>(std::count(active.begin(), active.end(), true));
}

BinauralSignal SumRegions(const std::vector<BinauralSignal>& regions) {
  if (regions.empty()) throw ConfigError("no regions to sum");
  BinauralSignal m = regions.front();
  for (std::size_t i = 1; i < regions.size(); ++i) {
    m.left.samples += regions[i].left.samples;
    m.right.samples += regions[i].right.samples;
  }
  return m;
}

RegionMixtureSet SynthScene(const SceneSpec& spec, const SourcePool& pool,
                            const HrirBank& bank, const RegionLayout& layout) {
  layout.Validate();
  bank.Validate();
  if (!(spec.duration >= 0.0)) throw ConfigError("scene duration must be non-negative");
  const auto length = static_cast<Eigen::Index>(std::llround(spec.duration * bank.sample_rate));

  RegionMixtureSet set;
  set.regions.assign(layout.num_regions(), BinauralSignal::Zeros(length, bank.sample_rate));
  set.active.assign(layout.num_regions(), false);
  for (const auto& src : spec.sources) {
    auto it = pool.find(src.waveform_id);
    if (it == pool.end()) throw ConfigError("unknown source waveform '" + src.waveform_id + "'");
    const double az = SnapAzimuth(bank, src.azimuth);
    const BinauralSignal image = Spatialize(it->second, bank, az, src.gain, length);
    const int r = RegionOfAzimuth(layout, az) - 1;
    set.regions[r].left.samples += image.left.samples;
    set.regions[r].right.samples += image.right.samples;
    set.active[r] = true;
  }
  set.mixture = SumRegions(set.regions);
  return set;
}

SceneSpec RandomScene(KRange k_range, const RegionLayout& layout, const HrirBank& bank,
                      const std::vector<std::string>& pool_ids, double duration,
                      uint64_t seed, const std::string& bank_id) {
  if (pool_ids.empty()) throw ConfigError("empty source pool");
  if (k_range.lo < 1 || k_range.hi < k_range.lo) throw ConfigError("invalid K range");
  layout.Validate();

  std::vector<std::vector<double>> region_azimuths(layout.num_regions());
  for (double az : bank.Azimuths())
    region_azimuths[RegionOfAzimuth(layout, az) - 1].push_back(az);
  std::vector<int> usable;
  for (int r = 0; r < layout.num_regions(); ++r)
    if (!region_azimuths[r].empty()) usable.push_back(r);
  if (usable.empty()) throw ConfigError("HRIR bank has no azimuths in any region");

  std::mt19937_64 rng(seed);
  SceneSpec spec;
  spec.seed = seed;
  spec.duration = duration;
  spec.hrir_bank_id = bank_id;
  const int k = std::uniform_int_distribution<int>(k_range.lo, k_range.hi)(rng);

  std::vector<std::string> ids = pool_ids;
  std::shuffle(ids.begin(), ids.end(), rng);
  for (int i = 0; i < k; ++i) {
    const int r = usable[std::uniform_int_distribution<std::size_t>(0, usable.size() - 1)(rng)];
    const auto& azs = region_azimuths[r];
    const double az = azs[std::uniform_int_distribution<std::size_t>(0, azs.size() - 1)(rng)];
    std::string id = static_cast<std::size_t>(i) < ids.size()
                         ? ids[i]
                         : ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
    spec.sources.push_back(SceneSource{std::move(id), az, 1.0});
  }
  return spec;
}

// ---------------------------------------------------------------------------

Waveform SynthVoiceLike(uint64_t seed, double duration, int sample_rate) {
  if (!(duration >= 0.0) || sample_rate <= 0) throw ConfigError("invalid voice parameters");
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const auto n = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
  const double fs = sample_rate;
  const double nyquist_guard = 0.45 * fs;

  const double f0_base = uni(95.0, 230.0);
  const double drift_rate = uni(0.2, 0.7), drift_phase = uni(0.0, 2 * kPi);
  const double vib_rate = uni(3.0, 6.0), vib_depth = uni(0.005, 0.02);

  // Syllables: voiced segment then pause, each with its own formants.
  struct Syllable {
    Eigen::Index start, end;
    double f1, f2, f3;
  };
  std::vector<Syllable> syllables;
  Eigen::Index pos = static_cast<Eigen::Index>(uni(0.0, 0.15) * fs);
  while (pos < n) {
    const auto len = static_cast<Eigen::Index>(uni(0.12, 0.35) * fs);
    syllables.push_back({pos, std::min(n, pos + len), uni(300, 800), uni(900, 2200), uni(2300, 3200)});
    pos += len + static_cast<Eigen::Index>(uni(0.04, 0.2) * fs);
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const auto ramp = static_cast<Eigen::Index>(0.015 * fs);
  double phase = 0.0;
  std::size_t s = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = i / fs;
    const double f0 = f0_base * (1.0 + 0.08 * std::sin(2 * kPi * drift_rate * t + drift_phase) +
                                 vib_depth * std::sin(2 * kPi * vib_rate * t));
    phase += 2 * kPi * f0 / fs;
    if (phase > 2 * kPi) phase -= 2 * kPi;
    while (s < syllables.size() && syllables[s].end <= i) ++s;
    if (s >= syllables.size() || i < syllables[s].start) continue;
    const Syllable& syl = syllables[s];
    const Eigen::Index into = i - syl.start, left = syl.end - 1 - i;
    double env = 1.0;
    if (into < ramp) env = 0.5 - 0.5 * std::cos(kPi * into / ramp);
    if (left < ramp) env = std::min(env, 0.5 - 0.5 * std::cos(kPi * left / ramp));
    double v = 0.0;
    for (int k = 1; k * f0 < nyquist_guard; ++k) {
      const double f = k * f0;
      const double formant = std::exp(-0.5 * std::pow((f - syl.f1) / 120.0, 2)) +
                             0.7 * std::exp(-0.5 * std::pow((f - syl.f2) / 180.0, 2)) +
                             0.4 * std::exp(-0.5 * std::pow((f - syl.f3) / 250.0, 2));
      const double amp = (0.15 + formant) / (1.0 + f / 600.0);
      v += amp * std::sin(k * phase);
    }
    x(i) = env * v;
  }
  const double peak = n > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
  if (peak > 0.0) x *= 0.2 / peak;
  return Waveform(std::move(x), sample_rate);
}

SourcePool SyntheticVoicePool(int count, double duration, uint64_t seed, int sample_rate) {
  SourcePool pool;
  std::seed_seq seq{seed};
  std::vector<uint32_t> raw(static_cast<std::size_t>(std::max(count, 0)) * 2);
  seq.generate(raw.begin(), raw.end());
  for (int i = 0; i < count; ++i) {
    const uint64_t s = (static_cast<uint64_t>(raw[2 * i]) << 32) | raw[2 * i + 1];
    char id[32];
    std::snprintf(id, sizeof(id), "voice%03d", i);
    pool.emplace(id, SynthVoiceLike(s, duration, sample_rate));
  }
  return pool;
}

}  // namespace regionsep
