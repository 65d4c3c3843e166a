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

#ifndef REGIONSEP_SIGNAL_IO_H_
#define REGIONSEP_SIGNAL_IO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace regionsep {

inline constexpr int kDefaultSampleRate = 16000;

// A mono signal. Amplitudes are nominally in [-1, 1].
struct Waveform {
  Eigen::VectorXd samples;
  int sample_rate = kDefaultSampleRate;

  Waveform() = default;
  Waveform(Eigen::VectorXd s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  Eigen::Index size() const { return samples.size(); }
  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  // Throws ConfigError if sample_rate <= 0 or any sample is NaN/Inf.
  void Validate() const;
};

// Left/right pair sharing length and sample rate.
struct BinauralSignal {
  Waveform left;
  Waveform right;

  BinauralSignal() = default;
  BinauralSignal(Waveform l, Waveform r);
  // Silent signal of the given length.
  static BinauralSignal Zeros(Eigen::Index length, int sample_rate);

  Eigen::Index size() const { return left.size(); }
  int sample_rate() const { return left.sample_rate; }
  void Validate() const;
  BinauralSignal Swapped() const { return BinauralSignal(right, left); }
};

bool operator==(const Waveform& a, const Waveform& b);
bool operator==(const BinauralSignal& a, const BinauralSignal& b);

// ---------------------------------------------------------------------------
// WAV
// ---------------------------------------------------------------------------

using WavContent = std::variant<Waveform, BinauralSignal>;

// Reads a RIFF/WAVE file holding 16-bit PCM or 32-bit float samples with one
// or two channels. 16-bit samples are scaled by 1/32768. A two-channel file
// yields a BinauralSignal with channel 0 as the left ear.
WavContent ReadWav(const std::filesystem::path& path);
Waveform ReadWavMono(const std::filesystem::path& path);
BinauralSignal ReadWavBinaural(const std::filesystem::path& path);

// Writes 16-bit PCM. Samples outside [-1, 1] are clipped; the number of
// clipped samples is returned.
std::size_t WriteWav(const Waveform& signal, const std::filesystem::path& path);
std::size_t WriteWav(const BinauralSignal& signal,
                     const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// HRIR bank
// ---------------------------------------------------------------------------

struct HrirPair {
  Waveform left;
  Waveform right;
};

// Horizontal-plane HRIRs keyed by azimuth in degrees, 0 = front, clockwise.
struct HrirBank {
  std::map<double, HrirPair> entries;
  int sample_rate = kDefaultSampleRate;
  std::optional<double> head_radius_m;  // in-memory metadata only

  // Throws ConfigError on an empty bank, out-of-range azimuth or a sample
  // rate mismatch.
  void Validate() const;
  std::vector<double> Azimuths() const;
};

// Adds an entry; throws ConfigError("duplicate azimuth ...") if present.
void AddHrir(HrirBank* bank, double azimuth_deg, HrirPair pair);

// Binary container, little-endian:
//   "HRIRBANK" | version u32 (=1) | sample_rate u32 | count u32
//   per entry: azimuth f64 | length u32 | left f64[length] | right f64[length]
HrirBank LoadHrirBank(const std::filesystem::path& path);
void SaveHrirBank(const HrirBank& bank, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dataset manifest (JSON lines, one record per extracted source)
// ---------------------------------------------------------------------------

struct ManifestRecord {
  std::string file;           // relative to the manifest directory; empty on discard
  std::optional<double> itd;  // seconds
  std::optional<int> region;  // 1-based
  std::string kind;           // passthrough | separated | discarded
  std::string source_id;
  std::string reason;         // discard reason, empty otherwise
};

std::string ManifestLine(const ManifestRecord& record);
void WriteManifest(const std::vector<ManifestRecord>& records,
                   const std::filesystem::path& path);
std::vector<ManifestRecord> ReadManifest(const std::filesystem::path& path);

}  // namespace regionsep

#endif  // REGIONSEP_SIGNAL_IO_H_
