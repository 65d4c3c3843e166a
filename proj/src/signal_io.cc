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

#include "regionsep/signal_io.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "regionsep/errors.h"

namespace regionsep {

void Waveform::Validate() const {
  if (sample_rate <= 0)
    throw ConfigError("sample_rate must be positive, got " +
                      std::to_string(sample_rate));
  if (!samples.allFinite()) throw ConfigError("waveform has non-finite samples");
}

BinauralSignal::BinauralSignal(Waveform l, Waveform r)
    : left(std::move(l)), right(std::move(r)) {
  if (left.size() != right.size())
    throw ConfigError("binaural channels differ in length");
  if (left.sample_rate != right.sample_rate)
    throw ConfigError("binaural channels differ in sample rate");
}

BinauralSignal BinauralSignal::Zeros(Eigen::Index length, int sample_rate) {
  return BinauralSignal(Waveform(Eigen::VectorXd::Zero(length), sample_rate),
                        Waveform(Eigen::VectorXd::Zero(length), sample_rate));
}

void BinauralSignal::Validate() const {
  left.Validate();
  right.Validate();
  if (left.size() != right.size() || left.sample_rate != right.sample_rate)
    throw ConfigError("binaural channels are not synchronized");
}

bool operator==(const Waveform& a, const Waveform& b) {
  return a.sample_rate == b.sample_rate && a.samples.size() == b.samples.size() &&
         (a.samples.array() == b.samples.array()).all();
}

bool operator==(const BinauralSignal& a, const BinauralSignal& b) {
  return a.left == b.left && a.right == b.right;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> data) : data_(std::move(data)) {}

  template <typename T>
  T Get() {
    T value;
    Need(sizeof(T));
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string Tag(std::size_t n) {
    Need(n);
    std::string s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  const char* Ptr() const { return data_.data() + pos_; }
  void Skip(std::size_t n) {
    Need(n);
    pos_ += n;
  }
  std::size_t Remaining() const { return data_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw IoError("unexpected end of file");
  }
  std::vector<char> data_;
  std::size_t pos_ = 0;
};

class ByteWriter {
 public:
  template <typename T>
  void Put(T value) {
    const char* p = reinterpret_cast<const char*>(&value);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void Tag(const char* s) { buf_.insert(buf_.end(), s, s + std::strlen(s)); }
  const std::vector<char>& bytes() const { return buf_; }

 private:
  std::vector<char> buf_;
};

std::vector<char> Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void Dump(const std::vector<char>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

int16_t Quantize(double x, std::size_t* clipped) {
  if (x > 1.0 || x < -1.0) {
    ++*clipped;
    x = std::clamp(x, -1.0, 1.0);
  }
  double q = std::round(x * 32768.0);
  return static_cast<int16_t>(std::clamp(q, -32768.0, 32767.0));
}

std::size_t WriteChannels(const std::vector<const Waveform*>& channels,
                          const std::filesystem::path& path) {
  for (const Waveform* w : channels) w->Validate();
  const auto num_channels = static_cast<uint16_t>(channels.size());
  const auto frames = static_cast<uint32_t>(channels.front()->size());
  const uint32_t rate = channels.front()->sample_rate;
  const uint32_t data_bytes = frames * num_channels * 2;

  ByteWriter w;
  w.Tag("RIFF");
  w.Put<uint32_t>(36 + data_bytes);
  w.Tag("WAVE");
  w.Tag("fmt ");
  w.Put<uint32_t>(16);
  w.Put<uint16_t>(kFormatPcm);
  w.Put<uint16_t>(num_channels);
  w.Put<uint32_t>(rate);
  w.Put<uint32_t>(rate * num_channels * 2);
  w.Put<uint16_t>(num_channels * 2);
  w.Put<uint16_t>(16);
  w.Tag("data");
  w.Put<uint32_t>(data_bytes);
  std::size_t clipped = 0;
  for (uint32_t i = 0; i < frames; ++i)
    for (const Waveform* c : channels) w.Put<int16_t>(Quantize(c->samples(i), &clipped));
  Dump(w.bytes(), path);
  if (clipped > 0)
    spdlog::warn("{}: clipped {} samples outside [-1, 1]", path.string(), clipped);
  return clipped;
}

}  // namespace

WavContent ReadWav(const std::filesystem::path& path) {
  ByteReader r(Slurp(path));
  if (r.Tag(4) != "RIFF") throw IoError("malformed header: missing RIFF tag");
  r.Get<uint32_t>();
  if (r.Tag(4) != "WAVE") throw IoError("malformed header: missing WAVE tag");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  while (true) {
    if (r.Remaining() < 8) throw IoError("malformed header: no data chunk");
    std::string id = r.Tag(4);
    uint32_t size = r.Get<uint32_t>();
    if (id == "fmt ") {
      if (size < 16) throw IoError("malformed header: short fmt chunk");
      format = r.Get<uint16_t>();
      channels = r.Get<uint16_t>();
      rate = r.Get<uint32_t>();
      r.Get<uint32_t>();
      r.Get<uint16_t>();
      bits = r.Get<uint16_t>();
      uint32_t rest = size - 16;
      if (format == kFormatExtensible && rest >= 24) {
        r.Skip(8);  // cbSize, valid bits, channel mask
        format = r.Get<uint16_t>();  // first two bytes of the sub-format GUID
        rest -= 10;
      }
      r.Skip(rest + (size & 1));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError("malformed header: data before fmt");
      if (channels == 0) throw IoError("malformed header: zero channels");
      if (channels > 2) throw IoError("unsupported channel count " + std::to_string(channels));
      if (rate == 0) throw IoError("malformed header: zero sample rate");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool float32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !float32)
        throw IoError("unsupported encoding (format " + std::to_string(format) +
                      ", " + std::to_string(bits) + " bits)");
      const std::size_t width = bits / 8;
      size = static_cast<uint32_t>(std::min<std::size_t>(size, r.Remaining()));
      const std::size_t frames = size / (width * channels);
      std::array<Eigen::VectorXd, 2> ch;
      for (int c = 0; c < channels; ++c) ch[c].resize(static_cast<Eigen::Index>(frames));
      for (std::size_t i = 0; i < frames; ++i) {
        for (int c = 0; c < channels; ++c) {
          double v = pcm16 ? r.Get<int16_t>() / 32768.0 : r.Get<float>();
          if (!std::isfinite(v)) throw IoError("non-finite sample in " + path.string());
          ch[c](static_cast<Eigen::Index>(i)) = v;
        }
      }
      const int sr = static_cast<int>(rate);
      if (channels == 1) return Waveform(std::move(ch[0]), sr);
      return BinauralSignal(Waveform(std::move(ch[0]), sr), Waveform(std::move(ch[1]), sr));
    } else {
      r.Skip(size + (size & 1));
    }
  }
}

Waveform ReadWavMono(const std::filesystem::path& path) {
  auto content = ReadWav(path);
  if (auto* w = std::get_if<Waveform>(&content)) return std::move(*w);
  throw IoError(path.string() + ": expected a mono file");
}

BinauralSignal ReadWavBinaural(const std::filesystem::path& path) {
  auto content = ReadWav(path);
  if (auto* b = std::get_if<BinauralSignal>(&content)) return std::move(*b);
  throw IoError(path.string() + ": expected a two-channel file");
}

std::size_t WriteWav(const Waveform& signal, const std::filesystem::path& path) {
  return WriteChannels({&signal}, path);
}

std::size_t WriteWav(const BinauralSignal& signal, const std::filesystem::path& path) {
  signal.Validate();
  return WriteChannels({&signal.left, &signal.right}, path);
}

// ---------------------------------------------------------------------------

void HrirBank::Validate() const {
  if (entries.empty()) throw ConfigError("empty HRIR bank");
  if (sample_rate <= 0) throw ConfigError("HRIR bank sample rate must be positive");
  for (const auto& [az, pair] : entries) {
    if (!(az >= 0.0 && az < 360.0))
      throw ConfigError("HRIR azimuth out of [0,360): " + std::to_string(az));
    if (pair.left.sample_rate != sample_rate || pair.right.sample_rate != sample_rate)
      throw ConfigError("mismatched sample rates in HRIR bank");
    if (pair.left.size() != pair.right.size())
      throw ConfigError("HRIR pair length mismatch at azimuth " + std::to_string(az));
  }
}

std::vector<double> HrirBank::Azimuths() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.first);
  return out;
}

void AddHrir(HrirBank* bank, double azimuth_deg, HrirPair pair) {
  if (!bank->entries.emplace(azimuth_deg, std::move(pair)).second)
    throw ConfigError("duplicate azimuth " + std::to_string(azimuth_deg));
}

namespace {
constexpr char kBankMagic[] = "HRIRBANK";
constexpr uint32_t kBankVersion = 1;
}  // namespace

HrirBank LoadHrirBank(const std::filesystem::path& path) {
  ByteReader r(Slurp(path));
  if (r.Tag(8) != kBankMagic) throw IoError("not an HRIR bank: bad magic");
  if (uint32_t v = r.Get<uint32_t>(); v != kBankVersion)
    throw IoError("unsupported HRIR bank version " + std::to_string(v));
  HrirBank bank;
  bank.sample_rate = static_cast<int>(r.Get<uint32_t>());
  const uint32_t count = r.Get<uint32_t>();
  for (uint32_t i = 0; i < count; ++i) {
    const double az = r.Get<double>();
    const uint32_t len = r.Get<uint32_t>();
    HrirPair pair{Waveform(Eigen::VectorXd(len), bank.sample_rate),
                  Waveform(Eigen::VectorXd(len), bank.sample_rate)};
    for (uint32_t k = 0; k < len; ++k) pair.left.samples(k) = r.Get<double>();
    for (uint32_t k = 0; k < len; ++k) pair.right.samples(k) = r.Get<double>();
    AddHrir(&bank, az, std::move(pair));
  }
  bank.Validate();
  return bank;
}

void SaveHrirBank(const HrirBank& bank, const std::filesystem::path& path) {
  bank.Validate();
  ByteWriter w;
  w.Tag(kBankMagic);
  w.Put<uint32_t>(kBankVersion);
  w.Put<uint32_t>(static_cast<uint32_t>(bank.sample_rate));
  w.Put<uint32_t>(static_cast<uint32_t>(bank.entries.size()));
  for (const auto& [az, pair] : bank.entries) {
    w.Put<double>(az);
    w.Put<uint32_t>(static_cast<uint32_t>(pair.left.size()));
    for (double v : pair.left.samples) w.Put<double>(v);
    for (double v : pair.right.samples) w.Put<double>(v);
  }
  Dump(w.bytes(), path);
}

// ---------------------------------------------------------------------------

std::string ManifestLine(const ManifestRecord& rec) {
  nlohmann::ordered_json j;
  j["file"] = rec.file;
  j["itd"] = rec.itd ? nlohmann::ordered_json(*rec.itd) : nlohmann::ordered_json(nullptr);
  j["region"] =
      rec.region ? nlohmann::ordered_json(*rec.region) : nlohmann::ordered_json(nullptr);
  j["kind"] = rec.kind;
  j["source_id"] = rec.source_id;
  if (!rec.reason.empty()) j["reason"] = rec.reason;
  return j.dump();
}

void WriteManifest(const std::vector<ManifestRecord>& records,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& rec : records) out << ManifestLine(rec) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ManifestRecord> ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ManifestRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed manifest line: " + std::string(e.what()));
    }
    ManifestRecord rec;
    rec.file = j.value("file", "");
    if (j.contains("itd") && !j["itd"].is_null()) rec.itd = j["itd"].get<double>();
    if (j.contains("region") && !j["region"].is_null()) rec.region = j["region"].get<int>();
    rec.kind = j.value("kind", "");
    rec.source_id = j.value("source_id", "");
    rec.reason = j.value("reason", "");
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace regionsep
