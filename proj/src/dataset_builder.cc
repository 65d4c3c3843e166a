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

#include "regionsep/dataset_builder.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "regionsep/errors.h"
#include "regionsep/parallel.h"

namespace regionsep {

std::string ToString(Provenance p) {
  switch (p) {
    case Provenance::kClean: return "clean";
    case Provenance::kStage1Single: return "stage1_single";
    case Provenance::kStage1Separated: return "stage1_separated";
  }
  return "unknown";
}

nlohmann::ordered_json DirtyBuildStats::ToJson() const {
  nlohmann::ordered_json j;
  j["mixtures"] = mixtures;
  j["passthrough"] = passthrough;
  j["separated"] = separated;
  j["discarded"] = discarded;
  j["acceptance_rate"] = acceptance_rate();
  j["discard_reasons"] = discard_reasons;
  j["harvested_seconds"] = harvested_seconds;
  return j;
}

double BankItdMax(const HrirBank& bank) {
  double best = 0.0;
  for (const auto& [az, pair] : bank.entries)
    best = std::max(best, std::abs(EstimateHrirItd(pair, bank.sample_rate)));
  return best;
}

namespace {

struct JobResult {
  std::vector<SourceRecord> records;
  std::string kind;
  DiscardReason reason = DiscardReason::kNone;
};

std::string SceneName(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%05d", prefix, index);
  return buf;
}

BinauralSignal Add(const BinauralSignal& a, const BinauralSignal& b) {
  BinauralSignal out = a;
  out.left.samples += b.left.samples;
  out.right.samples += b.right.samples;
  return out;
}

}  // namespace

DirtyBuildResult BuildDirtySources(const SourcePool& pool, const HrirBank& bank,
                                   const DirtyBuildConfig& cfg) {
  if (pool.size() < 2) throw ConfigError("dirty-source build needs at least 2 pool sources");
  if (cfg.count < 0) throw ConfigError("mixture count must be non-negative");
  cfg.separation.Validate();
  bank.Validate();

  std::vector<const std::pair<const std::string, Waveform>*> sources;
  for (const auto& entry : pool) sources.push_back(&entry);
  std::vector<double> azimuths = bank.Azimuths();
  std::vector<double> itds;
  for (double az : azimuths) itds.push_back(EstimateHrirItd(bank.entries.at(az), bank.sample_rate));
  const auto [lo, hi] = std::minmax_element(itds.begin(), itds.end());
  if (*hi - *lo < cfg.delta_tau_min)
    throw ConfigError("HRIR bank too sparse: no azimuth pair reaches an ITD gap of " +
                      std::to_string(cfg.delta_tau_min) + " s");

  std::vector<JobResult> results(static_cast<std::size_t>(cfg.count));
  ParallelFor(cfg.count, cfg.jobs, [&](int job) {
    std::mt19937_64 rng(JobSeed(cfg.seed, static_cast<uint64_t>(job)));
    std::uniform_int_distribution<std::size_t> pick_src(0, sources.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_az(0, azimuths.size() - 1);
    const std::size_t a = pick_src(rng);
    std::size_t b = pick_src(rng);
    while (b == a) b = pick_src(rng);
    std::size_t ia, ib;
    do {
      ia = pick_az(rng);
      ib = pick_az(rng);
    } while (std::abs(itds[ia] - itds[ib]) < cfg.delta_tau_min);

    const Waveform& wa = sources[a]->second;
    const Waveform& wb = sources[b]->second;
    const BinauralSignal img_a = Spatialize(wa, bank, azimuths[ia], 1.0, wa.size());
    const BinauralSignal img_b = Spatialize(wb, bank, azimuths[ib], 1.0, wa.size());
    const BinauralSignal mixture = Add(img_a, img_b);

    SeparationConfig sep_cfg = cfg.separation;
    sep_cfg.em.seed = JobSeed(cfg.separation.em.seed, static_cast<uint64_t>(job));
    const SeparationOutcome outcome = Separate(mixture, sep_cfg);
    const std::string scene = SceneName("dirty", job);
    JobResult& res = results[job];
    res.kind = outcome.kind_name();
    if (const auto* p = std::get_if<Passthrough>(&outcome.result)) {
      res.records.push_back(SourceRecord{p->signal, p->itd, RegionOfItd(p->itd, cfg.head_itd_max),
                                         Provenance::kStage1Single, scene, sources[a]->first,
                                         img_a});
    } else if (const auto* s = std::get_if<Separated>(&outcome.result)) {
      // The output whose ITD label is nearer source a's HRIR ITD is source a.
      const int match_a = std::abs(s->itds[0] - itds[ia]) <= std::abs(s->itds[1] - itds[ia]) ? 0 : 1;
      for (int i = 0; i < 2; ++i) {
        const bool is_a = i == match_a;
        res.records.push_back(SourceRecord{s->sources[i], s->itds[i],
                                           RegionOfItd(s->itds[i], cfg.head_itd_max),
                                           Provenance::kStage1Separated, scene,
                                           is_a ? sources[a]->first : sources[b]->first,
                                           is_a ? img_a : img_b});
      }
    } else {
      res.reason = std::get<Discarded>(outcome.result).reason;
    }
  });

  DirtyBuildResult out;
  for (auto& res : results) {
    if (cfg.max_duration && out.stats.harvested_seconds >= *cfg.max_duration) break;
    ++out.stats.mixtures;
    if (res.kind == "passthrough") ++out.stats.passthrough;
    if (res.kind == "separated") ++out.stats.separated;
    if (res.kind == "discarded") {
      ++out.stats.discarded;
      ++out.stats.discard_reasons[ToString(res.reason)];
    }
    for (auto& rec : res.records) {
      out.stats.harvested_seconds += rec.signal.left.duration();
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<SourceRecord> CleanRecords(const SourcePool& pool, const HrirBank& bank,
                                       double head_itd_max) {
  std::vector<SourceRecord> out;
  for (const auto& [id, w] : pool) {
    for (const auto& [az, pair] : bank.entries) {
      const double itd = EstimateHrirItd(pair, bank.sample_rate);
      BinauralSignal img = Spatialize(w, bank, az, 1.0, w.size());
      out.push_back(SourceRecord{img, itd, RegionOfItd(itd, head_itd_max), Provenance::kClean,
                                 "clean", id, img});
    }
  }
  return out;
}

std::vector<TrainingTuple> BuildTrainingTuples(const std::vector<SourceRecord>& db,
                                               const RegionLayout& layout,
                                               const TupleBuildConfig& cfg) {
  if (db.empty()) throw ConfigError("empty source database");
  if (!(cfg.clean_ratio >= 0.0 && cfg.clean_ratio <= 1.0))
    throw ConfigError("clean_ratio must lie in [0,1]");
  if (cfg.k_range.lo < 1 || cfg.k_range.hi < cfg.k_range.lo) throw ConfigError("invalid K range");
  layout.Validate();
  const int num_regions = layout.num_regions();
  std::vector<std::vector<std::size_t>> by_region(num_regions);
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db[i].region < 1 || db[i].region > num_regions)
      throw ConfigError("record region outside the layout");
    by_region[db[i].region - 1].push_back(i);
  }

  std::vector<TrainingTuple> tuples;
  for (int t = 0; t < cfg.count; ++t) {
    std::mt19937_64 rng(JobSeed(cfg.seed, static_cast<uint64_t>(t)));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    bool built = false;
    for (int attempt = 0; attempt <= cfg.max_retries && !built; ++attempt) {
      const int k = std::uniform_int_distribution<int>(cfg.k_range.lo, cfg.k_range.hi)(rng);
      std::vector<std::pair<int, const SourceRecord*>> draws;
      bool starved = false;
      for (int i = 0; i < k; ++i) {
        const int r = std::uniform_int_distribution<int>(0, num_regions - 1)(rng);
        if (by_region[r].empty()) {
          starved = true;
          break;
        }
        const auto& cand = by_region[r];
        draws.emplace_back(r, &db[cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)]]);
      }
      if (starved) continue;

      TrainingTuple tuple;
      std::vector<std::pair<int, const BinauralSignal*>> chosen;
      Eigen::Index length = 0;
      int rate = draws.front().second->signal.sample_rate();
      for (const auto& [r, rec] : draws) {
        const BinauralSignal* sig = &rec->signal;
        Provenance used = rec->provenance;
        if (rec->provenance != Provenance::kClean && rec->clean && coin(rng) < cfg.clean_ratio) {
          sig = &*rec->clean;
          used = Provenance::kClean;
        }
        if (sig->sample_rate() != rate) throw ConfigError("database mixes sample rates");
        length = std::max(length, sig->size());
        chosen.emplace_back(r, sig);
        tuple.used.push_back(used);
        tuple.source_ids.push_back(rec->source_id);
      }
      tuple.references.assign(num_regions, BinauralSignal::Zeros(length, rate));
      tuple.active.assign(num_regions, false);
      for (const auto& [r, sig] : chosen) {
        tuple.references[r].left.samples.head(sig->size()) += sig->left.samples;
        tuple.references[r].right.samples.head(sig->size()) += sig->right.samples;
        tuple.active[r] = true;
      }
      tuple.mixture = SumRegions(tuple.references);
      tuples.push_back(std::move(tuple));
      built = true;
    }
    if (!built)
      throw ConfigError("could not draw tuple " + std::to_string(t) + " within " +
                        std::to_string(cfg.max_retries) + " retries: a region has no sources");
  }
  return tuples;
}

}  // namespace regionsep
