// Copyright 2026 The burmese-aec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aec/errorsim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "aec/common.h"
#include "aec/config.h"
#include "aec/g2ipa.h"
#include "aec/utf8.h"

namespace aec::noise {

namespace {

uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const std::string& SampleFrom(const ConfusionTable::Distribution& dist,
                              Rng& rng) {
  double u = rng.Uniform();
  for (const auto& [token, p] : dist) {
    if (u < p) return token;
    u -= p;
  }
  return dist.back().first;
}

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream) {
  uint64_t state = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  std::seed_seq seq{static_cast<uint32_t>(SplitMix64(state)),
                    static_cast<uint32_t>(SplitMix64(state)),
                    static_cast<uint32_t>(SplitMix64(state)),
                    static_cast<uint32_t>(SplitMix64(state))};
  engine_.seed(seq);
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

size_t Rng::Below(size_t n) {
  return static_cast<size_t>(Uniform() * static_cast<double>(n)) % n;
}

void NoiseProfile::Validate() const {
  for (double p : {p_sub, p_del, p_ins}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::kFormat, "noise probabilities must lie in [0, 1]");
    }
  }
  if (p_sub + p_del + p_ins > 1.0 + 1e-12) {
    throw Error(ErrorKind::kFormat, "p_sub + p_del + p_ins exceeds 1");
  }
  if (!(phonetic_temperature > 0.0)) {
    throw Error(ErrorKind::kFormat, "phonetic_temperature must be positive");
  }
}

std::string NoiseProfile::ToText() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "p_sub = %.17g\np_del = %.17g\np_ins = %.17g\n"
                "confusion_mode = %s\nphonetic_temperature = %.17g\n"
                "seed = %llu\n",
                p_sub, p_del, p_ins,
                confusion_mode == ConfusionMode::kPhonetic ? "phonetic"
                                                           : "uniform",
                phonetic_temperature, static_cast<unsigned long long>(seed));
  return buf;
}

NoiseProfile NoiseProfile::FromKeyValues(const config::KeyValues& kv,
                                         const std::string& prefix) {
  NoiseProfile p;
  p.p_sub = kv.GetDouble(prefix + "p_sub", p.p_sub);
  p.p_del = kv.GetDouble(prefix + "p_del", p.p_del);
  p.p_ins = kv.GetDouble(prefix + "p_ins", p.p_ins);
  const std::string mode = kv.GetString(prefix + "confusion_mode", "phonetic");
  if (mode == "phonetic") {
    p.confusion_mode = ConfusionMode::kPhonetic;
  } else if (mode == "uniform") {
    p.confusion_mode = ConfusionMode::kUniform;
  } else {
    throw Error(ErrorKind::kFormat, "confusion_mode must be uniform or phonetic");
  }
  p.phonetic_temperature =
      kv.GetDouble(prefix + "phonetic_temperature", p.phonetic_temperature);
  p.seed = static_cast<uint64_t>(
      kv.GetInt(prefix + "seed", static_cast<long>(p.seed)));
  p.Validate();
  return p;
}

NoiseProfile NoiseProfile::FromFile(const std::string& path) {
  return FromKeyValues(config::KeyValues::FromFile(path), "");
}

void ConfusionTable::Set(const std::string& syllable, Distribution dist) {
  table_[syllable] = std::move(dist);
}

const ConfusionTable::Distribution* ConfusionTable::Find(
    const std::string& syllable) const {
  auto it = table_.find(syllable);
  return it == table_.end() || it->second.empty() ? nullptr : &it->second;
}

double NormalizedEditDistance(const std::string& a, const std::string& b) {
  const std::u32string x = utf8::Decode(a);
  const std::u32string y = utf8::Decode(b);
  if (x.empty() && y.empty()) return 0.0;
  std::vector<size_t> prev(y.size() + 1);
  std::vector<size_t> cur(y.size() + 1);
  for (size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= y.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[y.size()]) /
         static_cast<double>(std::max(x.size(), y.size()));
}

ConfusionTable BuildUniformConfusions(const std::vector<std::string>& vocab) {
  ConfusionTable table;
  for (const std::string& s : vocab) {
    ConfusionTable::Distribution dist;
    for (const std::string& r : vocab) {
      if (r != s) dist.emplace_back(r, 0.0);
    }
    for (auto& [r, p] : dist) p = 1.0 / static_cast<double>(dist.size());
    table.Set(s, std::move(dist));
  }
  return table;
}

ConfusionTable BuildPhoneticConfusions(const std::vector<std::string>& vocab,
                                       const std::vector<std::string>& ipa,
                                       double temperature) {
  if (vocab.size() != ipa.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                "vocabulary and IPA lists differ in length");
  }
  if (!(temperature > 0.0)) {
    throw Error(ErrorKind::kFormat, "temperature must be positive");
  }
  ConfusionTable table;
  for (size_t a = 0; a < vocab.size(); ++a) {
    ConfusionTable::Distribution dist;
    std::vector<double> logits;
    for (size_t b = 0; b < vocab.size(); ++b) {
      if (vocab[b] == vocab[a]) continue;
      dist.emplace_back(vocab[b], 0.0);
      logits.push_back(-NormalizedEditDistance(ipa[a], ipa[b]) / temperature);
    }
    if (dist.empty()) continue;
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& l : logits) {
      l = std::exp(l - mx);
      z += l;
    }
    for (size_t k = 0; k < dist.size(); ++k) dist[k].second = logits[k] / z;
    table.Set(vocab[a], std::move(dist));
  }
  return table;
}

ConfusionTable BuildPhoneticConfusions(const std::vector<std::string>& vocab,
                                       const g2p::CrfModel& tagger,
                                       double temperature) {
  std::vector<std::string> ipa;
  ipa.reserve(vocab.size());
  for (const std::string& s : vocab) {
    const g2p::TaggedSequence tagged =
        g2p::CrfDecode(tagger, text::SyllableSequence({s}));
    ipa.push_back(tagger.tagset().Label(tagged.labels[0]));
  }
  return BuildPhoneticConfusions(vocab, ipa, temperature);
}

Unigram::Unigram(const std::vector<text::SyllableSequence>& corpus) {
  std::unordered_map<std::string, long> counts;
  long total = 0;
  for (const text::SyllableSequence& s : corpus) {
    for (const std::string& t : s.tokens()) {
      ++counts[t];
      ++total;
    }
  }
  for (const auto& [t, c] : counts) tokens_.push_back(t);
  std::sort(tokens_.begin(), tokens_.end());
  double acc = 0.0;
  for (const std::string& t : tokens_) {
    acc += static_cast<double>(counts[t]) / static_cast<double>(total);
    cumulative_.push_back(acc);
  }
}

const std::string& Unigram::Sample(Rng& rng) const {
  const double u = rng.Uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const size_t k = std::min<size_t>(it - cumulative_.begin(), tokens_.size() - 1);
  return tokens_[k];
}

CorruptResult Corrupt(const text::SyllableSequence& gt,
                      const NoiseProfile& profile,
                      const ConfusionTable& confusions, const Unigram& unigram,
                      Rng& rng) {
  CorruptResult result;
  std::vector<std::string> out;
  out.reserve(gt.size() + 2);
  for (const std::string& tok : gt.tokens()) {
    const double u = rng.Uniform();
    if (u < profile.p_sub) {
      std::string replacement = tok;
      if (const ConfusionTable::Distribution* dist = confusions.Find(tok)) {
        replacement = SampleFrom(*dist, rng);
      } else if (!unigram.empty()) {
        for (int tries = 0; tries < 16 && replacement == tok; ++tries) {
          replacement = unigram.Sample(rng);
        }
      }
      if (replacement == tok) {
        result.ops.push_back(EditOp::kKeep);
      } else {
        result.ops.push_back(EditOp::kSubstitute);
        ++result.substitutions;
      }
      out.push_back(std::move(replacement));
    } else if (u < profile.p_sub + profile.p_del) {
      result.ops.push_back(EditOp::kDelete);
      ++result.deletions;
    } else {
      result.ops.push_back(EditOp::kKeep);
      out.push_back(tok);
    }
    if (profile.p_ins > 0.0 && !unigram.empty() &&
        rng.Uniform() < profile.p_ins) {
      result.ops.push_back(EditOp::kInsert);
      ++result.insertions;
      out.push_back(unigram.Sample(rng));
    }
  }
  result.empty = out.empty();
  result.tokens = text::SyllableSequence(std::move(out));
  return result;
}

std::string ChannelStats::ToText() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "gt_tokens = %ld\nsubstitutions = %ld\ndeletions = %ld\n"
                "insertions = %ld\nempty_outputs = %ld\nsub_rate = %.6f\n"
                "del_rate = %.6f\nins_rate = %.6f\n",
                gt_tokens, substitutions, deletions, insertions, empty_outputs,
                sub_rate(), del_rate(), ins_rate());
  return buf;
}

GeneratedCorpus GenerateCorpus(const std::vector<text::SyllableSequence>& gt,
                               const NoiseProfile& profile,
                               const ConfusionTable& confusions,
                               uint64_t first_index) {
  if (gt.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "ground-truth corpus is empty");
  }
  profile.Validate();
  const Unigram unigram(gt);
  GeneratedCorpus out;
  for (size_t i = 0; i < gt.size(); ++i) {
    Rng rng(profile.seed, first_index + i);
    CorruptResult r = Corrupt(gt[i], profile, confusions, unigram, rng);
    out.stats.gt_tokens += static_cast<long>(gt[i].size());
    out.stats.substitutions += r.substitutions;
    out.stats.deletions += r.deletions;
    out.stats.insertions += r.insertions;
    if (r.empty || gt[i].empty()) {
      ++out.stats.empty_outputs;
      continue;
    }
    out.pairs.push_back(
        {std::move(r.tokens), gt[i], std::to_string(first_index + i + 1)});
  }
  return out;
}

}  // namespace aec::noise
