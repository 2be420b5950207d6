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

#ifndef AEC_ERRORSIM_H_
#define AEC_ERRORSIM_H_

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aec/config.h"
#include "aec/textcore.h"

namespace aec::g2p {
class CrfModel;
}

namespace aec::noise {

// Deterministic generator for (seed, stream) substreams. Uniform() uses the
// top 53 bits so sequences match across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t Next() { return engine_(); }
  double Uniform();                // [0, 1)
  size_t Below(size_t n);          // [0, n)

 private:
  std::mt19937_64 engine_;
};

enum class ConfusionMode { kUniform, kPhonetic };

struct NoiseProfile {
  double p_sub = 0.10;
  double p_del = 0.05;
  double p_ins = 0.05;
  ConfusionMode confusion_mode = ConfusionMode::kPhonetic;
  double phonetic_temperature = 0.25;
  uint64_t seed = 1;

  // Throws ErrorKind::kFormat when probabilities are out of range.
  void Validate() const;
  bool IsIdentity() const { return p_sub == 0 && p_del == 0 && p_ins == 0; }

  // key = value lines.
  std::string ToText() const;
  static NoiseProfile FromFile(const std::string& path);
  // Reads prefix + field name for every field.
  static NoiseProfile FromKeyValues(const config::KeyValues& kv,
                                    const std::string& prefix);
};

// Replacement distribution per syllable.
class ConfusionTable {
 public:
  using Distribution = std::vector<std::pair<std::string, double>>;

  void Set(const std::string& syllable, Distribution dist);
  const Distribution* Find(const std::string& syllable) const;
  size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, Distribution> table_;
};

// Levenshtein distance over codepoints divided by the longer length.
double NormalizedEditDistance(const std::string& a, const std::string& b);

// Every other syllable equally likely.
ConfusionTable BuildUniformConfusions(const std::vector<std::string>& vocab);

// P(replacement r | s) proportional to exp(-d(ipa_s, ipa_r) / temperature),
// r != s. ipa[k] is the transcription of vocab[k].
ConfusionTable BuildPhoneticConfusions(const std::vector<std::string>& vocab,
                                       const std::vector<std::string>& ipa,
                                       double temperature);

// Same, transcribing each syllable with the tagger.
ConfusionTable BuildPhoneticConfusions(const std::vector<std::string>& vocab,
                                       const g2p::CrfModel& tagger,
                                       double temperature);

// Sampling distribution for inserted syllables.
class Unigram {
 public:
  Unigram() = default;
  explicit Unigram(const std::vector<text::SyllableSequence>& corpus);

  const std::string& Sample(Rng& rng) const;
  bool empty() const { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;  // sorted
  std::vector<double> cumulative_;
};

enum class EditOp { kKeep, kSubstitute, kDelete, kInsert };

struct CorruptResult {
  text::SyllableSequence tokens;
  bool empty = false;
  // One entry per gt token, with inserts recorded after the token they
  // follow.
  std::vector<EditOp> ops;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
};

CorruptResult Corrupt(const text::SyllableSequence& gt,
                      const NoiseProfile& profile,
                      const ConfusionTable& confusions, const Unigram& unigram,
                      Rng& rng);

struct ChannelStats {
  long gt_tokens = 0;
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long empty_outputs = 0;  // corrupted to nothing; those pairs are dropped

  double sub_rate() const { return gt_tokens ? double(substitutions) / gt_tokens : 0; }
  double del_rate() const { return gt_tokens ? double(deletions) / gt_tokens : 0; }
  double ins_rate() const { return gt_tokens ? double(insertions) / gt_tokens : 0; }
  std::string ToText() const;
};

struct GeneratedCorpus {
  std::vector<text::ParallelPair> pairs;  // (corrupted, gt)
  ChannelStats stats;
};

// Pair i draws from substream (profile.seed, i), so output does not depend
// on processing order. Throws ErrorKind::kEmptyCorpus.
GeneratedCorpus GenerateCorpus(const std::vector<text::SyllableSequence>& gt,
                               const NoiseProfile& profile,
                               const ConfusionTable& confusions,
                               uint64_t first_index = 0);

}  // namespace aec::noise

#endif  // AEC_ERRORSIM_H_
