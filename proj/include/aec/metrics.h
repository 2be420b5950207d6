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

#ifndef AEC_METRICS_H_
#define AEC_METRICS_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace aec::metrics {

struct EditBreakdown {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int hits = 0;
  int reference_length = 0;

  int edits() const { return substitutions + deletions + insertions; }
};

struct WerResult {
  double rate = 0.0;
  EditBreakdown breakdown;
};

// Unit-cost Levenshtein alignment over tokens. When several minimal scripts
// exist the backtrace prefers substitution, then insertion, then deletion.
// Throws ErrorKind::kEmptyReference for an empty reference.
WerResult Wer(const std::vector<std::string>& reference,
              const std::vector<std::string>& hypothesis);

struct ChrfParams {
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
};

// Clipped n-gram match statistics for one order.
struct NgramStats {
  long hyp = 0;
  long ref = 0;
  long match = 0;
};

// Character orders 1..char_order followed by word orders 1..word_order.
struct ChrfStats {
  std::vector<NgramStats> orders;

  void Add(const ChrfStats& other);
};

ChrfStats ComputeChrfStats(std::string_view reference,
                           std::string_view hypothesis,
                           const ChrfParams& params = {});

// F_beta averaged over the orders that occur in either string; an order with
// n-grams but no matches contributes 0. Two empty strings score 1.
double ChrfFromStats(const ChrfStats& stats, const ChrfParams& params = {});

// chrF++ in [0, 1].
double ChrfPlusPlus(std::string_view reference, std::string_view hypothesis,
                    const ChrfParams& params = {});

struct SentenceRecord {
  std::string id;
  EditBreakdown breakdown;
  double wer = 0.0;
  double chrf = 0.0;
};

struct EvalReport {
  double corpus_wer = 0.0;
  double corpus_chrf = 0.0;
  EditBreakdown totals;
  std::vector<SentenceRecord> sentences;

  // Header, one row per sentence, then a CORPUS row.
  std::string ToTsv() const;
  std::string Summary() const;
};

struct EvalPair {
  std::string id;
  std::string reference;   // space-separated syllables
  std::string hypothesis;
};

// Micro-averaged WER and corpus-level chrF++ (statistics summed before the
// F-score). Throws ErrorKind::kEmptyCorpus on an empty list.
EvalReport EvaluateCorpus(const std::vector<EvalPair>& pairs,
                          const ChrfParams& params = {});

}  // namespace aec::metrics

#endif  // AEC_METRICS_H_
