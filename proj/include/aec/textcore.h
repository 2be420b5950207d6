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

#ifndef AEC_TEXTCORE_H_
#define AEC_TEXTCORE_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aec::text {

// Ordered syllable tokens of one utterance. Tokens are non-empty and never
// contain a space.
class SyllableSequence {
 public:
  SyllableSequence() = default;
  explicit SyllableSequence(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const { return tokens_; }
  size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& operator[](size_t i) const { return tokens_[i]; }

  // Tokens concatenated without separators.
  std::string Joined() const;

  friend bool operator==(const SyllableSequence&,
                         const SyllableSequence&) = default;

 private:
  std::vector<std::string> tokens_;
};

struct ParallelPair {
  SyllableSequence source;  // erroneous (ASR) side
  SyllableSequence target;  // ground truth
  std::string id;
};

struct CorpusStats {
  size_t sentence_count = 0;
  size_t source_token_count = 0;
  size_t target_token_count = 0;
};

CorpusStats ComputeStats(const std::vector<ParallelPair>& pairs);

// Per-codepoint cleaning rules plus the script ranges that survive
// normalization. Rows of the table file look like
//   200B<TAB>drop
//   1040-1049<TAB>drop
//   00A0<TAB>map:0020
class CleaningTable {
 public:
  struct Rule {
    char32_t first;
    char32_t last;
    std::optional<char32_t> map_to;  // nullopt means drop
  };

  // Burmese (U+1000-U+104F) plus ASCII letters and digits, no rules.
  CleaningTable();

  static CleaningTable FromFile(const std::string& path);
  static CleaningTable Parse(std::string_view contents);
  // The table shipped in data/cleaning_table.tsv.
  static const CleaningTable& Default();

  void AddRule(Rule rule);
  const std::vector<Rule>& rules() const { return rules_; }

  // Returns the rule covering cp, if any.
  const Rule* Find(char32_t cp) const;
  bool InScript(char32_t cp) const;

 private:
  std::vector<Rule> rules_;
  std::vector<std::pair<char32_t, char32_t>> script_ranges_;
};

// NFC, cleaning table, script filtering, whitespace collapse and trim.
std::string Normalize(std::string_view text,
                      const CleaningTable& table = CleaningTable::Default());

enum class CharClass {
  kConsonant,    // U+1000-U+1021, U+103F
  kIndependentVowel,
  kMedial,       // U+103B-U+103E
  kVowelSign,    // dependent vowels, anusvara, dot below, visarga
  kAsat,         // U+103A
  kStacker,      // U+1039
  kDigit,        // Burmese digits
  kPunctuation,  // U+104A, U+104B
  kSymbol,       // U+104C-U+104F
  kLatin,        // ASCII letters and digits
  kSpace,
  kUnclassified,
};

CharClass Classify(char32_t cp);
// One letter per class; used by feature extraction as a shape signature.
char ClassLetter(CharClass c);

// Rule-based syllable breaking. Burmese runs break before every consonant
// that is neither preceded by the stacker nor killed by a following asat;
// other runs fall back to whitespace tokenization. Throws
// ErrorKind::kCharOutsideRuleSet on unclassified input.
SyllableSequence SegmentSyllables(std::string_view normalized);

struct CorpusReadResult {
  std::vector<ParallelPair> pairs;
  CorpusStats stats;
  size_t dropped = 0;
  std::vector<size_t> dropped_lines;  // 1-based
};

CorpusReadResult ReadParallelCorpus(
    const std::string& source_path, const std::string& target_path,
    const CleaningTable& table = CleaningTable::Default());

std::vector<std::string> ReadLines(const std::string& path);
void WriteLines(const std::string& path, const std::vector<std::string>& lines);

// "tok|ann tok|ann ..." or plain "tok tok ...".
std::string WriteSegmented(
    const SyllableSequence& seq,
    const std::vector<std::string>* annotations = nullptr);

struct SegmentedLine {
  SyllableSequence tokens;
  std::vector<std::string> annotations;  // empty when the line had none
};

SegmentedLine ReadSegmented(std::string_view line);

}  // namespace aec::text

#endif  // AEC_TEXTCORE_H_
