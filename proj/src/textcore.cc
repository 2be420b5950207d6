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

#include "aec/textcore.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "aec/common.h"
#include "aec/utf8.h"

namespace aec::text {

namespace {

constexpr char32_t kAsat = 0x103A;
constexpr char32_t kStackerCp = 0x1039;
constexpr char32_t kDotBelow = 0x1037;

std::string ToNfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kInternal, "ICU NFC normalizer unavailable");
  }
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString out = nfc->normalize(in, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kInternal, "NFC normalization failed");
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

bool IsWhitespace(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0x0B ||
         cp == 0x0C || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool IsControl(char32_t cp) {
  return cp < 0x20 || (cp >= 0x7F && cp < 0xA0);
}

char32_t ParseHex(std::string_view s, int line_no) {
  if (s.empty() || s.size() > 6) {
    throw Error(ErrorKind::kFormat, "cleaning table line " +
                                        std::to_string(line_no) +
                                        ": bad codepoint '" + std::string(s) +
                                        "'");
  }
  char32_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') {
      v |= static_cast<char32_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      v |= static_cast<char32_t>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      v |= static_cast<char32_t>(c - 'A' + 10);
    } else {
      throw Error(ErrorKind::kFormat, "cleaning table line " +
                                          std::to_string(line_no) +
                                          ": bad codepoint '" +
                                          std::string(s) + "'");
    }
  }
  return v;
}

// One cleaning pass; returns codepoints with single-space separators.
std::u32string CleanOnce(std::string_view text, const CleaningTable& table) {
  const std::u32string cps = utf8::Decode(ToNfc(text));
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (const CleaningTable::Rule* rule = table.Find(cp)) {
      if (!rule->map_to) continue;
      cp = *rule->map_to;
    }
    if (IsWhitespace(cp)) {
      pending_space = true;
      continue;
    }
    if (IsControl(cp) || !table.InScript(cp)) continue;
    if (pending_space && !out.empty()) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return out;
}

// Consonant (or independent vowel) at i closes the previous syllable when it
// is followed by asat or by the stacker. NFC puts dot below (ccc 7) ahead of
// asat (ccc 9), so look past it.
bool IsKilled(const std::u32string& cps, size_t i) {
  size_t k = i + 1;
  if (k < cps.size() && cps[k] == kDotBelow) ++k;
  return k < cps.size() && (cps[k] == kAsat || cps[k] == kStackerCp);
}

enum class Run { kBurmese, kBurmeseDigit, kLatin };

Run RunOf(CharClass c) {
  switch (c) {
    case CharClass::kLatin: return Run::kLatin;
    case CharClass::kDigit: return Run::kBurmeseDigit;
    default: return Run::kBurmese;
  }
}

}  // namespace

SyllableSequence::SyllableSequence(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (const std::string& t : tokens_) {
    if (t.empty() || t.find(' ') != std::string::npos) {
      throw Error(ErrorKind::kFormat,
                  "syllable tokens must be non-empty and space-free");
    }
  }
}

std::string SyllableSequence::Joined() const {
  std::string out;
  for (const std::string& t : tokens_) out += t;
  return out;
}

CorpusStats ComputeStats(const std::vector<ParallelPair>& pairs) {
  CorpusStats stats;
  stats.sentence_count = pairs.size();
  for (const ParallelPair& p : pairs) {
    stats.source_token_count += p.source.size();
    stats.target_token_count += p.target.size();
  }
  return stats;
}

CleaningTable::CleaningTable()
    : script_ranges_{{0x1000, 0x104F}, {'0', '9'}, {'A', 'Z'}, {'a', 'z'}} {}

CleaningTable CleaningTable::Parse(std::string_view contents) {
  CleaningTable table;
  std::istringstream in{std::string(contents)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::kFormat, "cleaning table line " +
                                          std::to_string(line_no) +
                                          ": expected '<range>\\t<action>'");
    }
    const std::string range = line.substr(0, tab);
    const std::string action = line.substr(tab + 1);
    Rule rule{};
    const size_t dash = range.find('-');
    if (dash == std::string::npos) {
      rule.first = rule.last = ParseHex(range, line_no);
    } else {
      rule.first = ParseHex(std::string_view(range).substr(0, dash), line_no);
      rule.last = ParseHex(std::string_view(range).substr(dash + 1), line_no);
    }
    if (rule.last < rule.first) {
      throw Error(ErrorKind::kFormat, "cleaning table line " +
                                          std::to_string(line_no) +
                                          ": empty range");
    }
    if (action == "drop") {
      rule.map_to = std::nullopt;
    } else if (action.rfind("map:", 0) == 0) {
      rule.map_to = ParseHex(std::string_view(action).substr(4), line_no);
    } else {
      throw Error(ErrorKind::kFormat, "cleaning table line " +
                                          std::to_string(line_no) +
                                          ": unknown action '" + action + "'");
    }
    table.AddRule(rule);
  }
  // A map target that is itself rewritten would make Normalize depend on
  // the number of passes.
  for (const Rule& r : table.rules_) {
    if (r.map_to && table.Find(*r.map_to) != nullptr) {
      throw Error(ErrorKind::kFormat,
                  "cleaning table maps to " + utf8::CodepointLabel(*r.map_to) +
                      ", which has its own rule");
    }
  }
  return table;
}

CleaningTable CleaningTable::FromFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

const CleaningTable& CleaningTable::Default() {
  static const CleaningTable table = [] {
    std::ifstream probe(AEC_DATA_DIR "/cleaning_table.tsv");
    return probe ? FromFile(AEC_DATA_DIR "/cleaning_table.tsv")
                 : CleaningTable();
  }();
  return table;
}

void CleaningTable::AddRule(Rule rule) { rules_.push_back(rule); }

const CleaningTable::Rule* CleaningTable::Find(char32_t cp) const {
  // First matching row wins.
  for (const Rule& r : rules_) {
    if (cp >= r.first && cp <= r.last) return &r;
  }
  return nullptr;
}

bool CleaningTable::InScript(char32_t cp) const {
  for (const auto& [lo, hi] : script_ranges_) {
    if (cp >= lo && cp <= hi) return true;
  }
  return false;
}

std::string Normalize(std::string_view text, const CleaningTable& table) {
  std::u32string cleaned = CleanOnce(text, table);
  // Dropping a codepoint can bring a base and a combining mark together, so
  // recompose and clean again until stable.
  for (int pass = 0; pass < 4; ++pass) {
    std::u32string again = CleanOnce(utf8::Encode(cleaned), table);
    if (again == cleaned) break;
    cleaned = std::move(again);
  }
  return utf8::Encode(cleaned);
}

CharClass Classify(char32_t cp) {
  if (cp == ' ') return CharClass::kSpace;
  if ((cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') ||
      (cp >= 'a' && cp <= 'z')) {
    return CharClass::kLatin;
  }
  if (cp < 0x1000 || cp > 0x104F) return CharClass::kUnclassified;
  if (cp <= 0x1021 || cp == 0x103F) return CharClass::kConsonant;
  if (cp <= 0x102A) return CharClass::kIndependentVowel;
  if (cp <= 0x1038) return CharClass::kVowelSign;
  if (cp == kStackerCp) return CharClass::kStacker;
  if (cp == kAsat) return CharClass::kAsat;
  if (cp <= 0x103E) return CharClass::kMedial;
  if (cp <= 0x1049) return CharClass::kDigit;
  if (cp <= 0x104B) return CharClass::kPunctuation;
  return CharClass::kSymbol;
}

char ClassLetter(CharClass c) {
  switch (c) {
    case CharClass::kConsonant: return 'C';
    case CharClass::kIndependentVowel: return 'I';
    case CharClass::kMedial: return 'M';
    case CharClass::kVowelSign: return 'V';
    case CharClass::kAsat: return 'A';
    case CharClass::kStacker: return 'S';
    case CharClass::kDigit: return 'D';
    case CharClass::kPunctuation: return 'P';
    case CharClass::kSymbol: return 'Y';
    case CharClass::kLatin: return 'L';
    case CharClass::kSpace: return '_';
    case CharClass::kUnclassified: return '?';
  }
  return '?';
}

SyllableSequence SegmentSyllables(std::string_view normalized) {
  const std::u32string cps = utf8::Decode(normalized);
  std::vector<std::string> tokens;
  std::u32string current;
  CharClass prev = CharClass::kSpace;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(utf8::Encode(current));
    current.clear();
  };
  for (size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    const CharClass cls = Classify(cp);
    if (cls == CharClass::kUnclassified) {
      throw Error(ErrorKind::kCharOutsideRuleSet,
                  utf8::CodepointLabel(cp) + " at codepoint offset " +
                      std::to_string(i));
    }
    if (cls == CharClass::kSpace) {
      flush();
      prev = cls;
      continue;
    }
    if (!current.empty()) {
      bool split = RunOf(cls) != RunOf(prev);
      if (!split && RunOf(cls) == Run::kBurmese) {
        switch (cls) {
          case CharClass::kConsonant:
          case CharClass::kIndependentVowel:
            split = prev != CharClass::kStacker && !IsKilled(cps, i);
            break;
          case CharClass::kPunctuation:
          case CharClass::kSymbol:
            split = true;
            break;
          default:
            // Punctuation stands alone.
            split = prev == CharClass::kPunctuation;
            break;
        }
      }
      if (split) flush();
    }
    current.push_back(cp);
    prev = cls;
  }
  flush();
  return SyllableSequence(std::move(tokens));
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw Error(ErrorKind::kIoFailure, "read failed: " + path);
  return lines;
}

void WriteLines(const std::string& path,
                const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + path);
  for (const std::string& l : lines) out << l << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::kIoFailure, "write failed: " + path);
}

CorpusReadResult ReadParallelCorpus(const std::string& source_path,
                                    const std::string& target_path,
                                    const CleaningTable& table) {
  const std::vector<std::string> src = ReadLines(source_path);
  const std::vector<std::string> tgt = ReadLines(target_path);
  if (src.size() != tgt.size()) {
    throw Error(ErrorKind::kLineCountMismatch,
                source_path + " has " + std::to_string(src.size()) +
                    " lines, " + target_path + " has " +
                    std::to_string(tgt.size()));
  }
  CorpusReadResult result;
  for (size_t i = 0; i < src.size(); ++i) {
    SyllableSequence s = SegmentSyllables(Normalize(src[i], table));
    SyllableSequence t = SegmentSyllables(Normalize(tgt[i], table));
    if (s.empty() || t.empty()) {
      ++result.dropped;
      result.dropped_lines.push_back(i + 1);
      continue;
    }
    result.pairs.push_back({std::move(s), std::move(t), std::to_string(i + 1)});
  }
  result.stats = ComputeStats(result.pairs);
  return result;
}

std::string WriteSegmented(const SyllableSequence& seq,
                           const std::vector<std::string>* annotations) {
  if (annotations != nullptr && annotations->size() != seq.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(seq.size()) + " tokens but " +
                    std::to_string(annotations->size()) + " annotations");
  }
  std::string line;
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) line += ' ';
    line += seq[i];
    if (annotations != nullptr) {
      const std::string& a = (*annotations)[i];
      if (a.find_first_of(" |") != std::string::npos) {
        throw Error(ErrorKind::kFormat,
                    "annotation '" + a + "' contains a space or '|'");
      }
      line += '|';
      line += a;
    }
  }
  return line;
}

SegmentedLine ReadSegmented(std::string_view line) {
  SegmentedLine result;
  std::vector<std::string> tokens;
  bool any_annotation = false;
  bool any_plain = false;
  for (std::string& field : utf8::SplitSpaces(line)) {
    const size_t bar = field.find('|');
    if (bar == std::string::npos) {
      any_plain = true;
      tokens.push_back(std::move(field));
    } else {
      any_annotation = true;
      tokens.push_back(field.substr(0, bar));
      result.annotations.push_back(field.substr(bar + 1));
      if (tokens.back().empty()) {
        throw Error(ErrorKind::kFormat, "empty token before '|'");
      }
    }
  }
  if (any_annotation && any_plain) {
    throw Error(ErrorKind::kFormat,
                "line mixes annotated and bare tokens: " + std::string(line));
  }
  result.tokens = SyllableSequence(std::move(tokens));
  return result;
}

}  // namespace aec::text
