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

#include "aec/metrics.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "aec/common.h"
#include "aec/utf8.h"

namespace aec::metrics {

namespace {

enum class Op { kNone, kHit, kSub, kIns, kDel };

std::string Trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  };
  while (b < e && space(s[b])) ++b;
  while (e > b && space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

template <typename Gram>
void CountClipped(const std::vector<Gram>& ref, const std::vector<Gram>& hyp,
                  NgramStats* stats) {
  std::map<Gram, long> ref_counts;
  for (const Gram& g : ref) ++ref_counts[g];
  std::map<Gram, long> hyp_counts;
  for (const Gram& g : hyp) ++hyp_counts[g];
  stats->ref = static_cast<long>(ref.size());
  stats->hyp = static_cast<long>(hyp.size());
  stats->match = 0;
  for (const auto& [g, c] : hyp_counts) {
    auto it = ref_counts.find(g);
    if (it != ref_counts.end()) stats->match += std::min(c, it->second);
  }
}

std::vector<std::u32string> CharNgrams(const std::u32string& chars, int n) {
  std::vector<std::u32string> grams;
  if (static_cast<int>(chars.size()) < n) return grams;
  for (size_t i = 0; i + n <= chars.size(); ++i) {
    grams.push_back(chars.substr(i, n));
  }
  return grams;
}

std::vector<std::string> WordNgrams(const std::vector<std::string>& words,
                                    int n) {
  std::vector<std::string> grams;
  if (static_cast<int>(words.size()) < n) return grams;
  for (size_t i = 0; i + n <= words.size(); ++i) {
    std::string g = words[i];
    for (int k = 1; k < n; ++k) {
      g += ' ';
      g += words[i + k];
    }
    grams.push_back(std::move(g));
  }
  return grams;
}

std::u32string NonSpaceChars(std::string_view s) {
  std::u32string out;
  for (char32_t cp : utf8::Decode(s)) {
    if (cp != U' ' && cp != U'\t' && cp != U'\n' && cp != U'\r') {
      out.push_back(cp);
    }
  }
  return out;
}

std::vector<std::string> Words(std::string_view s) {
  std::string flat(s);
  std::replace_if(flat.begin(), flat.end(),
                  [](char c) { return c == '\t' || c == '\n' || c == '\r'; },
                  ' ');
  return utf8::SplitSpaces(flat);
}

}  // namespace

WerResult Wer(const std::vector<std::string>& reference,
              const std::vector<std::string>& hypothesis) {
  if (reference.empty()) {
    throw Error(ErrorKind::kEmptyReference, "WER needs a non-empty reference");
  }
  const size_t n = reference.size();
  const size_t m = hypothesis.size();
  // dist[i][j]: edits aligning reference[0, i) with hypothesis[0, j).
  std::vector<std::vector<int>> dist(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) dist[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) dist[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int diag =
          dist[i - 1][j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      dist[i][j] = std::min({diag, dist[i][j - 1] + 1, dist[i - 1][j] + 1});
    }
  }

  WerResult result;
  EditBreakdown& b = result.breakdown;
  b.reference_length = static_cast<int>(n);
  size_t i = n;
  size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = reference[i - 1] == hypothesis[j - 1];
      if (dist[i][j] == dist[i - 1][j - 1] + (same ? 0 : 1)) {
        same ? ++b.hits : ++b.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && dist[i][j] == dist[i][j - 1] + 1) {
      ++b.insertions;
      --j;
    } else {
      ++b.deletions;
      --i;
    }
  }
  result.rate = static_cast<double>(b.edits()) / static_cast<double>(n);
  return result;
}

void ChrfStats::Add(const ChrfStats& other) {
  if (orders.empty()) orders.resize(other.orders.size());
  for (size_t k = 0; k < orders.size() && k < other.orders.size(); ++k) {
    orders[k].hyp += other.orders[k].hyp;
    orders[k].ref += other.orders[k].ref;
    orders[k].match += other.orders[k].match;
  }
}

ChrfStats ComputeChrfStats(std::string_view reference,
                           std::string_view hypothesis,
                           const ChrfParams& params) {
  ChrfStats stats;
  stats.orders.resize(params.char_order + params.word_order);
  const std::u32string ref_chars = NonSpaceChars(reference);
  const std::u32string hyp_chars = NonSpaceChars(hypothesis);
  for (int n = 1; n <= params.char_order; ++n) {
    CountClipped(CharNgrams(ref_chars, n), CharNgrams(hyp_chars, n),
                 &stats.orders[n - 1]);
  }
  const std::vector<std::string> ref_words = Words(reference);
  const std::vector<std::string> hyp_words = Words(hypothesis);
  for (int n = 1; n <= params.word_order; ++n) {
    CountClipped(WordNgrams(ref_words, n), WordNgrams(hyp_words, n),
                 &stats.orders[params.char_order + n - 1]);
  }
  return stats;
}

double ChrfFromStats(const ChrfStats& stats, const ChrfParams& params) {
  const double beta2 = params.beta * params.beta;
  double total = 0.0;
  int effective = 0;
  for (const NgramStats& s : stats.orders) {
    if (s.hyp == 0 && s.ref == 0) continue;
    ++effective;
    if (s.match == 0) continue;
    const double precision = static_cast<double>(s.match) / s.hyp;
    const double recall = static_cast<double>(s.match) / s.ref;
    total += (1.0 + beta2) * precision * recall / (beta2 * precision + recall);
  }
  if (effective == 0) return 1.0;
  return total / effective;
}

double ChrfPlusPlus(std::string_view reference, std::string_view hypothesis,
                    const ChrfParams& params) {
  return ChrfFromStats(
      ComputeChrfStats(Trim(reference), Trim(hypothesis), params), params);
}

EvalReport EvaluateCorpus(const std::vector<EvalPair>& pairs,
                          const ChrfParams& params) {
  if (pairs.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "nothing to evaluate");
  }
  EvalReport report;
  ChrfStats corpus_stats;
  corpus_stats.orders.resize(params.char_order + params.word_order);
  for (const EvalPair& p : pairs) {
    const WerResult w =
        Wer(utf8::SplitSpaces(p.reference), utf8::SplitSpaces(p.hypothesis));
    const ChrfStats s =
        ComputeChrfStats(Trim(p.reference), Trim(p.hypothesis), params);
    corpus_stats.Add(s);
    SentenceRecord rec;
    rec.id = p.id;
    rec.breakdown = w.breakdown;
    rec.wer = w.rate;
    rec.chrf = ChrfFromStats(s, params);
    report.totals.substitutions += w.breakdown.substitutions;
    report.totals.deletions += w.breakdown.deletions;
    report.totals.insertions += w.breakdown.insertions;
    report.totals.hits += w.breakdown.hits;
    report.totals.reference_length += w.breakdown.reference_length;
    report.sentences.push_back(std::move(rec));
  }
  report.corpus_wer = static_cast<double>(report.totals.edits()) /
                      report.totals.reference_length;
  report.corpus_chrf = ChrfFromStats(corpus_stats, params);
  return report;
}

namespace {

std::string Row(const std::string& id, const EditBreakdown& b, double wer,
                double chrf) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "\t%d\t%d\t%d\t%d\t%d\t%.6f\t%.6f",
                b.reference_length, b.hits, b.substitutions, b.deletions,
                b.insertions, wer, chrf);
  return id + buf;
}

}  // namespace

std::string EvalReport::ToTsv() const {
  std::ostringstream out;
  out << "id\tref_len\thits\tsub\tdel\tins\twer\tchrf++\n";
  for (const SentenceRecord& r : sentences) {
    out << Row(r.id, r.breakdown, r.wer, r.chrf) << '\n';
  }
  out << Row("CORPUS", totals, corpus_wer, corpus_chrf) << '\n';
  return out.str();
}

std::string EvalReport::Summary() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "sentences=%zu ref_tokens=%d WER=%.2f%% (S=%d D=%d I=%d) "
                "chrF++=%.4f",
                sentences.size(), totals.reference_length, 100.0 * corpus_wer,
                totals.substitutions, totals.deletions, totals.insertions,
                corpus_chrf);
  return buf;
}

}  // namespace aec::metrics
