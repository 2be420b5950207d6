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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "aec/common.h"
#include "aec/errorsim.h"
#include "aec/textcore.h"
#include "aec/utf8.h"
#include "test_support.h"

namespace aec::text {
namespace {

using testing::MakeTempDir;
using testing::WriteFile;

std::string RandomScriptString(noise::Rng& rng, int max_len) {
  std::u32string cps;
  const size_t len = rng.Below(static_cast<size_t>(max_len) + 1);
  for (size_t i = 0; i < len; ++i) {
    const size_t pick = rng.Below(10);
    if (pick < 7) {
      cps.push_back(static_cast<char32_t>(0x1000 + rng.Below(0x50)));
    } else if (pick < 9) {
      cps.push_back(static_cast<char32_t>('a' + rng.Below(26)));
    } else {
      cps.push_back(U' ');
    }
  }
  return utf8::Encode(cps);
}

std::string WithoutSpaces(const std::string& s) {
  std::string out;
  for (char c : s) if (c != ' ') out += c;
  return out;
}

TEST_CASE("normalize collapses separators left by dropped characters") {
  const CleaningTable table = CleaningTable::Parse("002E\tdrop\n");
  CHECK(Normalize("abc.  def", table) == "abc def");
  CHECK(Normalize("", table) == "");
}

TEST_CASE("normalize removes zero-width space from Burmese text") {
  const std::string plain = "မြန်မာ";
  const std::string zw = "မြန်\xE2\x80\x8B" "မာ";
  CHECK(Normalize(zw) == plain);
}

TEST_CASE("cleaning table rejects malformed rows") {
  CHECK_THROWS_AS(CleaningTable::Parse("zz\tdrop\n"), Error);
  CHECK_THROWS_AS(CleaningTable::Parse("0041 drop\n"), Error);
  CHECK_THROWS_AS(CleaningTable::Parse("0041\tswap\n"), Error);
}

TEST_CASE("segmentation of Latin and Burmese runs") {
  CHECK(SegmentSyllables("abc def").tokens() ==
        std::vector<std::string>{"abc", "def"});
  CHECK(SegmentSyllables("မြန်မာ").tokens() ==
        std::vector<std::string>{"မြန်", "မာ"});
  // Stacked consonant stays inside the syllable it closes.
  const SyllableSequence stacked =
      SegmentSyllables("မင်္ဂလာ");
  CHECK(stacked.size() == 2);
}

TEST_CASE("segmentation rejects codepoints outside the rule set") {
  try {
    SegmentSyllables("abé");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCharOutsideRuleSet);
  }
}

TEST_CASE("property: segmentation is lossless, deterministic and idempotent") {
  noise::Rng rng(11, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::string raw = RandomScriptString(rng, 24);
    const std::string norm = Normalize(raw);
    CHECK(Normalize(norm) == norm);
    const SyllableSequence seq = SegmentSyllables(norm);
    CHECK(seq.Joined() == WithoutSpaces(norm));
    CHECK(SegmentSyllables(norm) == seq);
    for (const std::string& t : seq.tokens()) {
      CHECK(!t.empty());
      CHECK(t.find(' ') == std::string::npos);
    }
  }
}

TEST_CASE("write_segmented with and without annotations") {
  CHECK(WriteSegmented(SyllableSequence({"a", "b"})) == "a b");
  const std::vector<std::string> ann = {"sei'", "win"};
  CHECK(WriteSegmented(SyllableSequence({"စိတ်",
                                         "ဝင်"}),
                       &ann) ==
        "စိတ်|sei' ဝင်|win");
  const std::vector<std::string> bad = {"x", "y"};
  try {
    WriteSegmented(SyllableSequence({"a"}), &bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kLengthMismatch);
  }
}

TEST_CASE("property: segmented write/read round trip") {
  noise::Rng rng(12, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const SyllableSequence seq =
        SegmentSyllables(Normalize(RandomScriptString(rng, 20)));
    std::vector<std::string> ann;
    for (size_t i = 0; i < seq.size(); ++i) ann.push_back("t" + std::to_string(i));
    const SegmentedLine plain = ReadSegmented(WriteSegmented(seq));
    CHECK(plain.tokens == seq);
    CHECK(plain.annotations.empty());
    if (seq.empty()) continue;
    const SegmentedLine tagged = ReadSegmented(WriteSegmented(seq, &ann));
    CHECK(tagged.tokens == seq);
    CHECK(tagged.annotations == ann);
  }
}

TEST_CASE("parallel corpus reading drops empty pairs and checks line counts") {
  const std::string dir = MakeTempDir("textcore");
  WriteFile(dir + "/a.src", "a b\nc d\ne f\n");
  WriteFile(dir + "/a.tgt", "a b\nc d\ne f\n");
  CorpusReadResult r = ReadParallelCorpus(dir + "/a.src", dir + "/a.tgt");
  CHECK(r.pairs.size() == 3);
  CHECK(r.dropped == 0);
  CHECK(r.stats.source_token_count == 6);

  WriteFile(dir + "/b.tgt", "a b\n\xE2\x80\x8B\ne f\n");
  r = ReadParallelCorpus(dir + "/a.src", dir + "/b.tgt");
  CHECK(r.pairs.size() == 2);
  CHECK(r.dropped == 1);
  CHECK(r.dropped_lines == std::vector<size_t>{2});
  CHECK(r.stats.target_token_count == 4);

  WriteFile(dir + "/c.src", "a\nb\nc\nd\n");
  WriteFile(dir + "/c.tgt", "a\nb\nc\nd\ne\n");
  try {
    ReadParallelCorpus(dir + "/c.src", dir + "/c.tgt");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kLineCountMismatch);
  }
  CHECK_THROWS_AS(ReadParallelCorpus(dir + "/missing", dir + "/a.tgt"), Error);
}

TEST_CASE("corpus stats equal the sum over pairs") {
  std::vector<ParallelPair> pairs = {
      {SyllableSequence({"a"}), SyllableSequence({"b", "c"}), "1"},
      {SyllableSequence({"a", "b", "c"}), SyllableSequence({"d"}), "2"}};
  const CorpusStats s = ComputeStats(pairs);
  CHECK(s.sentence_count == 2);
  CHECK(s.source_token_count == 4);
  CHECK(s.target_token_count == 3);
}

}  // namespace
}  // namespace aec::text
