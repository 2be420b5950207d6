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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "aec/common.h"
#include "aec/errorsim.h"
#include "aec/metrics.h"
#include "test_support.h"

namespace aec::metrics {
namespace {

using Tokens = std::vector<std::string>;

TEST_CASE("wer on small instances") {
  CHECK(Wer({"a", "b"}, {"a", "b"}).rate == 0.0);
  const WerResult r = Wer({"a", "b", "c"}, {"a", "x", "c"});
  CHECK(r.rate == doctest::Approx(1.0 / 3.0));
  CHECK(r.breakdown.substitutions == 1);
  const WerResult big = Wer({"a"}, {"x", "y", "z"});
  CHECK(big.rate == 3.0);
  CHECK(big.breakdown.substitutions == 1);
  CHECK(big.breakdown.insertions == 2);
}

TEST_CASE("wer with an empty reference is an error") {
  try {
    Wer({}, {"a"});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyReference);
  }
}

TEST_CASE("wer matches recursive edit distance on every short list") {
  const auto lists = testing::AllTokenLists({"a", "b", "c"}, 4);
  for (const Tokens& ref : lists) {
    if (ref.empty()) continue;
    for (const Tokens& hyp : lists) {
      const WerResult r = Wer(ref, hyp);
      const int d = testing::RecursiveEditDistance(ref, hyp);
      REQUIRE(r.breakdown.edits() == d);
      CHECK(r.breakdown.hits + r.breakdown.substitutions +
                r.breakdown.deletions ==
            static_cast<int>(ref.size()));
      CHECK(r.rate == static_cast<double>(d) / ref.size());
    }
  }
}

TEST_CASE("property: wer bounds and single insertion") {
  noise::Rng rng(3, 1);
  const Tokens alphabet = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 3000; ++trial) {
    Tokens ref, hyp;
    const size_t nr = 1 + rng.Below(8), nh = rng.Below(9);
    for (size_t i = 0; i < nr; ++i) ref.push_back(alphabet[rng.Below(4)]);
    for (size_t i = 0; i < nh; ++i) hyp.push_back(alphabet[rng.Below(4)]);
    const WerResult r = Wer(ref, hyp);
    CHECK(r.rate <= static_cast<double>(std::max(nr, nh)) / nr + 1e-12);
    Tokens longer = hyp;
    longer.insert(longer.begin() + rng.Below(hyp.size() + 1),
                  alphabet[rng.Below(4)]);
    CHECK(std::abs(Wer(ref, longer).breakdown.edits() - r.breakdown.edits()) <=
          1);
  }
}

TEST_CASE("chrF++ fixed points") {
  CHECK(ChrfPlusPlus("abc def", "abc def") == 1.0);
  CHECK(ChrfPlusPlus("aaaa", "bbbb") == 0.0);
  CHECK(ChrfPlusPlus("abcd", "abc") ==
        doctest::Approx(testing::BruteChrf("abcd", "abc")).epsilon(1e-12));
}

TEST_CASE("chrF++ matches the brute-force counter on random pairs") {
  noise::Rng rng(5, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string ref = testing::RandomAsciiText(rng, 14);
    const std::string hyp = testing::RandomAsciiText(rng, 14);
    CHECK(std::abs(ChrfPlusPlus(ref, hyp) - testing::BruteChrf(ref, hyp)) <
          1e-9);
  }
}

TEST_CASE("property: chrF++ ignores outer whitespace and prefers the reference") {
  noise::Rng rng(6, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string ref = testing::RandomAsciiText(rng, 12);
    const std::string hyp = testing::RandomAsciiText(rng, 12);
    CHECK(ChrfPlusPlus("  " + ref + " ", hyp) == ChrfPlusPlus(ref, hyp));
    CHECK(ChrfPlusPlus(ref, " " + hyp + "   ") == ChrfPlusPlus(ref, hyp));
    if (ref.empty()) continue;
    std::string corrupted = ref;
    corrupted[rng.Below(ref.size())] = 'z';
    CHECK(ChrfPlusPlus(ref, ref) >= ChrfPlusPlus(ref, corrupted));
  }
}

TEST_CASE("corpus evaluation micro-averages") {
  const EvalReport same =
      EvaluateCorpus({{"1", "a b", "a b"}, {"2", "c", "c"}});
  CHECK(same.corpus_wer == 0.0);
  CHECK(same.corpus_chrf == 1.0);

  // Pair 1: one substitution over 3; pair 2: one deletion over 2.
  const EvalReport r =
      EvaluateCorpus({{"1", "a b c", "a x c"}, {"2", "d e", "d"}});
  CHECK(r.sentences[0].breakdown.substitutions == 1);
  CHECK(r.sentences[1].breakdown.deletions == 1);
  CHECK(r.totals.reference_length == 5);
  CHECK(r.corpus_wer == doctest::Approx(2.0 / 5.0));

  // Corpus chrF++ pools counts before scoring.
  ChrfStats pooled = ComputeChrfStats("a b c", "a x c");
  pooled.Add(ComputeChrfStats("d e", "d"));
  CHECK(r.corpus_chrf == ChrfFromStats(pooled));
  CHECK_THROWS_AS(EvaluateCorpus({}), Error);
}

}  // namespace
}  // namespace aec::metrics
