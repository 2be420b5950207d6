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

#include "aec/grammar.h"

#include <algorithm>
#include <set>

#include "aec/errorsim.h"
#include "aec/utf8.h"

namespace aec::noise {

namespace {

using Slot = std::vector<const char*>;

const Slot kTime = {"နာ ရီ ဝက် ခန့်", "အေး အေး", "ပြီ"};
const Slot kSubject = {"ရွာ သူ", "လူ", "အ ကို", "ဘွား ဘွား", "သူ"};
const Slot kPlace = {"ရေ စီး ကြောင်း", "ရွာ", "လမ်း မ", "ပွဲ", "ချောင်း ဘက်"};
const Slot kPostposition = {"သို့", "မှ", "မှာ"};
const Slot kMotion = {"သွား", "ထွက် လာ", "လမ်း လျှောက်", "ဝင် လာ", "ရေ ကူး"};
const Slot kObject = {"စာ", "ပုံ", "ပဲ", "ဘဲ"};
const Slot kAction = {"စား", "ယူ", "ပြင်", "ချက်"};
const Slot kManner = {"ပုံ မှန် အား ဖြင့်", "အေး အေး", "မှန် မှန်"};
const Slot kEnding = {"သည်", "ပါ သည်", "ခဲ့ သည်", "နိုင် သည်", "တော့ ပါ"};
const char* kDescriptive = "စိတ် ဝင် စား ဖွယ် ကောင်း သော";
const char* kObjectMarker = "ကို";

void Append(const char* phrase, std::vector<std::string>* out) {
  for (std::string& s : utf8::SplitSpaces(phrase)) out->push_back(std::move(s));
}

const char* Pick(const Slot& slot, Rng& rng) {
  return slot[rng.Below(slot.size())];
}

}  // namespace

std::vector<text::SyllableSequence> GenerateGrammarSentences(size_t count,
                                                             uint64_t seed) {
  std::vector<text::SyllableSequence> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    Rng rng(seed, i);
    std::vector<std::string> tokens;
    const size_t pattern = rng.Below(3);
    if (pattern == 0) {
      if (rng.Uniform() < 0.4) Append(Pick(kTime, rng), &tokens);
      Append(Pick(kSubject, rng), &tokens);
      Append(Pick(kPlace, rng), &tokens);
      Append(Pick(kPostposition, rng), &tokens);
      Append(Pick(kMotion, rng), &tokens);
    } else if (pattern == 1) {
      Append(Pick(kSubject, rng), &tokens);
      if (rng.Uniform() < 0.5) Append(Pick(kManner, rng), &tokens);
      Append(Pick(kObject, rng), &tokens);
      Append(kObjectMarker, &tokens);
      Append(Pick(kAction, rng), &tokens);
    } else {
      Append(Pick(kSubject, rng), &tokens);
      Append(kDescriptive, &tokens);
      Append(Pick(kPlace, rng), &tokens);
      Append(Pick(kPostposition, rng), &tokens);
      Append(Pick(kMotion, rng), &tokens);
    }
    Append(Pick(kEnding, rng), &tokens);
    out.emplace_back(std::move(tokens));
  }
  return out;
}

std::vector<std::string> GrammarVocabulary() {
  std::set<std::string> vocab;
  std::vector<std::string> tokens;
  for (const Slot* slot : {&kTime, &kSubject, &kPlace, &kPostposition,
                           &kMotion, &kObject, &kAction, &kManner, &kEnding}) {
    for (const char* phrase : *slot) Append(phrase, &tokens);
  }
  Append(kDescriptive, &tokens);
  Append(kObjectMarker, &tokens);
  vocab.insert(tokens.begin(), tokens.end());
  return {vocab.begin(), vocab.end()};
}

}  // namespace aec::noise
