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

#ifndef AEC_GRAMMAR_H_
#define AEC_GRAMMAR_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aec/textcore.h"

namespace aec::noise {

// Small generative grammar over Burmese syllables (time, subject, place,
// object, verb and sentence-final slots) used to build seeded ground-truth
// corpora when no real transcripts are available.
std::vector<text::SyllableSequence> GenerateGrammarSentences(size_t count,
                                                             uint64_t seed);

// Every syllable the grammar can emit, sorted.
std::vector<std::string> GrammarVocabulary();

}  // namespace aec::noise

#endif  // AEC_GRAMMAR_H_
