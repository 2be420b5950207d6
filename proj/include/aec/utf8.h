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

#ifndef AEC_UTF8_H_
#define AEC_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace aec::utf8 {

// Invalid sequences decode to U+FFFD.
std::u32string Decode(std::string_view bytes);
std::string Encode(std::u32string_view codepoints);
void Append(char32_t cp, std::string* out);

// Number of codepoints.
size_t Length(std::string_view bytes);

// Splits on ASCII spaces, dropping empty fields.
std::vector<std::string> SplitSpaces(std::string_view line);

std::string CodepointLabel(char32_t cp);  // "U+1039"

}  // namespace aec::utf8

#endif  // AEC_UTF8_H_
