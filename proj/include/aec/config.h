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

#ifndef AEC_CONFIG_H_
#define AEC_CONFIG_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace aec::config {

// "key = value" lines; '#' starts a comment. Later assignments override
// earlier ones.
class KeyValues {
 public:
  static KeyValues Parse(std::string_view text);
  static KeyValues FromFile(const std::string& path);

  void Set(const std::string& key, const std::string& value);
  bool Has(const std::string& key) const;

  std::string GetString(const std::string& key, const std::string& fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  long GetInt(const std::string& key, long fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string ToText() const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace aec::config

#endif  // AEC_CONFIG_H_
