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

#include "aec/config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aec/common.h"

namespace aec::config {

namespace {

std::string Strip(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

KeyValues KeyValues::Parse(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = Strip(line);
    if (body.empty()) continue;
    const size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kFormat,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = Strip(std::string_view(body).substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorKind::kFormat,
                  "config line " + std::to_string(line_no) + ": empty key");
    }
    kv.Set(key, Strip(std::string_view(body).substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::FromFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

void KeyValues::Set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

bool KeyValues::Has(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::string KeyValues::GetString(const std::string& key,
                                 const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValues::GetDouble(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0') {
    throw Error(ErrorKind::kFormat, "config key '" + key + "' is not a number");
  }
  return v;
}

long KeyValues::GetInt(const std::string& key, long fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') {
    throw Error(ErrorKind::kFormat, "config key '" + key + "' is not an integer");
  }
  return v;
}

bool KeyValues::GetBool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::kFormat, "config key '" + key + "' is not a boolean");
}

std::string KeyValues::ToText() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace aec::config
