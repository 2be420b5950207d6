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

#ifndef AEC_COMMON_H_
#define AEC_COMMON_H_

#include <stdexcept>
#include <string>

namespace aec {

enum class ErrorKind {
  kCharOutsideRuleSet,
  kLineCountMismatch,
  kIoFailure,
  kLengthMismatch,
  kEmptyCorpus,
  kDimMismatch,
  kSequenceTooLong,
  kEmptyReference,
  kFormat,
  kUsage,
  kInternal,
};

const char* ErrorKindName(ErrorKind kind);

// Every recoverable failure in the library is reported as an Error carrying
// its kind, so callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind),
        message_(what) {}

  ErrorKind kind() const { return kind_; }
  // what() without the kind prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace aec

#endif  // AEC_COMMON_H_
