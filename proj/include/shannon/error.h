// Copyright 2026 The shannon-eval Authors.
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

#ifndef SHANNON_ERROR_H_
#define SHANNON_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace shannon {

// Failure categories surfaced by the library. The CLI maps each one to a
// stable exit code.
enum class ErrorCode {
  kInvalidArgument,
  kEmptyDocument,
  kEmptySummary,
  kEmptyContinuation,
  kEmptyCorpus,
  kBackendUnavailable,
  kProtocolError,
  kDegenerateNormalization,
  kGreedyUnsupported,
  kUndefinedCorrelation,
  kIncompleteGrid,
  kSchemaError,
  kIntegrityError,
  kAbortBatch,
  kNeedTwoDocuments,
  kIoError,
};

// Stable CamelCase name, e.g. "DegenerateNormalization".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }

  // Message without the code prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace shannon

#endif  // SHANNON_ERROR_H_
