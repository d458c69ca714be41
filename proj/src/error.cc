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

#include "shannon/error.h"

namespace shannon {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyDocument: return "EmptyDocument";
    case ErrorCode::kEmptySummary: return "EmptySummary";
    case ErrorCode::kEmptyContinuation: return "EmptyContinuation";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kDegenerateNormalization: return "DegenerateNormalization";
    case ErrorCode::kGreedyUnsupported: return "GreedyUnsupported";
    case ErrorCode::kUndefinedCorrelation: return "UndefinedCorrelation";
    case ErrorCode::kIncompleteGrid: return "IncompleteGrid";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kIntegrityError: return "IntegrityError";
    case ErrorCode::kAbortBatch: return "AbortBatch";
    case ErrorCode::kNeedTwoDocuments: return "NeedTwoDocuments";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace shannon
