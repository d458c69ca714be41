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

#ifndef SHANNON_REMOTE_BACKEND_H_
#define SHANNON_REMOTE_BACKEND_H_

// Client (and a reusable server-side binding) for the token-scoring wire
// protocol:
//
//   GET  /v1/info  -> {"model_id", "context_limit", "logprob_base": "e"}
//   POST /v1/score {"prompt", "continuation", "want_greedy"}
//                  -> {"tokens", "surprisals", "greedy_correct"?,
//                      "truncated", "model_id"}
//
// 400 {"error"} for malformed requests, 422 for an empty continuation, 503
// while the model is loading.

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "shannon/backend.h"

namespace httplib {
class Server;
}

namespace shannon {

nlohmann::json to_json(const ScoreRequest& request);
nlohmann::json to_json(const TokenScores& scores);
// Both throw ProtocolError on missing or mistyped fields.
ScoreRequest score_request_from_json(const nlohmann::json& body);
TokenScores token_scores_from_json(const nlohmann::json& body);

struct RemoteOptions {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080" or with a base path
  std::chrono::milliseconds timeout{30000};
  int retries = 3;
  size_t max_concurrency = 1;
  bool check_roundtrip = true;
  std::chrono::milliseconds retry_backoff{100};
};

class RemoteBackend : public Backend {
 public:
  // Fetches /v1/info. Throws BackendUnavailable if unreachable after the
  // retry budget, ProtocolError if the info payload is malformed.
  explicit RemoteBackend(RemoteOptions options);
  ~RemoteBackend() override;

  // The prompt is pre-trimmed from the left so that its word-piece estimate
  // plus the continuation's fits the declared context limit; the server does
  // the exact truncation. Responses are validated before they are returned.
  TokenScores score(const ScoreRequest& request) const override;

  std::string model_id() const override { return model_id_; }
  size_t context_limit() const override { return context_limit_; }
  size_t max_concurrency() const override { return options_.max_concurrency; }
  nlohmann::json describe() const override;

 private:
  struct Reply {
    int status = 0;
    std::string body;
  };
  Reply request_with_retries(const std::string& method, const std::string& path,
                             const std::string& body) const;

  RemoteOptions options_;
  std::string scheme_host_port_;
  std::string base_path_;
  std::string model_id_;
  size_t context_limit_ = 0;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

// Serves `backend` over the wire protocol on `server`.
void mount_score_service(httplib::Server& server, const Backend& backend);

}  // namespace shannon

#endif  // SHANNON_REMOTE_BACKEND_H_
