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

#include "shannon/remote_backend.h"

#include <thread>

#include "httplib.h"
#include "shannon/error.h"

namespace shannon {
namespace {

std::string excerpt(const std::string& body) {
  constexpr size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

template <typename T>
T field(const nlohmann::json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end()) {
    throw Error(ErrorCode::kProtocolError, std::string("missing field '") + name + "'");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kProtocolError,
                std::string("field '") + name + "' has the wrong type");
  }
}

nlohmann::json parse_body(const std::string& body) {
  auto parsed = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::kProtocolError, "response is not a JSON object: " + excerpt(body));
  }
  return parsed;
}

}  // namespace

nlohmann::json to_json(const ScoreRequest& request) {
  return {{"prompt", request.prompt},
          {"continuation", request.continuation},
          {"want_greedy", request.want_greedy}};
}

nlohmann::json to_json(const TokenScores& scores) {
  nlohmann::json out = {{"tokens", scores.tokens},
                        {"surprisals", scores.surprisals},
                        {"truncated", scores.truncated},
                        {"model_id", scores.model_id}};
  if (scores.greedy_correct) out["greedy_correct"] = *scores.greedy_correct;
  return out;
}

ScoreRequest score_request_from_json(const nlohmann::json& body) {
  if (!body.is_object()) {
    throw Error(ErrorCode::kProtocolError, "request body is not an object");
  }
  ScoreRequest request;
  request.prompt = field<std::string>(body, "prompt");
  request.continuation = field<std::string>(body, "continuation");
  request.want_greedy = field<bool>(body, "want_greedy");
  return request;
}

TokenScores token_scores_from_json(const nlohmann::json& body) {
  TokenScores scores;
  scores.tokens = field<std::vector<std::string>>(body, "tokens");
  scores.surprisals = field<std::vector<double>>(body, "surprisals");
  if (body.contains("greedy_correct")) {
    scores.greedy_correct = field<std::vector<bool>>(body, "greedy_correct");
  }
  scores.truncated = field<bool>(body, "truncated");
  scores.model_id = field<std::string>(body, "model_id");
  return scores;
}

RemoteBackend::RemoteBackend(RemoteOptions options)
    : options_(std::move(options)) {
  const std::string& url = options_.endpoint;
  constexpr std::string_view kScheme = "http://";
  if (!url.starts_with(kScheme)) {
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint must be an http:// URL: '" + url + "'");
  }
  const size_t slash = url.find('/', kScheme.size());
  scheme_host_port_ = url.substr(0, slash);
  if (slash != std::string::npos) base_path_ = url.substr(slash);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  if (options_.retries < 0) options_.retries = 0;
  if (options_.max_concurrency == 0) options_.max_concurrency = 1;
  in_flight_ = std::make_unique<std::counting_semaphore<>>(
      static_cast<std::ptrdiff_t>(options_.max_concurrency));

  const Reply reply = request_with_retries("GET", "/v1/info", "");
  if (reply.status != 200) {
    throw Error(ErrorCode::kProtocolError,
                "/v1/info returned status " + std::to_string(reply.status) +
                    ": " + excerpt(reply.body));
  }
  const auto info = parse_body(reply.body);
  model_id_ = field<std::string>(info, "model_id");
  const auto limit = field<int64_t>(info, "context_limit");
  if (limit <= 0) {
    throw Error(ErrorCode::kProtocolError, "context_limit must be positive");
  }
  context_limit_ = static_cast<size_t>(limit);
  if (field<std::string>(info, "logprob_base") != "e") {
    throw Error(ErrorCode::kProtocolError, "logprob_base must be \"e\"");
  }
}

RemoteBackend::~RemoteBackend() = default;

RemoteBackend::Reply RemoteBackend::request_with_retries(
    const std::string& method, const std::string& path,
    const std::string& body) const {
  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.retry_backoff * attempt);
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    const std::string full_path = base_path_ + path;
    auto result = method == "GET"
                      ? client.Get(full_path)
                      : client.Post(full_path, body, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 500) {
      last_error = "status " + std::to_string(result->status) + ": " +
                   excerpt(result->body);
      continue;
    }
    return {result->status, result->body};
  }
  throw Error(ErrorCode::kBackendUnavailable,
              options_.endpoint + path + " failed after " +
                  std::to_string(options_.retries + 1) +
                  " attempt(s): " + last_error);
}

TokenScores RemoteBackend::score(const ScoreRequest& request) const {
  const auto pieces = split_pieces(request.continuation);
  if (pieces.empty()) {
    throw Error(ErrorCode::kEmptyContinuation, "continuation is empty");
  }
  ScoreRequest sent = request;
  bool trimmed = false;
  const auto prompt_pieces = split_pieces(request.prompt);
  const size_t kept =
      kept_prompt_tokens(prompt_pieces.size(), pieces.size(), context_limit_);
  if (kept < prompt_pieces.size()) {
    sent.prompt.clear();
    for (size_t i = prompt_pieces.size() - kept; i < prompt_pieces.size(); ++i) {
      sent.prompt += prompt_pieces[i];
    }
    trimmed = true;
  }

  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<>* sem;
    ~Release() { sem->release(); }
  } release{in_flight_.get()};

  const Reply reply = request_with_retries("POST", "/v1/score", to_json(sent).dump());
  if (reply.status == 400 && request.want_greedy &&
      reply.body.find(error_code_name(ErrorCode::kGreedyUnsupported)) !=
          std::string::npos) {
    throw Error(ErrorCode::kGreedyUnsupported, model_id_);
  }
  if (reply.status != 200) {
    throw Error(ErrorCode::kProtocolError,
                "/v1/score returned status " + std::to_string(reply.status) +
                    ": " + excerpt(reply.body));
  }
  TokenScores scores;
  try {
    scores = token_scores_from_json(parse_body(reply.body));
    validate_token_scores(scores, request, options_.check_roundtrip);
  } catch (const Error& e) {
    throw Error(ErrorCode::kProtocolError, e.detail() + " (response: " + excerpt(reply.body) + ")");
  }
  scores.truncated = scores.truncated || trimmed;
  scores.context_limit = context_limit_;
  return scores;
}

nlohmann::json RemoteBackend::describe() const {
  return {{"type", "remote"},
          {"endpoint", options_.endpoint},
          {"model_id", model_id_},
          {"context_limit", context_limit_}};
}

void mount_score_service(httplib::Server& server, const Backend& backend) {
  server.Get("/v1/info", [&backend](const httplib::Request&, httplib::Response& res) {
    const nlohmann::json info = {{"model_id", backend.model_id()},
                                 {"context_limit", backend.context_limit()},
                                 {"logprob_base", "e"}};
    res.set_content(info.dump(), "application/json");
  });
  server.Post("/v1/score", [&backend](const httplib::Request& req,
                                      httplib::Response& res) {
    auto reject = [&res](int status, const std::string& message) {
      res.status = status;
      res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
    };
    ScoreRequest request;
    try {
      request = score_request_from_json(nlohmann::json::parse(req.body));
    } catch (const std::exception& e) {
      reject(400, e.what());
      return;
    }
    try {
      res.set_content(to_json(backend.score(request)).dump(), "application/json");
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::kEmptyContinuation: reject(422, e.what()); break;
        case ErrorCode::kBackendUnavailable: reject(503, e.what()); break;
        case ErrorCode::kGreedyUnsupported:
        case ErrorCode::kInvalidArgument: reject(400, e.what()); break;
        default: reject(500, e.what()); break;
      }
    }
  });
}

}  // namespace shannon
