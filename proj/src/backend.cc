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

#include "shannon/backend.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "shannon/error.h"

namespace shannon {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u);
}

}  // namespace

double TokenScores::total() const {
  return std::accumulate(surprisals.begin(), surprisals.end(), 0.0);
}

size_t TokenScores::greedy_hits() const {
  if (!greedy_correct) return 0;
  size_t hits = 0;
  for (bool g : *greedy_correct) hits += g ? 1 : 0;
  return hits;
}

size_t Backend::count_tokens(std::string_view text) const {
  return split_pieces(text).size();
}

std::vector<std::string> split_pieces(std::string_view text) {
  std::vector<std::string> pieces;
  const size_t n = text.size();
  size_t i = 0;
  while (i < n) {
    const size_t start = i;
    while (i < n && is_space(text[i])) ++i;
    if (i == n) {
      if (!pieces.empty()) pieces.back().append(text.substr(start));
      break;
    }
    if (is_ascii_punct(text[i])) {
      ++i;
    } else {
      while (i < n && !is_space(text[i]) && !is_ascii_punct(text[i])) ++i;
    }
    pieces.emplace_back(text.substr(start, i - start));
  }
  return pieces;
}

std::string piece_key(std::string_view piece) {
  size_t b = 0;
  size_t e = piece.size();
  while (b < e && is_space(piece[b])) ++b;
  while (e > b && is_space(piece[e - 1])) --e;
  std::string key(piece.substr(b, e - b));
  for (char& c : key) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return key;
}

size_t kept_prompt_tokens(size_t prompt_tokens, size_t continuation_tokens,
                          size_t context_limit) {
  if (continuation_tokens >= context_limit) return 0;
  return std::min(prompt_tokens, context_limit - continuation_tokens);
}

void validate_token_scores(const TokenScores& scores,
                           const ScoreRequest& request, bool check_roundtrip) {
  if (scores.tokens.size() != scores.surprisals.size()) {
    throw Error(ErrorCode::kProtocolError,
                "tokens/surprisals length mismatch (" +
                    std::to_string(scores.tokens.size()) + " vs " +
                    std::to_string(scores.surprisals.size()) + ")");
  }
  if (scores.tokens.empty()) {
    throw Error(ErrorCode::kProtocolError, "no tokens for a non-empty continuation");
  }
  for (size_t i = 0; i < scores.surprisals.size(); ++i) {
    const double s = scores.surprisals[i];
    if (!std::isfinite(s) || s < 0.0) {
      throw Error(ErrorCode::kProtocolError,
                  "surprisal " + std::to_string(i) + " is negative or not finite");
    }
  }
  if (request.want_greedy) {
    if (!scores.greedy_correct) {
      throw Error(ErrorCode::kProtocolError, "greedy_correct missing");
    }
    if (scores.greedy_correct->size() != scores.tokens.size()) {
      throw Error(ErrorCode::kProtocolError, "greedy_correct length mismatch");
    }
  } else if (scores.greedy_correct) {
    throw Error(ErrorCode::kProtocolError, "greedy_correct present but not requested");
  }
  if (check_roundtrip) {
    std::string joined;
    for (const auto& t : scores.tokens) joined += t;
    if (joined != request.continuation) {
      throw Error(ErrorCode::kProtocolError,
                  "tokens do not reconstruct the continuation");
    }
  }
}

UniformBackend::UniformBackend(size_t vocab_size, size_t context_limit,
                               bool greedy)
    : vocab_size_(vocab_size), context_limit_(context_limit), greedy_(greedy) {
  if (vocab_size_ < 2 || context_limit_ == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "uniform backend needs vocab_size >= 2 and a positive context limit");
  }
}

TokenScores UniformBackend::score(const ScoreRequest& request) const {
  auto tokens = split_pieces(request.continuation);
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyContinuation, "continuation is empty");
  }
  const size_t prompt_tokens = count_tokens(request.prompt);
  TokenScores out;
  out.surprisals.assign(tokens.size(),
                        std::log(static_cast<double>(vocab_size_)));
  if (request.want_greedy) {
    if (!greedy_) {
      throw Error(ErrorCode::kGreedyUnsupported, model_id());
    }
    out.greedy_correct = std::vector<bool>(tokens.size(), false);
  }
  out.truncated =
      kept_prompt_tokens(prompt_tokens, tokens.size(), context_limit_) <
          prompt_tokens ||
      tokens.size() > context_limit_;
  out.tokens = std::move(tokens);
  out.model_id = model_id();
  out.context_limit = context_limit_;
  return out;
}

std::string UniformBackend::model_id() const {
  return "uniform-" + std::to_string(vocab_size_);
}

nlohmann::json UniformBackend::describe() const {
  return {{"type", "uniform"},
          {"vocab_size", vocab_size_},
          {"context_limit", context_limit_},
          {"greedy", greedy_}};
}

}  // namespace shannon
