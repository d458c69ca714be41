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

#ifndef SHANNON_BACKEND_H_
#define SHANNON_BACKEND_H_

// Token-scoring backends. A backend takes a prompt and a continuation and
// returns, for every continuation token, its surprisal in nats
// (-ln p(token | prompt, earlier continuation tokens)) and optionally whether
// the token was the model's greedy (argmax) choice.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace shannon {

struct ScoreRequest {
  std::string prompt;
  std::string continuation;
  bool want_greedy = false;
};

struct TokenScores {
  std::vector<std::string> tokens;
  std::vector<double> surprisals;
  std::optional<std::vector<bool>> greedy_correct;
  bool truncated = false;
  std::string model_id;
  size_t context_limit = 0;

  double total() const;
  size_t greedy_hits() const;

  friend bool operator==(const TokenScores&, const TokenScores&) = default;
};

class Backend {
 public:
  virtual ~Backend() = default;

  // Thread-safe. Throws Error (EmptyContinuation, BackendUnavailable,
  // ProtocolError).
  virtual TokenScores score(const ScoreRequest& request) const = 0;

  virtual std::string model_id() const = 0;
  virtual size_t context_limit() const = 0;
  virtual bool supports_greedy() const { return true; }

  // Tokens `text` occupies in the backend context. Exact for in-process
  // backends; remote backends return the word-piece estimate.
  virtual size_t count_tokens(std::string_view text) const;

  // Upper bound on requests in flight; 0 means unbounded.
  virtual size_t max_concurrency() const { return 0; }

  // Canonical description folded into config hashes.
  virtual nlohmann::json describe() const = 0;
};

// Word-piece tokenizer shared by the in-process backends: a piece is a run of
// non-space, non-punctuation bytes or a single ASCII punctuation character,
// carrying any whitespace that precedes it. Trailing whitespace attaches to
// the last piece, so concatenating the pieces gives back `text`.
std::vector<std::string> split_pieces(std::string_view text);

// Vocabulary key of a piece: whitespace trimmed, ASCII lowercased.
std::string piece_key(std::string_view piece);

// Prompt tokens that survive left truncation so that prompt + continuation
// fit into `context_limit`.
size_t kept_prompt_tokens(size_t prompt_tokens, size_t continuation_tokens,
                          size_t context_limit);

// Checks the TokenScores invariants against the request that produced them:
// equal lengths, finite non-negative surprisals, greedy flags present iff
// requested, and (if `check_roundtrip`) tokens concatenating to the
// continuation. Throws ProtocolError.
void validate_token_scores(const TokenScores& scores,
                           const ScoreRequest& request, bool check_roundtrip);

// Every token has probability 1/vocab_size regardless of context. Greedy
// flags are all false: the argmax tie goes to the lowest identifier, a
// reserved marker that never appears in text.
class UniformBackend : public Backend {
 public:
  explicit UniformBackend(size_t vocab_size, size_t context_limit = 1024,
                          bool greedy = true);

  TokenScores score(const ScoreRequest& request) const override;
  std::string model_id() const override;
  size_t context_limit() const override { return context_limit_; }
  bool supports_greedy() const override { return greedy_; }
  nlohmann::json describe() const override;

 private:
  size_t vocab_size_;
  size_t context_limit_;
  bool greedy_;
};

}  // namespace shannon

#endif  // SHANNON_BACKEND_H_
