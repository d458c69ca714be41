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

#ifndef SHANNON_NGRAM_BACKEND_H_
#define SHANNON_NGRAM_BACKEND_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "shannon/backend.h"

namespace shannon {

struct NGramConfig {
  int order = 3;
  double alpha = 0.1;          // add-alpha smoothing
  double cache_weight = 0.5;   // interpolation weight of the prompt cache
  int cache_order = 2;         // 1: unigram cache, 2: bigram cache
  size_t context_limit = 1024;

  // Throws InvalidArgument unless order >= 1, alpha > 0,
  // 0 <= cache_weight < 1, cache_order in {1, 2}, context_limit >= 1.
  void validate() const;
};

// Deterministic in-process reference language model.
//
//   p(x | ctx) = w * cache(x | history) + (1 - w) * ngram(x | last n-1 ids)
//
// The n-gram part is add-alpha smoothed over counts from the training
// sentences, each padded with n-1 BOS markers and closed by EOS. Its history
// is the continuation alone, padded the same way, so the prompt reaches the
// model only through the cache. The cache is
// an add-one distribution over the tokens seen so far in this request (the
// kept prompt plus already-scored continuation tokens): unigram counts for
// cache_order 1, counts of bigrams starting at the previous token for
// cache_order 2. Both parts are normalized over the prediction vocabulary,
// which is every identifier except BOS. Unknown words map to UNK.
//
// Immutable after construction; safe to share between threads.
class NGramBackend : public Backend {
 public:
  static constexpr int32_t kBos = 0;
  static constexpr int32_t kEos = 1;
  static constexpr int32_t kUnk = 2;

  TokenScores score(const ScoreRequest& request) const override;
  std::string model_id() const override;
  size_t context_limit() const override { return config_.context_limit; }
  nlohmann::json describe() const override;

  const NGramConfig& config() const { return config_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  int32_t token_id(std::string_view key) const;
  const std::string& fingerprint() const { return fingerprint_; }

  // Probability of every vocabulary id (BOS included, always 0) for
  // continuation token `position`, with the truncation score() applies.
  std::vector<double> next_token_distribution(std::string_view prompt,
                                              std::string_view continuation,
                                              size_t position) const;

  // Same counts, different smoothing / cache settings. The order must match.
  NGramBackend with_config(const NGramConfig& config) const;

  nlohmann::json to_json() const;
  static NGramBackend from_json(const nlohmann::json& model);

  friend NGramBackend train_ngram(const std::vector<std::string>& corpus,
                                  const NGramConfig& config);

 private:
  struct Successors {
    uint64_t total = 0;
    std::vector<std::pair<int32_t, uint32_t>> next;  // sorted by id
  };
  class Scorer;

  NGramBackend() = default;
  void finalize();
  std::vector<int32_t> ids_of(const std::vector<std::string>& pieces) const;
  const Successors* successors(const int32_t* history) const;
  double ngram_prob(const Successors* s, int32_t id) const;

  NGramConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int32_t> index_;
  // Key: history of order-1 ids, packed little-endian.
  std::unordered_map<std::string, Successors> counts_;
  std::string fingerprint_;
};

// Trains on the sentences of every corpus document. Throws EmptyCorpus when
// the corpus yields no tokens.
NGramBackend train_ngram(const std::vector<std::string>& corpus,
                         const NGramConfig& config);

}  // namespace shannon

#endif  // SHANNON_NGRAM_BACKEND_H_
