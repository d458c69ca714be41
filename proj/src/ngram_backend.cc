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

#include "shannon/ngram_backend.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <map>
#include <set>
#include <span>

#include "shannon/error.h"
#include "shannon/hash.h"
#include "shannon/text.h"

namespace shannon {
namespace {

constexpr const char* kModelFormat = "shannon-ngram";
constexpr int kModelVersion = 1;

std::string pack(const int32_t* ids, size_t n) {
  std::string key(n * sizeof(int32_t), '\0');
  if (n > 0) std::memcpy(key.data(), ids, key.size());
  return key;
}

std::vector<int32_t> unpack(const std::string& key) {
  std::vector<int32_t> ids(key.size() / sizeof(int32_t));
  if (!ids.empty()) std::memcpy(ids.data(), key.data(), key.size());
  return ids;
}

}  // namespace

void NGramConfig::validate() const {
  if (order < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be positive");
  }
  if (!(cache_weight >= 0.0 && cache_weight < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cache weight must be in [0, 1)");
  }
  if (cache_order != 1 && cache_order != 2) {
    throw Error(ErrorCode::kInvalidArgument, "cache order must be 1 or 2");
  }
  if (context_limit == 0) {
    throw Error(ErrorCode::kInvalidArgument, "context limit must be positive");
  }
}

// Per-request state: n-gram context and the sliding prompt cache.
class NGramBackend::Scorer {
 public:
  Scorer(const NGramBackend& model, std::span<const int32_t> prompt,
         size_t window)
      : model_(model),
        order_(static_cast<size_t>(model.config_.order)),
        vocab_pred_(static_cast<double>(model.vocab_.size() - 1)),
        window_capacity_(window) {
    context_.assign(order_ - 1, kBos);
    for (int32_t id : prompt) observe(id);
  }

  double prob(int32_t id) const {
    if (id == kBos) return 0.0;
    const double w = model_.config_.cache_weight;
    const double ngram = model_.ngram_prob(current_successors(), id);
    if (w == 0.0) return ngram;
    return w * cache_prob(id) + (1.0 - w) * ngram;
  }

  // Highest-probability id; ties go to the lowest id.
  int32_t argmax() const {
    std::vector<int32_t> candidates;
    if (const Successors* s = current_successors()) {
      for (const auto& [id, count] : s->next) candidates.push_back(id);
    }
    if (model_.config_.cache_order == 1) {
      for (const auto& [id, count] : unigram_) candidates.push_back(id);
    } else if (auto it = bigram_.find(previous()); it != bigram_.end()) {
      for (const auto& [id, count] : it->second) candidates.push_back(id);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());

    int32_t best_id = -1;
    double best = -1.0;
    auto consider = [&](int32_t id) {
      const double p = prob(id);
      if (p > best || (p == best && id < best_id)) {
        best = p;
        best_id = id;
      }
    };
    for (int32_t id : candidates) consider(id);
    // All other ids share one probability; only the lowest one can win.
    int32_t other = 1;
    for (int32_t id : candidates) {
      if (id == other) {
        ++other;
      } else if (id > other) {
        break;
      }
    }
    if (static_cast<size_t>(other) < model_.vocab_.size()) consider(other);
    return best_id;
  }

  // Continuation token: extends the n-gram history and the cache.
  void push(int32_t id) {
    context_.push_back(id);
    observe(id);
  }

 private:
  void observe(int32_t id) {
    if (window_capacity_ == 0) return;
    if (!window_.empty()) {
      const int32_t prev = window_.back();
      ++bigram_[prev][id];
      ++bigram_total_[prev];
    }
    window_.push_back(id);
    ++unigram_[id];
    if (window_.size() > window_capacity_) {
      const int32_t oldest = window_.front();
      window_.pop_front();
      decrement(unigram_, oldest);
      const int32_t second = window_.front();
      auto it = bigram_.find(oldest);
      decrement(it->second, second);
      if (it->second.empty()) bigram_.erase(it);
      decrement(bigram_total_, oldest);
    }
  }

  static void decrement(std::unordered_map<int32_t, uint32_t>& m, int32_t key) {
    auto it = m.find(key);
    if (--it->second == 0) m.erase(it);
  }

  int32_t previous() const { return window_.empty() ? kBos : window_.back(); }

  const Successors* current_successors() const {
    return model_.successors(context_.data() + context_.size() - (order_ - 1));
  }

  double cache_prob(int32_t id) const {
    if (model_.config_.cache_order == 1) {
      auto it = unigram_.find(id);
      const double count = it == unigram_.end() ? 0.0 : it->second;
      return (count + 1.0) /
             (static_cast<double>(window_.size()) + vocab_pred_);
    }
    const int32_t prev = previous();
    double count = 0.0;
    double total = 0.0;
    if (auto it = bigram_.find(prev); it != bigram_.end()) {
      if (auto jt = it->second.find(id); jt != it->second.end()) {
        count = jt->second;
      }
      total = bigram_total_.at(prev);
    }
    return (count + 1.0) / (total + vocab_pred_);
  }

  const NGramBackend& model_;
  size_t order_;
  double vocab_pred_;
  size_t window_capacity_;
  std::vector<int32_t> context_;
  std::deque<int32_t> window_;
  std::unordered_map<int32_t, uint32_t> unigram_;
  std::unordered_map<int32_t, std::unordered_map<int32_t, uint32_t>> bigram_;
  std::unordered_map<int32_t, uint32_t> bigram_total_;
};

int32_t NGramBackend::token_id(std::string_view key) const {
  auto it = index_.find(std::string(key));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int32_t> NGramBackend::ids_of(
    const std::vector<std::string>& pieces) const {
  std::vector<int32_t> ids;
  ids.reserve(pieces.size());
  for (const auto& p : pieces) ids.push_back(token_id(piece_key(p)));
  return ids;
}

const NGramBackend::Successors* NGramBackend::successors(
    const int32_t* history) const {
  auto it = counts_.find(pack(history, static_cast<size_t>(config_.order - 1)));
  return it == counts_.end() ? nullptr : &it->second;
}

double NGramBackend::ngram_prob(const Successors* s, int32_t id) const {
  const double alpha = config_.alpha;
  const double vocab_pred = static_cast<double>(vocab_.size() - 1);
  double count = 0.0;
  double total = 0.0;
  if (s != nullptr) {
    total = static_cast<double>(s->total);
    auto it = std::lower_bound(
        s->next.begin(), s->next.end(), id,
        [](const auto& entry, int32_t v) { return entry.first < v; });
    if (it != s->next.end() && it->first == id) count = it->second;
  }
  return (count + alpha) / (total + alpha * vocab_pred);
}

TokenScores NGramBackend::score(const ScoreRequest& request) const {
  auto pieces = split_pieces(request.continuation);
  if (pieces.empty()) {
    throw Error(ErrorCode::kEmptyContinuation, "continuation is empty");
  }
  const auto prompt_ids = ids_of(split_pieces(request.prompt));
  const auto ids = ids_of(pieces);
  const size_t limit = config_.context_limit;
  const size_t kept = kept_prompt_tokens(prompt_ids.size(), ids.size(), limit);

  Scorer scorer(*this,
                std::span<const int32_t>(prompt_ids).last(kept), limit - 1);
  TokenScores out;
  out.surprisals.reserve(ids.size());
  if (request.want_greedy) out.greedy_correct.emplace();
  for (int32_t id : ids) {
    out.surprisals.push_back(std::max(0.0, -std::log(scorer.prob(id))));
    if (request.want_greedy) {
      out.greedy_correct->push_back(scorer.argmax() == id);
    }
    scorer.push(id);
  }
  out.tokens = std::move(pieces);
  out.truncated = kept < prompt_ids.size() || ids.size() > limit;
  out.model_id = model_id();
  out.context_limit = limit;
  return out;
}

std::vector<double> NGramBackend::next_token_distribution(
    std::string_view prompt, std::string_view continuation,
    size_t position) const {
  const auto prompt_ids = ids_of(split_pieces(prompt));
  const auto ids = ids_of(split_pieces(continuation));
  if (position > ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "position past the continuation");
  }
  const size_t limit = config_.context_limit;
  const size_t kept =
      kept_prompt_tokens(prompt_ids.size(), std::max<size_t>(ids.size(), 1),
                         limit);
  Scorer scorer(*this,
                std::span<const int32_t>(prompt_ids).last(kept), limit - 1);
  for (size_t i = 0; i < position; ++i) scorer.push(ids[i]);
  std::vector<double> dist(vocab_.size());
  for (size_t id = 0; id < vocab_.size(); ++id) {
    dist[id] = scorer.prob(static_cast<int32_t>(id));
  }
  return dist;
}

std::string NGramBackend::model_id() const {
  return "reference-ngram-" + std::to_string(config_.order) + "-" +
         fingerprint_.substr(0, 8);
}

nlohmann::json NGramBackend::describe() const {
  return {{"type", "reference-ngram"},
          {"order", config_.order},
          {"alpha", config_.alpha},
          {"cache_weight", config_.cache_weight},
          {"cache_order", config_.cache_order},
          {"context_limit", config_.context_limit},
          {"fingerprint", fingerprint_}};
}

NGramBackend NGramBackend::with_config(const NGramConfig& config) const {
  config.validate();
  if (config.order != config_.order) {
    throw Error(ErrorCode::kInvalidArgument,
                "model was trained with order " + std::to_string(config_.order));
  }
  NGramBackend copy = *this;
  copy.config_ = config;
  return copy;
}

void NGramBackend::finalize() {
  index_.clear();
  for (size_t i = 3; i < vocab_.size(); ++i) {
    index_.emplace(vocab_[i], static_cast<int32_t>(i));
  }
  // Fingerprint covers the counts only; smoothing and cache settings are
  // part of describe().
  nlohmann::json counts = to_json();
  counts.erase("alpha");
  counts.erase("cache_weight");
  counts.erase("cache_order");
  counts.erase("context_limit");
  fingerprint_ = hex64(fnv1a64(counts.dump()));
}

nlohmann::json NGramBackend::to_json() const {
  std::vector<std::string> keys;
  keys.reserve(counts_.size());
  for (const auto& [key, _] : counts_) keys.push_back(key);
  // Sort by unpacked ids so the file layout is platform independent.
  std::vector<std::pair<std::vector<int32_t>, const Successors*>> sorted;
  for (const auto& key : keys) sorted.emplace_back(unpack(key), &counts_.at(key));
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [history, succ] : sorted) {
    for (const auto& [id, count] : succ->next) {
      nlohmann::json row = history;
      row.push_back(id);
      row.push_back(count);
      counts.push_back(std::move(row));
    }
  }
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"order", config_.order},
          {"alpha", config_.alpha},
          {"cache_weight", config_.cache_weight},
          {"cache_order", config_.cache_order},
          {"context_limit", config_.context_limit},
          {"vocab", std::vector<std::string>(vocab_.begin() + 3, vocab_.end())},
          {"counts", std::move(counts)}};
}

NGramBackend NGramBackend::from_json(const nlohmann::json& model) {
  try {
    if (model.at("format") != kModelFormat ||
        model.at("version") != kModelVersion) {
      throw Error(ErrorCode::kSchemaError, "not a shannon-ngram v1 model");
    }
    NGramBackend backend;
    backend.config_.order = model.at("order").get<int>();
    backend.config_.alpha = model.at("alpha").get<double>();
    backend.config_.cache_weight = model.at("cache_weight").get<double>();
    backend.config_.cache_order = model.at("cache_order").get<int>();
    backend.config_.context_limit = model.at("context_limit").get<size_t>();
    backend.config_.validate();
    backend.vocab_ = {"<s>", "</s>", "<unk>"};
    for (const auto& word : model.at("vocab")) {
      backend.vocab_.push_back(word.get<std::string>());
    }
    const size_t hist = static_cast<size_t>(backend.config_.order - 1);
    const auto vocab_size = static_cast<int64_t>(backend.vocab_.size());
    std::vector<int32_t> history(hist);
    for (const auto& row : model.at("counts")) {
      if (!row.is_array() || row.size() != hist + 2) {
        throw Error(ErrorCode::kSchemaError, "malformed count row");
      }
      for (size_t i = 0; i < hist + 1; ++i) {
        const auto id = row[i].get<int64_t>();
        if (id < 0 || id >= vocab_size) {
          throw Error(ErrorCode::kSchemaError, "count row id out of range");
        }
      }
      for (size_t i = 0; i < hist; ++i) history[i] = row[i].get<int32_t>();
      auto& succ = backend.counts_[pack(history.data(), hist)];
      const auto count = row[hist + 1].get<uint32_t>();
      succ.next.emplace_back(row[hist].get<int32_t>(), count);
      succ.total += count;
    }
    for (auto& [_, succ] : backend.counts_) {
      std::sort(succ.next.begin(), succ.next.end());
    }
    backend.finalize();
    return backend;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("bad model file: ") + e.what());
  }
}

NGramBackend train_ngram(const std::vector<std::string>& corpus,
                         const NGramConfig& config) {
  config.validate();
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus has no documents");
  }
  std::vector<std::vector<std::string>> sentences;
  std::set<std::string> words;
  for (const auto& text : corpus) {
    std::vector<Span> spans;
    try {
      spans = split_sentences(text);
    } catch (const Error&) {
      continue;  // blank document
    }
    for (const Span& span : spans) {
      std::vector<std::string> keys;
      for (const auto& piece :
           split_pieces(std::string_view(text).substr(span.begin, span.size()))) {
        keys.push_back(piece_key(piece));
        words.insert(keys.back());
      }
      if (!keys.empty()) sentences.push_back(std::move(keys));
    }
  }
  if (sentences.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus has no tokens");
  }

  NGramBackend backend;
  backend.config_ = config;
  backend.vocab_ = {"<s>", "</s>", "<unk>"};
  backend.vocab_.insert(backend.vocab_.end(), words.begin(), words.end());
  backend.finalize();  // builds index_

  const size_t hist = static_cast<size_t>(config.order - 1);
  std::map<std::string, std::map<int32_t, uint32_t>> counts;
  std::vector<int32_t> seq;
  for (const auto& keys : sentences) {
    seq.assign(hist, NGramBackend::kBos);
    for (const auto& k : keys) seq.push_back(backend.token_id(k));
    seq.push_back(NGramBackend::kEos);
    for (size_t t = hist; t < seq.size(); ++t) {
      ++counts[pack(seq.data() + t - hist, hist)][seq[t]];
    }
  }
  for (const auto& [key, next] : counts) {
    auto& succ = backend.counts_[key];
    for (const auto& [id, count] : next) {
      succ.next.emplace_back(id, count);
      succ.total += count;
    }
  }
  backend.finalize();
  return backend;
}

}  // namespace shannon
