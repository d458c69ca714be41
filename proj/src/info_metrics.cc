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

#include "shannon/info_metrics.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace shannon {
namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  });
}

std::optional<std::string_view> effective_helper(
    std::optional<std::string_view> helper) {
  if (helper && is_blank(*helper)) return std::nullopt;
  return helper;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Every index runs;
// the error from the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(size_t n, size_t workers, Fn fn) {
  workers = std::clamp<size_t>(workers, 1, std::max<size_t>(n, 1));
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void ScoringConfig::validate() const {
  if (!(degeneracy_epsilon > 0.0) || !std::isfinite(degeneracy_epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  }
}

nlohmann::json ScoringConfig::to_json() const {
  nlohmann::json k = k_upstream == kAllUpstream ? nlohmann::json("all")
                                                : nlohmann::json(k_upstream);
  return {{"k_upstream", k},
          {"helper_separator", helper_separator},
          {"degeneracy_epsilon", degeneracy_epsilon},
          {"want_greedy", want_greedy}};
}

std::string_view scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::kUnconditional: return "unconditional";
    case Scenario::kGivenSummary: return "given_summary";
    case Scenario::kGivenDocument: return "given_document";
  }
  return "unknown";
}

std::string_view metric_key(Metric metric) {
  switch (metric) {
    case Metric::kShannonScore: return "shannon_score";
    case Metric::kInfoDiff: return "info_diff";
    case Metric::kBlancShannon: return "blanc_shannon";
  }
  return "unknown";
}

std::string_view metric_flag(Metric metric) {
  switch (metric) {
    case Metric::kShannonScore: return "shannon";
    case Metric::kInfoDiff: return "infodiff";
    case Metric::kBlancShannon: return "blanc";
  }
  return "unknown";
}

const std::vector<Metric>& all_metrics() {
  static const auto* const kAll = new std::vector<Metric>{
      Metric::kShannonScore, Metric::kInfoDiff, Metric::kBlancShannon};
  return *kAll;
}

std::vector<Metric> parse_metrics(std::string_view list) {
  std::vector<bool> wanted(3, false);
  size_t pos = 0;
  while (pos <= list.size()) {
    size_t comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    std::string_view name = list.substr(pos, comma - pos);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (!name.empty()) {
      bool found = false;
      for (Metric m : all_metrics()) {
        if (name == metric_flag(m) || name == metric_key(m)) {
          wanted[static_cast<size_t>(m)] = true;
          found = true;
        }
      }
      if (name == "all") {
        std::fill(wanted.begin(), wanted.end(), true);
        found = true;
      }
      if (!found) {
        throw Error(ErrorCode::kInvalidArgument,
                    "unknown metric '" + std::string(name) + "'");
      }
    }
    pos = comma + 1;
  }
  std::vector<Metric> out;
  for (Metric m : all_metrics()) {
    if (wanted[static_cast<size_t>(m)]) out.push_back(m);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "no metrics selected");
  return out;
}

std::vector<ScoreRequest> compose_requests(const Document& doc,
                                           std::optional<std::string_view> helper,
                                           const ScoringConfig& config,
                                           const Backend& backend) {
  if (doc.sentences.empty()) {
    throw Error(ErrorCode::kEmptyDocument, "document '" + doc.id + "' has no sentences");
  }
  helper = effective_helper(helper);
  std::string prefix;
  if (helper) {
    prefix.assign(*helper);
    prefix += config.helper_separator;
  }
  const size_t prefix_tokens = helper ? backend.count_tokens(prefix) : 0;
  const size_t limit = backend.context_limit();
  const std::string_view text(doc.text);

  // Token estimate of each sentence together with the whitespace after it.
  std::vector<size_t> upstream_tokens(doc.sentences.size());
  for (size_t j = 0; j + 1 < doc.sentences.size(); ++j) {
    const size_t b = doc.sentences[j].begin;
    upstream_tokens[j] =
        backend.count_tokens(text.substr(b, doc.sentences[j + 1].begin - b));
  }

  std::vector<ScoreRequest> requests;
  requests.reserve(doc.sentences.size());
  for (size_t i = 0; i < doc.sentences.size(); ++i) {
    const std::string_view sentence = doc.sentence(i);
    size_t lo = 0;
    if (config.k_upstream != ScoringConfig::kAllUpstream && i > config.k_upstream) {
      lo = i - config.k_upstream;
    }
    size_t upstream = 0;
    for (size_t j = lo; j < i; ++j) upstream += upstream_tokens[j];
    const size_t needed = backend.count_tokens(sentence);
    while (lo < i && prefix_tokens + upstream + needed > limit) {
      upstream -= upstream_tokens[lo];
      ++lo;
    }
    ScoreRequest request;
    request.prompt = prefix;
    if (lo < i) {
      const size_t b = doc.sentences[lo].begin;
      request.prompt.append(text.substr(b, doc.sentences[i].begin - b));
    }
    request.continuation.assign(sentence);
    request.want_greedy = config.want_greedy;
    requests.push_back(std::move(request));
  }
  return requests;
}

InfoProfile document_info(const Document& doc,
                          std::optional<std::string_view> helper,
                          const ScoringConfig& config, const Backend& backend) {
  config.validate();
  helper = effective_helper(helper);
  if (config.want_greedy && !backend.supports_greedy()) {
    throw Error(ErrorCode::kGreedyUnsupported,
                "backend " + backend.model_id() + " has no greedy flags");
  }
  const auto requests = compose_requests(doc, helper, config, backend);

  InfoProfile profile;
  profile.scenario = !helper                   ? Scenario::kUnconditional
                     : *helper == doc.text     ? Scenario::kGivenDocument
                                               : Scenario::kGivenSummary;
  profile.per_sentence.resize(requests.size());
  size_t workers = config.concurrency;
  if (backend.max_concurrency() > 0) {
    workers = std::min(workers, backend.max_concurrency());
  }
  parallel_for(requests.size(), workers, [&](size_t i) {
    try {
      TokenScores scores = backend.score(requests[i]);
      validate_token_scores(scores, requests[i], /*check_roundtrip=*/false);
      profile.per_sentence[i] = std::move(scores);
    } catch (const Error& e) {
      throw Error(e.code(), "sentence " + std::to_string(i) + ": " + e.detail());
    }
  });

  size_t hits = 0;
  for (const TokenScores& s : profile.per_sentence) {
    profile.total_info += s.total();
    profile.total_tokens += s.tokens.size();
    hits += s.greedy_hits();
  }
  if (config.want_greedy) profile.greedy_hits = hits;
  return profile;
}

double shannon_from_profiles(const InfoProfile& unconditional,
                             const InfoProfile& given_summary,
                             const InfoProfile& given_document,
                             double epsilon) {
  const double denominator = unconditional.total_info - given_document.total_info;
  if (!(std::fabs(denominator) >= epsilon)) {
    throw Error(ErrorCode::kDegenerateNormalization,
                "I(D) - I(D|D) = " + std::to_string(denominator) +
                    " nats; the backend does not use its prompt");
  }
  return (unconditional.total_info - given_summary.total_info) / denominator;
}

double blanc_from_profiles(const InfoProfile& unconditional,
                           const InfoProfile& given_summary) {
  if (!unconditional.greedy_hits || !given_summary.greedy_hits) {
    throw Error(ErrorCode::kGreedyUnsupported, "profiles carry no greedy counts");
  }
  const auto accuracy = [](const InfoProfile& p) {
    return p.total_tokens == 0 ? 0.0
                               : static_cast<double>(*p.greedy_hits) /
                                     static_cast<double>(p.total_tokens);
  };
  return accuracy(given_summary) - accuracy(unconditional);
}

double information_difference(const Document& doc, std::string_view summary,
                              const ScoringConfig& config,
                              const Backend& backend) {
  return evaluate(doc, summary, config, backend, {Metric::kInfoDiff}).info_diff;
}

double shannon_score(const Document& doc, std::string_view summary,
                     const ScoringConfig& config, const Backend& backend) {
  const auto result =
      evaluate(doc, summary, config, backend, {Metric::kShannonScore});
  if (auto it = result.errors.find(Metric::kShannonScore); it != result.errors.end()) {
    throw it->second;
  }
  return *result.shannon_score;
}

double blanc_shannon(const Document& doc, std::string_view summary,
                     const ScoringConfig& config, const Backend& backend) {
  const auto result =
      evaluate(doc, summary, config, backend, {Metric::kBlancShannon});
  if (auto it = result.errors.find(Metric::kBlancShannon); it != result.errors.end()) {
    throw it->second;
  }
  return *result.blanc_shannon;
}

std::optional<double> MetricResult::value(Metric metric) const {
  if (std::find(requested.begin(), requested.end(), metric) == requested.end()) {
    return std::nullopt;
  }
  switch (metric) {
    case Metric::kShannonScore: return shannon_score;
    case Metric::kInfoDiff: return info_diff;
    case Metric::kBlancShannon: return blanc_shannon;
  }
  return std::nullopt;
}

MetricResult evaluate(const Document& doc, std::string_view summary,
                      const ScoringConfig& config, const Backend& backend,
                      const std::vector<Metric>& metrics) {
  auto wants = [&](Metric m) {
    return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
  };
  MetricResult result;
  result.requested = metrics;
  result.config = config;

  ScoringConfig scoring = config;
  if (wants(Metric::kBlancShannon)) {
    if (backend.supports_greedy()) {
      scoring.want_greedy = true;
    } else {
      result.errors.emplace(
          Metric::kBlancShannon,
          Error(ErrorCode::kGreedyUnsupported,
                "backend " + backend.model_id() + " has no greedy flags"));
    }
  }
  if (scoring.want_greedy && !backend.supports_greedy()) scoring.want_greedy = false;
  result.config.want_greedy = scoring.want_greedy;

  result.unconditional = document_info(doc, std::nullopt, scoring, backend);
  if (wants(Metric::kShannonScore)) {
    result.given_document = document_info(doc, doc.text, scoring, backend);
  }
  if (is_blank(summary)) {
    result.given_summary = result.unconditional;
  } else if (summary == doc.text && result.given_document) {
    result.given_summary = *result.given_document;
  } else {
    result.given_summary = document_info(doc, summary, scoring, backend);
  }
  result.given_summary.scenario = Scenario::kGivenSummary;

  result.info_diff = result.unconditional.total_info - result.given_summary.total_info;
  if (wants(Metric::kShannonScore)) {
    try {
      result.shannon_score =
          shannon_from_profiles(result.unconditional, result.given_summary,
                                *result.given_document, config.degeneracy_epsilon);
    } catch (const Error& e) {
      result.errors.emplace(Metric::kShannonScore, e);
    }
  }
  if (wants(Metric::kBlancShannon) && scoring.want_greedy) {
    result.blanc_shannon =
        blanc_from_profiles(result.unconditional, result.given_summary);
  }
  return result;
}

}  // namespace shannon
