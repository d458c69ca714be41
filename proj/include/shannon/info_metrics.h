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

#ifndef SHANNON_INFO_METRICS_H_
#define SHANNON_INFO_METRICS_H_

// Information-based summary metrics. For a document D split into sentences,
// I(D) is the total surprisal (nats) of every sentence under a backend, and
// I(D|H) the same with helper text H placed in front of each sentence's
// prompt. With S the summary:
//
//   info_diff     = I(D) - I(D|S)
//   shannon_score = (I(D) - I(D|S)) / (I(D) - I(D|D))
//   blanc_shannon = greedy accuracy with S as helper - accuracy without
//
// Each sentence i is scored as
//
//   prompt       = [helper + separator] + sentences[i-k .. i-1]
//   continuation = sentences[i]
//
// where the upstream sentences keep their original whitespace. A blank helper
// means "no helper": the helper and separator are omitted, so an empty summary
// scores info_diff = 0 and shannon_score = 0. When the prompt would overflow
// the backend context, the oldest upstream sentences are dropped first; the
// backend then truncates the helper from the left.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "shannon/backend.h"
#include "shannon/error.h"
#include "shannon/text.h"

namespace shannon {

struct ScoringConfig {
  static constexpr size_t kAllUpstream = SIZE_MAX;

  size_t k_upstream = 0;
  std::string helper_separator = "\n";
  double degeneracy_epsilon = 1e-9;
  bool want_greedy = false;
  // Sentence requests in flight per profile. Does not affect results.
  size_t concurrency = 1;

  void validate() const;
  // Result-affecting fields only.
  nlohmann::json to_json() const;
};

enum class Scenario { kUnconditional, kGivenSummary, kGivenDocument };
std::string_view scenario_name(Scenario scenario);

struct InfoProfile {
  Scenario scenario = Scenario::kUnconditional;
  std::vector<TokenScores> per_sentence;
  double total_info = 0.0;
  size_t total_tokens = 0;
  std::optional<size_t> greedy_hits;

  friend bool operator==(const InfoProfile&, const InfoProfile&) = default;
};

enum class Metric { kShannonScore, kInfoDiff, kBlancShannon };

// Output key: "shannon_score", "info_diff", "blanc_shannon".
std::string_view metric_key(Metric metric);
// Flag name: "shannon", "infodiff", "blanc".
std::string_view metric_flag(Metric metric);
// Parses a comma-separated list of flag names or output keys. Keeps the
// canonical order shannon, infodiff, blanc. Throws InvalidArgument.
std::vector<Metric> parse_metrics(std::string_view list);
const std::vector<Metric>& all_metrics();

// Requests that document_info() sends, one per sentence.
std::vector<ScoreRequest> compose_requests(const Document& doc,
                                           std::optional<std::string_view> helper,
                                           const ScoringConfig& config,
                                           const Backend& backend);

// I(D), I(D|S) or I(D|D) depending on the helper: none (or blank) gives the
// unconditional profile; a helper equal to doc.text is labelled
// kGivenDocument. Backend errors are rethrown with the sentence index.
InfoProfile document_info(const Document& doc,
                          std::optional<std::string_view> helper,
                          const ScoringConfig& config, const Backend& backend);

double information_difference(const Document& doc, std::string_view summary,
                              const ScoringConfig& config,
                              const Backend& backend);

// Throws DegenerateNormalization when |I(D) - I(D|D)| < epsilon.
double shannon_score(const Document& doc, std::string_view summary,
                     const ScoringConfig& config, const Backend& backend);

// Throws GreedyUnsupported when the backend has no greedy flags.
double blanc_shannon(const Document& doc, std::string_view summary,
                     const ScoringConfig& config, const Backend& backend);

// Metric values computed from already-scored profiles.
double shannon_from_profiles(const InfoProfile& unconditional,
                             const InfoProfile& given_summary,
                             const InfoProfile& given_document,
                             double epsilon);
double blanc_from_profiles(const InfoProfile& unconditional,
                           const InfoProfile& given_summary);

struct MetricResult {
  std::vector<Metric> requested;
  std::optional<double> shannon_score;
  double info_diff = 0.0;
  std::optional<double> blanc_shannon;
  // Per-metric failures (e.g. DegenerateNormalization) for requested metrics
  // without a value.
  std::map<Metric, Error> errors;

  InfoProfile unconditional;
  InfoProfile given_summary;
  std::optional<InfoProfile> given_document;  // only when shannon requested
  ScoringConfig config;

  std::optional<double> value(Metric metric) const;
};

// Scores each needed scenario exactly once and derives the requested metrics.
// Metric-level failures land in `errors`; backend failures throw.
MetricResult evaluate(const Document& doc, std::string_view summary,
                      const ScoringConfig& config, const Backend& backend,
                      const std::vector<Metric>& metrics = all_metrics());

}  // namespace shannon

#endif  // SHANNON_INFO_METRICS_H_
