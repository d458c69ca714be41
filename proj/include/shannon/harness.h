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

#ifndef SHANNON_HARNESS_H_
#define SHANNON_HARNESS_H_

// Evaluation harness: dataset ingestion, resumable batch scoring, the
// shuffled/wrong-summary baseline check, and human-correlation and bias
// tables.

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shannon/backend.h"
#include "shannon/correlation.h"
#include "shannon/info_metrics.h"
#include "shannon/rng.h"
#include "shannon/text.h"

namespace shannon {

// ---------------------------------------------------------------------------
// Datasets

enum class DatasetFormat { kSummEvalJsonl, kPairsJsonl };
DatasetFormat parse_dataset_format(std::string_view name);

struct EvalEntry {
  std::string doc_id;
  std::string system_id;
  std::string summary;
  std::optional<std::string> ref_summary;
  std::map<std::string, std::vector<double>> annotations;
  size_t line = 0;
};

struct EvalDataset {
  std::map<std::string, Document> documents;
  std::vector<EvalEntry> entries;
  std::vector<std::string> dimensions;  // sorted
};

// summeval-jsonl lines:
//   {"doc_id", "system_id", "document", "sentences"?, "summary",
//    "annotations": {dimension: [number, ...]}}
// pairs-jsonl lines:
//   {"doc_id", "document", "summary", "ref_summary"?, "system_id"?,
//    "sentences"?}
// "document" may be omitted on lines whose doc_id was defined earlier.
// Throws SchemaError (with line number) or IntegrityError.
EvalDataset parse_dataset(std::istream& in, DatasetFormat format);
EvalDataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

// ---------------------------------------------------------------------------
// Score files: one JSON record per line,
//   {"doc_id", "system_id", "metric", "value" | "error", "config_hash"}

struct ScoreRecord {
  std::string doc_id;
  std::string system_id;
  std::string metric;
  std::optional<double> value;
  std::string error;
  std::string config_hash;
};

std::string score_record_line(const ScoreRecord& record);

struct ScoreTable {
  std::string config_hash;
  std::map<CellKey, std::map<std::string, double>> values;
  std::map<CellKey, std::map<std::string, std::string>> errors;

  std::optional<double> value(const CellKey& key, const std::string& metric) const;
  bool has_record(const CellKey& key, const std::string& metric) const;
  // Metric keys present, in canonical order.
  std::vector<std::string> metrics() const;
};

// A trailing partial line (interrupted write) is ignored. Later records for
// the same cell and metric replace earlier ones. Throws IntegrityError if the
// file mixes config hashes.
ScoreTable load_score_file(const std::filesystem::path& path);

// Hash over the backend description and the result-affecting scoring
// settings. The metric subset and concurrency are not part of it.
std::string config_hash(const Backend& backend, const ScoringConfig& config);

struct BatchOptions {
  std::filesystem::path score_path;
  size_t concurrency = 1;
  // More consecutive backend failures than this abort the batch.
  size_t max_consecutive_failures = 5;
  // Stop after this many pairs have been scored in this run.
  std::optional<size_t> max_pairs;
};

struct BatchSummary {
  std::string config_hash;
  size_t pairs_total = 0;
  size_t pairs_already_done = 0;
  size_t pairs_scored = 0;
  size_t error_records = 0;
};

// Scores every dataset entry and appends records to options.score_path in
// entry order, flushing after each pair. Cells already recorded under the
// same config hash are skipped; records of backend failures are retried.
// Metric failures become error records. Throws AbortBatch after too many
// consecutive backend failures, IntegrityError on a config-hash mismatch.
BatchSummary run_metrics(const EvalDataset& dataset, const ScoringConfig& config,
                         const Backend& backend, const std::vector<Metric>& metrics,
                         const BatchOptions& options);

// ---------------------------------------------------------------------------
// Baseline validation

struct ValidationItem {
  Document document;
  std::string reference;
};

struct ValidationRow {
  std::string doc_id;
  std::string wrong_doc_id;
  std::string shuffled_summary;
  // metric key -> {original, shuffled, wrong}
  std::map<std::string, std::array<std::optional<double>, 3>> scores;
  std::map<std::string, std::string> errors;
  std::array<double, 3> info_given{};  // I(D|S) per variant
  std::optional<std::array<size_t, 3>> greedy_hits;
};

struct ValidationStats {
  std::array<double, 3> mean{};
  double min_original_minus_wrong = 0.0;
  size_t violations_wrong = 0;     // original <= wrong
  size_t violations_shuffled = 0;  // original <= shuffled
  size_t documents = 0;            // rows with all three values
};

struct ValidationReport {
  uint64_t seed = 0;
  std::string config_hash;
  std::vector<ValidationRow> rows;
  std::map<std::string, ValidationStats> stats;
};

// Scores each document with its reference, a word-shuffled reference, and
// the reference of another document assigned by a seeded derangement. With
// sample_size > 0 a seeded uniform sample of that many documents is used.
// Throws NeedTwoDocuments for fewer than two documents.
ValidationReport baseline_validation(const std::vector<ValidationItem>& items,
                                     const std::vector<Metric>& metrics,
                                     const ScoringConfig& config,
                                     const Backend& backend, uint64_t seed,
                                     size_t sample_size = 0);

// Whitespace words in uniformly random order, joined by single spaces.
std::string shuffle_words(std::string_view text, Rng& rng);

std::vector<ValidationItem> validation_items(const EvalDataset& dataset);

nlohmann::ordered_json to_json(const ValidationReport& report);
std::string render_text(const ValidationReport& report);

// ---------------------------------------------------------------------------
// Correlation and bias tables

enum class CorrelationLevel { kSystem, kSummary };
CorrelationLevel parse_correlation_level(std::string_view name);
std::string_view correlation_level_name(CorrelationLevel level);

struct CorrelationCell {
  std::optional<double> value;
  std::string error;
  size_t n = 0;
};

struct CorrelationTable {
  CorrelationLevel level = CorrelationLevel::kSystem;
  CorrelationMethod method = CorrelationMethod::kKendallTauB;
  std::string config_hash;
  std::vector<std::string> rows;     // human dimensions / metrics
  std::vector<std::string> columns;  // metrics / statistics
  std::map<std::string, std::map<std::string, CorrelationCell>> cells;
};

// Rows: human dimensions; columns: metrics. Throws IncompleteGrid if an
// entry has no record for a metric; per-cell failures are reported in cells.
CorrelationTable correlation_table(const EvalDataset& dataset,
                                   const ScoreTable& scores,
                                   CorrelationLevel level,
                                   CorrelationMethod method);

// Rows: metrics then human dimensions; columns: SummaryStats fields.
// Entries with empty summaries are left out.
CorrelationTable bias_table(const EvalDataset& dataset, const ScoreTable& scores,
                            CorrelationMethod method = CorrelationMethod::kKendallTauB,
                            CorrelationLevel level = CorrelationLevel::kSummary);

nlohmann::ordered_json to_json(const CorrelationTable& table);
std::string render_text(const CorrelationTable& table);

}  // namespace shannon

#endif  // SHANNON_HARNESS_H_
