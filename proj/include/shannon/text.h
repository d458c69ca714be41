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

#ifndef SHANNON_TEXT_H_
#define SHANNON_TEXT_H_

// Text model: sentence segmentation, word tokenization and the extractive
// fragment statistics (coverage, density, novel/repeated n-grams) used when
// analysing metric biases.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace shannon {

// Half-open byte range [begin, end) into a text.
struct Span {
  size_t begin = 0;
  size_t end = 0;

  size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Document {
  std::string id;
  std::string text;
  // Non-overlapping, in order, trimmed and non-empty.
  std::vector<Span> sentences;

  std::string_view sentence(size_t i) const {
    return std::string_view(text).substr(sentences[i].begin,
                                         sentences[i].size());
  }
};

struct SummaryText {
  std::string id;
  std::string system_id;
  std::string text;
};

using WordSequence = std::vector<std::string>;

struct Fragment {
  size_t doc_start = 0;
  size_t sum_start = 0;
  size_t length = 0;

  friend bool operator==(const Fragment&, const Fragment&) = default;
};

// novel_n / repeat_n are indexed by n - 1 for n in {1, 2, 3}.
struct SummaryStats {
  size_t length = 0;
  double compression = 0.0;
  double coverage = 0.0;
  double density = 0.0;
  std::array<double, 3> novel_n{};
  std::array<double, 3> repeat_n{};
};

// Rule-based segmentation. Splits after . ! ? (plus any closing quotes or
// brackets) when followed by whitespace and then an uppercase ASCII letter or
// digit, optionally behind an opening quote/bracket. A blank line always
// splits. Tokens in the built-in abbreviation list and single capital
// initials never end a sentence. Throws EmptyDocument on blank input.
std::vector<Span> split_sentences(std::string_view text);

// True if `word` (including its trailing period) is a built-in abbreviation.
bool is_abbreviation(std::string_view word);

Document make_document(std::string id, std::string text);

// Uses caller-supplied segmentation. Each sentence must occur in `text` in
// order, separated only by whitespace; an empty `text` is rebuilt by joining
// the sentences with single spaces. Throws SchemaError on mismatch.
Document make_document(std::string id, std::string text,
                       const std::vector<std::string>& sentences);

// Lowercases ASCII, splits on whitespace, strips edge punctuation.
WordSequence word_tokens(std::string_view text);

// Greedy left-to-right longest-match fragments; ties go to the earliest
// document position.
std::vector<Fragment> extractive_fragments(const WordSequence& doc,
                                           const WordSequence& summary);

SummaryStats summary_stats(const WordSequence& doc,
                           const WordSequence& summary);
SummaryStats summary_stats(const Document& doc, const SummaryText& summary);

// Names of the SummaryStats fields in a fixed order, with accessors.
const std::vector<std::string>& summary_stat_names();
double summary_stat_value(const SummaryStats& stats, std::string_view name);

}  // namespace shannon

#endif  // SHANNON_TEXT_H_
