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

#include "shannon/text.h"

#include <algorithm>
#include <unordered_set>

#include "shannon/error.h"

namespace shannon {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_upper_or_digit(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

// Multi-byte closing / opening marks (UTF-8).
constexpr std::string_view kRightDoubleQuote = "\xE2\x80\x9D";
constexpr std::string_view kRightSingleQuote = "\xE2\x80\x99";
constexpr std::string_view kRightGuillemet = "\xC2\xBB";
constexpr std::string_view kLeftDoubleQuote = "\xE2\x80\x9C";
constexpr std::string_view kLeftSingleQuote = "\xE2\x80\x98";
constexpr std::string_view kLeftGuillemet = "\xC2\xAB";

// Length of the closing mark starting at `pos`, or 0.
size_t closing_mark_at(std::string_view text, size_t pos) {
  const char c = text[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']' || c == '}') return 1;
  for (std::string_view mark :
       {kRightDoubleQuote, kRightSingleQuote, kRightGuillemet}) {
    if (text.substr(pos, mark.size()) == mark) return mark.size();
  }
  return 0;
}

size_t opening_mark_at(std::string_view text, size_t pos) {
  const char c = text[pos];
  if (c == '"' || c == '\'' || c == '(' || c == '[' || c == '{') return 1;
  for (std::string_view mark :
       {kLeftDoubleQuote, kLeftSingleQuote, kLeftGuillemet}) {
    if (text.substr(pos, mark.size()) == mark) return mark.size();
  }
  return 0;
}

// Whitespace-delimited word ending at `period` (inclusive), without leading
// opening marks.
std::string_view word_ending_at(std::string_view text, size_t period) {
  size_t start = period;
  while (start > 0 && !is_space(text[start - 1])) --start;
  std::string_view word = text.substr(start, period + 1 - start);
  while (!word.empty()) {
    const size_t n = opening_mark_at(word, 0);
    if (n == 0) break;
    word.remove_prefix(n);
  }
  return word;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

const std::unordered_set<std::string>& abbreviations() {
  static const auto* const kList = new std::unordered_set<std::string>{
      "mr.",   "mrs.",  "ms.",   "dr.",   "prof.", "sr.",    "jr.",
      "st.",   "mt.",   "ft.",   "u.s.",  "u.k.",  "u.n.",   "e.g.",
      "i.e.",  "vs.",   "inc.",  "ltd.",  "co.",   "corp.",  "gen.",
      "sen.",  "rep.",  "gov.",  "lt.",   "col.",  "sgt.",   "capt.",
      "no.",   "jan.",  "feb.",  "apr.",  "jun.",  "jul.",   "aug.",
      "sep.",  "sept.", "oct.",  "nov.",  "dec.",  "approx.", "dept.",
      "fig.",  "rev.",  "hon.",  "mssrs.", "messrs.", "u.s.a.", "d.c.",
  };
  return *kList;
}

void trim_span(std::string_view text, Span& span) {
  while (span.begin < span.end && is_space(text[span.begin])) ++span.begin;
  while (span.end > span.begin && is_space(text[span.end - 1])) --span.end;
}

// Edge punctuation stripped from word tokens. '%', '$', '#', '@', '&' are
// kept since they carry meaning ("3%").
bool is_edge_punct_ascii(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '\'': case '(': case ')': case '[': case ']':
    case '{': case '}': case '<': case '>': case '*': case '_':
    case '`': case '-': case '/': case '\\': case '|': case '~':
      return true;
    default:
      return false;
  }
}

constexpr std::string_view kEdgePunctUtf8[] = {
    kRightDoubleQuote, kRightSingleQuote, kRightGuillemet, kLeftDoubleQuote,
    kLeftSingleQuote,  kLeftGuillemet,
    "\xE2\x80\x93",  // en dash
    "\xE2\x80\x94",  // em dash
    "\xE2\x80\xA6",  // ellipsis
};

size_t edge_punct_prefix(std::string_view s) {
  if (s.empty()) return 0;
  if (is_edge_punct_ascii(s.front())) return 1;
  for (std::string_view p : kEdgePunctUtf8) {
    if (s.starts_with(p)) return p.size();
  }
  return 0;
}

size_t edge_punct_suffix(std::string_view s) {
  if (s.empty()) return 0;
  if (is_edge_punct_ascii(s.back())) return 1;
  for (std::string_view p : kEdgePunctUtf8) {
    if (s.ends_with(p)) return p.size();
  }
  return 0;
}

std::vector<std::string> ngrams(const WordSequence& words, size_t n) {
  std::vector<std::string> out;
  if (words.size() < n) return out;
  out.reserve(words.size() - n + 1);
  for (size_t i = 0; i + n <= words.size(); ++i) {
    std::string gram = words[i];
    for (size_t j = 1; j < n; ++j) {
      gram.push_back('\x1f');
      gram += words[i + j];
    }
    out.push_back(std::move(gram));
  }
  return out;
}

}  // namespace

bool is_abbreviation(std::string_view word) {
  if (word.size() == 2 && word[1] == '.' && word[0] >= 'A' && word[0] <= 'Z') {
    return true;  // initial
  }
  return abbreviations().count(ascii_lower(word)) > 0;
}

std::vector<Span> split_sentences(std::string_view text) {
  const size_t n = text.size();
  std::vector<size_t> cuts;
  for (size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c == '\n') {
      size_t k = i + 1;
      while (k < n && (text[k] == ' ' || text[k] == '\t' || text[k] == '\r')) {
        ++k;
      }
      if (k < n && text[k] == '\n') cuts.push_back(i);
      continue;
    }
    if (!is_terminal(c)) continue;

    size_t j = i + 1;
    while (j < n && is_terminal(text[j])) ++j;
    const bool single_period = (c == '.' && j == i + 1);
    while (j < n) {
      const size_t mark = closing_mark_at(text, j);
      if (mark == 0) break;
      j += mark;
    }
    if (j >= n || !is_space(text[j])) {
      i = j - 1;
      continue;
    }
    size_t m = j;
    while (m < n && is_space(text[m])) ++m;
    if (m >= n) break;
    size_t next = m;
    if (const size_t mark = opening_mark_at(text, next); mark > 0) {
      next += mark;
    }
    const bool starts_sentence = next < n && is_upper_or_digit(text[next]);
    if (starts_sentence &&
        !(single_period && is_abbreviation(word_ending_at(text, i)))) {
      cuts.push_back(j);
    }
    i = j - 1;
  }

  std::vector<Span> out;
  size_t start = 0;
  cuts.push_back(n);
  for (size_t cut : cuts) {
    Span span{start, cut};
    trim_span(text, span);
    if (span.size() > 0) out.push_back(span);
    start = cut;
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyDocument, "text has no non-whitespace content");
  }
  return out;
}

Document make_document(std::string id, std::string text) {
  Document doc{std::move(id), std::move(text), {}};
  doc.sentences = split_sentences(doc.text);
  return doc;
}

Document make_document(std::string id, std::string text,
                       const std::vector<std::string>& sentences) {
  std::vector<std::string> kept;
  for (const auto& s : sentences) {
    Span span{0, s.size()};
    trim_span(s, span);
    if (span.size() > 0) kept.push_back(s.substr(span.begin, span.size()));
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kEmptyDocument, "document '" + id + "' has no sentences");
  }
  bool blank_text = true;
  for (char c : text) {
    if (!is_space(c)) {
      blank_text = false;
      break;
    }
  }
  if (blank_text) {
    text.clear();
    for (size_t i = 0; i < kept.size(); ++i) {
      if (i > 0) text.push_back(' ');
      text += kept[i];
    }
  }

  Document doc{std::move(id), std::move(text), {}};
  const std::string_view view(doc.text);
  size_t cursor = 0;
  for (const auto& s : kept) {
    while (cursor < view.size() && is_space(view[cursor])) ++cursor;
    if (view.substr(cursor, s.size()) != s) {
      throw Error(ErrorCode::kSchemaError,
                  "sentences of document '" + doc.id +
                      "' do not match its text at byte " +
                      std::to_string(cursor));
    }
    doc.sentences.push_back({cursor, cursor + s.size()});
    cursor += s.size();
  }
  while (cursor < view.size() && is_space(view[cursor])) ++cursor;
  if (cursor != view.size()) {
    throw Error(ErrorCode::kSchemaError,
                "sentences of document '" + doc.id +
                    "' do not cover its text");
  }
  return doc;
}

WordSequence word_tokens(std::string_view text) {
  WordSequence words;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    const size_t start = i;
    while (i < n && !is_space(text[i])) ++i;
    std::string_view word = text.substr(start, i - start);
    while (const size_t k = edge_punct_prefix(word)) word.remove_prefix(k);
    while (const size_t k = edge_punct_suffix(word)) word.remove_suffix(k);
    if (!word.empty()) words.push_back(ascii_lower(word));
  }
  return words;
}

std::vector<Fragment> extractive_fragments(const WordSequence& doc,
                                           const WordSequence& summary) {
  std::vector<Fragment> fragments;
  size_t i = 0;
  while (i < summary.size()) {
    size_t best_len = 0;
    size_t best_start = 0;
    for (size_t j = 0; j < doc.size(); ++j) {
      size_t len = 0;
      while (i + len < summary.size() && j + len < doc.size() &&
             summary[i + len] == doc[j + len]) {
        ++len;
      }
      if (len > best_len) {
        best_len = len;
        best_start = j;
      }
    }
    if (best_len == 0) {
      ++i;
      continue;
    }
    fragments.push_back({best_start, i, best_len});
    i += best_len;
  }
  return fragments;
}

SummaryStats summary_stats(const WordSequence& doc,
                           const WordSequence& summary) {
  if (summary.empty()) {
    throw Error(ErrorCode::kEmptySummary, "summary has no words");
  }
  SummaryStats stats;
  const double len = static_cast<double>(summary.size());
  stats.length = summary.size();
  stats.compression = static_cast<double>(doc.size()) / len;

  size_t covered = 0;
  size_t squared = 0;
  for (const Fragment& f : extractive_fragments(doc, summary)) {
    covered += f.length;
    squared += f.length * f.length;
  }
  stats.coverage = static_cast<double>(covered) / len;
  stats.density = static_cast<double>(squared) / len;

  for (size_t n = 1; n <= 3; ++n) {
    const auto sum_grams = ngrams(summary, n);
    if (sum_grams.empty()) continue;  // shorter than n: both stay 0
    const auto doc_grams = ngrams(doc, n);
    const std::unordered_set<std::string> doc_set(doc_grams.begin(),
                                                  doc_grams.end());
    const std::unordered_set<std::string> sum_set(sum_grams.begin(),
                                                  sum_grams.end());
    size_t novel = 0;
    for (const auto& g : sum_set) {
      if (doc_set.count(g) == 0) ++novel;
    }
    stats.novel_n[n - 1] =
        static_cast<double>(novel) / static_cast<double>(sum_set.size());
    stats.repeat_n[n - 1] = 1.0 - static_cast<double>(sum_set.size()) /
                                      static_cast<double>(sum_grams.size());
  }
  return stats;
}

SummaryStats summary_stats(const Document& doc, const SummaryText& summary) {
  return summary_stats(word_tokens(doc.text), word_tokens(summary.text));
}

const std::vector<std::string>& summary_stat_names() {
  static const auto* const kNames = new std::vector<std::string>{
      "length",   "compression", "coverage", "density",
      "novel_1",  "novel_2",     "novel_3",  "repeat_1",
      "repeat_2", "repeat_3"};
  return *kNames;
}

double summary_stat_value(const SummaryStats& stats, std::string_view name) {
  if (name == "length") return static_cast<double>(stats.length);
  if (name == "compression") return stats.compression;
  if (name == "coverage") return stats.coverage;
  if (name == "density") return stats.density;
  if (name.size() == 7 && name.starts_with("novel_")) {
    const int n = name[6] - '1';
    if (n >= 0 && n < 3) return stats.novel_n[n];
  }
  if (name.size() == 8 && name.starts_with("repeat_")) {
    const int n = name[7] - '1';
    if (n >= 0 && n < 3) return stats.repeat_n[n];
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown summary statistic '" + std::string(name) + "'");
}

}  // namespace shannon
