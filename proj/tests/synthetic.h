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

#ifndef SHANNON_TESTS_SYNTHETIC_H_
#define SHANNON_TESTS_SYNTHETIC_H_

// Seeded synthetic corpora for tests. Each document has its own topical
// vocabulary, disjoint from every other document, mixed with a shared set of
// function words. The reference summary copies short spans of the document,
// so its bigrams occur in the document.

#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "shannon/rng.h"

namespace shannon::testing {

struct SyntheticDoc {
  std::string id;
  std::string text;
  std::string reference;
};

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

inline std::vector<SyntheticDoc> synthetic_corpus(size_t count, uint64_t seed,
                                                  size_t min_sentences = 4,
                                                  size_t max_sentences = 7) {
  static const std::vector<std::string> kFunction = {
      "the", "a", "of", "and", "in", "to", "was", "with", "on", "for", "by", "at"};
  static const std::vector<std::string> kSyllables = {
      "ka", "lo", "mi", "ru", "se", "ta", "vo", "ne", "pi", "zu", "do", "ha", "be", "fi"};
  Rng rng(seed);
  std::set<std::string> used(kFunction.begin(), kFunction.end());
  std::vector<SyntheticDoc> docs;
  for (size_t d = 0; d < count; ++d) {
    std::vector<std::string> topic;
    while (topic.size() < 10) {
      std::string w;
      const size_t syl = 2 + rng.below(2);
      for (size_t i = 0; i < syl; ++i) w += kSyllables[rng.below(kSyllables.size())];
      if (used.insert(w).second) topic.push_back(w);
    }
    std::vector<std::vector<std::string>> sentences;
    const size_t n_sent = min_sentences + rng.below(max_sentences - min_sentences + 1);
    for (size_t s = 0; s < n_sent; ++s) {
      std::vector<std::string> words;
      const size_t len = 6 + rng.below(5);
      for (size_t i = 0; i < len; ++i) {
        words.push_back(i % 2 == 0 || rng.below(4) == 0
                            ? topic[rng.below(topic.size())]
                            : kFunction[rng.below(kFunction.size())]);
      }
      sentences.push_back(std::move(words));
    }
    auto render = [](const std::vector<std::string>& words) {
      std::string out = capitalize(words[0]);
      for (size_t i = 1; i < words.size(); ++i) out += " " + words[i];
      return out + ".";
    };
    SyntheticDoc doc;
    doc.id = "doc" + std::to_string(d);
    for (const auto& s : sentences) {
      if (!doc.text.empty()) doc.text += " ";
      doc.text += render(s);
    }
    for (int k = 0; k < 2; ++k) {
      const auto& src = sentences[rng.below(sentences.size())];
      const size_t len = 4 + rng.below(3);
      const size_t begin = rng.below(src.size() - len + 1);
      if (!doc.reference.empty()) doc.reference += " ";
      doc.reference += render({src.begin() + begin, src.begin() + begin + len});
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

inline std::vector<std::string> texts_of(const std::vector<SyntheticDoc>& docs) {
  std::vector<std::string> out;
  for (const auto& d : docs) out.push_back(d.text);
  return out;
}

// Arbitrary text, including whitespace runs, punctuation and UTF-8.
inline std::string random_text(Rng& rng, size_t max_parts) {
  static const std::vector<std::string> kParts = {
      "the", "cat", "Sat", "on", "mat", ".", ",", "!", "?", "\"", "(", ")",
      "  ", "\n", "\t", " ", "caf\xC3\xA9", "\xE2\x80\x94", "42", "x-y", "<b>", "&"};
  std::string out;
  const size_t n = rng.below(max_parts + 1);
  for (size_t i = 0; i < n; ++i) {
    out += kParts[rng.below(kParts.size())];
    if (rng.below(2) == 0) out += " ";
  }
  return out;
}

}  // namespace shannon::testing

#endif  // SHANNON_TESTS_SYNTHETIC_H_
