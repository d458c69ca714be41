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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ngram_oracle.h"
#include "shannon/error.h"
#include "shannon/ngram_backend.h"
#include "synthetic.h"

namespace shannon {
namespace {

using testing::OracleLm;

NGramConfig cache_model() {
  NGramConfig c;
  c.order = 2;
  c.alpha = 0.1;
  c.cache_weight = 0.5;
  c.cache_order = 2;
  return c;
}

// Oracle totals at k = 0: each sentence is scored on its own behind
// "helper\n" (or nothing).
double oracle_info(const OracleLm& lm, const Document& doc, const std::string& helper) {
  double total = 0;
  for (size_t i = 0; i < doc.sentences.size(); ++i) {
    const std::string prompt = helper.empty() ? "" : helper + "\n";
    for (double s : lm.surprisals(prompt, doc.sentence(i))) total += s;
  }
  return total;
}

double oracle_accuracy(const OracleLm& lm, const Document& doc, const std::string& helper) {
  double hits = 0, tokens = 0;
  for (size_t i = 0; i < doc.sentences.size(); ++i) {
    const std::string prompt = helper.empty() ? "" : helper + "\n";
    for (bool g : lm.greedy(prompt, doc.sentence(i))) {
      hits += g ? 1 : 0;
      ++tokens;
    }
  }
  return hits / tokens;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(ComposeRequests, HelperSeparatorAndUpstreamWhitespace) {
  const Document doc = make_document("d", "A b. C d.  E f.");
  const UniformBackend uniform(4);
  ScoringConfig config;
  config.k_upstream = 1;
  auto reqs = compose_requests(doc, "S", config, uniform);
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_EQ(reqs[0].prompt, "S\n");
  EXPECT_EQ(reqs[1].prompt, "S\nA b. ");
  EXPECT_EQ(reqs[2].prompt, "S\nC d.  ");
  EXPECT_EQ(reqs[2].continuation, "E f.");

  config.k_upstream = ScoringConfig::kAllUpstream;
  config.helper_separator = " || ";
  reqs = compose_requests(doc, std::nullopt, config, uniform);
  EXPECT_EQ(reqs[2].prompt, "A b. C d.  ");
  reqs = compose_requests(doc, "S", config, uniform);
  EXPECT_EQ(reqs[2].prompt, "S || A b. C d.  ");
  // A blank helper is no helper.
  EXPECT_EQ(compose_requests(doc, "  \n", config, uniform)[0].prompt, "");
}

TEST(ComposeRequests, OverflowDropsOldestUpstreamFirst) {
  const Document doc = make_document("d", "One two. Three four. Five six.");
  const UniformBackend small(4, 8);
  ScoringConfig config;
  config.k_upstream = ScoringConfig::kAllUpstream;
  // Each sentence is 3 pieces; the helper "H" plus "\n" is 1 piece.
  const auto reqs = compose_requests(doc, "H", config, small);
  EXPECT_EQ(reqs[2].prompt, "H\nThree four. ");
  const auto bare = compose_requests(doc, std::nullopt, config, small);
  EXPECT_EQ(bare[1].prompt, "One two. ");
  EXPECT_EQ(bare[2].prompt, "Three four. ");
  const UniformBackend roomy(4, 9);
  EXPECT_EQ(compose_requests(doc, std::nullopt, config, roomy)[2].prompt,
            "One two. Three four. ");
}

TEST(DocumentInfo, UniformBackendIgnoresEveryHelper) {
  const Document doc = make_document("d", "A b c. D e f. G h i j.");
  const UniformBackend uniform(4);
  for (const char* helper : {"", "summary words", "A b c. D e f. G h i j."}) {
    const InfoProfile p = document_info(doc, std::string_view(helper), ScoringConfig{}, uniform);
    EXPECT_EQ(p.total_tokens, 13u);  // 10 words + 3 periods
    EXPECT_NEAR(p.total_info, 13 * std::log(4.0), 1e-12);
  }
}

TEST(DocumentInfo, AdditiveOverSentencesAtKZero) {
  const auto docs = testing::synthetic_corpus(5, 4);
  const NGramBackend lm = train_ngram(testing::texts_of(docs), cache_model());
  for (const auto& d : docs) {
    const Document doc = make_document(d.id, d.text);
    const InfoProfile whole = document_info(doc, d.reference, ScoringConfig{}, lm);
    double sum = 0;
    for (size_t i = 0; i < doc.sentences.size(); ++i) {
      const Document one = make_document("s", std::string(doc.sentence(i)));
      ASSERT_EQ(one.sentences.size(), 1u);
      sum += document_info(one, d.reference, ScoringConfig{}, lm).total_info;
    }
    EXPECT_EQ(whole.total_info, sum);
    double direct = 0;
    size_t tokens = 0;
    for (const auto& s : whole.per_sentence) {
      for (double v : s.surprisals) {
        EXPECT_GE(v, 0.0);
        direct += v;
      }
      tokens += s.tokens.size();
    }
    EXPECT_NEAR(whole.total_info, direct, 1e-9);
    EXPECT_EQ(whole.total_tokens, tokens);
  }
}

TEST(DocumentInfo, DocumentHelperLowersInformationByHand) {
  const std::vector<std::string> corpus = {"Cats chase mice. Dogs chase cats."};
  const Document doc = make_document("d", corpus[0]);
  ASSERT_EQ(doc.sentences.size(), 2u);
  const NGramBackend lm = train_ngram(corpus, cache_model());
  const OracleLm oracle(corpus, cache_model());
  const double none = document_info(doc, std::nullopt, ScoringConfig{}, lm).total_info;
  const double self = document_info(doc, doc.text, ScoringConfig{}, lm).total_info;
  EXPECT_NEAR(none, oracle_info(oracle, doc, ""), 1e-12);
  EXPECT_NEAR(self, oracle_info(oracle, doc, doc.text), 1e-12);
  EXPECT_LT(self, none);
}

TEST(InformationDifference, VerbatimFirstSentenceHelps) {
  const std::vector<std::string> corpus = {"Red fox runs. Blue owl sleeps.",
                                           "Green frog hops."};
  const Document doc = make_document("d", corpus[0]);
  const NGramBackend lm = train_ngram(corpus, cache_model());
  const OracleLm oracle(corpus, cache_model());
  const double id = information_difference(doc, "Red fox runs.", ScoringConfig{}, lm);
  const double expected =
      oracle_info(oracle, doc, "") - oracle_info(oracle, doc, "Red fox runs.");
  EXPECT_NEAR(id, expected, 1e-12);
  EXPECT_GT(id, 0.0);
}

TEST(InformationDifference, ZeroPoints) {
  const auto docs = testing::synthetic_corpus(3, 9);
  const NGramBackend lm = train_ngram(testing::texts_of(docs), cache_model());
  const UniformBackend uniform(50);
  for (const auto& d : docs) {
    const Document doc = make_document(d.id, d.text);
    EXPECT_EQ(information_difference(doc, "", ScoringConfig{}, lm), 0.0);
    EXPECT_EQ(information_difference(doc, " \n ", ScoringConfig{}, lm), 0.0);
    EXPECT_EQ(information_difference(doc, d.reference, ScoringConfig{}, uniform), 0.0);
  }
}

TEST(ShannonScore, DocumentAsSummaryIsOne) {
  const auto docs = testing::synthetic_corpus(5, 10);
  const NGramBackend lm = train_ngram(testing::texts_of(docs), cache_model());
  for (const auto& d : docs) {
    const Document doc = make_document(d.id, d.text);
    EXPECT_NEAR(shannon_score(doc, d.text, ScoringConfig{}, lm), 1.0, 1e-9);
  }
}

TEST(ShannonScore, UniformBackendIsDegenerate) {
  const Document doc = make_document("d", "A b. C d.");
  const UniformBackend uniform(10);
  EXPECT_EQ(code_of([&] { shannon_score(doc, "A b.", ScoringConfig{}, uniform); }),
            ErrorCode::kDegenerateNormalization);
  const MetricResult r = evaluate(doc, "A b.", ScoringConfig{}, uniform);
  EXPECT_FALSE(r.shannon_score.has_value());
  ASSERT_EQ(r.errors.count(Metric::kShannonScore), 1u);
  EXPECT_EQ(r.errors.at(Metric::kShannonScore).code(), ErrorCode::kDegenerateNormalization);
  EXPECT_EQ(r.info_diff, 0.0);
  EXPECT_EQ(r.blanc_shannon, 0.0);
}

TEST(BlancShannon, SelfHelpOnRepeatedBigrams) {
  // A unigram n-gram side always proposes the most frequent word, so every
  // greedy hit with the helper comes from the bigram cache.
  const std::vector<std::string> corpus = {"The big dog ran home. A big dog sat down.",
                                           "Some cats slept late."};
  const Document doc = make_document("d", corpus[0]);
  NGramConfig config = cache_model();
  config.order = 1;
  const NGramBackend lm = train_ngram(corpus, config);
  const OracleLm oracle(corpus, config);
  const double blanc = blanc_shannon(doc, doc.text, ScoringConfig{}, lm);
  EXPECT_NEAR(blanc,
              oracle_accuracy(oracle, doc, doc.text) - oracle_accuracy(oracle, doc, ""),
              1e-15);
  EXPECT_GT(blanc, 0.0);
}

// Greedy-correct exactly when some helper is present.
class PerfectHelperBackend : public Backend {
 public:
  TokenScores score(const ScoreRequest& r) const override {
    TokenScores s = UniformBackend(4).score({r.prompt, r.continuation, false});
    if (r.want_greedy) s.greedy_correct = std::vector<bool>(s.tokens.size(), !r.prompt.empty());
    return s;
  }
  std::string model_id() const override { return "perfect-helper"; }
  size_t context_limit() const override { return 1024; }
  nlohmann::json describe() const override { return {{"type", "perfect-helper"}}; }
};

TEST(BlancShannon, BoundIsAttained) {
  const Document doc = make_document("d", "A b. C d.");
  EXPECT_EQ(blanc_shannon(doc, "anything", ScoringConfig{}, PerfectHelperBackend{}), 1.0);
}

TEST(BlancShannon, RequiresGreedy) {
  const Document doc = make_document("d", "A b.");
  const UniformBackend no_greedy(4, 1024, false);
  EXPECT_EQ(code_of([&] { blanc_shannon(doc, "A", ScoringConfig{}, no_greedy); }),
            ErrorCode::kGreedyUnsupported);
  const MetricResult r = evaluate(doc, "A", ScoringConfig{}, no_greedy,
                                  {Metric::kInfoDiff, Metric::kBlancShannon});
  EXPECT_EQ(r.errors.at(Metric::kBlancShannon).code(), ErrorCode::kGreedyUnsupported);
  EXPECT_EQ(r.value(Metric::kInfoDiff), 0.0);
}

TEST(Evaluate, ConsistentDeterministicAndConcurrencyInvariant) {
  const auto docs = testing::synthetic_corpus(4, 13);
  const NGramBackend lm = train_ngram(testing::texts_of(docs), cache_model());
  for (const auto& d : docs) {
    const Document doc = make_document(d.id, d.text);
    ScoringConfig config;
    config.k_upstream = 2;
    const MetricResult a = evaluate(doc, d.reference, config, lm);
    const MetricResult b = evaluate(doc, d.reference, config, lm);
    config.concurrency = 8;
    const MetricResult c = evaluate(doc, d.reference, config, lm);
    EXPECT_EQ(a.info_diff, a.unconditional.total_info - a.given_summary.total_info);
    EXPECT_EQ(a.unconditional, b.unconditional);
    EXPECT_EQ(a.given_summary, c.given_summary);
    EXPECT_EQ(a.given_document, c.given_document);
    EXPECT_EQ(a.shannon_score, c.shannon_score);
    EXPECT_EQ(a.blanc_shannon, b.blanc_shannon);
    ASSERT_TRUE(a.given_summary.greedy_hits.has_value());
    EXPECT_LE(*a.given_summary.greedy_hits, a.given_summary.total_tokens);
  }
}

TEST(Evaluate, SingleSentenceIgnoresK) {
  const std::vector<std::string> corpus = {"Only one sentence lives here."};
  const NGramBackend lm = train_ngram(corpus, cache_model());
  const Document doc = make_document("d", corpus[0]);
  ScoringConfig k0, k1;
  k1.k_upstream = 1;
  const MetricResult a = evaluate(doc, "one sentence", k0, lm);
  const MetricResult b = evaluate(doc, "one sentence", k1, lm);
  EXPECT_EQ(a.unconditional, b.unconditional);
  EXPECT_EQ(a.given_summary, b.given_summary);
  EXPECT_EQ(a.shannon_score, b.shannon_score);
}

TEST(Evaluate, MetricSubsetSkipsTheDocumentProfile) {
  const Document doc = make_document("d", "A b. C d.");
  const MetricResult r =
      evaluate(doc, "A b.", ScoringConfig{}, UniformBackend(4), {Metric::kInfoDiff});
  EXPECT_FALSE(r.given_document.has_value());
  EXPECT_FALSE(r.given_summary.greedy_hits.has_value());
}

class FailingBackend : public UniformBackend {
 public:
  FailingBackend() : UniformBackend(4) {}
  TokenScores score(const ScoreRequest& r) const override {
    if (r.continuation.find("boom") != std::string::npos) {
      throw Error(ErrorCode::kBackendUnavailable, "down");
    }
    return UniformBackend::score(r);
  }
};

TEST(DocumentInfo, ErrorsCarryTheSentenceIndex) {
  const Document doc = make_document("d", "Fine here. The boom now. Another boom.");
  for (size_t workers : {1, 4}) {
    ScoringConfig config;
    config.concurrency = workers;
    try {
      document_info(doc, std::nullopt, config, FailingBackend{});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
      EXPECT_NE(e.detail().find("sentence 1"), std::string::npos) << e.detail();
    }
  }
}

TEST(ParseMetrics, NamesAndAll) {
  EXPECT_EQ(parse_metrics("all"), all_metrics());
  EXPECT_EQ(parse_metrics("infodiff,blanc"),
            (std::vector<Metric>{Metric::kInfoDiff, Metric::kBlancShannon}));
  EXPECT_EQ(parse_metrics("shannon"), (std::vector<Metric>{Metric::kShannonScore}));
  EXPECT_THROW(parse_metrics("rouge"), Error);
  EXPECT_THROW(parse_metrics(""), Error);
}

TEST(ScoringConfig, Validation) {
  ScoringConfig c;
  c.degeneracy_epsilon = 0;
  EXPECT_THROW(c.validate(), Error);
  c = ScoringConfig{};
  c.k_upstream = ScoringConfig::kAllUpstream;
  EXPECT_EQ(c.to_json().at("k_upstream"), "all");
  EXPECT_FALSE(c.to_json().contains("concurrency"));
}

}  // namespace
}  // namespace shannon
