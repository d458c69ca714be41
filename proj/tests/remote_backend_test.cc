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

#include "shannon/remote_backend.h"

#include <gtest/gtest.h>

#include <atomic>
#include <functional>
#include <string>
#include <thread>

#include "httplib.h"
#include "shannon/error.h"
#include "shannon/info_metrics.h"
#include "shannon/ngram_backend.h"
#include "synthetic.h"

namespace shannon {
namespace {

class TestServer {
 public:
  explicit TestServer(const std::function<void(httplib::Server&)>& setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteOptions fast_options(const std::string& endpoint) {
  RemoteOptions o;
  o.endpoint = endpoint;
  o.timeout = std::chrono::milliseconds(2000);
  o.retry_backoff = std::chrono::milliseconds(5);
  o.retries = 2;
  return o;
}

void serve_info(httplib::Server& s, int limit = 1024) {
  s.Get("/v1/info", [limit](const httplib::Request&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"model_id", "fake"}, {"context_limit", limit},
                                   {"logprob_base", "e"}}.dump(),
                    "application/json");
  });
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

TEST(WireFormat, RoundTripsThroughJson) {
  TokenScores s;
  s.tokens = {"a", " b"};
  s.surprisals = {0.123456789012345, 2.5};
  s.greedy_correct = std::vector<bool>{true, false};
  s.truncated = true;
  s.model_id = "m";
  const TokenScores back = token_scores_from_json(nlohmann::json::parse(to_json(s).dump()));
  EXPECT_EQ(back, s);
  const ScoreRequest r{"p", "c", true};
  const ScoreRequest r2 = score_request_from_json(to_json(r));
  EXPECT_EQ(r2.prompt, "p");
  EXPECT_TRUE(r2.want_greedy);
}

TEST(RemoteBackend, MatchesInProcessBackendThroughTheService) {
  const auto docs = testing::synthetic_corpus(3, 12);
  const NGramBackend lm = train_ngram(testing::texts_of(docs), NGramConfig{});
  TestServer server([&](httplib::Server& s) { mount_score_service(s, lm); });
  RemoteOptions options = fast_options(server.endpoint());
  options.max_concurrency = 3;
  const RemoteBackend remote(options);
  EXPECT_EQ(remote.model_id(), lm.model_id());
  EXPECT_EQ(remote.context_limit(), 1024u);

  const Document doc = make_document(docs[0].id, docs[0].text);
  ScoringConfig config;
  config.k_upstream = 1;
  config.concurrency = 4;
  const MetricResult local = evaluate(doc, docs[0].reference, config, lm);
  const MetricResult far = evaluate(doc, docs[0].reference, config, remote);
  EXPECT_EQ(far.info_diff, local.info_diff);
  EXPECT_EQ(far.shannon_score, local.shannon_score);
  EXPECT_EQ(far.blanc_shannon, local.blanc_shannon);
}

TEST(RemoteBackend, ServiceStatusCodes) {
  const NGramBackend lm = train_ngram({"a b."}, NGramConfig{});
  const UniformBackend no_greedy(4, 1024, false);
  TestServer server([&](httplib::Server& s) { mount_score_service(s, lm); });
  TestServer server2([&](httplib::Server& s) { mount_score_service(s, no_greedy); });
  httplib::Client client(server.endpoint());
  EXPECT_EQ(client.Post("/v1/score", "not json", "application/json")->status, 400);
  EXPECT_EQ(client.Post("/v1/score", R"({"prompt":"a"})", "application/json")->status, 400);
  EXPECT_EQ(client.Post("/v1/score",
                        R"({"prompt":"a","continuation":" ","want_greedy":false})",
                        "application/json")->status,
            422);
  auto ok = client.Post("/v1/score", R"({"prompt":"a","continuation":" b","want_greedy":true})",
                        "application/json");
  ASSERT_EQ(ok->status, 200);
  EXPECT_TRUE(nlohmann::json::parse(ok->body).contains("greedy_correct"));

  const RemoteBackend remote(fast_options(server2.endpoint()));
  EXPECT_EQ(code_of([&] { remote.score({"", "a", true}); }), ErrorCode::kGreedyUnsupported);
  EXPECT_EQ(remote.score({"", "a b", false}).surprisals.size(), 2u);
}

TEST(RemoteBackend, RetriesTransientUnavailability) {
  const NGramBackend lm = train_ngram({"a b."}, NGramConfig{});
  std::atomic<int> calls{0};
  TestServer server([&](httplib::Server& s) {
    serve_info(s);
    s.Post("/v1/score", [&](const httplib::Request& req, httplib::Response& res) {
      if (calls++ < 2) {
        res.status = 503;
        res.set_content(R"({"error":"loading"})", "application/json");
        return;
      }
      const auto scores = lm.score(score_request_from_json(nlohmann::json::parse(req.body)));
      res.set_content(to_json(scores).dump(), "application/json");
    });
  });
  const RemoteBackend remote(fast_options(server.endpoint()));
  const TokenScores s = remote.score({"a", " b", false});
  EXPECT_EQ(s.surprisals, lm.score({"a", " b", false}).surprisals);
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteBackend, PersistentUnavailabilityIsReported) {
  TestServer server([&](httplib::Server& s) {
    serve_info(s);
    s.Post("/v1/score", [](const httplib::Request&, httplib::Response& res) {
      res.status = 503;
    });
  });
  const RemoteBackend remote(fast_options(server.endpoint()));
  EXPECT_EQ(code_of([&] { remote.score({"", "a", false}); }), ErrorCode::kBackendUnavailable);
}

TEST(RemoteBackend, UnreachableEndpoint) {
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  RemoteOptions o = fast_options("http://127.0.0.1:" + std::to_string(port));
  o.retries = 1;
  EXPECT_EQ(code_of([&] { RemoteBackend remote(o); }), ErrorCode::kBackendUnavailable);
}

TokenScores respond_with(const std::function<void(nlohmann::json&)>& mutate,
                         const ScoreRequest& request) {
  TestServer server([&](httplib::Server& s) {
    serve_info(s);
    s.Post("/v1/score", [&](const httplib::Request& req, httplib::Response& res) {
      const ScoreRequest r = score_request_from_json(nlohmann::json::parse(req.body));
      nlohmann::json body = to_json(UniformBackend(4).score(r));
      mutate(body);
      res.set_content(body.dump(), "application/json");
    });
  });
  return RemoteBackend(fast_options(server.endpoint())).score(request);
}

TEST(RemoteBackend, MalformedResponsesAreProtocolErrors) {
  const ScoreRequest req{"", "a b c", false};
  EXPECT_NO_THROW(respond_with([](nlohmann::json&) {}, req));
  const std::vector<std::function<void(nlohmann::json&)>> faults = {
      [](nlohmann::json& b) { b["surprisals"].erase(0); },
      [](nlohmann::json& b) { b["surprisals"][1] = -0.5; },
      [](nlohmann::json& b) { b["tokens"][0] = "A"; },
      [](nlohmann::json& b) { b["greedy_correct"] = {true, true, true}; },
      [](nlohmann::json& b) { b.erase("truncated"); },
      [](nlohmann::json& b) { b["surprisals"][0] = "1.0"; },
      [](nlohmann::json& b) { b = nlohmann::json::array(); },
  };
  for (size_t i = 0; i < faults.size(); ++i) {
    EXPECT_EQ(code_of([&] { respond_with(faults[i], req); }), ErrorCode::kProtocolError)
        << "fault " << i;
  }
  EXPECT_EQ(code_of([&] { respond_with([](nlohmann::json& b) { b.erase("greedy_correct"); },
                                       {"", "a", true}); }),
            ErrorCode::kProtocolError);
}

TEST(RemoteBackend, BadInfoPayload) {
  TestServer server([](httplib::Server& s) {
    s.Get("/v1/info", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"model_id":"x","context_limit":10,"logprob_base":"2"})",
                      "application/json");
    });
  });
  EXPECT_EQ(code_of([&] { RemoteBackend r(fast_options(server.endpoint())); }),
            ErrorCode::kProtocolError);
  EXPECT_EQ(code_of([] { RemoteBackend r(fast_options("https://example.invalid")); }),
            ErrorCode::kInvalidArgument);
}

TEST(RemoteBackend, ClientTrimsLongPromptsAndFlagsTruncation) {
  std::string seen_prompt;
  TestServer server([&](httplib::Server& s) {
    serve_info(s, 4);
    s.Post("/v1/score", [&](const httplib::Request& req, httplib::Response& res) {
      const ScoreRequest r = score_request_from_json(nlohmann::json::parse(req.body));
      seen_prompt = r.prompt;
      res.set_content(to_json(UniformBackend(4, 4).score(r)).dump(), "application/json");
    });
  });
  const RemoteBackend remote(fast_options(server.endpoint()));
  const TokenScores s = remote.score({"one two three four", " x y", false});
  EXPECT_TRUE(s.truncated);
  EXPECT_EQ(seen_prompt, " three four");
  EXPECT_FALSE(remote.score({"four", " x y", false}).truncated);
}

TEST(RemoteBackend, BoundsRequestsInFlight) {
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  TestServer server([&](httplib::Server& s) {
    serve_info(s);
    s.Post("/v1/score", [&](const httplib::Request& req, httplib::Response& res) {
      const int now = ++active;
      int prev = peak.load();
      while (now > prev && !peak.compare_exchange_weak(prev, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      const ScoreRequest r = score_request_from_json(nlohmann::json::parse(req.body));
      res.set_content(to_json(UniformBackend(4).score(r)).dump(), "application/json");
      --active;
    });
  });
  RemoteOptions o = fast_options(server.endpoint());
  o.max_concurrency = 2;
  const RemoteBackend remote(o);
  std::vector<std::thread> workers;
  for (int i = 0; i < 8; ++i) {
    workers.emplace_back([&] { remote.score({"", "a b", false}); });
  }
  for (auto& w : workers) w.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_GE(peak.load(), 1);
}

}  // namespace
}  // namespace shannon
