//
// Copyright 2026 The augscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <doctest.h>

#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "augscore/error.hpp"
#include "augscore/llm_client.hpp"
#include "test_util.hpp"

using namespace augscore;
using json = nlohmann::json;

namespace {

// Replays scripted responses and records every request.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::vector<TransportResponse> script) : script_(std::move(script)) {}

  TransportResponse Post(const std::string& url, const std::string& body,
                         const std::vector<std::pair<std::string, std::string>>& headers,
                         std::chrono::milliseconds) override {
    std::lock_guard lock(mu_);
    urls.push_back(url);
    bodies.push_back(body);
    this->headers = headers;
    if (calls_ >= script_.size()) return script_.back();
    return script_[calls_++];
  }

  std::vector<std::string> urls, bodies;
  std::vector<std::pair<std::string, std::string>> headers;

 private:
  std::mutex mu_;
  std::size_t calls_ = 0;
  std::vector<TransportResponse> script_;
};

TransportResponse Ok(const std::string& content) {
  json body = {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
  return TransportResponse{200, body.dump(), "", false};
}

TransportResponse Status(int status) { return TransportResponse{status, "{}", "", false}; }

GenerationRequest Request(const std::string& prompt = "----- EXAMPLE TO AUGMENT -----\nthe honey is thick") {
  GenerationRequest r;
  r.prompt = prompt;
  r.n_variants = 3;
  return r;
}

struct CountingBackend : Backend {
  std::atomic<int> calls{0};
  RawCompletion Complete(const GenerationRequest& req) override {
    ++calls;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    return RawCompletion{"Augmented Responses 1: " + req.prompt, BackendKind::kMock, ""};
  }
  BackendKind kind() const override { return BackendKind::kMock; }
};

}  // namespace

TEST_CASE("request validation and fingerprint") {
  auto r = Request();
  CHECK_NOTHROW(r.Validate());
  CHECK(r.temperature == 0.0);
  CHECK(r.top_p == doctest::Approx(0.01));
  auto bad = r;
  bad.top_p = 0.0;
  CHECK_THROWS_AS(bad.Validate(), Error);
  bad = r;
  bad.n_variants = 0;
  CHECK_THROWS_AS(bad.Validate(), Error);
  bad = r;
  bad.temperature = -1;
  CHECK_THROWS_AS(bad.Validate(), Error);

  CHECK(RequestFingerprint(r) == RequestFingerprint(Request()));
  auto other = r;
  other.temperature = 0.5;
  CHECK(RequestFingerprint(other) != RequestFingerprint(r));
  other = r;
  other.model_name = "m2";
  CHECK(RequestFingerprint(other) != RequestFingerprint(r));
}

TEST_CASE("parse the canonical structure with a preamble") {
  auto p = ParseVariants(
      "Because these keep the idea. Augmented Responses 1: A. Augmented Response 2: B. "
      "Augmented Response 3: C.",
      3);
  CHECK(p.variants == std::vector<std::string>{"A.", "B.", "C."});
  CHECK(p.preamble == "Because these keep the idea.");
}

TEST_CASE("parse tolerates case, whitespace and plural") {
  auto p = ParseVariants("augmented response 1 : x\nAUGMENTED   RESPONSES\t2:y", 2);
  CHECK(p.variants == std::vector<std::string>{"x", "y"});
}

TEST_CASE("parse errors keep the raw text") {
  const std::string two = "Augmented Response 1: a Augmented Response 2: b";
  try {
    ParseVariants(two, 3);
    FAIL("expected an error");
  } catch (const VariantParseError& e) {
    CHECK(e.raw_text() == two);
    CHECK(e.code() == ErrorCode::kGeneration);
  }
  CHECK_THROWS_AS(ParseVariants("Augmented Response 2: a Augmented Response 1: b", 2), VariantParseError);
  CHECK_THROWS_AS(ParseVariants("Augmented Response 1: a Augmented Response 1: b", 2), VariantParseError);
  CHECK_THROWS_AS(ParseVariants("Augmented Response 1: a Augmented Response 2: ", 2), VariantParseError);
  CHECK_THROWS_AS(ParseVariants("Augmented Response 1: a Augmented Response 2: b", 1), VariantParseError);
}

TEST_CASE("format then parse round trip") {
  std::vector<std::string> v = {"first one.", "second, with comma", "third"};
  CHECK(ParseVariants(FormatVariants(v), 3).variants == v);
  CHECK(ParseVariants(FormatVariants(v, "why"), 3).preamble == "why");
}

TEST_CASE("mock backend is deterministic and label preserving") {
  MockBackend mock(5);
  auto a = mock.Complete(Request());
  auto b = mock.Complete(Request());
  CHECK(a.text == b.text);
  auto parsed = ParseVariants(a.text, 3);
  REQUIRE(parsed.variants.size() == 3);
  for (const auto& v : parsed.variants) {
    CHECK(v.find("honey") != std::string::npos);
    CHECK(v.find("thick") != std::string::npos);
  }
  CHECK(parsed.variants[0] != parsed.variants[1]);
  bool seed_matters = false;
  for (std::uint64_t seed = 6; seed < 12; ++seed) {
    seed_matters |= MockBackend(seed).Complete(Request()).text != a.text;
  }
  CHECK(seed_matters);
  CHECK_THROWS_AS(mock.Complete(Request("no heading here")), Error);
}

TEST_CASE("http body carries decoding settings and bearer key") {
  auto transport = std::make_shared<ScriptedTransport>(std::vector<TransportResponse>{Ok("hi")});
  HttpBackend backend(HttpConfig{"http://host/v1/chat", "secret", 5}, transport,
                      [](std::chrono::duration<double>) {});
  auto out = backend.Complete(Request());
  CHECK(out.text == "hi");
  CHECK(out.backend == BackendKind::kHttp);
  auto body = json::parse(transport->bodies.at(0));
  CHECK(body["temperature"].get<double>() == 0.0);
  CHECK(body["top_p"].get<double>() == 0.01);
  CHECK(body["model"] == "gpt-4");
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(transport->headers.at(0).second == "Bearer secret");
}

TEST_CASE("retry: two failures then success; exhausted attempts; non-retryable") {
  std::vector<double> slept;
  auto sleeper = [&](std::chrono::duration<double> d) { slept.push_back(d.count()); };
  {
    TransportResponse timeout{0, "", "read timeout", true};
    auto t = std::make_shared<ScriptedTransport>(
        std::vector<TransportResponse>{Status(503), timeout, Ok("done")});
    HttpBackend backend(HttpConfig{"http://h/x", "k", 1}, t, sleeper);
    CHECK(backend.Complete(Request()).text == "done");
    CHECK(t->bodies.size() == 3);
    CHECK(slept.size() == 2);
  }
  slept.clear();
  {
    auto t = std::make_shared<ScriptedTransport>(std::vector<TransportResponse>{Status(429)});
    HttpBackend backend(HttpConfig{"http://h/x", "k", 1}, t, sleeper);
    try {
      backend.Complete(Request());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("429") != std::string::npos);
    }
    CHECK(t->bodies.size() == 5);
    CHECK(slept.size() == 4);
    CHECK(std::is_sorted(slept.begin(), slept.end()));
  }
  {
    auto t = std::make_shared<ScriptedTransport>(std::vector<TransportResponse>{Status(401)});
    HttpBackend backend(HttpConfig{"http://h/x", "k", 1}, t, sleeper);
    CHECK_THROWS_AS(backend.Complete(Request()), Error);
    CHECK(t->bodies.size() == 1);
  }
}

TEST_CASE("backoff schedule") {
  auto d = BackoffSchedule(RetryPolicy{}, 5, 1);
  REQUIRE(d.size() == 4);
  CHECK(d[0] >= 0.75);
  CHECK(d[0] <= 1.25);
  CHECK(d[3] >= 0.75 * 8);
  CHECK(d[3] <= 1.25 * 8);
  CHECK(std::is_sorted(d.begin(), d.end()));
  CHECK(BackoffSchedule(RetryPolicy{}, 1, 1).empty());
  CHECK(IsRetryableStatus(429));
  CHECK(IsRetryableStatus(500));
  CHECK_FALSE(IsRetryableStatus(404));
}

TEST_CASE("missing credential or endpoint") {
  auto t = std::make_shared<ScriptedTransport>(std::vector<TransportResponse>{Ok("x")});
  CHECK_THROWS_AS(HttpBackend(HttpConfig{"http://h/x", "", 1}, t), Error);
  CHECK_THROWS_AS(HttpBackend(HttpConfig{"", "k", 1}, t), Error);
  ::unsetenv(kApiKeyEnv);
  CHECK_FALSE(ApiKeyFromEnv().has_value());
  ::setenv(kApiKeyEnv, "abc", 1);
  CHECK(ApiKeyFromEnv() == std::optional<std::string>("abc"));
  ::unsetenv(kApiKeyEnv);
}

TEST_CASE("client caches in memory and on disk") {
  testutil::TempDir dir("cache");
  auto backend = std::make_shared<CountingBackend>();
  {
    LlmClient client(backend, ClientOptions{dir.path().string(), true, true, 1});
    auto a = client.Generate(Request());
    auto b = client.Generate(Request());
    CHECK(a.text == b.text);
    CHECK(client.request_count() == 1);
    client.Generate(Request(), true);
    CHECK(client.request_count() == 2);
  }
  {
    LlmClient client(backend, ClientOptions{dir.path().string(), true, true, 1});
    client.Generate(Request());
    CHECK(client.request_count() == 0);
  }
  {
    LlmClient fresh(backend, ClientOptions{dir.path().string(), true, false, 1});
    fresh.Generate(Request());
    CHECK(fresh.request_count() == 1);
  }
  {
    LlmClient off(backend, ClientOptions{"", false, true, 1});
    off.Generate(Request());
    off.Generate(Request());
    CHECK(off.request_count() == 2);
  }
}

TEST_CASE("concurrent identical requests reach the backend once") {
  auto backend = std::make_shared<CountingBackend>();
  LlmClient client(backend, ClientOptions{"", true, true, 8});
  std::vector<std::thread> threads;
  std::vector<std::string> texts(8);
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] { texts[i] = client.Generate(Request()).text; });
  }
  for (auto& t : threads) t.join();
  CHECK(backend->calls == 1);
  for (const auto& t : texts) CHECK(t == texts[0]);
}

TEST_CASE("real transport against a loopback server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 503;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    auto body = json::parse(req.body);
    json reply = {{"choices", json::array({{{"message", {{"content", "echo " + body["model"].get<std::string>()}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackend backend(HttpConfig{"http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions",
                                 "tok", 5},
                      MakeHttpTransport(), [](std::chrono::duration<double>) {});
  auto out = backend.Complete(Request());
  CHECK(out.text == "echo gpt-4");
  CHECK(hits == 2);
  CHECK(seen_auth == "Bearer tok");

  auto transport = MakeHttpTransport();
  auto missing = transport->Post("http://127.0.0.1:" + std::to_string(port) + "/nope", "{}", {},
                                 std::chrono::milliseconds(2000));
  CHECK(missing.transport_ok());
  CHECK(missing.status == 404);

  server.stop();
  thread.join();

  auto refused = transport->Post("http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions",
                                 "{}", {}, std::chrono::milliseconds(500));
  CHECK_FALSE(refused.transport_ok());
}
