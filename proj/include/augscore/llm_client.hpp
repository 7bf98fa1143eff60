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

#ifndef AUGSCORE_LLM_CLIENT_HPP_
#define AUGSCORE_LLM_CLIENT_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "augscore/error.hpp"

namespace augscore {

inline constexpr const char* kApiKeyEnv = "AUGSCORE_API_KEY";

// Greedy decoding defaults: temperature 0, top_p 0.01.
struct GenerationRequest {
  std::string prompt;
  std::size_t n_variants = 1;
  double temperature = 0.0;
  double top_p = 0.01;
  std::string model_name = "gpt-4";
  std::size_t max_attempts = 5;

  // Throws kInvalidArgument on n_variants < 1, temperature < 0,
  // top_p outside (0, 1] or max_attempts < 1.
  void Validate() const;
};

// SHA-256 over prompt, decoding hyperparameters, variant count and model.
std::string RequestFingerprint(const GenerationRequest& request);

enum class BackendKind { kHttp, kMock };
const char* BackendKindName(BackendKind kind);

struct RawCompletion {
  std::string text;
  BackendKind backend = BackendKind::kMock;
  std::string request_fingerprint;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual RawCompletion Complete(const GenerationRequest& request) = 0;
  virtual BackendKind kind() const = 0;
};

// --- response structure -----------------------------------------------------

struct ParsedVariants {
  std::vector<std::string> variants;
  // Text before the first marker (the model's explanation); kept for
  // diagnostics only.
  std::string preamble;
};

class VariantParseError : public Error {
 public:
  VariantParseError(const std::string& message, std::string raw_text)
      : Error(ErrorCode::kGeneration, message), raw_text_(std::move(raw_text)) {}
  const std::string& raw_text() const { return raw_text_; }

 private:
  std::string raw_text_;
};

// Splits a completion on "Augmented Response(s) <k>:" markers. Accepts case,
// whitespace and singular/plural variation only; exactly `expected_n` markers
// numbered 1..expected_n in order are required.
ParsedVariants ParseVariants(std::string_view completion_text, std::size_t expected_n);

// Canonical form: one "Augmented Response(s) k: text" line per variant.
std::string FormatVariants(std::span<const std::string> variants,
                           std::string_view preamble = {});

// --- mock backend -----------------------------------------------------------

// Text under the EXAMPLE TO AUGMENT heading of a rendered prompt.
std::string ExtractExemplar(std::string_view prompt);

// Label-preserving paraphrase used by the mock backend: keeps the exemplar's
// content words, shuffles word order inside each clause, and prefixes a
// hedging phrase chosen by variant index.
std::string MockParaphrase(std::string_view exemplar, std::size_t variant_index,
                           std::uint64_t seed);

class MockBackend : public Backend {
 public:
  explicit MockBackend(std::uint64_t seed) : seed_(seed) {}
  RawCompletion Complete(const GenerationRequest& request) override;
  BackendKind kind() const override { return BackendKind::kMock; }

 private:
  std::uint64_t seed_;
};

// --- HTTP backend -----------------------------------------------------------

struct TransportResponse {
  int status = 0;
  std::string body;
  std::string error;  // non-empty on transport failure
  bool timed_out = false;
  bool transport_ok() const { return error.empty(); }
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResponse Post(const std::string& url, const std::string& body,
                                 const std::vector<std::pair<std::string, std::string>>& headers,
                                 std::chrono::milliseconds timeout) = 0;
};

std::shared_ptr<Transport> MakeHttpTransport();

struct HttpConfig {
  std::string endpoint;
  std::string api_key;
  double timeout_seconds = 60.0;
};

// Reads AUGSCORE_API_KEY.
std::optional<std::string> ApiKeyFromEnv();

struct RetryPolicy {
  double initial_delay_seconds = 1.0;
  double factor = 2.0;
  double jitter = 0.25;
};

// Delays (seconds) slept before attempts 2..max_attempts. Non-decreasing.
std::vector<double> BackoffSchedule(const RetryPolicy& policy, std::size_t max_attempts,
                                    std::uint64_t seed);

// 429 and 5xx.
bool IsRetryableStatus(int status);

using Sleeper = std::function<void(std::chrono::duration<double>)>;

class HttpBackend : public Backend {
 public:
  HttpBackend(HttpConfig config, std::shared_ptr<Transport> transport,
              Sleeper sleeper = {}, RetryPolicy policy = {});

  RawCompletion Complete(const GenerationRequest& request) override;
  BackendKind kind() const override { return BackendKind::kHttp; }

  // {"model", "messages": [{"role": "user", "content": prompt}],
  //  "temperature", "top_p"}
  static std::string BuildRequestBody(const GenerationRequest& request);

 private:
  HttpConfig config_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
  RetryPolicy policy_;
};

// --- client -----------------------------------------------------------------

struct ClientOptions {
  // Content-addressed completion files; empty disables on-disk caching.
  std::string cache_dir;
  bool cache_enabled = true;
  // When false, existing cache entries are ignored (but still refreshed).
  bool read_cache = true;
  std::size_t max_in_flight = 1;
};

// Thread-safe front end over a backend: validates requests, deduplicates
// concurrent identical requests, and caches completions by fingerprint.
class LlmClient {
 public:
  LlmClient(std::shared_ptr<Backend> backend, ClientOptions options = {});

  RawCompletion Generate(const GenerationRequest& request, bool bypass_cache = false);

  // Number of calls that reached the backend.
  std::size_t request_count() const { return request_count_.load(); }
  std::size_t max_in_flight() const { return options_.max_in_flight; }
  BackendKind backend_kind() const { return backend_->kind(); }

 private:
  std::optional<RawCompletion> ReadCacheFile(const std::string& fingerprint) const;
  void WriteCacheFile(const RawCompletion& completion) const;

  std::shared_ptr<Backend> backend_;
  ClientOptions options_;
  std::atomic<std::size_t> request_count_{0};
  std::mutex mu_;
  std::map<std::string, RawCompletion> memory_;
  std::map<std::string, std::shared_future<RawCompletion>> in_flight_;
};

}  // namespace augscore

#endif  // AUGSCORE_LLM_CLIENT_HPP_
