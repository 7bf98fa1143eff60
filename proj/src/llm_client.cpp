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

#include "augscore/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "augscore/hash.hpp"
#include "csv.hpp"

namespace augscore {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void GenerationRequest::Validate() const {
  if (n_variants < 1) throw Error(ErrorCode::kInvalidArgument, "n_variants must be >= 1");
  if (!(temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "top_p must be in (0, 1]");
  }
  if (max_attempts < 1) throw Error(ErrorCode::kInvalidArgument, "max_attempts must be >= 1");
}

std::string RequestFingerprint(const GenerationRequest& request) {
  json key;
  key["model"] = request.model_name;
  key["n_variants"] = request.n_variants;
  key["prompt"] = request.prompt;
  key["temperature"] = request.temperature;
  key["top_p"] = request.top_p;
  return Sha256Hex(key.dump());
}

const char* BackendKindName(BackendKind kind) {
  return kind == BackendKind::kHttp ? "http" : "mock";
}

// --- parsing ----------------------------------------------------------------

namespace {

std::string TrimCopy(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

const std::regex& MarkerRegex() {
  static const std::regex re(R"(augmented\s+responses?\s*(\d+)\s*:)",
                             std::regex::ECMAScript | std::regex::icase);
  return re;
}

}  // namespace

ParsedVariants ParseVariants(std::string_view completion_text, std::size_t expected_n) {
  if (expected_n < 1) throw Error(ErrorCode::kInvalidArgument, "expected_n must be >= 1");
  const std::string text(completion_text);

  struct Marker {
    std::size_t begin, end;
    unsigned long index;
  };
  std::vector<Marker> markers;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), MarkerRegex());
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    markers.push_back({static_cast<std::size_t>(m.position(0)),
                       static_cast<std::size_t>(m.position(0) + m.length(0)),
                       std::stoul(m.str(1))});
  }

  if (markers.size() < expected_n) {
    throw VariantParseError("found " + std::to_string(markers.size()) +
                                " augmented-response markers, expected " +
                                std::to_string(expected_n),
                            text);
  }
  for (std::size_t i = 0; i < markers.size(); ++i) {
    if (markers[i].index != i + 1) {
      throw VariantParseError("augmented-response marker " + std::to_string(i + 1) +
                                  " is numbered " + std::to_string(markers[i].index) +
                                  " (out of order or duplicate)",
                              text);
    }
  }
  if (markers.size() > expected_n) {
    throw VariantParseError("found " + std::to_string(markers.size()) +
                                " augmented-response markers, expected " +
                                std::to_string(expected_n),
                            text);
  }

  ParsedVariants out;
  out.preamble = TrimCopy(std::string_view(text).substr(0, markers[0].begin));
  for (std::size_t i = 0; i < markers.size(); ++i) {
    std::size_t start = markers[i].end;
    std::size_t stop = i + 1 < markers.size() ? markers[i + 1].begin : text.size();
    std::string variant = TrimCopy(std::string_view(text).substr(start, stop - start));
    if (variant.empty()) {
      throw VariantParseError("augmented response " + std::to_string(i + 1) + " is empty",
                              text);
    }
    out.variants.push_back(std::move(variant));
  }
  return out;
}

std::string FormatVariants(std::span<const std::string> variants, std::string_view preamble) {
  std::string out;
  if (!preamble.empty()) {
    out += preamble;
    out += "\n\n";
  }
  for (std::size_t k = 1; k <= variants.size(); ++k) {
    out += k == 1 ? "Augmented Responses " : "Augmented Response ";
    out += std::to_string(k) + ": " + variants[k - 1] + "\n";
  }
  return out;
}

// --- mock -------------------------------------------------------------------

std::string ExtractExemplar(std::string_view prompt) {
  static constexpr std::string_view kHeading = "----- EXAMPLE TO AUGMENT -----";
  auto pos = prompt.rfind(kHeading);
  if (pos == std::string_view::npos) {
    throw Error(ErrorCode::kGeneration, "prompt has no EXAMPLE TO AUGMENT section");
  }
  auto rest = prompt.substr(pos + kHeading.size());
  // The exemplar runs to the next section heading, if any.
  auto next = rest.find("\n----- ");
  if (next != std::string_view::npos) rest = rest.substr(0, next);
  return TrimCopy(rest);
}

namespace {

const std::set<std::string>& Stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "the", "and", "or",   "but",  "is",   "are", "was",  "were",
      "be",   "been", "to",  "of",  "in",   "on",   "at",   "for", "with", "as",
      "by",   "that", "this", "it", "its",  "i",    "so",   "if",  "then", "than",
      "they", "them", "their", "there", "we", "you", "he",  "she", "his",  "her",
      "do",   "does", "did", "not", "no",   "have", "has",  "had", "my",   "me"};
  return words;
}

constexpr const char* kHedges[] = {
    "I think",  "Maybe",      "I believe", "It seems like",
    "Probably", "In my opinion", "I guess", "Basically",
};

std::vector<std::vector<std::string>> ContentClauses(std::string_view text) {
  std::vector<std::vector<std::string>> clauses(1);
  std::vector<std::vector<std::string>> all_words(1);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    all_words.back().push_back(token);
    if (!Stopwords().count(token)) clauses.back().push_back(token);
    token.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      if (ch == '.' || ch == ',' || ch == ';' || ch == ':' || ch == '!' || ch == '?') {
        if (!clauses.back().empty() || !all_words.back().empty()) {
          clauses.emplace_back();
          all_words.emplace_back();
        }
      }
    }
  }
  flush();
  // Fall back to every word when the exemplar is all stopwords.
  bool any_content = std::any_of(clauses.begin(), clauses.end(),
                                 [](const auto& c) { return !c.empty(); });
  auto& chosen = any_content ? clauses : all_words;
  std::vector<std::vector<std::string>> out;
  for (auto& c : chosen) {
    if (!c.empty()) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::string MockParaphrase(std::string_view exemplar, std::size_t variant_index,
                           std::uint64_t seed) {
  auto clauses = ContentClauses(exemplar);
  Rng rng(DeriveSeed(seed, "mock/variant/" + std::to_string(variant_index)));
  std::string body;
  for (auto& clause : clauses) {
    rng.Shuffle(std::span<std::string>(clause));
    if (!body.empty()) body += ", ";
    for (std::size_t i = 0; i < clause.size(); ++i) {
      if (i) body += " ";
      body += clause[i];
    }
  }
  if (body.empty()) body = "not sure";
  constexpr std::size_t kHedgeCount = sizeof(kHedges) / sizeof(kHedges[0]);
  return std::string(kHedges[variant_index % kHedgeCount]) + " " + body + ".";
}

RawCompletion MockBackend::Complete(const GenerationRequest& request) {
  request.Validate();
  const std::string fingerprint = RequestFingerprint(request);
  const std::string exemplar = ExtractExemplar(request.prompt);
  const std::uint64_t seed = DeriveSeed(seed_, fingerprint);
  std::vector<std::string> variants;
  for (std::size_t k = 0; k < request.n_variants; ++k) {
    variants.push_back(MockParaphrase(exemplar, k, seed));
  }
  RawCompletion out;
  out.text = FormatVariants(
      variants,
      "Each augmented answer restates the ideas of the example to augment in "
      "different words, so it stays in the same group.");
  out.backend = BackendKind::kMock;
  out.request_fingerprint = fingerprint;
  return out;
}

// --- HTTP -------------------------------------------------------------------

std::optional<std::string> ApiKeyFromEnv() {
  const char* key = std::getenv(kApiKeyEnv);
  if (key == nullptr || *key == '\0') return std::nullopt;
  return std::string(key);
}

std::vector<double> BackoffSchedule(const RetryPolicy& policy, std::size_t max_attempts,
                                    std::uint64_t seed) {
  std::vector<double> delays;
  Rng rng(DeriveSeed(seed, "retry/jitter"));
  double base = policy.initial_delay_seconds;
  double previous = 0.0;
  for (std::size_t attempt = 1; attempt < max_attempts; ++attempt) {
    double jitter = (2.0 * rng.Uniform01() - 1.0) * policy.jitter;
    double delay = std::max(previous, base * (1.0 + jitter));
    delays.push_back(delay);
    previous = delay;
    base *= policy.factor;
  }
  return delays;
}

bool IsRetryableStatus(int status) { return status == 429 || (status >= 500 && status <= 599); }

HttpBackend::HttpBackend(HttpConfig config, std::shared_ptr<Transport> transport,
                         Sleeper sleeper, RetryPolicy policy)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      policy_(policy) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "HTTP backend needs an endpoint URL");
  }
  if (config_.api_key.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("HTTP backend credential missing (set ") + kApiKeyEnv + ")");
  }
  if (!transport_) transport_ = MakeHttpTransport();
  if (!sleeper_) {
    sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
  }
}

std::string HttpBackend::BuildRequestBody(const GenerationRequest& request) {
  json body;
  body["model"] = request.model_name;
  body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["top_p"] = request.top_p;
  return body.dump();
}

RawCompletion HttpBackend::Complete(const GenerationRequest& request) {
  request.Validate();
  const std::string fingerprint = RequestFingerprint(request);
  const std::string body = BuildRequestBody(request);
  const std::vector<std::pair<std::string, std::string>> headers = {
      {"Authorization", "Bearer " + config_.api_key},
  };
  const auto timeout = std::chrono::milliseconds(
      static_cast<long long>(std::llround(config_.timeout_seconds * 1000.0)));
  const auto delays = BackoffSchedule(policy_, request.max_attempts, Fnv1a64(fingerprint));

  std::string last;
  for (std::size_t attempt = 1; attempt <= request.max_attempts; ++attempt) {
    TransportResponse response = transport_->Post(config_.endpoint, body, headers, timeout);
    bool retryable;
    if (!response.transport_ok()) {
      last = response.timed_out ? "timeout (" + response.error + ")"
                                : "transport error (" + response.error + ")";
      retryable = true;
    } else if (response.status == 200) {
      json parsed;
      try {
        parsed = json::parse(response.body);
      } catch (const json::parse_error&) {
        throw Error(ErrorCode::kGeneration, "completion response is not JSON");
      }
      std::string text;
      try {
        const auto& choice = parsed.at("choices").at(0);
        if (choice.contains("message")) {
          text = choice.at("message").at("content").get<std::string>();
        } else {
          text = choice.at("text").get<std::string>();
        }
      } catch (const json::exception&) {
        throw Error(ErrorCode::kGeneration, "completion response has no choice text");
      }
      return RawCompletion{std::move(text), BackendKind::kHttp, fingerprint};
    } else {
      last = "HTTP status " + std::to_string(response.status);
      retryable = IsRetryableStatus(response.status);
    }
    if (!retryable) {
      throw Error(ErrorCode::kGeneration, "generation failed: " + last);
    }
    if (attempt < request.max_attempts) {
      sleeper_(std::chrono::duration<double>(delays[attempt - 1]));
    }
  }
  throw Error(ErrorCode::kGeneration,
              "generation failed after " + std::to_string(request.max_attempts) +
                  " attempts; last: " + last);
}

// --- client -----------------------------------------------------------------

LlmClient::LlmClient(std::shared_ptr<Backend> backend, ClientOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw Error(ErrorCode::kInvalidArgument, "client needs a backend");
  if (options_.max_in_flight < 1) options_.max_in_flight = 1;
  if (options_.cache_enabled && !options_.cache_dir.empty()) {
    std::error_code ec;
    fs::create_directories(options_.cache_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create cache dir " + options_.cache_dir);
  }
}

std::optional<RawCompletion> LlmClient::ReadCacheFile(const std::string& fingerprint) const {
  if (options_.cache_dir.empty()) return std::nullopt;
  const fs::path path = fs::path(options_.cache_dir) / (fingerprint + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    json obj = json::parse(in);
    if (obj.at("fingerprint").get<std::string>() != fingerprint) return std::nullopt;
    RawCompletion c;
    c.text = obj.at("text").get<std::string>();
    c.backend = obj.at("backend").get<std::string>() == "http" ? BackendKind::kHttp
                                                               : BackendKind::kMock;
    c.request_fingerprint = fingerprint;
    return c;
  } catch (const json::exception&) {
    return std::nullopt;  // corrupt entries are regenerated
  }
}

void LlmClient::WriteCacheFile(const RawCompletion& completion) const {
  if (options_.cache_dir.empty()) return;
  const fs::path dir(options_.cache_dir);
  const fs::path final_path = dir / (completion.request_fingerprint + ".json");
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const fs::path tmp = dir / (completion.request_fingerprint + ".tmp." + tid.str());
  json obj;
  obj["fingerprint"] = completion.request_fingerprint;
  obj["backend"] = BackendKindName(completion.backend);
  obj["text"] = completion.text;
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write cache entry " + tmp.string());
    out << obj.dump();
  }
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot publish cache entry " + final_path.string());
}

RawCompletion LlmClient::Generate(const GenerationRequest& request, bool bypass_cache) {
  request.Validate();
  const std::string fingerprint = RequestFingerprint(request);
  const bool use_cache = options_.cache_enabled && !bypass_cache;

  std::promise<RawCompletion> promise;
  {
    std::unique_lock lock(mu_);
    if (use_cache) {
      auto hit = memory_.find(fingerprint);
      if (hit != memory_.end()) return hit->second;
      auto pending = in_flight_.find(fingerprint);
      if (pending != in_flight_.end()) {
        auto future = pending->second;
        lock.unlock();
        return future.get();
      }
    }
    if (options_.cache_enabled) in_flight_[fingerprint] = promise.get_future().share();
  }

  auto finish = [&](const RawCompletion* result, std::exception_ptr error) {
    std::lock_guard lock(mu_);
    if (result && options_.cache_enabled) memory_[fingerprint] = *result;
    if (options_.cache_enabled) in_flight_.erase(fingerprint);
    if (result) {
      promise.set_value(*result);
    } else {
      promise.set_exception(error);
    }
  };

  try {
    std::optional<RawCompletion> result;
    if (use_cache && options_.read_cache) result = ReadCacheFile(fingerprint);
    if (!result) {
      ++request_count_;
      result = backend_->Complete(request);
      result->request_fingerprint = fingerprint;
      if (options_.cache_enabled) WriteCacheFile(*result);
    }
    finish(&*result, nullptr);
    return *result;
  } catch (...) {
    finish(nullptr, std::current_exception());
    throw;
  }
}

}  // namespace augscore
