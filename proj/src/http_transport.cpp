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

#include <httplib.h>

#include "augscore/llm_client.hpp"

namespace augscore {

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url SplitUrl(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint must be an absolute URL: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public Transport {
 public:
  TransportResponse Post(const std::string& url, const std::string& body,
                         const std::vector<std::pair<std::string, std::string>>& headers,
                         std::chrono::milliseconds timeout) override {
    const Url parts = SplitUrl(url);
    httplib::Client client(parts.origin);
    const auto secs = timeout.count() / 1000;
    const auto usecs = (timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto result = client.Post(parts.path, h, body, "application/json");

    TransportResponse out;
    if (!result) {
      const auto err = result.error();
      out.error = httplib::to_string(err);
      if (out.error.empty()) out.error = "unknown";
      out.timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      return out;
    }
    out.status = result->status;
    out.body = result->body;
    return out;
  }
};

}  // namespace

std::shared_ptr<Transport> MakeHttpTransport() { return std::make_shared<HttplibTransport>(); }

}  // namespace augscore
