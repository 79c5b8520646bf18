// Copyright 2026 The sdv-guard Authors
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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "sdvguard/http.hpp"

namespace sdvguard::http {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

bool Split(const std::string& url, SplitUrl& out) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return false;
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    out.origin = url;
    out.path = "/";
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return !out.origin.empty();
}

}  // namespace

Response PostBytes(const Endpoint& endpoint, const std::string& body,
                   const std::string& content_type) {
  Response response;
  SplitUrl url;
  if (!Split(endpoint.url, url)) {
    response.error = "malformed URL '" + endpoint.url + "'";
    return response;
  }
  httplib::Client client(url.origin);
  if (!client.is_valid()) {
    response.error = "unsupported URL '" + endpoint.url + "'";
    return response;
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!endpoint.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.bearer_token);
  }
  auto result = client.Post(url.path, headers, body, content_type);
  if (!result) {
    response.error = httplib::to_string(result.error());
    return response;
  }
  response.status = result->status;
  response.body = result->body;
  return response;
}

Response PostJson(const Endpoint& endpoint, const std::string& body) {
  return PostBytes(endpoint, body, "application/json");
}

}  // namespace sdvguard::http
