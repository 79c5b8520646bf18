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

#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace sdvguard::http {

struct Endpoint {
  std::string url;  // scheme://host[:port]/path
  std::chrono::milliseconds timeout{std::chrono::seconds(60)};
  std::string bearer_token;  // sent as "Authorization: Bearer ..." when set
};

struct Response {
  int status = 0;  // 0: no response (connection refused, timeout, bad URL)
  std::string body;
  std::string error;

  bool ok() const { return status >= 200 && status < 300; }
};

Response PostJson(const Endpoint& endpoint, const std::string& body);
Response PostBytes(const Endpoint& endpoint, const std::string& body,
                   const std::string& content_type);

}  // namespace sdvguard::http
