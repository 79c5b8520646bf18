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

#include "sdvguard/deploy.hpp"

#include <chrono>
#include <ctime>
#include <system_error>

#include "sdvguard/errors.hpp"
#include "sdvguard/http.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::deploy {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool IsUrl(std::string_view target) {
  return text::StartsWith(target, "http://") || text::StartsWith(target, "https://");
}

}  // namespace

Receipt Deploy(const fs::path& artifact, const std::string& target) {
  if (!fs::is_regular_file(artifact)) {
    throw DeploymentError("artifact " + artifact.string() + " does not exist");
  }
  const std::string bytes = text::ReadFile(artifact);
  Receipt r;
  r.artifact = artifact.filename().string();
  r.sha256 = text::Sha256Hex(bytes);
  r.bytes = bytes.size();
  r.target = target;
  if (IsUrl(target)) {
    http::Endpoint endpoint;
    endpoint.url = target;
    endpoint.timeout = std::chrono::seconds(10);
    const auto response = http::PostBytes(endpoint, bytes, "application/octet-stream");
    if (!response.ok()) {
      throw DeploymentError("target " + target + " rejected the artifact: " +
                            (response.status == 0 ? response.error
                                                  : "HTTP " + std::to_string(response.status)));
    }
    r.destination = target;
  } else {
    const fs::path dir = target;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      throw DeploymentError("cannot use " + target + " as a target directory");
    }
    const fs::path dest = dir / artifact.filename();
    fs::copy_file(artifact, dest, fs::copy_options::overwrite_existing, ec);
    if (ec) throw DeploymentError("copy to " + dest.string() + " failed: " + ec.message());
    r.destination = dest.string();
  }
  r.deployed_at = UtcNow();
  return r;
}

bool VerifyReceipt(const Receipt& receipt, const fs::path& local) {
  const fs::path file = IsUrl(receipt.destination) ? local : fs::path(receipt.destination);
  if (file.empty() || !fs::is_regular_file(file)) return false;
  return text::Sha256Hex(text::ReadFile(file)) == receipt.sha256;
}

Json ToJson(const Receipt& r) {
  return {{"artifact", r.artifact}, {"sha256", r.sha256},           {"bytes", r.bytes},
          {"target", r.target},     {"destination", r.destination}, {"deployed_at", r.deployed_at}};
}

Receipt ParseReceipt(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed receipt: ") + e.what());
  }
  try {
    Receipt r;
    r.artifact = j.at("artifact").get<std::string>();
    r.sha256 = j.at("sha256").get<std::string>();
    r.bytes = j.at("bytes").get<std::size_t>();
    r.target = j.at("target").get<std::string>();
    r.destination = j.at("destination").get<std::string>();
    r.deployed_at = j.value("deployed_at", std::string());
    return r;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("receipt: ") + e.what());
  }
}

}  // namespace sdvguard::deploy
