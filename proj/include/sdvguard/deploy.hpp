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

// Artifact hand-off to a test target. Nothing is executed on the target.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace sdvguard::deploy {

struct Receipt {
  std::string artifact;     // file name
  std::string sha256;
  std::size_t bytes = 0;
  std::string target;       // as given
  std::string destination;  // copied file path or endpoint URL
  std::string deployed_at;  // UTC, ISO 8601
};

// `target` is an http(s) URL (the bytes are POSTed) or a directory (created
// if needed; the artifact is copied into it). Throws DeploymentError.
Receipt Deploy(const std::filesystem::path& artifact, const std::string& target);

// Recomputes the digest of the copied file, or of `local` for endpoint
// deployments. False on mismatch or a missing file.
bool VerifyReceipt(const Receipt& receipt, const std::filesystem::path& local = {});

nlohmann::ordered_json ToJson(const Receipt& receipt);
Receipt ParseReceipt(std::string_view json);

}  // namespace sdvguard::deploy
