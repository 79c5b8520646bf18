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

// Repeated-run evaluation over a scenario manifest.
//
// Manifest (JSON; paths relative to the manifest):
//   {"vss": "...", "can": "...",
//    "scenarios": [
//      {"name": "s1", "kind": "chain", "code": "...", "rules": "...",
//       "replay": "...", "expected_verdicts": {"rule1": "violated"}},
//      {"name": "m1", "kind": "mapping", "code": "...", "replay": "...",
//       "expected_accepted": [{"key": "Vehicle.Speed.Target", "value": "25.0"}]}]}
//
// A mapping run succeeds iff the accepted (key, value) set equals the
// expected set. A chain run succeeds iff the generated chain parses and
// every expected rule verdict matches.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdvguard/pipeline.hpp"

namespace sdvguard::harness {

enum class ScenarioKind { kChain, kMapping };

struct ExpectedEntry {
  std::string key;
  std::optional<std::string> value;

  auto operator<=>(const ExpectedEntry&) const = default;
};

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::kChain;
  std::filesystem::path code;
  std::filesystem::path rules;
  std::filesystem::path replay;  // empty: use the configured gateway
  std::map<std::string, std::string> expected_verdicts;
  std::vector<ExpectedEntry> expected_accepted;
};

struct Manifest {
  std::filesystem::path vss;
  std::filesystem::path can;
  std::vector<Scenario> scenarios;
};

// Throws ConfigError when a scenario declares no expectations.
Manifest LoadManifest(const std::filesystem::path& path);

// Drops each expected mapping entry from a run's result with the given
// probability, simulating a completion that missed it.
struct FaultInjection {
  double drop_probability = 0.0;
  std::uint64_t seed = 0;
};

struct ScenarioResult {
  std::string name;
  ScenarioKind kind = ScenarioKind::kChain;
  std::size_t runs = 0;
  std::size_t successes = 0;
  std::vector<std::string> failures;  // first few distinct reasons

  double success_rate() const;
  std::string percent() const;  // one decimal, e.g. "70.5%"
};

struct HarnessResult {
  std::vector<ScenarioResult> scenarios;
};

// Throws ConfigError when runs is 0 or the drop probability is outside [0, 1].
HarnessResult RunHarness(const Manifest& manifest, const pipeline::PipelineConfig& config,
                         std::size_t runs, const FaultInjection& faults = {});

// successes / runs as a percentage rounded half up to one decimal.
std::string FormatPercent(std::size_t successes, std::size_t runs);

nlohmann::ordered_json ToJson(const HarnessResult& result);

}  // namespace sdvguard::harness
