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

#include "sdvguard/harness.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::harness {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::size_t kMaxRecordedFailures = 5;

fs::path Resolve(const fs::path& base, const Json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a path string");
  fs::path p = j[key].get<std::string>();
  return p.is_relative() ? base / p : p;
}

Scenario ParseScenario(const Json& j, const fs::path& base) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    throw ConfigError("scenario needs a string 'name'");
  }
  Scenario s;
  s.name = j["name"].get<std::string>();
  const std::string kind = j.value("kind", std::string());
  if (kind == "chain") s.kind = ScenarioKind::kChain;
  else if (kind == "mapping") s.kind = ScenarioKind::kMapping;
  else throw ConfigError("scenario " + s.name + ": kind must be 'chain' or 'mapping'");
  s.code = Resolve(base, j, "code");
  s.rules = Resolve(base, j, "rules");
  s.replay = Resolve(base, j, "replay");
  if (s.code.empty()) throw ConfigError("scenario " + s.name + ": missing 'code'");
  if (s.kind == ScenarioKind::kChain) {
    if (s.rules.empty()) throw ConfigError("scenario " + s.name + ": missing 'rules'");
    if (!j.contains("expected_verdicts") || !j["expected_verdicts"].is_object() ||
        j["expected_verdicts"].empty()) {
      throw ConfigError("scenario " + s.name + ": missing 'expected_verdicts'");
    }
    for (const auto& [rule, verdict] : j["expected_verdicts"].items()) {
      const std::string v = verdict.is_string() ? verdict.get<std::string>() : "";
      if (v != "pass" && v != "violated") {
        throw ConfigError("scenario " + s.name + ": verdict for " + rule +
                          " must be 'pass' or 'violated'");
      }
      s.expected_verdicts.emplace(rule, v);
    }
  } else {
    if (!j.contains("expected_accepted") || !j["expected_accepted"].is_array()) {
      throw ConfigError("scenario " + s.name + ": missing 'expected_accepted'");
    }
    for (const auto& e : j["expected_accepted"]) {
      if (!e.is_object() || !e.contains("key") || !e["key"].is_string()) {
        throw ConfigError("scenario " + s.name + ": expected entries need a 'key'");
      }
      ExpectedEntry entry{e["key"].get<std::string>(), std::nullopt};
      if (e.contains("value") && !e["value"].is_null()) {
        entry.value = e["value"].is_string() ? e["value"].get<std::string>() : e["value"].dump();
      }
      s.expected_accepted.push_back(std::move(entry));
    }
  }
  return s;
}

std::unique_ptr<llm::Gateway> GatewayFor(const llm::ReplayStore* store,
                                         const pipeline::PipelineConfig& config) {
  if (store != nullptr) return llm::Gateway::Replay(*store, config.gateway);
  return pipeline::MakeGateway(config);
}

void NoteFailure(ScenarioResult& result, const std::string& reason) {
  if (result.failures.size() < kMaxRecordedFailures &&
      std::find(result.failures.begin(), result.failures.end(), reason) == result.failures.end()) {
    result.failures.push_back(reason);
  }
}

}  // namespace

Manifest LoadManifest(const fs::path& path) {
  const std::string body = text::ReadFile(path);
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    auto [line, column] = text::LineColumn(body, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("malformed manifest: ") + e.what(), line, column);
  }
  if (!j.is_object() || !j.contains("scenarios") || !j["scenarios"].is_array()) {
    throw ConfigError("manifest needs a 'scenarios' array");
  }
  const fs::path base = path.parent_path();
  Manifest m;
  m.vss = Resolve(base, j, "vss");
  m.can = Resolve(base, j, "can");
  std::set<std::string> names;
  for (const auto& js : j["scenarios"]) {
    Scenario s = ParseScenario(js, base);
    if (!names.insert(s.name).second) throw ConfigError("duplicate scenario " + s.name);
    m.scenarios.push_back(std::move(s));
  }
  if (m.scenarios.empty()) throw ConfigError("manifest declares no scenarios");
  return m;
}

double ScenarioResult::success_rate() const {
  return runs == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(runs);
}

std::string ScenarioResult::percent() const { return FormatPercent(successes, runs); }

std::string FormatPercent(std::size_t successes, std::size_t runs) {
  if (runs == 0) return "n/a";
  // tenths of a percent, rounded half up, in exact integer arithmetic
  const std::size_t tenths = (successes * 2000 + runs) / (2 * runs);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

HarnessResult RunHarness(const Manifest& manifest, const pipeline::PipelineConfig& config,
                         std::size_t runs, const FaultInjection& faults) {
  if (runs == 0) throw ConfigError("the harness needs at least one run per scenario");
  if (!(faults.drop_probability >= 0.0 && faults.drop_probability <= 1.0)) {
    throw ConfigError("drop probability must lie in [0, 1]");
  }
  const fs::path vss = manifest.vss.empty() ? config.vss : manifest.vss;
  const fs::path can = manifest.can.empty() ? config.can : manifest.can;
  const auto grounding = pipeline::Grounding::Load(vss, can);

  HarnessResult result;
  for (std::size_t si = 0; si < manifest.scenarios.size(); ++si) {
    const Scenario& s = manifest.scenarios[si];
    ScenarioResult sr;
    sr.name = s.name;
    sr.kind = s.kind;
    sr.runs = runs;
    const std::string code = text::ReadFile(s.code);
    const rules::RuleSet ruleset =
        s.kind == ScenarioKind::kChain ? rules::ParseRules(text::ReadFile(s.rules)) : rules::RuleSet{};
    std::optional<llm::ReplayStore> store;
    if (!s.replay.empty()) store = llm::ReplayStore::Load(s.replay);
    std::mt19937_64 rng(faults.seed + si);
    const std::set<ExpectedEntry> expected(s.expected_accepted.begin(),
                                           s.expected_accepted.end());

    for (std::size_t run = 0; run < runs; ++run) {
      auto gateway = GatewayFor(store ? &*store : nullptr, config);
      try {
        const auto report = pipeline::ExtractAndValidate(code, grounding, config, *gateway);
        if (s.kind == ScenarioKind::kMapping) {
          std::set<ExpectedEntry> got;
          for (const auto& a : report.accepted) got.insert({a.resolved_key, a.entry.value});
          for (const auto& e : s.expected_accepted) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (u < faults.drop_probability) got.erase(e);
          }
          if (got == expected) {
            ++sr.successes;
          } else {
            NoteFailure(sr, "accepted entries differ from the expected set");
          }
          continue;
        }
        const auto generated = chain::GenerateChain(code, "", report.accepted, *gateway);
        const auto doc = chain::ToChainDocument(chain::ParseActivityDiagram(generated.plantuml));
        const auto safety = rules::Check(doc, ruleset);
        bool ok = true;
        for (const auto& [rule, verdict] : s.expected_verdicts) {
          auto it = std::find_if(safety.rules.begin(), safety.rules.end(),
                                 [&](const rules::RuleResult& r) { return r.name == rule; });
          if (it == safety.rules.end()) {
            ok = false;
            NoteFailure(sr, "rule " + rule + " is not in the rule file");
          } else if ((it->passed ? "pass" : "violated") != verdict) {
            ok = false;
            NoteFailure(sr, "rule " + rule + " was " + (it->passed ? "pass" : "violated") +
                                ", expected " + verdict);
          }
        }
        sr.successes += ok;
      } catch (const Error& e) {
        NoteFailure(sr, e.what());
      }
    }
    result.scenarios.push_back(std::move(sr));
  }
  return result;
}

Json ToJson(const HarnessResult& result) {
  Json j;
  j["scenarios"] = Json::array();
  for (const auto& s : result.scenarios) {
    Json js{{"name", s.name},
            {"kind", s.kind == ScenarioKind::kChain ? "chain" : "mapping"},
            {"runs", s.runs},
            {"successes", s.successes},
            {"success_rate", s.percent()}};
    if (!s.failures.empty()) js["failures"] = s.failures;
    j["scenarios"].push_back(std::move(js));
  }
  return j;
}

}  // namespace sdvguard::harness
