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

// End-to-end orchestration of the safety and topology workflows.
//
// Configuration file (JSON, every key optional; relative paths resolve
// against the file's directory):
//   {"vss": "...", "can": "...", "rules": "...", "metamodel": "...",
//    "constraints": "...", "top_k": 20, "token_budget": 4096,
//    "gateway": {"mode": "live|record|replay", "store": "...", "model": "...",
//                "temperature": 0.0, "max_tokens": 4096},
//    "max_iterations": 3, "auto_correct": false, "extraction_retries": 1,
//    "out_dir": "...", "embedding_url": "...", "rerank_url": "..."}

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdvguard/catalog.hpp"
#include "sdvguard/extraction.hpp"
#include "sdvguard/eventchain.hpp"
#include "sdvguard/llm_gateway.hpp"
#include "sdvguard/ocl.hpp"
#include "sdvguard/retrieval.hpp"
#include "sdvguard/safety_rules.hpp"
#include "sdvguard/topology.hpp"

namespace sdvguard::pipeline {

struct PipelineConfig {
  std::filesystem::path vss;
  std::filesystem::path can;
  std::filesystem::path rules;
  std::filesystem::path metamodel;
  std::filesystem::path constraints;
  std::size_t top_k = 20;
  std::size_t token_budget = 4096;
  llm::GatewayMode gateway_mode = llm::GatewayMode::kLive;
  std::filesystem::path store;
  llm::GatewayOptions gateway;
  int max_iterations = 3;
  bool auto_correct = false;
  int extraction_retries = 1;
  std::filesystem::path out_dir = "sdvguard-out";
  std::string embedding_url;  // SDVGUARD_EMBED_URL when unset
  std::string rerank_url;
};

PipelineConfig LoadConfig(const std::filesystem::path& path);
// Throws ConfigError: top_k or token_budget of 0, negative iteration or
// retry counts, a store path missing for record/replay.
void Validate(const PipelineConfig& config);

// Live and record modes read SDVGUARD_LLM_URL unless a completer is given.
std::unique_ptr<llm::Gateway> MakeGateway(const PipelineConfig& config,
                                          std::shared_ptr<llm::Completer> completer = nullptr);

struct StageRecord {
  std::string name;
  double millis = 0.0;
  bool ok = true;
  std::string error;
};

struct ArtifactRecord {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct RunRecord {
  std::string run_id;
  std::string started_at;  // UTC, ISO 8601
  std::vector<StageRecord> stages;
  std::vector<ArtifactRecord> artifacts;
  std::string verdict;  // pass | violated | fail | error
  std::string failed_stage;
  std::string error;
  int iterations = 0;

  int exit_code() const;  // 0 pass, 1 violated or fail, 2 error
};

nlohmann::ordered_json ToJson(const RunRecord& record);

// Loaded catalogs and their retrieval index.
class Grounding {
 public:
  Grounding(catalog::SignalCatalog signals, catalog::MessageCatalog messages);
  static Grounding Load(const std::filesystem::path& vss, const std::filesystem::path& can);

  const catalog::SignalCatalog& signals() const { return signals_; }
  const catalog::MessageCatalog& messages() const { return messages_; }
  const retrieval::RetrievalIndex& index() const { return index_; }

 private:
  catalog::SignalCatalog signals_;
  catalog::MessageCatalog messages_;
  retrieval::RetrievalIndex index_;
};

// Retrieval, chunking, extraction and validation with the configured retry.
extraction::ExtractionReport ExtractAndValidate(std::string_view code, const Grounding& grounding,
                                                const PipelineConfig& config,
                                                llm::Gateway& gateway);

struct SafetyOutcome {
  RunRecord record;
  std::optional<extraction::ExtractionReport> extraction;
  std::optional<chain::ChainDocument> chain;
  std::optional<rules::SafetyReport> report;
  std::string final_code;
};

// Never throws for stage failures; they end the run with verdict "error".
// Artifacts land in config.out_dir.
SafetyOutcome RunSafetyPipeline(const PipelineConfig& config,
                                const std::filesystem::path& code_path,
                                const std::filesystem::path& rules_path, llm::Gateway& gateway);

// Deterministic report body (no timestamps or paths).
nlohmann::ordered_json SafetyReportJson(const SafetyOutcome& outcome);
std::string RenderSafetyText(const SafetyOutcome& outcome);

struct TopologyInputs {
  std::optional<std::filesystem::path> model;         // .json or .puml
  std::optional<std::filesystem::path> requirements;  // used when model is unset
  std::optional<std::filesystem::path> constraints;
  std::optional<std::filesystem::path> guidelines;    // used when constraints is unset
};

struct TopologyOutcome {
  RunRecord record;
  std::optional<topology::InstanceModel> model;
  std::optional<topology::ConformanceReport> conformance;
  std::optional<ocl::ConstraintSet> constraints;
  std::optional<ocl::TopologyReport> report;
};

// `gateway` may be null when neither requirements nor guidelines are used
// and auto-correction is off.
TopologyOutcome RunTopologyPipeline(const PipelineConfig& config, const TopologyInputs& inputs,
                                    llm::Gateway* gateway);

nlohmann::ordered_json TopologyReportJson(const TopologyOutcome& outcome);
std::string RenderTopologyText(const TopologyOutcome& outcome);

}  // namespace sdvguard::pipeline
