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

#include "sdvguard/pipeline.hpp"

#include <cstdlib>
#include <ctime>
#include <set>
#include <type_traits>

#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"
#include "sdvguard/topology_assist.hpp"

namespace sdvguard::pipeline {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Thrown after a stage failure has been recorded.
struct StageFailed {};

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(RunRecord& record, fs::path out_dir) : record_(record), out_dir_(std::move(out_dir)) {
    record_.started_at = UtcNow();
  }

  template <typename F>
  auto Stage(const std::string& name, F&& body) -> decltype(body()) {
    const auto t0 = Clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    };
    try {
      auto result = body();
      record_.stages.push_back({name, elapsed(), true, {}});
      return result;
    } catch (const std::exception& e) {
      record_.stages.push_back({name, elapsed(), false, e.what()});
      record_.failed_stage = name;
      record_.error = e.what();
      record_.verdict = "error";
      throw StageFailed{};
    }
  }

  void Write(const std::string& relative, std::string_view content) {
    text::WriteFile(out_dir_ / relative, content);
    for (auto& a : record_.artifacts) {
      if (a.path == relative) {
        a.sha256 = text::Sha256Hex(content);
        return;
      }
    }
    record_.artifacts.push_back({relative, text::Sha256Hex(content)});
  }

  void Finish(const std::string& seed) {
    record_.run_id = text::Sha256Hex(record_.started_at + "\n" + seed).substr(0, 16);
    text::WriteFile(out_dir_ / "run.json", ToJson(record_).dump(2) + "\n");
  }

 private:
  RunRecord& record_;
  fs::path out_dir_;
};

fs::path Resolve(const fs::path& base, const Json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a path string");
  fs::path p = j[key].get<std::string>();
  return p.is_relative() ? base / p : p;
}

template <typename T>
T Number(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (!j[key].is_number_unsigned()) {
      throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
    }
  }
  return j[key].get<T>();
}

void RequireFiles(const std::vector<std::pair<std::string, fs::path>>& files) {
  std::string missing;
  for (const auto& [what, path] : files) {
    if (path.empty()) {
      missing += "\n  " + what + ": not configured";
    } else if (!fs::is_regular_file(path)) {
      missing += "\n  " + what + ": " + path.string() + " does not exist";
    }
  }
  if (!missing.empty()) throw ConfigError("missing inputs:" + missing);
}

std::string ConstraintsText(const ocl::ConstraintSet& set) {
  std::string out;
  for (const auto& c : set) {
    out += "context " + c.context + "\ninv " + c.name + ":\n  " + ocl::ToString(c.body) + "\n\n";
  }
  return out;
}

struct Pass {
  extraction::ExtractionReport extraction;
  std::string plantuml;
  chain::ChainDocument chain;
  rules::SafetyReport report;
};

Pass AnalyzeOnce(Run& run, const std::string& prefix, std::string_view code,
                 std::string_view current_chain, const Grounding& grounding,
                 const rules::RuleSet& ruleset, const PipelineConfig& config,
                 llm::Gateway& gateway) {
  Pass pass;
  pass.extraction = run.Stage(prefix + "extraction", [&] {
    return ExtractAndValidate(code, grounding, config, gateway);
  });
  run.Write(prefix + "extraction.json", extraction::ToJson(pass.extraction).dump(2) + "\n");

  auto generated = run.Stage(prefix + "chain-generation", [&] {
    return chain::GenerateChain(code, current_chain, pass.extraction.accepted, gateway);
  });
  pass.plantuml = generated.plantuml;
  run.Write(prefix + "chain.puml", pass.plantuml);
  pass.chain = run.Stage(prefix + "chain-transform", [&] {
    return chain::ToChainDocument(chain::ParseActivityDiagram(generated.plantuml),
                                  {text::Sha256Hex(code), generated.prompt_digest});
  });
  run.Write(prefix + "chain.json", chain::SerializeChain(pass.chain));

  pass.report = run.Stage(prefix + "rule-check", [&] { return rules::Check(pass.chain, ruleset); });
  run.Write(prefix + "safety.json", rules::ToJson(pass.report).dump(2) + "\n");
  return pass;
}

std::string SafetyVerdict(const Pass& pass) {
  return pass.report.passed() && pass.extraction.rejected.empty() ? "pass" : "violated";
}

}  // namespace

PipelineConfig LoadConfig(const fs::path& path) {
  const std::string body = text::ReadFile(path);
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    auto [line, column] = text::LineColumn(body, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("malformed config: ") + e.what(), line, column);
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kKeys = {
      "vss", "can", "rules", "metamodel", "constraints", "top_k", "token_budget", "gateway",
      "max_iterations", "auto_correct", "extraction_retries", "out_dir", "embedding_url",
      "rerank_url"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  const fs::path base = path.parent_path();
  PipelineConfig c;
  c.vss = Resolve(base, j, "vss");
  c.can = Resolve(base, j, "can");
  c.rules = Resolve(base, j, "rules");
  c.metamodel = Resolve(base, j, "metamodel");
  c.constraints = Resolve(base, j, "constraints");
  if (j.contains("out_dir")) c.out_dir = Resolve(base, j, "out_dir");
  c.top_k = Number<std::size_t>(j, "top_k", c.top_k);
  c.token_budget = Number<std::size_t>(j, "token_budget", c.token_budget);
  c.max_iterations = Number<int>(j, "max_iterations", c.max_iterations);
  c.extraction_retries = Number<int>(j, "extraction_retries", c.extraction_retries);
  if (j.contains("auto_correct")) {
    if (!j["auto_correct"].is_boolean()) throw ConfigError("'auto_correct' must be a boolean");
    c.auto_correct = j["auto_correct"].get<bool>();
  }
  c.embedding_url = j.value("embedding_url", std::string());
  c.rerank_url = j.value("rerank_url", std::string());
  if (j.contains("gateway")) {
    const Json& g = j["gateway"];
    if (!g.is_object()) throw ConfigError("'gateway' must be an object");
    const std::string mode = g.value("mode", std::string("live"));
    if (mode == "live") c.gateway_mode = llm::GatewayMode::kLive;
    else if (mode == "record") c.gateway_mode = llm::GatewayMode::kRecord;
    else if (mode == "replay") c.gateway_mode = llm::GatewayMode::kReplay;
    else throw ConfigError("unknown gateway mode '" + mode + "'");
    c.store = Resolve(base, g, "store");
    c.gateway.model = g.value("model", c.gateway.model);
    if (g.contains("temperature")) c.gateway.temperature = Number<double>(g, "temperature", 0.0);
    c.gateway.max_tokens = Number<int>(g, "max_tokens", c.gateway.max_tokens);
  }
  Validate(c);
  return c;
}

void Validate(const PipelineConfig& c) {
  if (c.top_k == 0) throw ConfigError("top_k must be at least 1");
  if (c.token_budget == 0) throw ConfigError("token_budget must be at least 1");
  if (c.max_iterations < 0) throw ConfigError("max_iterations must be non-negative");
  if (c.extraction_retries < 0) throw ConfigError("extraction_retries must be non-negative");
  if (c.gateway.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (c.gateway_mode != llm::GatewayMode::kLive && c.store.empty()) {
    throw ConfigError(std::string(llm::ToString(c.gateway_mode)) + " mode needs a replay store");
  }
}

std::unique_ptr<llm::Gateway> MakeGateway(const PipelineConfig& config,
                                          std::shared_ptr<llm::Completer> completer) {
  switch (config.gateway_mode) {
    case llm::GatewayMode::kReplay:
      return llm::Gateway::Replay(llm::ReplayStore::Load(config.store), config.gateway);
    case llm::GatewayMode::kRecord:
      if (!completer) completer = llm::CompleterFromEnvironment();
      return llm::Gateway::Record(std::move(completer), config.store, config.gateway);
    case llm::GatewayMode::kLive:
      if (!completer) completer = llm::CompleterFromEnvironment();
      return llm::Gateway::Live(std::move(completer), config.gateway);
  }
  throw ConfigError("unknown gateway mode");
}

int RunRecord::exit_code() const {
  if (verdict == "pass") return 0;
  if (verdict == "violated" || verdict == "fail") return 1;
  return 2;
}

Json ToJson(const RunRecord& r) {
  Json j;
  j["run_id"] = r.run_id;
  j["started_at"] = r.started_at;
  j["verdict"] = r.verdict;
  j["iterations"] = r.iterations;
  if (!r.failed_stage.empty()) {
    j["failed_stage"] = r.failed_stage;
    j["error"] = r.error;
  }
  j["stages"] = Json::array();
  for (const auto& s : r.stages) {
    Json js{{"name", s.name}, {"millis", s.millis}, {"ok", s.ok}};
    if (!s.ok) js["error"] = s.error;
    j["stages"].push_back(std::move(js));
  }
  j["artifacts"] = Json::array();
  for (const auto& a : r.artifacts) {
    j["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}});
  }
  return j;
}

namespace {

std::vector<catalog::CatalogEntry> Combined(const catalog::SignalCatalog& s,
                                            const catalog::MessageCatalog& m) {
  std::vector<catalog::CatalogEntry> all = s.entries();
  all.insert(all.end(), m.entries().begin(), m.entries().end());
  return all;
}

}  // namespace

Grounding::Grounding(catalog::SignalCatalog signals, catalog::MessageCatalog messages)
    : signals_(std::move(signals)),
      messages_(std::move(messages)),
      index_(Combined(signals_, messages_)) {}

Grounding Grounding::Load(const fs::path& vss, const fs::path& can) {
  return Grounding(catalog::ParseVssCatalog(text::ReadFile(vss)),
                   catalog::ParseCanCatalog(text::ReadFile(can)));
}

extraction::ExtractionReport ExtractAndValidate(std::string_view code, const Grounding& grounding,
                                                const PipelineConfig& config,
                                                llm::Gateway& gateway) {
  std::unique_ptr<retrieval::Stage1Scorer> stage1;
  std::unique_ptr<retrieval::PairScorer> stage2;
  std::string embed_url = config.embedding_url;
  if (embed_url.empty()) {
    if (const char* env = std::getenv("SDVGUARD_EMBED_URL")) embed_url = env;
  }
  auto endpoint = [](std::string url) {
    http::Endpoint e;
    e.url = std::move(url);
    return e;
  };
  if (!embed_url.empty()) stage1 = std::make_unique<retrieval::EmbeddingScorer>(endpoint(embed_url));
  if (!config.rerank_url.empty()) {
    stage2 = std::make_unique<retrieval::CrossEncoderScorer>(endpoint(config.rerank_url));
  }
  retrieval::RetrievalOptions options;
  options.stage1 = stage1.get();
  options.stage2 = stage2.get();
  const auto shortlist = retrieval::RetrieveTopK(grounding.index(), code, config.top_k, options);
  if (shortlist.ranked.empty()) throw PreconditionError("retrieval found no catalog context");
  const auto chunks = retrieval::ChunkEntries(shortlist, config.token_budget);

  const std::string digest = text::Sha256Hex(code);
  auto report = extraction::ValidateEntries(extraction::ExtractEntries(code, chunks, gateway),
                                            grounding.signals(), grounding.messages(), digest);
  for (int retry = 0; retry < config.extraction_retries && !report.rejected.empty(); ++retry) {
    report = extraction::ValidateEntries(
        extraction::ExtractEntries(code, chunks, gateway, extraction::DescribeRejections(report)),
        grounding.signals(), grounding.messages(), digest);
  }
  return report;
}

SafetyOutcome RunSafetyPipeline(const PipelineConfig& config, const fs::path& code_path,
                                const fs::path& rules_path, llm::Gateway& gateway) {
  SafetyOutcome outcome;
  Run run(outcome.record, config.out_dir);
  std::string code;
  try {
    run.Stage("config", [&] {
      Validate(config);
      RequireFiles({{"code", code_path}, {"rules", rules_path}, {"vss catalog", config.vss},
                    {"can catalog", config.can}});
      return 0;
    });
    code = text::ReadFile(code_path);
    const auto ruleset = run.Stage("rules", [&] { return rules::ParseRules(text::ReadFile(rules_path)); });
    const auto grounding = run.Stage("catalogs", [&] { return Grounding::Load(config.vss, config.can); });

    Pass pass = AnalyzeOnce(run, "", code, "", grounding, ruleset, config, gateway);
    while (config.auto_correct && !pass.report.passed() &&
           outcome.record.iterations < config.max_iterations) {
      const int n = ++outcome.record.iterations;
      const std::string prefix = "iteration-" + std::to_string(n) + "/";
      code = text::StripCodeFence(run.Stage(prefix + "correction", [&] {
        return rules::SuggestCorrection(code, pass.report, gateway);
      }));
      run.Write(prefix + "code.txt", code);
      pass = AnalyzeOnce(run, prefix, code, pass.plantuml, grounding, ruleset, config, gateway);
    }
    outcome.record.verdict = SafetyVerdict(pass);
    outcome.extraction = std::move(pass.extraction);
    outcome.chain = std::move(pass.chain);
    outcome.report = std::move(pass.report);
  } catch (const StageFailed&) {
  }
  outcome.final_code = code;
  run.Write("report.json", SafetyReportJson(outcome).dump(2) + "\n");
  run.Write("report.txt", RenderSafetyText(outcome));
  run.Finish(code);
  return outcome;
}

Json SafetyReportJson(const SafetyOutcome& o) {
  Json j;
  j["verdict"] = o.record.verdict;
  j["iterations"] = o.record.iterations;
  if (!o.record.failed_stage.empty()) {
    j["failed_stage"] = o.record.failed_stage;
    j["error"] = o.record.error;
  }
  if (o.extraction) j["extraction"] = extraction::ToJson(*o.extraction);
  if (o.chain) {
    j["chain"] = {{"digest", text::Sha256Hex(chain::SerializeChain(*o.chain))},
                  {"paths", Json::array()}};
    for (const auto& p : chain::EnumeratePaths(*o.chain)) j["chain"]["paths"].push_back(chain::Events(p));
  }
  if (o.report) j["safety"] = rules::ToJson(*o.report);
  return j;
}

std::string RenderSafetyText(const SafetyOutcome& o) {
  std::string out = "verdict: " + text::ToLower(o.record.verdict) + "\n";
  if (o.record.iterations > 0) {
    out += "correction iterations: " + std::to_string(o.record.iterations) + "\n";
  }
  if (!o.record.failed_stage.empty()) {
    out += "failed stage: " + o.record.failed_stage + "\n" + o.record.error + "\n";
  }
  if (o.extraction) {
    out += "\nsignals/messages: " + std::to_string(o.extraction->accepted.size()) +
           " accepted, " + std::to_string(o.extraction->rejected.size()) + " rejected\n";
    for (const auto& a : o.extraction->accepted) {
      out += "  ok        " + a.resolved_key +
             (a.entry.value ? " = " + *a.entry.value : std::string()) + "\n";
    }
    for (const auto& r : o.extraction->rejected) {
      out += "  rejected  " + r.entry.name + " (" + std::string(extraction::ToString(r.reason)) +
             "): " + r.detail + "\n";
    }
  }
  if (o.report) {
    out += "\nrules:\n";
    for (const auto& r : o.report->rules) {
      out += "  " + std::string(r.passed ? "pass     " : "VIOLATED ") + r.name + "  [" +
             std::string(rules::ToString(r.mode)) + "] " + r.expr + "\n";
    }
    const std::string detail = rules::DescribeViolations(*o.report);
    if (!detail.empty()) out += "\n" + detail;
  }
  return out;
}

TopologyOutcome RunTopologyPipeline(const PipelineConfig& config, const TopologyInputs& in,
                                    llm::Gateway* gateway) {
  TopologyOutcome outcome;
  Run run(outcome.record, config.out_dir);
  std::string seed;
  try {
    run.Stage("config", [&] {
      Validate(config);
      std::vector<std::pair<std::string, fs::path>> files{{"metamodel", config.metamodel}};
      if (in.model) files.emplace_back("model", *in.model);
      else if (in.requirements) files.emplace_back("requirements", *in.requirements);
      else throw ConfigError("need a model or a requirements file");
      if (in.constraints) files.emplace_back("constraints", *in.constraints);
      else if (in.guidelines) files.emplace_back("guidelines", *in.guidelines);
      else throw ConfigError("need a constraints or a guidelines file");
      RequireFiles(files);
      const bool needs_model = !in.model || !in.constraints || config.auto_correct;
      if (needs_model && gateway == nullptr) {
        throw ConfigError("generation and correction need a language-model gateway");
      }
      return 0;
    });
    const auto metamodel = run.Stage("metamodel", [&] {
      return topology::ParseMetamodel(text::ReadFile(config.metamodel));
    });
    auto model = run.Stage("instance", [&] {
      if (in.model) {
        const std::string body = text::ReadFile(*in.model);
        return in.model->extension() == ".puml" ? topology::ImportClassDiagram(body)
                                                : topology::ParseInstance(body);
      }
      return topology::GenerateInstance(text::ReadFile(*in.requirements), metamodel, std::nullopt,
                                        *gateway);
    });
    seed = topology::SerializeInstance(model);
    outcome.model = model;
    run.Write("model.puml", topology::ExportClassDiagram(model));
    run.Write("model.json", topology::SerializeInstance(model));

    run.Stage("conformance", [&] {
      outcome.conformance = topology::Conform(model, metamodel);
      if (!outcome.conformance->ok()) {
        throw PreconditionError("model does not conform:\n" + outcome.conformance->Describe());
      }
      return 0;
    });
    const auto constraints = run.Stage("constraints", [&] {
      if (in.constraints) {
        auto set = ocl::ParseConstraints(text::ReadFile(*in.constraints));
        ocl::TypeCheck(set, metamodel);
        return set;
      }
      return topology::GenerateConstraints(text::ReadFile(*in.guidelines), metamodel, *gateway);
    });
    outcome.constraints = constraints;
    run.Write("constraints.ocl", ConstraintsText(constraints));

    auto report = run.Stage("evaluation", [&] {
      return ocl::EvalConstraints(model, metamodel, constraints);
    });
    run.Write("passfail.tsv", ocl::PassFailList(report));
    while (config.auto_correct && !report.passed() &&
           outcome.record.iterations < config.max_iterations) {
      const int n = ++outcome.record.iterations;
      const std::string prefix = "iteration-" + std::to_string(n) + "/";
      auto corrected = run.Stage(prefix + "correction", [&] {
        return topology::CorrectInstance(model, report, metamodel, constraints, *gateway);
      });
      model = std::move(corrected.model);
      report = std::move(corrected.report);
      run.Write(prefix + "model.puml", topology::ExportClassDiagram(model));
      run.Write(prefix + "passfail.tsv", ocl::PassFailList(report));
    }
    outcome.model = model;
    outcome.report = report;
    outcome.record.verdict = report.passed() ? "pass" : "fail";
  } catch (const StageFailed&) {
  }
  run.Write("report.json", TopologyReportJson(outcome).dump(2) + "\n");
  run.Write("report.txt", RenderTopologyText(outcome));
  run.Finish(seed);
  return outcome;
}

Json TopologyReportJson(const TopologyOutcome& o) {
  Json j;
  j["verdict"] = o.record.verdict;
  j["iterations"] = o.record.iterations;
  if (!o.record.failed_stage.empty()) {
    j["failed_stage"] = o.record.failed_stage;
    j["error"] = o.record.error;
  }
  if (o.report) j["topology"] = ocl::ToJson(*o.report);
  return j;
}

std::string RenderTopologyText(const TopologyOutcome& o) {
  std::string out = "verdict: " + o.record.verdict + "\n";
  if (o.record.iterations > 0) {
    out += "correction iterations: " + std::to_string(o.record.iterations) + "\n";
  }
  if (!o.record.failed_stage.empty()) {
    out += "failed stage: " + o.record.failed_stage + "\n" + o.record.error + "\n";
  }
  if (o.report) {
    out += "\n" + std::to_string(o.report->count(ocl::Verdict::kPass)) + " pass, " +
           std::to_string(o.report->count(ocl::Verdict::kFail)) + " fail, " +
           std::to_string(o.report->count(ocl::Verdict::kNotApplicable)) + " not applicable\n";
    for (const auto& e : o.report->failing()) {
      out += "  FAIL " + e.constraint + " on " + e.object_id + ": " + e.reason + "\n";
    }
  }
  return out;
}

}  // namespace sdvguard::pipeline
