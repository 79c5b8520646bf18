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

#include "sdvguard/cli.hpp"

#include <algorithm>
#include <optional>

#include "CLI11.hpp"
#include "sdvguard/deploy.hpp"
#include "sdvguard/errors.hpp"
#include "sdvguard/harness.hpp"
#include "sdvguard/pipeline.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::string config;
  std::string out;
  std::string replay;
  std::string record;
  std::string model;
};

struct CatalogFlags {
  std::string vss;
  std::string can;
  std::size_t top_k = 0;
  std::size_t token_budget = 0;
};

void AddCatalogFlags(CLI::App* cmd, CatalogFlags& f) {
  cmd->add_option("--vss", f.vss, "VSS catalog (JSON)");
  cmd->add_option("--can", f.can, "CAN message catalog (JSON)");
  cmd->add_option("--top-k", f.top_k, "catalog entries retrieved per run");
  cmd->add_option("--token-budget", f.token_budget, "token budget per extraction chunk");
}

pipeline::PipelineConfig Effective(const Globals& g, const CatalogFlags* c) {
  pipeline::PipelineConfig config =
      g.config.empty() ? pipeline::PipelineConfig{} : pipeline::LoadConfig(g.config);
  if (!g.out.empty()) config.out_dir = g.out;
  if (!g.replay.empty() && !g.record.empty()) {
    throw ConfigError("--replay and --record are mutually exclusive");
  }
  if (!g.replay.empty()) {
    config.gateway_mode = llm::GatewayMode::kReplay;
    config.store = g.replay;
  }
  if (!g.record.empty()) {
    config.gateway_mode = llm::GatewayMode::kRecord;
    config.store = g.record;
  }
  if (!g.model.empty()) config.gateway.model = g.model;
  if (c != nullptr) {
    if (!c->vss.empty()) config.vss = c->vss;
    if (!c->can.empty()) config.can = c->can;
    if (c->top_k != 0) config.top_k = c->top_k;
    if (c->token_budget != 0) config.token_budget = c->token_budget;
  }
  pipeline::Validate(config);
  return config;
}

chain::ChainDocument LoadChain(const fs::path& path) {
  const std::string body = text::ReadFile(path);
  if (path.extension() == ".json") return chain::ParseChainDocument(body);
  return chain::ToChainDocument(chain::ParseActivityDiagram(body));
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pre-deployment safety and security analysis for vehicle software", "sdv-guard"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "pipeline configuration (JSON)");
  app.add_option("--out", g.out, "output directory for artifacts");
  app.add_option("--replay", g.replay, "answer prompts from this replay store");
  app.add_option("--record", g.record, "call the model and record into this store");
  app.add_option("--model", g.model, "model name sent to the completion endpoint");

  int exit_code = 0;

  // analyze-safety
  auto* safety = app.add_subcommand("analyze-safety", "extract, build the event chain, check rules");
  CatalogFlags safety_catalogs;
  std::string code_path, rules_path;
  bool auto_correct = false;
  int max_iterations = -1;
  bool json = false;
  safety->add_option("--code", code_path, "source file to analyze")->required();
  safety->add_option("--rules", rules_path, "rule file");
  safety->add_flag("--auto-correct", auto_correct, "ask the model to fix violations");
  safety->add_option("--max-iterations", max_iterations, "correction iteration cap");
  safety->add_flag("--json", json, "print the machine-readable report");
  AddCatalogFlags(safety, safety_catalogs);
  safety->callback([&] {
    auto config = Effective(g, &safety_catalogs);
    if (auto_correct) config.auto_correct = true;
    if (max_iterations >= 0) config.max_iterations = max_iterations;
    const fs::path rules = rules_path.empty() ? config.rules : fs::path(rules_path);
    auto gateway = pipeline::MakeGateway(config);
    const auto outcome = pipeline::RunSafetyPipeline(config, code_path, rules, *gateway);
    if (json) {
      out << pipeline::SafetyReportJson(outcome).dump(2) << "\n";
    } else {
      out << pipeline::RenderSafetyText(outcome);
    }
    exit_code = outcome.record.exit_code();
  });

  // analyze-topology
  auto* topo = app.add_subcommand("analyze-topology", "check an instance model against constraints");
  std::string metamodel, model_path, requirements, constraints, guidelines;
  bool topo_correct = false;
  bool topo_json = false;
  topo->add_option("--metamodel", metamodel, "metamodel (JSON)");
  auto* model_opt = topo->add_option("--model", model_path, "instance model (.json or .puml)");
  auto* req_opt = topo->add_option("--requirements", requirements, "requirements text to generate from");
  model_opt->excludes(req_opt);
  auto* con_opt = topo->add_option("--constraints", constraints, "OCL constraint file");
  auto* gl_opt = topo->add_option("--guidelines", guidelines, "guideline text to generate from");
  con_opt->excludes(gl_opt);
  topo->add_flag("--auto-correct", topo_correct, "ask the model to fix failing constraints");
  topo->add_option("--max-iterations", max_iterations, "correction iteration cap");
  topo->add_flag("--json", topo_json, "print the machine-readable report");
  topo->callback([&] {
    auto config = Effective(g, nullptr);
    if (!metamodel.empty()) config.metamodel = metamodel;
    if (topo_correct) config.auto_correct = true;
    if (max_iterations >= 0) config.max_iterations = max_iterations;
    pipeline::TopologyInputs in;
    if (!model_path.empty()) in.model = model_path;
    if (!requirements.empty()) in.requirements = requirements;
    if (!constraints.empty()) in.constraints = constraints;
    else if (!config.constraints.empty() && guidelines.empty()) in.constraints = config.constraints;
    if (!guidelines.empty()) in.guidelines = guidelines;
    std::unique_ptr<llm::Gateway> gateway;
    if (!in.model || !in.constraints || config.auto_correct) gateway = pipeline::MakeGateway(config);
    const auto outcome = pipeline::RunTopologyPipeline(config, in, gateway.get());
    if (topo_json) {
      out << pipeline::TopologyReportJson(outcome).dump(2) << "\n";
    } else {
      out << pipeline::RenderTopologyText(outcome);
    }
    exit_code = outcome.record.exit_code();
  });

  // extract-signals
  auto* extract = app.add_subcommand("extract-signals", "extract and validate signal usage");
  CatalogFlags extract_catalogs;
  std::string extract_code;
  extract->add_option("--code", extract_code, "source file")->required();
  AddCatalogFlags(extract, extract_catalogs);
  extract->callback([&] {
    const auto config = Effective(g, &extract_catalogs);
    const auto grounding = pipeline::Grounding::Load(config.vss, config.can);
    auto gateway = pipeline::MakeGateway(config);
    const auto report =
        pipeline::ExtractAndValidate(text::ReadFile(extract_code), grounding, config, *gateway);
    out << extraction::ToJson(report).dump(2) << "\n";
    exit_code = report.rejected.empty() ? 0 : 1;
  });

  // build-chain
  auto* build = app.add_subcommand("build-chain", "generate the event chain for a source file");
  CatalogFlags build_catalogs;
  std::string build_code, current;
  build->add_option("--code", build_code, "source file")->required();
  build->add_option("--current", current, "existing chain diagram to update");
  AddCatalogFlags(build, build_catalogs);
  build->callback([&] {
    const auto config = Effective(g, &build_catalogs);
    const auto grounding = pipeline::Grounding::Load(config.vss, config.can);
    auto gateway = pipeline::MakeGateway(config);
    const std::string code = text::ReadFile(build_code);
    const auto report = pipeline::ExtractAndValidate(code, grounding, config, *gateway);
    const auto generated = chain::GenerateChain(
        code, current.empty() ? std::string() : text::ReadFile(current), report.accepted, *gateway);
    out << generated.plantuml;
  });

  // check-chain
  auto* check = app.add_subcommand("check-chain", "check an existing chain against rules");
  std::string chain_path, check_rules;
  bool check_json = false;
  check->add_option("--chain", chain_path, "chain diagram (.puml) or document (.json)")->required();
  check->add_option("--rules", check_rules, "rule file");
  check->add_flag("--json", check_json, "print the machine-readable report");
  check->callback([&] {
    const auto config = Effective(g, nullptr);
    const fs::path rules = check_rules.empty() ? config.rules : fs::path(check_rules);
    if (rules.empty()) throw ConfigError("check-chain needs --rules or a configured rule file");
    const auto doc = LoadChain(chain_path);
    const auto report = rules::Check(doc, rules::ParseRules(text::ReadFile(rules)));
    if (check_json) {
      out << rules::ToJson(report).dump(2) << "\n";
    } else {
      for (const auto& r : report.rules) {
        out << (r.passed ? "pass     " : "VIOLATED ") << r.name << "  [" << rules::ToString(r.mode)
            << "] " << r.expr << "\n";
      }
      out << rules::DescribeViolations(report);
    }
    exit_code = report.passed() ? 0 : 1;
  });

  // eval
  auto* eval = app.add_subcommand("eval", "repeated-run success rates over a scenario manifest");
  std::string manifest;
  std::size_t runs = 10;
  double drop = 0.0;
  std::uint64_t seed = 0;
  eval->add_option("--manifest", manifest, "scenario manifest")->required();
  eval->add_option("--runs", runs, "runs per scenario");
  eval->add_option("--drop-probability", drop, "fault injection: chance each expected entry is lost");
  eval->add_option("--seed", seed, "fault injection seed");
  eval->callback([&] {
    const auto config = Effective(g, nullptr);
    const auto result =
        harness::RunHarness(harness::LoadManifest(manifest), config, runs, {drop, seed});
    out << harness::ToJson(result).dump(2) << "\n";
  });

  // deploy
  auto* dep = app.add_subcommand("deploy", "hand an artifact to a test target");
  std::string artifact, target, receipt_out, verify, local;
  dep->add_option("--artifact", artifact, "file to deploy");
  dep->add_option("--target", target, "directory or http(s) URL");
  dep->add_option("--receipt", receipt_out, "where to write the receipt");
  dep->add_option("--verify", verify, "check a receipt instead of deploying");
  dep->add_option("--local", local, "local copy to verify for endpoint receipts");
  dep->callback([&] {
    if (!verify.empty()) {
      const auto receipt = deploy::ParseReceipt(text::ReadFile(verify));
      const bool ok = deploy::VerifyReceipt(receipt, local);
      out << (ok ? "verified " : "MISMATCH ") << receipt.destination << "\n";
      exit_code = ok ? 0 : 1;
      return;
    }
    if (artifact.empty() || target.empty()) {
      throw ConfigError("deploy needs --artifact and --target (or --verify)");
    }
    const auto receipt = deploy::Deploy(artifact, target);
    const std::string body = deploy::ToJson(receipt).dump(2) + "\n";
    if (!receipt_out.empty()) text::WriteFile(receipt_out, body);
    out << body;
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "sdv-guard: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "sdv-guard: " << e.kind() << " error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "sdv-guard: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}

}  // namespace sdvguard::cli
