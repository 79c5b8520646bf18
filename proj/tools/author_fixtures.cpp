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

// Regenerates the replay stores under data/replay by running the pipelines in
// record mode against scripted completions. Usage: author_fixtures <data-dir>

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sdvguard/errors.hpp"
#include "sdvguard/llm_gateway.hpp"
#include "sdvguard/pipeline.hpp"
#include "sdvguard/text.hpp"

namespace fs = std::filesystem;
using namespace sdvguard;

namespace {

struct Script {
  std::vector<std::string> needles;  // all must occur in the prompt
  std::string response;
};

// First script whose needles all occur wins.
class ScriptedCompleter final : public llm::Completer {
 public:
  explicit ScriptedCompleter(std::vector<Script> scripts) : scripts_(std::move(scripts)) {}

  std::string Complete(const llm::CompletionRequest& request) override {
    for (const auto& s : scripts_) {
      bool all = true;
      for (const auto& n : s.needles) all = all && request.prompt.find(n) != std::string::npos;
      if (all) return s.response;
    }
    throw GatewayError("no scripted completion for prompt: " + request.prompt.substr(0, 120), 0);
  }

 private:
  std::vector<Script> scripts_;
};

constexpr const char* kPc1 = "You are extracting";
constexpr const char* kPc2 = "You are updating PlantUml";
constexpr const char* kPc2b = "Based on code analysis outcome";
constexpr const char* kPc3 = "Update model instance";
constexpr const char* kPc4 = "Generate automotive system security constraints";
constexpr const char* kPc4b = "Update automotive system model";

const std::string kS1Entries = R"([
  {"name": "Vehicle.ADAS.PedestrianDetection.Camera.IsDetected", "type": "boolean", "value": true, "protocol": "VSS"},
  {"name": "ThrottleCmd", "type": "float", "value": 40, "protocol": "CAN"},
  {"name": "Vehicle.Speed.Target", "type": "float", "value": 25.0, "protocol": "VSS"}
])";

const std::string kS2Entries = R"([
  {"name": "Vehicle.ADAS.PedestrianDetection.Lidar.IsDetected", "type": "boolean", "value": null, "protocol": "VSS"},
  {"name": "BrakeCmd", "type": "float", "value": 100, "protocol": "CAN"},
  {"name": "Vehicle.ADAS.Brake.IsEngaged", "type": "boolean", "value": true, "protocol": "VSS"}
])";

const std::string kS3Entries = R"([
  {"name": "BrakeCmd", "type": "float", "value": 100, "protocol": "CAN"},
  {"name": "Vehicle.ADAS.Brake.IsEngaged", "type": "boolean", "value": true, "protocol": "VSS"},
  {"name": "Vehicle.ADAS.PedestrianDetection.Camera.IsDetected", "type": "boolean", "value": null, "protocol": "VSS"}
])";

// First answer names a signal that is not in the catalog; the retry drops it.
const std::string kM1First = R"([
  {"name": "Vehicle.Speed.Target", "type": "float", "value": 20.0, "protocol": "VSS"},
  {"name": "Vehicle.ADAS.CruiseControl.Mode", "type": "string", "value": "ACTIVE", "protocol": "VSS"},
  {"name": "Vehicle.Cabin.Lights.Level", "type": "uint8", "value": 30, "protocol": "VSS"}
])";

const std::string kM1Retry = R"([
  {"name": "Vehicle.Speed.Target", "type": "float", "value": 20.0, "protocol": "VSS"},
  {"name": "Vehicle.ADAS.CruiseControl.Mode", "type": "string", "value": "ACTIVE", "protocol": "VSS"},
  {"name": "CabinLightCmd", "type": "float", "value": 30, "protocol": "CAN"}
])";

const std::string kM2Entries = R"([
  {"name": "Vehicle.Body.Lights.Hazard.IsSignaling", "type": "boolean", "value": true, "protocol": "VSS"}
])";

const std::string kGeneratedConstraints = R"(```ocl
context Message
inv SteeringCommandWithinLimits:
  self.target.oclIsTypeOf(SteeringActuator) implies
    let angle : Real = self.payloadValue.toReal() in
      angle >= -15.0 and angle <= 15.0

context Message
inv HPCtoZoneEthernetIEEE1722:
  self.source.oclIsTypeOf(HighPerformanceComputer) and
  self.target.oclIsTypeOf(ZoneECU)
  implies
    self.network.oclIsTypeOf(Ethernet) and
    self.standard = MessageStandardKind::IEEE-1722

context VSSMessage
inv TargetSpeedWithinSafetyLimit:
  self.vssPath = 'Vehicle.Speed.Target'
  implies
    self.payloadValue.toReal() <= 30.0
```
)";

const std::string kBadInstance = R"(```plantuml
@startuml
object hpc : CentralGateway {
  name = "HPC"
}
@enduml
```
)";

std::string Fenced(const std::string& lang, const std::string& body) {
  return "```" + lang + "\n" + body + (body.ends_with('\n') ? "" : "\n") + "```\n";
}

pipeline::PipelineConfig BaseConfig(const fs::path& data, const fs::path& store) {
  pipeline::PipelineConfig c;
  c.vss = data / "catalogs/adas_vss.json";
  c.can = data / "catalogs/adas_can.json";
  c.metamodel = data / "metamodel/sdv_topology.json";
  c.gateway_mode = llm::GatewayMode::kRecord;
  c.store = store;
  c.out_dir = fs::temp_directory_path() / "sdvguard-author";
  return c;
}

void Reset(const fs::path& store) {
  fs::remove(store);
  fs::remove_all(fs::temp_directory_path() / "sdvguard-author");
}

void Expect(bool ok, const std::string& what) {
  if (!ok) throw Error("author", "unexpected outcome: " + what);
  std::cout << "  " << what << "\n";
}

void RecordSafety(const fs::path& data, const std::string& name, const std::string& rules,
                  std::vector<Script> scripts, bool auto_correct, const std::string& verdict) {
  const fs::path store = data / "replay" / (name + ".json");
  auto completer = std::make_shared<ScriptedCompleter>(std::move(scripts));
  pipeline::PipelineConfig config = BaseConfig(data, store);
  Reset(store);
  for (bool correct : {false, auto_correct}) {
    config.auto_correct = correct;
    auto gateway = pipeline::MakeGateway(config, completer);
    auto outcome = pipeline::RunSafetyPipeline(config, data / "scenarios" / (name + ".py"),
                                               data / "rules" / rules, *gateway);
    const std::string want = correct ? "pass" : verdict;
    Expect(outcome.record.verdict == want,
           name + (correct ? " auto-correct" : "") + " -> " + outcome.record.verdict +
               (outcome.record.error.empty() ? "" : " (" + outcome.record.error + ")"));
    if (!auto_correct) break;
  }
}

void RecordMapping(const fs::path& data, const std::string& name, std::vector<Script> scripts) {
  const fs::path store = data / "replay" / (name + ".json");
  Reset(store);
  auto completer = std::make_shared<ScriptedCompleter>(std::move(scripts));
  pipeline::PipelineConfig config = BaseConfig(data, store);
  auto gateway = pipeline::MakeGateway(config, completer);
  auto grounding = pipeline::Grounding::Load(config.vss, config.can);
  auto report = pipeline::ExtractAndValidate(
      text::ReadFile(data / "scenarios" / (name + ".py")), grounding, config, *gateway);
  Expect(report.rejected.empty(),
         name + " accepted " + std::to_string(report.accepted.size()) + " entries");
}

void RecordTopology(const fs::path& data) {
  const std::string instance = text::ReadFile(data / "topology/instance.puml");
  {
    const fs::path store = data / "replay/topology.json";
    Reset(store);
    auto completer = std::make_shared<ScriptedCompleter>(std::vector<Script>{
        {{kPc3, "pedestrian-response demonstrator"}, Fenced("plantuml", instance)},
        {{kPc4, "G1. Steering commands"}, kGeneratedConstraints},
        {{kPc4b, "HPCtoZoneEthernetIEEE1722\tm_hpc_zone\tfail"}, Fenced("plantuml", instance)},
    });
    pipeline::PipelineConfig config = BaseConfig(data, store);
    auto gateway = pipeline::MakeGateway(config, completer);

    pipeline::TopologyInputs generate;
    generate.requirements = data / "topology/requirements.txt";
    generate.guidelines = data / "topology/guidelines.txt";
    auto a = pipeline::RunTopologyPipeline(config, generate, gateway.get());
    Expect(a.record.verdict == "pass", "topology generation -> " + a.record.verdict + " " +
                                           a.record.error);

    config.auto_correct = true;
    pipeline::TopologyInputs faulty;
    faulty.model = data / "topology/instance_faulty.json";
    faulty.constraints = data / "topology/constraints.ocl";
    auto b = pipeline::RunTopologyPipeline(config, faulty, gateway.get());
    Expect(b.record.verdict == "pass" && b.record.iterations == 1,
           "topology correction -> " + b.record.verdict + " " + b.record.error);
  }
  {
    const fs::path store = data / "replay/topology_invalid.json";
    Reset(store);
    auto completer =
        std::make_shared<ScriptedCompleter>(std::vector<Script>{{{kPc3}, kBadInstance}});
    pipeline::PipelineConfig config = BaseConfig(data, store);
    auto gateway = pipeline::MakeGateway(config, completer);
    pipeline::TopologyInputs generate;
    generate.requirements = data / "topology/requirements.txt";
    generate.constraints = data / "topology/constraints.ocl";
    auto c = pipeline::RunTopologyPipeline(config, generate, gateway.get());
    Expect(c.record.verdict == "error", "invalid topology generation -> " + c.record.verdict);
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: author_fixtures <data-dir>\n";
    return 2;
  }
  const fs::path data = fs::absolute(argv[1]);
  try {
    const std::string chain_s1 = text::ReadFile(data / "chains/s1.puml");
    const std::string chain_s2 = text::ReadFile(data / "chains/s2.puml");
    const std::string chain_s3 = text::ReadFile(data / "chains/s3.puml");
    const std::string chain_s3c = text::ReadFile(data / "chains/s3_corrected.puml");
    const std::string code_s3c = text::ReadFile(data / "scenarios/s3_corrected.py");

    RecordSafety(data, "s1", "scenario1.rules",
                 {{{kPc1, "variant 1:"}, kS1Entries}, {{kPc2, "variant 1:"}, chain_s1}}, false,
                 "violated");
    RecordSafety(data, "s2", "scenario2.rules",
                 {{{kPc1, "variant 2:"}, kS2Entries}, {{kPc2, "variant 2:"}, chain_s2}}, false,
                 "violated");
    RecordSafety(data, "s3", "scenario3.rules",
                 {{{kPc2b, "variant 3: braking issued"}, Fenced("python", code_s3c)},
                  {{kPc1, "variant 3"}, kS3Entries},
                  {{kPc2, "variant 3 after correction"}, chain_s3c},
                  {{kPc2, "variant 3: braking issued"}, chain_s3}},
                 true, "violated");
    RecordSafety(data, "s3_corrected", "scenario3.rules",
                 {{{kPc1, "variant 3 after correction"}, kS3Entries},
                  {{kPc2, "variant 3 after correction"}, chain_s3c}},
                 false, "pass");
    RecordMapping(data, "m1_cruise",
                  {{{kPc1, "Cruise setup", "Vehicle.Cabin.Lights.Level"}, kM1Retry},
                   {{kPc1, "Cruise setup"}, kM1First}});
    RecordMapping(data, "m2_hazard", {{{kPc1, "Hazard lights"}, kM2Entries}});
    RecordTopology(data);
  } catch (const Error& e) {
    std::cerr << "author_fixtures: " << e.what() << "\n";
    return 1;
  }
  fs::remove_all(fs::temp_directory_path() / "sdvguard-author");
  return 0;
}
