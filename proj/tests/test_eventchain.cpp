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

#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sdvguard/errors.hpp"
#include "sdvguard/eventchain.hpp"
#include "sdvguard/llm_gateway.hpp"
#include "sdvguard/text.hpp"
#include "test_support.hpp"

namespace sdvguard::chain {
namespace {

ChainDocument Load(const std::string& name) {
  return ToChainDocument(ParseActivityDiagram(text::ReadFile(testing::DataPath("chains/" + name))));
}

std::vector<std::vector<std::string>> PathEvents(const ChainDocument& doc) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : EnumeratePaths(doc)) out.push_back(Events(p));
  return out;
}

using Seq = std::vector<std::string>;

TEST(Parser, LinearChain) {
  const auto graph = ParseActivityDiagram("@startuml\nstart\n:camera-sense;\n:brake;\nstop\n@enduml\n");
  ASSERT_EQ(graph.nodes.size(), 4u);
  EXPECT_EQ(graph.nodes[1].label, "camera-sense");
  EXPECT_EQ(graph.nodes[2].kind, NodeKind::kAction);
  EXPECT_EQ(PathEvents(ToChainDocument(graph)), (std::vector<Seq>{{"camera-sense", "brake"}}));
}

TEST(Parser, ScenarioFixturesInOrder) {
  EXPECT_EQ(PathEvents(Load("s1.puml")),
            (std::vector<Seq>{{"camera-sense", "pedestrian-camera-detected", "accelerate"}}));
  EXPECT_EQ(PathEvents(Load("s2.puml")),
            (std::vector<Seq>{{"camera-sense", "pedestrian-lidar-detected", "brake"}}));
  EXPECT_EQ(PathEvents(Load("s3.puml")),
            (std::vector<Seq>{{"camera-sense", "brake", "pedestrian-camera-detected"}}));
}

TEST(Parser, NotesAttachToPrecedingAction) {
  const auto doc = Load("s1.puml");
  const Node* detect = doc.graph.Find("n2");
  ASSERT_NE(detect, nullptr);
  ASSERT_TRUE(detect->notes);
  EXPECT_EQ(detect->notes->output, "Vehicle.ADAS.PedestrianDetection.Camera.IsDetected");
  EXPECT_EQ(detect->notes->output_format, "VSS boolean");
  const auto inline_note = ParseActivityDiagram(
      "@startuml\nstart\n:brake;\nnote right: output=BrakeCmd\nstop\n@enduml");
  EXPECT_EQ(inline_note.nodes[1].notes->output, "BrakeCmd");
}

TEST(Parser, IfElseBuildsDecisionAndMerge) {
  const auto graph = ParseActivityDiagram(
      "@startuml\nstart\nif (near?) then (yes)\n:brake;\nelse (no)\n:cruise;\nendif\nstop\n@enduml");
  std::size_t decisions = 0, merges = 0;
  for (const auto& n : graph.nodes) {
    decisions += n.kind == NodeKind::kDecision;
    merges += n.kind == NodeKind::kMerge;
  }
  EXPECT_EQ(decisions, 1u);
  EXPECT_EQ(merges, 1u);
  std::vector<std::string> guards;
  for (const auto& e : graph.edges) {
    if (e.guard) guards.push_back(*e.guard);
  }
  EXPECT_EQ(guards, (std::vector<std::string>{"yes", "no"}));
  EXPECT_EQ(PathEvents(ToChainDocument(graph)), (std::vector<Seq>{{"brake"}, {"cruise"}}));
}

TEST(Parser, MultiLineActionsAndColouredActions) {
  const auto graph =
      ParseActivityDiagram("@startuml\nstart\n#red:pedestrian\ncamera detected;\nstop\n@enduml");
  EXPECT_EQ(graph.nodes[1].label, "pedestrian camera detected");
}

TEST(Parser, Errors) {
  EXPECT_THROW(ParseActivityDiagram("@startuml\nstart\nif (a) then (y)\n:x;\nstop\n@enduml"),
               ParseError);
  EXPECT_THROW(ParseActivityDiagram("@startuml\nstart\n:x;\nendif\nstop\n@enduml"), ParseError);
  EXPECT_THROW(ParseActivityDiagram("@startuml\nstart\nwhile (x)\n:x;\nendwhile\nstop\n@enduml"),
               ParseError);
  EXPECT_THROW(ParseActivityDiagram("@startuml\nstart\n:x\nstop\n@enduml"), ParseError);
  EXPECT_THROW(ParseActivityDiagram("@startuml\n:x;\nstop\n@enduml"), StructureError);
  EXPECT_THROW(ParseActivityDiagram("@startuml\nstart\n:x;\n@enduml"), StructureError);
  EXPECT_THROW(ParseActivityDiagram("@startuml\nstart\nstart\nstop\n@enduml"), StructureError);
  EXPECT_THROW(ParseActivityDiagram("@startuml\nstart\n:x;\nnote right: colour=red\nstop\n@enduml"),
               ParseError);
  try {
    ParseActivityDiagram("@startuml\nstart\n:a;\nfork\nstop\n@enduml");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(Parser, UnreachableNodesAreListed) {
  try {
    ParseActivityDiagram("@startuml\nstart\n:a;\nstop\n:orphan;\nstop\n@enduml");
    FAIL() << "expected StructureError";
  } catch (const StructureError& e) {
    EXPECT_EQ(e.offenders(), (std::vector<std::string>{"n3", "n4"}));
  }
}

TEST(Transform, EventNormalization) {
  EXPECT_EQ(NormalizeEvent("Pedestrian (camera) detected"), "pedestrian-camera-detected");
  EXPECT_EQ(NormalizeEvent("pedestrian-camera-detected"), "pedestrian-camera-detected");
  ActivityGraph g = ParseActivityDiagram("@startuml\nstart\n:x;\nstop\n@enduml");
  g.nodes[1].label = "!!";
  EXPECT_THROW(ToChainDocument(g), TransformError);
}

TEST(Transform, RoundTripFixtures) {
  for (const char* name : {"s1.puml", "s2.puml", "s3.puml", "s3_corrected.puml", "three_decisions.puml"}) {
    ChainDocument doc = Load(name);
    doc.metadata = {"src", "prompt"};
    EXPECT_EQ(ParseChainDocument(SerializeChain(doc)), doc) << name;
  }
}

TEST(Transform, ChainDocumentValidation) {
  EXPECT_THROW(ParseChainDocument("{"), ParseError);
  EXPECT_THROW(ParseChainDocument("{\"nodes\": []}"), SchemaError);
  EXPECT_THROW(ParseChainDocument(R"({"nodes": [{"id": "s", "kind": "start"},
      {"id": "a", "kind": "action", "label": "x"}, {"id": "t", "kind": "stop"}],
      "edges": [{"from": "s", "to": "a"}, {"from": "a", "to": "t"}]})"),
               TransformError);
  EXPECT_THROW(ParseChainDocument(R"({"nodes": [{"id": "s", "kind": "start"},
      {"id": "t", "kind": "stop"}], "edges": [{"from": "s", "to": "zz"}]})"),
               StructureError);
}

TEST(Paths, ThreeDecisionsGiveEightPaths) {
  const auto paths = EnumeratePaths(Load("three_decisions.puml"));
  ASSERT_EQ(paths.size(), 8u);
  for (const auto& p : paths) {
    ASSERT_EQ(p.size(), 4u);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i].position, i);
  }
  EXPECT_EQ(Events(paths.front()),
            (Seq{"camera-sense", "pedestrian-camera-detected", "pedestrian-lidar-detected", "accelerate"}));
  EXPECT_EQ(Events(paths.back()), (Seq{"camera-sense", "clear", "lidar-idle", "brake"}));
}

TEST(Paths, CycleIsRejected) {
  const auto doc = ParseChainDocument(R"({"nodes": [
      {"id": "s", "kind": "start"}, {"id": "a", "kind": "action", "label": "a", "event": "a"},
      {"id": "d", "kind": "decision", "label": "again?"}, {"id": "t", "kind": "stop"}],
    "edges": [{"from": "s", "to": "a"}, {"from": "a", "to": "d"},
              {"from": "d", "to": "a", "guard": "yes"}, {"from": "d", "to": "t", "guard": "no"}]})");
  try {
    EnumeratePaths(doc);
    FAIL() << "expected UnsupportedStructureError";
  } catch (const UnsupportedStructureError& e) {
    EXPECT_EQ(e.node(), "a");
  }
}

TEST(Paths, PathCapIsEnforced) {
  EXPECT_THROW(EnumeratePaths(Load("three_decisions.puml"), 7), UnsupportedStructureError);
  EXPECT_EQ(EnumeratePaths(Load("three_decisions.puml"), 8).size(), 8u);
}

// Random structured diagrams. The generator tracks the expected multiset of
// event sequences directly from the program structure.
struct Program {
  std::string text;
  std::vector<Seq> paths;
};

std::vector<Seq> Concat(const std::vector<Seq>& a, const std::vector<Seq>& b) {
  std::vector<Seq> out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      Seq s = x;
      s.insert(s.end(), y.begin(), y.end());
      out.push_back(std::move(s));
    }
  }
  return out;
}

Program Block(std::mt19937& rng, int depth, int& counter) {
  Program p{"", {{}}};
  const int statements = static_cast<int>(rng() % 4);
  for (int i = 0; i < statements; ++i) {
    if (depth < 3 && rng() % 3 == 0) {
      Program yes = Block(rng, depth + 1, counter);
      const bool has_else = rng() % 2;
      Program no = has_else ? Block(rng, depth + 1, counter) : Program{"", {{}}};
      p.text += "if (c" + std::to_string(counter++) + ") then (yes)\n" + yes.text;
      if (has_else) p.text += "else (no)\n" + no.text;
      p.text += "endif\n";
      std::vector<Seq> both = yes.paths;
      both.insert(both.end(), no.paths.begin(), no.paths.end());
      p.paths = Concat(p.paths, both);
    } else {
      const std::string label = "e" + std::to_string(counter++);
      p.text += ":" + label + ";\n";
      p.paths = Concat(p.paths, {{label}});
    }
  }
  return p;
}

TEST(Paths, RandomStructuredDiagramsMatchOracle) {
  std::mt19937 rng(2024);
  for (int round = 0; round < 300; ++round) {
    int counter = 0;
    Program body = Block(rng, 0, counter);
    const std::string text = "@startuml\nstart\n:begin;\n" + body.text + "stop\n@enduml\n";
    std::vector<Seq> want = Concat({{"begin"}}, body.paths);
    SCOPED_TRACE(text);
    const auto doc = ToChainDocument(ParseActivityDiagram(text));
    auto got = PathEvents(doc);
    EXPECT_EQ(got, PathEvents(doc));
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    ASSERT_EQ(got, want);
    EXPECT_EQ(ParseChainDocument(SerializeChain(doc)), doc);
  }
}

class FixedCompleter final : public llm::Completer {
 public:
  explicit FixedCompleter(std::string reply) : reply_(std::move(reply)) {}
  std::string Complete(const llm::CompletionRequest& request) override {
    prompt = request.prompt;
    return reply_;
  }
  std::string prompt;

 private:
  std::string reply_;
};

TEST(Generation, ExtractsBlockFromProse) {
  auto completer = std::make_shared<FixedCompleter>(
      "Here is the diagram:\n```plantuml\n@startuml\nstart\n:brake;\nstop\n@enduml\n```\nDone.");
  auto gw = llm::Gateway::Live(completer);
  extraction::AcceptedEntry brake{{"BrakeCmd", "float", "100", catalog::Protocol::kCan}, "BrakeCmd", false};
  const auto generated = GenerateChain("send(0x101)", "", {brake}, *gw);
  EXPECT_EQ(generated.plantuml, "@startuml\nstart\n:brake;\nstop\n@enduml\n");
  EXPECT_EQ(generated.prompt_digest, llm::PromptDigest(completer->prompt));
  EXPECT_NE(completer->prompt.find("@startuml\n@enduml"), std::string::npos);
  EXPECT_NE(completer->prompt.find("- BrakeCmd (CAN float) value=100"), std::string::npos);
}

TEST(Generation, UnusableCompletionsCarryRawTextAndReason) {
  auto prose = llm::Gateway::Live(std::make_shared<FixedCompleter>("I cannot draw that."));
  try {
    GenerateChain("x", "", {}, *prose);
    FAIL() << "expected ChainGenerationError";
  } catch (const ChainGenerationError& e) {
    EXPECT_EQ(e.raw(), "I cannot draw that.");
    EXPECT_FALSE(e.parse_error().empty());
  }
  auto broken = llm::Gateway::Live(
      std::make_shared<FixedCompleter>("@startuml\nstart\n:a;\nrepeat\nstop\n@enduml"));
  try {
    GenerateChain("x", "", {}, *broken);
    FAIL() << "expected ChainGenerationError";
  } catch (const ChainGenerationError& e) {
    EXPECT_NE(e.parse_error().find("repeat"), std::string::npos);
  }
}

TEST(Generation, CurrentChainIsPassedThrough) {
  auto completer = std::make_shared<FixedCompleter>("@startuml\nstart\n:a;\nstop\n@enduml");
  auto gw = llm::Gateway::Live(completer);
  GenerateChain("x", "@startuml\nstart\n:old;\nstop\n@enduml", {}, *gw);
  EXPECT_NE(completer->prompt.find(":old;"), std::string::npos);
  EXPECT_NE(completer->prompt.find("(none)"), std::string::npos);
}

}  // namespace
}  // namespace sdvguard::chain
