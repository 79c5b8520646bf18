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

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sdvguard/errors.hpp"
#include "sdvguard/ocl.hpp"
#include "sdvguard/text.hpp"
#include "sdvguard/topology.hpp"
#include "test_support.hpp"

namespace sdvguard::ocl {
namespace {

using topology::InstanceModel;
using topology::Metamodel;
using topology::Object;
using Kind = OclExpr::Kind;

const Metamodel& Mm() {
  static const Metamodel mm = topology::ParseMetamodel(
      text::ReadFile(testing::DataPath("metamodel/sdv_topology.json")));
  return mm;
}

std::string ConstraintText() {
  return text::ReadFile(testing::DataPath("topology/constraints.ocl"));
}

const ConstraintSet& Constraints() {
  static const ConstraintSet set = ParseConstraints(ConstraintText());
  return set;
}

InstanceModel Fixture() {
  return topology::ParseInstance(text::ReadFile(testing::DataPath("topology/instance.json")));
}

InstanceModel Mutate(const std::string& id, const std::function<void(Object&)>& edit) {
  InstanceModel m = Fixture();
  for (auto& o : m.objects) {
    if (o.id == id) edit(o);
  }
  return m;
}

Verdict VerdictFor(const InstanceModel& m, const std::string& constraint, const std::string& id) {
  for (const auto& e : EvalConstraints(m, Mm(), Constraints()).entries) {
    if (e.constraint == constraint && e.object_id == id) return e.verdict;
  }
  throw std::runtime_error("no entry for " + constraint + "/" + id);
}

Verdict Steering(const std::string& payload) {
  return VerdictFor(Mutate("m_steer", [&](Object& o) { o.attributes["payloadValue"] = payload; }),
                    "SteeringCommandWithinLimits", "m_steer");
}

Verdict TargetSpeed(const std::string& path, const std::string& payload) {
  return VerdictFor(Mutate("v_speed_target",
                           [&](Object& o) {
                             o.attributes["vssPath"] = path;
                             o.attributes["payloadValue"] = payload;
                           }),
                    "TargetSpeedWithinSafetyLimit", "v_speed_target");
}

Verdict Backbone(const std::string& network, const std::string& standard) {
  return VerdictFor(Mutate("m_hpc_zone",
                           [&](Object& o) {
                             o.references["network"] = network;
                             o.attributes["standard"] = standard;
                           }),
                    "HPCtoZoneEthernetIEEE1722", "m_hpc_zone");
}

TEST(Parse, ConstraintShapes) {
  const auto& set = Constraints();
  ASSERT_EQ(set.size(), 3u);
  EXPECT_EQ(set[0].name, "SteeringCommandWithinLimits");
  EXPECT_EQ(set[0].context, "Message");
  const OclExpr& steer = set[0].body;
  ASSERT_EQ(steer.kind, Kind::kImplies);
  EXPECT_EQ(steer.children[0].kind, Kind::kIsTypeOf);
  ASSERT_EQ(steer.children[1].kind, Kind::kLet);
  EXPECT_EQ(steer.children[1].text, "angle");
  EXPECT_EQ(steer.children[1].type_name, "Real");
  const OclExpr& bounds = steer.children[1].children.back();
  ASSERT_EQ(bounds.kind, Kind::kAnd);
  EXPECT_EQ(bounds.children[0].text, ">=");
  EXPECT_EQ(bounds.children[1].text, "<=");

  const OclExpr& hpc = set[1].body;
  ASSERT_EQ(hpc.kind, Kind::kImplies);
  ASSERT_EQ(hpc.children[0].kind, Kind::kAnd);
  EXPECT_EQ(hpc.children[0].children[0].kind, Kind::kIsTypeOf);
  EXPECT_EQ(hpc.children[0].children[1].kind, Kind::kIsTypeOf);
  const OclExpr& standard = hpc.children[1].children[1];
  ASSERT_EQ(standard.kind, Kind::kCompare);
  EXPECT_EQ(standard.children[1].kind, Kind::kEnumLiteral);
  EXPECT_EQ(standard.children[1].text, "IEEE-1722");
  EXPECT_EQ(standard.children[1].type_name, "MessageStandardKind");

  const OclExpr& speed = set[2].body;
  EXPECT_EQ(set[2].context, "VSSMessage");
  ASSERT_EQ(speed.kind, Kind::kImplies);
  EXPECT_EQ(speed.children[0].children[1].kind, Kind::kString);
  EXPECT_EQ(speed.children[0].children[1].text, "Vehicle.Speed.Target");
  EXPECT_EQ(speed.children[1].children[0].kind, Kind::kToReal);
  EXPECT_NO_THROW(TypeCheck(set, Mm()));
}

// Rule text as typeset, with a trailing "\\" on most lines and the stray
// "sSelf" in the last invariant.
std::string Typeset(bool keep_typo) {
  std::string out;
  for (const auto& line : text::SplitLines(ConstraintText())) {
    if (line.rfind("--", 0) == 0) continue;
    std::string l = line;
    if (l.find("self.payloadValue.toReal() <= 30.0") != std::string::npos) {
      l.replace(l.find("self"), 4, keep_typo ? "sSelf" : "self");
    } else if (!l.empty() && l.find("implies") == std::string::npos) {
      l += "\\\\";
    }
    out += l + "\n";
  }
  return out;
}

TEST(Parse, TypesetTextParsesUnchanged) {
  const std::string typeset = Typeset(false);
  ASSERT_NE(typeset.find("inv SteeringCommandWithinLimits:\\\\"), std::string::npos);
  EXPECT_EQ(ParseConstraints(typeset), Constraints());
}

TEST(Parse, TypoIsAnUnknownSymbol) {
  const auto set = ParseConstraints(Typeset(true));
  try {
    TypeCheck(set, Mm());
    FAIL() << "expected ConstraintError";
  } catch (const ConstraintError& e) {
    EXPECT_EQ(e.symbol(), "sSelf");
    EXPECT_NE(std::string(e.what()).find("unknown symbol 'sSelf'"), std::string::npos);
  }
}

TEST(Parse, SyntaxErrorsCarryPosition) {
  try {
    ParseConstraints("context Message\ninv X:\n  self.payloadValue >");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    ParseConstraints("context Message\ninv X: (self.standard = MessageStandardKind::RAW");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(ParseConstraints("context Message X: true"), ParseError);
  EXPECT_THROW(ParseConstraints("inv X: true"), ParseError);
  EXPECT_THROW(ParseConstraints("context Message inv X: 'open"), ParseError);
  EXPECT_THROW(ParseConstraints("context Message inv X: self.payloadValue ! 3"), ParseError);
  EXPECT_TRUE(ParseConstraints("-- nothing\n").empty());
}

TEST(Parse, ToStringReparses) {
  for (const auto& c : Constraints()) {
    const std::string text = "context " + c.context + " inv " + c.name + ": " + ToString(c.body);
    const auto again = ParseConstraints(text);
    ASSERT_EQ(again.size(), 1u);
    EXPECT_EQ(again[0], c) << text;
  }
}

TEST(TypeCheck, UnknownSymbolsAndWrongTypes) {
  auto symbol = [](const std::string& text) -> std::string {
    try {
      TypeCheck(ParseConstraints(text), Mm());
    } catch (const ConstraintError& e) {
      return e.symbol().empty() ? "<type>" : e.symbol();
    }
    return "";
  };
  EXPECT_EQ(symbol("context Message inv A: self.speed = 'x'"), "speed");
  EXPECT_EQ(symbol("context Gateway inv A: true"), "Gateway");
  EXPECT_EQ(symbol("context Message inv A: self.target.oclIsTypeOf(Radar)"), "Radar");
  EXPECT_EQ(symbol("context Message inv A: self.standard = MessageStandardKind::CAN-XL"),
            "CAN-XL");
  EXPECT_EQ(symbol("context Message inv A: self.standard = Protocol::RAW"), "Protocol");
  EXPECT_EQ(symbol("context Message inv A: angle > 1.0"), "angle");
  EXPECT_FALSE(symbol("context Message inv A: self.payloadValue < 3.0").empty());
  EXPECT_FALSE(symbol("context Message inv A: 1.0 and true").empty());
  EXPECT_FALSE(symbol("context Message inv A: self.payloadValue").empty());
  EXPECT_FALSE(symbol("context Message inv A: self.network.toReal() > 1.0").empty());
  EXPECT_FALSE(
      symbol("context Message inv A: self.standard = VSSCategory::status").empty());
  EXPECT_EQ(symbol("context VSSMessage inv A: self.vssPath <> 'x' or self.network.name = 'y'"), "");
}

TEST(Eval, FixtureHasNoFaults) {
  const auto report = EvalConstraints(Fixture(), Mm(), Constraints());
  EXPECT_TRUE(report.passed()) << PassFailList(report);
  EXPECT_EQ(report.count(Verdict::kFail), 0u);
  const std::size_t objects = Fixture().objects.size();
  EXPECT_EQ(report.entries.size(), 3 * objects);
  EXPECT_EQ(report.count(Verdict::kPass), 10u + 10u + 3u);
}

TEST(Eval, SteeringBoundaries) {
  EXPECT_EQ(Steering("15.0"), Verdict::kPass);
  EXPECT_EQ(Steering("16.0"), Verdict::kFail);
  EXPECT_EQ(Steering("-15.0"), Verdict::kPass);
  EXPECT_EQ(Steering("-15.01"), Verdict::kFail);
  EXPECT_EQ(Steering("0"), Verdict::kPass);
  EXPECT_EQ(Steering("left"), Verdict::kFail);
  // Antecedent false: a non-steering target is not checked.
  EXPECT_EQ(VerdictFor(Mutate("m_sim_hpc", [](Object& o) { o.attributes["payloadValue"] = "99.0"; }),
                       "SteeringCommandWithinLimits", "m_sim_hpc"),
            Verdict::kPass);
}

TEST(Eval, BackboneNetworkAndStandard) {
  EXPECT_EQ(Backbone("canfd_zone", "IEEE-1722"), Verdict::kFail);
  EXPECT_EQ(Backbone("canfd_zone", "RAW"), Verdict::kFail);
  EXPECT_EQ(Backbone("eth_backbone", "IEEE-1722"), Verdict::kPass);
  EXPECT_EQ(Backbone("eth_backbone", "RAW"), Verdict::kFail);
  // Antecedent false: camera to zone over CAN FD is out of scope.
  EXPECT_EQ(VerdictFor(Mutate("m_cam_zone", [](Object& o) { o.references["network"] = "canfd_zone"; }),
                       "HPCtoZoneEthernetIEEE1722", "m_cam_zone"),
            Verdict::kPass);
}

TEST(Eval, TargetSpeedBoundaries) {
  EXPECT_EQ(TargetSpeed("Vehicle.Speed.Target", "30.0"), Verdict::kPass);
  EXPECT_EQ(TargetSpeed("Vehicle.Speed.Target", "30.01"), Verdict::kFail);
  EXPECT_EQ(TargetSpeed("Vehicle.Speed.Target", "35.0"), Verdict::kFail);
  EXPECT_EQ(TargetSpeed("Vehicle.Speed.Target", "25.0"), Verdict::kPass);
  EXPECT_EQ(TargetSpeed("Vehicle.Speed", "99"), Verdict::kPass);
  EXPECT_EQ(TargetSpeed("Vehicle.Speed.Target", "fast"), Verdict::kFail);
}

TEST(Eval, FaultReasonAndReports) {
  const auto m = Mutate("m_steer", [](Object& o) { o.attributes["payloadValue"] = "left"; });
  const auto report = EvalConstraints(m, Mm(), Constraints());
  const auto failing = report.failing();
  ASSERT_EQ(failing.size(), 1u);
  EXPECT_EQ(failing[0].object_id, "m_steer");
  EXPECT_NE(failing[0].reason.find("toReal"), std::string::npos);
  EXPECT_NE(PassFailList(report).find("SteeringCommandWithinLimits\tm_steer\tfail\t"),
            std::string::npos);
  const auto j = ToJson(report);
  EXPECT_EQ(j["verdict"], "fail");
  EXPECT_EQ(j["counts"]["fail"], 1);
}

TEST(Eval, NonConformantModelIsRejected) {
  InstanceModel m = Fixture();
  m.objects.push_back({"ghost", "Gateway", {}, {}});
  EXPECT_THROW(EvalConstraints(m, Mm(), Constraints()), PreconditionError);
  const auto bad = ParseConstraints("context Message inv A: self.speed > 1.0");
  EXPECT_THROW(EvalConstraints(Fixture(), Mm(), bad), ConstraintError);
}

TEST(Eval, ImpliesTruthTable) {
  const InstanceModel m = Fixture();
  for (bool a : {false, true}) {
    for (bool b : {false, true}) {
      const std::string text = std::string("context Message inv I: ") + (a ? "true" : "false") +
                               " implies " + (b ? "true" : "false");
      const auto report = EvalConstraints(m, Mm(), ParseConstraints(text));
      EXPECT_EQ(report.passed(), !a || b) << text;
    }
  }
  // Right-associative: false implies (x implies false) is true.
  const auto chained = ParseConstraints("context Message inv I: false implies true implies false");
  EXPECT_TRUE(EvalConstraints(m, Mm(), chained).passed());
}

// Random component/message models for the dispatch and exact-type properties.
InstanceModel RandomModel(std::mt19937& rng, const std::vector<std::string>& components) {
  InstanceModel m;
  m.conforms_to = "SDVTopology";
  const int parts = 1 + static_cast<int>(rng() % 6);
  for (int i = 0; i < parts; ++i) {
    m.objects.push_back({"c" + std::to_string(i), components[rng() % components.size()], {}, {}});
  }
  m.objects.push_back({"net", rng() % 2 ? "Ethernet" : "CANFD", {}, {}});
  const int messages = static_cast<int>(rng() % 6);
  for (int i = 0; i < messages; ++i) {
    Object msg{"m" + std::to_string(i), rng() % 2 ? "Message" : "VSSMessage", {}, {}};
    msg.attributes["payloadValue"] = std::to_string(rng() % 40);
    msg.references["source"] = "c" + std::to_string(rng() % parts);
    msg.references["target"] = "c" + std::to_string(rng() % parts);
    msg.references["network"] = "net";
    m.objects.push_back(std::move(msg));
  }
  return m;
}

bool OracleDescends(const Metamodel& mm, std::string cls, const std::string& base) {
  while (true) {
    if (cls == base) return true;
    const auto* decl = mm.FindClass(cls);
    if (decl == nullptr || !decl->parent) return false;
    cls = *decl->parent;
  }
}

TEST(Properties, ContextDispatchAndPartition) {
  const std::vector<std::string> components = {"Camera", "Lidar", "ZoneECU",
                                               "HighPerformanceComputer", "SteeringActuator"};
  const std::vector<std::string> contexts = {"Component", "Message", "VSSMessage", "Network",
                                             "Camera"};
  std::mt19937 rng(15);
  for (int round = 0; round < 300; ++round) {
    const InstanceModel m = RandomModel(rng, components);
    ASSERT_TRUE(topology::Conform(m, Mm()).ok());
    for (const auto& ctx : contexts) {
      const auto report =
          EvalConstraints(m, Mm(), ParseConstraints("context " + ctx + " inv D: true"));
      std::size_t expected = 0;
      for (const auto& o : m.objects) expected += OracleDescends(Mm(), o.class_name, ctx);
      EXPECT_EQ(report.count(Verdict::kPass), expected) << ctx;
      EXPECT_EQ(report.count(Verdict::kPass) + report.count(Verdict::kFail) +
                    report.count(Verdict::kNotApplicable),
                m.objects.size());
    }
  }
}

TEST(Properties, OclIsTypeOfIsExact) {
  const std::vector<std::string> components = {"Camera", "Lidar", "ZoneECU",
                                               "HighPerformanceComputer", "SteeringActuator"};
  std::mt19937 rng(16);
  for (int round = 0; round < 200; ++round) {
    const InstanceModel m = RandomModel(rng, components);
    for (const std::string cls : {"Camera", "Component", "ZoneECU", "Message", "VSSMessage"}) {
      const auto targets = ParseConstraints("context Message inv T: self.target.oclIsTypeOf(" +
                                            cls + ")");
      const auto selves =
          ParseConstraints("context Message inv S: self.oclIsTypeOf(" + cls + ")");
      const auto t_report = EvalConstraints(m, Mm(), targets);
      const auto s_report = EvalConstraints(m, Mm(), selves);
      for (std::size_t i = 0; i < m.objects.size(); ++i) {
        const Object& o = m.objects[i];
        if (!OracleDescends(Mm(), o.class_name, "Message")) continue;
        const std::string& target_class = m.Find(o.references.at("target"))->class_name;
        EXPECT_EQ(t_report.entries[i].verdict == Verdict::kPass, target_class == cls);
        EXPECT_EQ(s_report.entries[i].verdict == Verdict::kPass, o.class_name == cls);
      }
    }
  }
}

}  // namespace
}  // namespace sdvguard::ocl
