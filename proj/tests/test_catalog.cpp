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

#include <string>

#include "sdvguard/catalog.hpp"
#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"
#include "test_support.hpp"

namespace sdvguard::catalog {
namespace {

SignalCatalog FixtureVss() {
  return ParseVssCatalog(text::ReadFile(testing::DataPath("catalogs/adas_vss.json")));
}

MessageCatalog FixtureCan() {
  return ParseCanCatalog(text::ReadFile(testing::DataPath("catalogs/adas_can.json")));
}

TEST(VssCatalog, FixtureLeavesAndBranches) {
  const SignalCatalog c = FixtureVss();
  EXPECT_EQ(c.leaf_count(), 12u);
  EXPECT_TRUE(c.HasBranch("Vehicle.ADAS.PedestrianDetection"));
  EXPECT_FALSE(c.HasBranch("Vehicle.Speed.Target"));
  const auto target = Lookup(c, "Vehicle.Speed.Target");
  ASSERT_TRUE(target);
  EXPECT_EQ(target->datatype, DataType::kFloat);
  EXPECT_EQ(target->min, 0.0);
  EXPECT_EQ(target->max, 30.0);
  EXPECT_EQ(target->unit, "km/h");
  EXPECT_FALSE(Lookup(c, "Vehicle.Speed"));
  const auto mode = Lookup(c, "Vehicle.ADAS.CruiseControl.Mode");
  ASSERT_TRUE(mode);
  EXPECT_EQ(mode->datatype, DataType::kEnum);
  EXPECT_EQ(mode->allowed, (std::vector<std::string>{"OFF", "STANDBY", "ACTIVE"}));
}

TEST(VssCatalog, EntriesFollowDocumentOrder) {
  const SignalCatalog c = FixtureVss();
  EXPECT_EQ(c.entries().front().key, "Vehicle.Speed.Target");
  EXPECT_EQ(c.entries().back().key, "Vehicle.Chassis.SteeringWheel.Angle");
}

TEST(VssCatalog, GeneratedTreeLeafCountMatchesOracle) {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    const auto tree = testing::GenerateVssTree(200, seed);
    const SignalCatalog c = ParseVssCatalog(tree.json);
    EXPECT_EQ(c.leaf_count(), tree.leaves) << "seed " << seed;
    for (const auto& node : c.nodes()) {
      EXPECT_EQ(node.is_branch(), !node.datatype.has_value()) << node.path;
    }
  }
}

TEST(VssCatalog, SerializeRoundTrip) {
  const SignalCatalog c = FixtureVss();
  EXPECT_EQ(ParseVssCatalog(SerializeVssCatalog(c)), c);
  const auto tree = testing::GenerateVssTree(200, 3);
  const SignalCatalog g = ParseVssCatalog(tree.json);
  EXPECT_EQ(ParseVssCatalog(SerializeVssCatalog(g)), g);
}

TEST(VssCatalog, RejectsMalformedDocuments) {
  EXPECT_THROW(ParseVssCatalog("{"), ParseError);
  EXPECT_THROW(ParseVssCatalog("[]"), SchemaError);
  EXPECT_THROW(ParseVssCatalog(R"({"A": {"type": "sensor"}})"), SchemaError);
  EXPECT_THROW(ParseVssCatalog(R"({"A": {"type": "sensor", "datatype": "quaternion"}})"),
               SchemaError);
  EXPECT_THROW(ParseVssCatalog(R"({"A": {"type": "sensor", "datatype": "float", "min": 5, "max": 1}})"),
               SchemaError);
  EXPECT_THROW(ParseVssCatalog(R"({"A": {"type": "sensor", "datatype": "boolean", "min": 0}})"),
               SchemaError);
  EXPECT_THROW(ParseVssCatalog(R"({"A": {"type": "sensor", "datatype": "float", "children": {}}})"),
               SchemaError);
}

TEST(VssCatalog, ParseErrorCarriesPosition) {
  try {
    ParseVssCatalog("{\n  \"A\": ,\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 1u);
  }
}

TEST(VssCatalog, DuplicatePathRejected) {
  std::vector<VssSignal> nodes(2);
  nodes[0].path = "A.B";
  nodes[0].datatype = DataType::kFloat;
  nodes[1] = nodes[0];
  EXPECT_THROW(SignalCatalog{nodes}, CatalogError);
}

TEST(CanCatalog, FixtureMessages) {
  const MessageCatalog c = FixtureCan();
  ASSERT_EQ(c.messages().size(), 6u);
  EXPECT_EQ(c.FindByName("BrakeCmd")->frame_id, 0x101u);
  EXPECT_EQ(c.FindByFrameId(0x18FF0010)->name, "CabinLightCmd");
  EXPECT_EQ(c.FindByName("VehicleSpeed")->frame_id, 768u);
  EXPECT_EQ(c.FindByName("VehicleSpeed")->dlc, 64);
  const auto steering = Lookup(c, "SteeringCmd");
  ASSERT_TRUE(steering);
  EXPECT_EQ(steering->protocol, Protocol::kCan);
  EXPECT_EQ(steering->min, -15.0);
  EXPECT_EQ(steering->max, 15.0);
  EXPECT_FALSE(Lookup(c, "PedestrianStatus")->min);
  EXPECT_EQ(ParseCanCatalog(SerializeCanCatalog(c)), c);
}

TEST(CanCatalog, RejectsInvalidMessages) {
  EXPECT_THROW(ParseCanCatalog(R"([{"name": "A", "frame_id": "0x20000000", "dlc": 8, "signals": []}])"),
               SchemaError);
  EXPECT_THROW(ParseCanCatalog(R"([{"name": "A", "frame_id": 1, "dlc": 65, "signals": []}])"),
               SchemaError);
  EXPECT_THROW(ParseCanCatalog(R"([{"name": "A", "frame_id": 1, "dlc": 1,
      "signals": [{"name": "s", "start_bit": 4, "bit_length": 8}]}])"),
               SchemaError);
  EXPECT_THROW(ParseCanCatalog(R"([{"name": "A", "frame_id": 1, "dlc": 8, "signals": []},
                                  {"name": "B", "frame_id": 1, "dlc": 8, "signals": []}])"),
               CatalogError);
  EXPECT_THROW(ParseCanCatalog(R"([{"name": "A", "frame_id": "0xZZ", "dlc": 8, "signals": []}])"),
               SchemaError);
}

TEST(CanCatalog, TwentyNineBitBoundary) {
  EXPECT_NO_THROW(ParseCanCatalog(R"([{"name": "A", "frame_id": "0x1FFFFFFF", "dlc": 8, "signals": []}])"));
}

TEST(ValidateValue, NumericBoundsAreInclusive) {
  const auto target = *Lookup(FixtureVss(), "Vehicle.Speed.Target");
  EXPECT_TRUE(ValidateValue(target, "0").ok());
  EXPECT_TRUE(ValidateValue(target, "30.0").ok());
  EXPECT_EQ(ValidateValue(target, "30.01").violation, Violation::kAboveMax);
  EXPECT_EQ(ValidateValue(target, "-0.5").violation, Violation::kBelowMin);
  EXPECT_EQ(ValidateValue(target, "fast").violation, Violation::kTypeMismatch);
}

TEST(ValidateValue, TypedChecks) {
  const SignalCatalog c = FixtureVss();
  const auto flag = *Lookup(c, "Vehicle.ADAS.Brake.IsEngaged");
  EXPECT_TRUE(ValidateValue(flag, "true").ok());
  EXPECT_TRUE(ValidateValue(flag, "FALSE").ok());
  EXPECT_EQ(ValidateValue(flag, "1").violation, Violation::kTypeMismatch);
  const auto pedal = *Lookup(c, "Vehicle.ADAS.Brake.PedalPosition");
  EXPECT_TRUE(ValidateValue(pedal, "100").ok());
  EXPECT_EQ(ValidateValue(pedal, "50.5").violation, Violation::kTypeMismatch);
  EXPECT_EQ(ValidateValue(pedal, "101").violation, Violation::kAboveMax);
  const auto mode = *Lookup(c, "Vehicle.ADAS.CruiseControl.Mode");
  EXPECT_TRUE(ValidateValue(mode, "ACTIVE").ok());
  EXPECT_EQ(ValidateValue(mode, "active").violation, Violation::kNotAllowed);
}

TEST(Catalog, DatatypeAndProtocolNames) {
  EXPECT_EQ(ParseDataType("uint8"), DataType::kInt);
  EXPECT_EQ(ParseDataType("double"), DataType::kFloat);
  EXPECT_EQ(ParseDataType("bool"), DataType::kBoolean);
  EXPECT_FALSE(ParseDataType("matrix"));
  EXPECT_EQ(ParseProtocol("CAN-FD"), Protocol::kCan);
  EXPECT_EQ(ParseProtocol("vss"), Protocol::kVss);
  EXPECT_FALSE(ParseProtocol("lin"));
}

}  // namespace
}  // namespace sdvguard::catalog
