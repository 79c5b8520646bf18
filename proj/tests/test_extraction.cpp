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

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "oracles/extraction_oracle.hpp"
#include "sdvguard/catalog.hpp"
#include "sdvguard/errors.hpp"
#include "sdvguard/extraction.hpp"
#include "sdvguard/llm_gateway.hpp"
#include "sdvguard/retrieval.hpp"
#include "sdvguard/text.hpp"
#include "test_support.hpp"

namespace sdvguard::extraction {
namespace {

using catalog::CatalogEntry;
using catalog::DataType;
using catalog::Protocol;

using testing::oracle::Catalogs;
using testing::oracle::Oracle;
using testing::oracle::OracleVerdict;

void ExpectMatchesOracle(const std::vector<ExtractedEntry>& entries, const Catalogs& c) {
  const ExtractionReport report = ValidateEntries(entries, c.vss, c.can);
  ASSERT_EQ(report.accepted.size() + report.rejected.size(), entries.size());
  std::size_t ai = 0, ri = 0;
  for (const auto& e : entries) {
    const OracleVerdict want = Oracle(e, c);
    SCOPED_TRACE(e.name + " type=" + e.type + " value=" + e.value.value_or("<null>"));
    if (want.accepted) {
      ASSERT_LT(ai, report.accepted.size());
      EXPECT_EQ(report.accepted[ai].entry, e);
      EXPECT_EQ(report.accepted[ai].resolved_key, want.key);
      ++ai;
    } else {
      ASSERT_LT(ri, report.rejected.size());
      EXPECT_EQ(report.rejected[ri].entry, e);
      EXPECT_EQ(ToString(report.rejected[ri].reason), want.reason);
      ++ri;
    }
  }
}

TEST(Validation, FixtureCompletionFiveAcceptedThreeRejected) {
  const Catalogs c;
  const auto entries =
      ParseExtractionResponse(text::ReadFile(testing::DataPath("fixtures/extraction_completion.json")));
  ASSERT_EQ(entries.size(), 8u);
  const ExtractionReport report = ValidateEntries(entries, c.vss, c.can);
  EXPECT_EQ(report.accepted.size(), 5u);
  ASSERT_EQ(report.rejected.size(), 3u);
  EXPECT_EQ(report.rejected[0].reason, RejectReason::kUnknownName);
  EXPECT_EQ(report.rejected[0].entry.name, "Vehicle.ADAS.Pedestrian.Warning");
  EXPECT_EQ(report.rejected[1].reason, RejectReason::kUnknownName);
  EXPECT_EQ(report.rejected[1].entry.name, "EmergencyStopCmd");
  EXPECT_EQ(report.rejected[2].reason, RejectReason::kValueOutOfRange);
  EXPECT_EQ(report.rejected[2].entry.name, "Vehicle.ADAS.Throttle.Position");
  ExpectMatchesOracle(entries, c);
}

TEST(Validation, AliasAndProtocolResolution) {
  const Catalogs c;
  std::vector<ExtractedEntry> entries = {
      {"vehicle speed target", "float", "12", Protocol::kVss},
      {"brakecmd", "float", "50", Protocol::kCan},
      {"BrakeCmd", "float", "50", Protocol::kVss},
      {"Vehicle.Speed.Target", "float", "12", Protocol::kCan},
      {"Vehicle.ADAS.Brake.IsEngaged", "float", "1", Protocol::kVss},
      {"Vehicle.ADAS.CruiseControl.Mode", "string", "SPORT", Protocol::kVss},
      {"Vehicle.Speed.Target", "int", "12", Protocol::kVss},
      {"Vehicle.Speed.Target", "", std::nullopt, Protocol::kVss},
  };
  const ExtractionReport report = ValidateEntries(entries, c.vss, c.can);
  ASSERT_EQ(report.accepted.size(), 4u);
  EXPECT_TRUE(report.accepted[0].via_alias);
  EXPECT_EQ(report.accepted[0].resolved_key, "Vehicle.Speed.Target");
  EXPECT_EQ(report.accepted[1].resolved_key, "BrakeCmd");
  EXPECT_FALSE(report.accepted[2].via_alias);
  ExpectMatchesOracle(entries, c);
}

TEST(Validation, RandomEntriesMatchOracle) {
  const Catalogs c;
  std::vector<std::string> names;
  for (const auto& e : c.vss.entries()) names.push_back(e.key);
  for (const auto& e : c.can.entries()) names.push_back(e.key);
  names.insert(names.end(), {"Vehicle.Speed.Targ", "Nope", "brake cmd", "vehicle_speed_target",
                             "STEERING-CMD"});
  const std::vector<std::string> types = {"float", "int", "boolean", "string", "enum", "uint8",
                                          "double", "bogus", ""};
  const std::vector<std::optional<std::string>> values = {
      std::nullopt, "true", "false", "0", "15", "-15", "30", "30.01", "-1", "140",
      "ACTIVE", "OFF", "abc", "1e1", " 7 "};
  std::mt19937 rng(1722);
  for (int round = 0; round < 50; ++round) {
    std::vector<ExtractedEntry> entries;
    for (int i = 0; i < 40; ++i) {
      entries.push_back({names[rng() % names.size()], types[rng() % types.size()],
                         values[rng() % values.size()],
                         rng() % 2 ? Protocol::kVss : Protocol::kCan});
    }
    ExpectMatchesOracle(entries, c);
  }
}

TEST(Validation, ConflictingValuesAreNoted) {
  const Catalogs c;
  const auto report = ValidateEntries({{"Vehicle.Speed.Target", "float", "10", Protocol::kVss},
                                       {"Vehicle.Speed.Target", "float", "20", Protocol::kVss}},
                                      c.vss, c.can);
  EXPECT_EQ(report.accepted.size(), 2u);
  ASSERT_EQ(report.notes.size(), 1u);
  EXPECT_NE(report.notes[0].find("Vehicle.Speed.Target"), std::string::npos);
}

TEST(Parsing, ArrayInsideProse) {
  const auto entries = ParseExtractionResponse(
      "Sure, here you go:\n```json\n[{\"name\": \"A\", \"type\": \"float\", \"value\": 1.5, "
      "\"protocol\": \"VSS\"}, {\"name\": \"B\", \"type\": \"bool\", \"protocol\": \"can\"}]\n```");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].value, "1.5");
  EXPECT_EQ(entries[1].protocol, Protocol::kCan);
  EXPECT_FALSE(entries[1].value);
}

TEST(Parsing, MalformedCompletions) {
  EXPECT_THROW(ParseExtractionResponse("no entries here"), ExtractionFormatError);
  EXPECT_THROW(ParseExtractionResponse(R"([{"name": "A", "type": "float"}])"), ExtractionFormatError);
  EXPECT_THROW(ParseExtractionResponse(R"([{"name": "A", "type": "float", "protocol": "LIN"}])"),
               ExtractionFormatError);
  try {
    ParseExtractionResponse("[1, 2]");
    FAIL() << "expected ExtractionFormatError";
  } catch (const ExtractionFormatError& e) {
    EXPECT_EQ(e.raw(), "[1, 2]");
  }
}

class ScriptedCompleter final : public llm::Completer {
 public:
  explicit ScriptedCompleter(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string Complete(const llm::CompletionRequest& request) override {
    prompts.push_back(request.prompt);
    return replies_.at((prompts.size() - 1) % replies_.size());
  }
  std::vector<std::string> prompts;

 private:
  std::vector<std::string> replies_;
};

retrieval::Chunk ChunkOf(const std::vector<CatalogEntry>& entries) {
  retrieval::Chunk chunk;
  for (const auto& e : entries) chunk.entries.push_back({e, 0.0, 0.0});
  return chunk;
}

TEST(Extraction, OneCompletionPerChunkWithDeduplication) {
  const Catalogs c;
  const std::string reply =
      R"([{"name": "BrakeCmd", "type": "float", "value": 100, "protocol": "CAN"}])";
  auto completer = std::make_shared<ScriptedCompleter>(std::vector<std::string>{reply});
  auto gw = llm::Gateway::Live(completer);
  const auto entries = ExtractEntries("send(0x101)", {ChunkOf({c.can.entries()[0]}),
                                                      ChunkOf({c.can.entries()[1]})},
                                      *gw);
  EXPECT_EQ(completer->prompts.size(), 2u);
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_NE(completer->prompts[0].find("- BrakeCmd [CAN] float unit=percent range=[0.0, 100.0]"),
            std::string::npos);
  EXPECT_NE(completer->prompts[1].find("ThrottleCmd"), std::string::npos);
}

TEST(Extraction, FeedbackIsAppended) {
  const Catalogs c;
  auto completer = std::make_shared<ScriptedCompleter>(std::vector<std::string>{"[]"});
  auto gw = llm::Gateway::Live(completer);
  ExtractEntries("x = 1", {ChunkOf({c.vss.entries()[0]})}, *gw, "- Foo (VSS): unknown-name\n");
  EXPECT_NE(completer->prompts[0].find("- Foo (VSS): unknown-name"), std::string::npos);
}

TEST(Extraction, Preconditions) {
  const Catalogs c;
  auto gw = llm::Gateway::Replay({});
  EXPECT_THROW(ExtractEntries("  ", {ChunkOf({c.vss.entries()[0]})}, *gw), PreconditionError);
  EXPECT_THROW(ExtractEntries("x", {}, *gw), PreconditionError);
}

TEST(Report, JsonAndRejectionText) {
  const Catalogs c;
  const auto report = ValidateEntries({{"Nope", "float", "1", Protocol::kVss},
                                       {"BrakeCmd", "float", "100", Protocol::kCan}},
                                      c.vss, c.can, "abc");
  const auto j = ToJson(report);
  EXPECT_EQ(j["source_digest"], "abc");
  EXPECT_EQ(j["accepted"][0]["resolved_key"], "BrakeCmd");
  EXPECT_EQ(j["rejected"][0]["reason"], "unknown-name");
  EXPECT_EQ(DescribeRejections(report).rfind("- Nope (VSS): unknown-name", 0), 0u);
}

}  // namespace
}  // namespace sdvguard::extraction
