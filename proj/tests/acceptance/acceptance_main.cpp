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

// Runs every acceptance criterion once and prints one PASS/FAIL line per
// criterion. Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/bm25_oracle.hpp"
#include "oracles/extraction_oracle.hpp"
#include "oracles/temporal_oracle.hpp"
#include "sdvguard/catalog.hpp"
#include "sdvguard/eventchain.hpp"
#include "sdvguard/extraction.hpp"
#include "sdvguard/harness.hpp"
#include "sdvguard/ocl.hpp"
#include "sdvguard/pipeline.hpp"
#include "sdvguard/retrieval.hpp"
#include "sdvguard/safety_rules.hpp"
#include "sdvguard/text.hpp"
#include "sdvguard/topology.hpp"
#include "test_support.hpp"

namespace sdvguard::acceptance {
namespace {

namespace fs = std::filesystem;
using testing::DataPath;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Collects mismatches; a criterion passes when none were recorded.
class Check {
 public:
  void That(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ |= !ok;
  }
  bool ok() const { return !failed_; }
  std::string Failures() const {
    std::string out;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + f;
    return out;
  }

 private:
  bool failed_ = false;
  std::vector<std::string> failures_;
};

pipeline::PipelineConfig ReplayConfig(const std::string& store, const fs::path& out) {
  pipeline::PipelineConfig c;
  c.vss = DataPath("catalogs/adas_vss.json");
  c.can = DataPath("catalogs/adas_can.json");
  c.gateway_mode = llm::GatewayMode::kReplay;
  c.store = DataPath("replay/" + store + ".json");
  c.out_dir = out;
  return c;
}

pipeline::SafetyOutcome RunSafety(const std::string& scenario, const std::string& rules,
                                  const fs::path& out) {
  const auto config = ReplayConfig(scenario, out);
  auto gateway = pipeline::MakeGateway(config);
  return pipeline::RunSafetyPipeline(config, DataPath("scenarios/" + scenario + ".py"),
                                     DataPath("rules/" + rules), *gateway);
}

std::string ScenarioReproduction(Check& check) {
  testing::TempDir tmp("acceptance");
  struct Case {
    std::string scenario, rules, rule, verdict;
  };
  const std::vector<Case> cases = {{"s1", "scenario1.rules", "rule1", "violated"},
                                   {"s2", "scenario2.rules", "rule2", "violated"},
                                   {"s3", "scenario3.rules", "rule3", "violated"},
                                   {"s3_corrected", "scenario3.rules", "rule3", "pass"}};
  double slowest = 0.0;
  std::string summary;
  for (const auto& c : cases) {
    const auto start = Clock::now();
    const auto outcome = RunSafety(c.scenario, c.rules, tmp / c.scenario);
    const double took = Seconds(start);
    slowest = std::max(slowest, took);
    const bool named = outcome.report && outcome.report->rules.size() == 1 &&
                       outcome.report->rules[0].name == c.rule &&
                       (outcome.report->rules[0].passed ? "pass" : "violated") == c.verdict;
    check.That(outcome.record.verdict == c.verdict && named,
               c.scenario + " gave " + outcome.record.verdict + " " + outcome.record.error);
    check.That(took < 1.0, c.scenario + " took " + std::to_string(took) + " s");
    summary += (summary.empty() ? "" : ", ") + c.scenario + "=" + outcome.record.verdict;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "; slowest %.3f s", slowest);
  return summary + buf;
}

chain::ChainDocument LinearChain(const testing::oracle::Seq& events) {
  std::string text = "@startuml\nstart\n";
  for (const auto& e : events) text += ":" + e + ";\n";
  return chain::ToChainDocument(chain::ParseActivityDiagram(text + "stop\n@enduml\n"));
}

chain::EventSequence Occurrences(const testing::oracle::Seq& events) {
  chain::EventSequence out;
  for (std::size_t i = 0; i < events.size(); ++i) out.push_back({i, events[i], ""});
  return out;
}

std::string TemporalProperties(Check& check) {
  using namespace testing::oracle;
  std::mt19937 rng(20260101);
  std::size_t sequences = 0, counterexamples = 0;
  for (int round = 0; round < 10000; ++round, ++sequences) {
    const std::size_t alphabet = 1 + rng() % kAlphabet.size();
    const Seq s = RandomSequence(rng, alphabet);
    const auto seq = Occurrences(s);
    for (std::size_t i = 0; i < alphabet; ++i) {
      const std::string& a = kAlphabet[i];
      // self-reference
      counterexamples += rules::EvalAtom(seq, {a, Op::kBefore, a}) != (First(s, a) < 0);
      for (std::size_t j = 0; j < alphabet; ++j) {
        const std::string& b = kAlphabet[j];
        const bool before = rules::EvalAtom(seq, {a, Op::kBefore, b});
        counterexamples += rules::EvalAtom(seq, {b, Op::kAfter, a}) != before;  // duality
        counterexamples += First(s, b) < 0 && !before;                           // vacuity
        counterexamples += First(s, a) < 0 && !rules::EvalAtom(seq, {a, Op::kAfter, b});
        counterexamples += before != OracleBefore(s, a, b);
      }
    }
    const Expr expr = RandomExpr(rng, alphabet, 0);
    Expr negated;
    negated.kind = Expr::Kind::kNot;
    negated.children.push_back(expr);
    const auto doc = LinearChain(s);
    const bool forbid = rules::EvalRule(doc, {"f", rules::Mode::kForbid, expr, {}}).passed;
    const bool require_not = rules::EvalRule(doc, {"r", rules::Mode::kRequire, negated, {}}).passed;
    counterexamples += forbid != require_not;  // mode duality
    counterexamples += forbid == OracleExpr(s, expr);
  }
  check.That(counterexamples == 0, std::to_string(counterexamples) + " counterexamples");
  return std::to_string(sequences) + " sequences, " + std::to_string(counterexamples) +
         " counterexamples";
}

std::string AllPaths(Check& check) {
  const auto doc = chain::ToChainDocument(chain::ParseActivityDiagram(
      text::ReadFile(DataPath("chains/three_decisions.puml"))));
  const auto paths = chain::EnumeratePaths(doc);
  check.That(paths.size() == 8, std::to_string(paths.size()) + " paths");
  const auto rule = rules::ParseRules(text::ReadFile(DataPath("rules/three_decisions.rules"))).at(0);
  std::vector<std::size_t> failing;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!testing::oracle::OracleExpr(chain::Events(paths[i]), rule.expr)) failing.push_back(i);
  }
  check.That(failing.size() == 1, std::to_string(failing.size()) + " paths violate per oracle");
  const auto result = rules::EvalRule(doc, rule);
  check.That(!result.passed, "rule passed");
  check.That(result.witnesses.size() == 1 && !failing.empty() &&
                 result.witnesses[0].path_index == failing[0] &&
                 result.witnesses[0].events == chain::Events(paths[failing[0]]),
             "witness is not the violating path");
  std::string witness;
  if (!result.witnesses.empty()) {
    for (const auto& e : result.witnesses[0].events) witness += (witness.empty() ? "" : " -> ") + e;
  }
  return std::to_string(paths.size()) + " paths, verdict " +
         (result.passed ? "pass" : "violated") + ", witness " + witness;
}

std::string OclReproduction(Check& check) {
  const auto metamodel = topology::ParseMetamodel(
      text::ReadFile(DataPath("metamodel/sdv_topology.json")));
  const std::string plain = text::ReadFile(DataPath("topology/constraints.ocl"));
  // Typeset form: trailing "\\" on every line that does not end in "implies".
  std::string typeset;
  for (const auto& line : text::SplitLines(plain)) {
    if (line.rfind("--", 0) == 0) continue;
    typeset += line;
    if (!line.empty() && line.find("implies") == std::string::npos &&
        line.find("30.0") == std::string::npos) {
      typeset += "\\\\";
    }
    typeset += "\n";
  }
  const auto constraints = ocl::ParseConstraints(typeset);
  check.That(constraints == ocl::ParseConstraints(plain), "typeset text parses differently");
  check.That(constraints.size() == 3, "expected 3 constraints");
  ocl::TypeCheck(constraints, metamodel);

  const auto base =
      topology::ParseInstance(text::ReadFile(DataPath("topology/instance.json")));
  auto verdict = [&](const std::string& id, const std::string& constraint,
                     const std::function<void(topology::Object&)>& edit) {
    auto model = base;
    for (auto& o : model.objects) {
      if (o.id == id) edit(o);
    }
    for (const auto& e : ocl::EvalConstraints(model, metamodel, constraints).entries) {
      if (e.constraint == constraint && e.object_id == id) return e.verdict;
    }
    return ocl::Verdict::kNotApplicable;
  };
  auto payload = [](const std::string& v) {
    return [v](topology::Object& o) { o.attributes["payloadValue"] = v; };
  };
  struct Case {
    std::string label, id, constraint;
    std::function<void(topology::Object&)> edit;
    ocl::Verdict want;
  };
  const auto pass = ocl::Verdict::kPass, fail = ocl::Verdict::kFail;
  const std::vector<Case> cases = {
      {"steering 15.0", "m_steer", "SteeringCommandWithinLimits", payload("15.0"), pass},
      {"steering 16.0", "m_steer", "SteeringCommandWithinLimits", payload("16.0"), fail},
      {"steering -15.0", "m_steer", "SteeringCommandWithinLimits", payload("-15.0"), pass},
      {"non-steering target", "m_sim_hpc", "SteeringCommandWithinLimits", payload("99"), pass},
      {"HPC->zone over CANFD", "m_hpc_zone", "HPCtoZoneEthernetIEEE1722",
       [](topology::Object& o) { o.references["network"] = "canfd_zone"; }, fail},
      {"HPC->zone over Ethernet+IEEE-1722", "m_hpc_zone", "HPCtoZoneEthernetIEEE1722",
       [](topology::Object& o) {
         o.references["network"] = "eth_backbone";
         o.attributes["standard"] = std::string("IEEE-1722");
       },
       pass},
      {"camera->zone over CANFD", "m_cam_zone", "HPCtoZoneEthernetIEEE1722",
       [](topology::Object& o) { o.references["network"] = "canfd_zone"; }, pass},
      {"target speed 30.0", "v_speed_target", "TargetSpeedWithinSafetyLimit", payload("30.0"), pass},
      {"target speed 30.01", "v_speed_target", "TargetSpeedWithinSafetyLimit", payload("30.01"),
       fail},
      {"other path 99", "v_speed_target", "TargetSpeedWithinSafetyLimit",
       [](topology::Object& o) {
         o.attributes["vssPath"] = std::string("Vehicle.Speed");
         o.attributes["payloadValue"] = std::string("99");
       },
       pass},
  };
  std::size_t matched = 0;
  for (const auto& c : cases) {
    const auto got = verdict(c.id, c.constraint, c.edit);
    check.That(got == c.want, c.label + " -> " + std::string(ocl::ToString(got)));
    matched += got == c.want;
  }
  const auto fixture = ocl::EvalConstraints(base, metamodel, constraints);
  check.That(fixture.passed(), "conformant fixture has failures");
  return std::to_string(matched) + "/" + std::to_string(cases.size()) +
         " boundary verdicts exact, fixture " + (fixture.passed() ? "pass" : "fail");
}

std::string ExtractionValidation(Check& check) {
  const testing::oracle::Catalogs catalogs;
  const auto entries = extraction::ParseExtractionResponse(
      text::ReadFile(DataPath("fixtures/extraction_completion.json")));
  const auto report = extraction::ValidateEntries(entries, catalogs.vss, catalogs.can);
  check.That(report.accepted.size() == 5, std::to_string(report.accepted.size()) + " accepted");
  check.That(report.rejected.size() == 3, std::to_string(report.rejected.size()) + " rejected");
  std::size_t ai = 0, ri = 0, agree = 0;
  std::multiset<std::string> reasons;
  for (const auto& e : entries) {
    const auto want = testing::oracle::Oracle(e, catalogs);
    bool same = false;
    if (want.accepted) {
      same = ai < report.accepted.size() && report.accepted[ai].entry == e &&
             report.accepted[ai].resolved_key == want.key;
      ++ai;
    } else {
      same = ri < report.rejected.size() && report.rejected[ri].entry == e &&
             extraction::ToString(report.rejected[ri].reason) == want.reason;
      if (ri < report.rejected.size()) {
        reasons.insert(std::string(extraction::ToString(report.rejected[ri].reason)));
      }
      ++ri;
    }
    check.That(same, e.name + " disagrees with the oracle");
    agree += same;
  }
  check.That(reasons == std::multiset<std::string>{"unknown-name", "unknown-name",
                                                    "value-out-of-range"},
             "unexpected rejection reasons");
  return "accepted " + std::to_string(report.accepted.size()) + ", rejected " +
         std::to_string(report.rejected.size()) + ", oracle agreement " +
         std::to_string(agree) + "/" + std::to_string(entries.size());
}

std::string RetrievalDeterminism(Check& check) {
  const auto want = testing::oracle::ThreeDocScores();
  const auto got = retrieval::Bm25Scorer{}.Score(testing::oracle::ThreeDocs(),
                                                 testing::oracle::kThreeDocQuery);
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(got.at(i) - want[i]));
  check.That(worst <= 1e-9, "BM25 error " + std::to_string(worst));

  const pipeline::Grounding grounding = pipeline::Grounding::Load(
      DataPath("catalogs/adas_vss.json"), DataPath("catalogs/adas_can.json"));
  const std::string code = text::ReadFile(DataPath("scenarios/s1.py"));
  const auto first = retrieval::RetrieveTopK(grounding.index(), code, 20);
  bool stable = true;
  for (int run = 1; run < 10; ++run) {
    stable &= retrieval::RetrieveTopK(grounding.index(), code, 20) == first;
  }
  check.That(stable, "top-k differs across runs");

  const auto tree = testing::GenerateVssTree(200, 5);
  const retrieval::RetrievalIndex index(catalog::ParseVssCatalog(tree.json).entries());
  const auto shortlist = retrieval::RetrieveTopK(index, "synthetic signal", 200);
  check.That(shortlist.ranked.size() == 200, "shortlist has " +
                                                 std::to_string(shortlist.ranked.size()));
  const auto chunks = retrieval::ChunkEntries(shortlist, 4096);
  std::vector<retrieval::RankedEntry> flat;
  std::size_t largest = 0;
  for (const auto& c : chunks) {
    std::size_t sum = 0;
    for (const auto& e : c.entries) sum += retrieval::EstimateTokens(e.entry.text);
    check.That(sum == c.token_estimate && sum <= 4096, "chunk over budget");
    largest = std::max(largest, sum);
    flat.insert(flat.end(), c.entries.begin(), c.entries.end());
  }
  check.That(flat == shortlist.ranked, "chunking lost or reordered entries");
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "BM25 max error %.1e, top-k stable over 10 runs, %zu chunks (largest %zu tokens)",
                worst, chunks.size(), largest);
  return buf;
}

std::string ReplayDeterminism(Check& check) {
  testing::TempDir tmp("acceptance");
  RunSafety("s2", "scenario2.rules", tmp / "a");
  RunSafety("s2", "scenario2.rules", tmp / "b");
  const std::string a = text::ReadFile(tmp / "a" / "report.json");
  const std::string b = text::ReadFile(tmp / "b" / "report.json");
  check.That(!a.empty() && a == b, "reports differ");
  return "report.json sha256 " + text::Sha256Hex(a).substr(0, 16) + (a == b ? " (identical)" : "");
}

std::string HarnessStatistics(Check& check) {
  const auto start = Clock::now();
  pipeline::PipelineConfig config;
  config.gateway_mode = llm::GatewayMode::kReplay;
  const auto replay =
      harness::RunHarness(harness::LoadManifest(DataPath("eval/manifest.json")), config, 10);
  for (const auto& s : replay.scenarios) {
    check.That(s.successes == s.runs && s.runs == 10, s.name + " " + s.percent());
  }
  const auto faulty = harness::RunHarness(
      harness::LoadManifest(DataPath("eval/fault_single.json")), config, 200, {0.3, 1722});
  const double rate = faulty.scenarios.at(0).success_rate();
  check.That(rate >= 0.64 && rate <= 0.76, "fault rate " + faulty.scenarios[0].percent());
  const double took = Seconds(start);
  check.That(took < 30.0, "took " + std::to_string(took) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu scenarios at 100.0%%, fault injection %s, %.2f s",
                replay.scenarios.size(), faulty.scenarios[0].percent().c_str(), took);
  return buf;
}

}  // namespace
}  // namespace sdvguard::acceptance

int main() {
  using namespace sdvguard::acceptance;
  struct Criterion {
    const char* name;
    std::function<std::string(Check&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"scenario-reproduction", ScenarioReproduction},
      {"temporal-semantics-properties", TemporalProperties},
      {"all-paths-evaluation", AllPaths},
      {"ocl-rule-reproduction", OclReproduction},
      {"extraction-validation", ExtractionValidation},
      {"retrieval-determinism", RetrievalDeterminism},
      {"replay-determinism", ReplayDeterminism},
      {"harness-statistics", HarnessStatistics},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Check check;
    std::string detail;
    try {
      detail = c.run(check);
    } catch (const std::exception& e) {
      check.That(false, std::string("exception: ") + e.what());
    }
    const bool ok = check.ok();
    failed += !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << c.name << ": "
              << (ok ? detail : check.Failures()) << std::endl;
  }
  return failed;
}
