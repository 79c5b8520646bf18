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

// Before/after ordering rules over event chains.
//
//   rule   := name ':' ['require' | 'forbid'] expr
//   expr   := term ('or' term)*
//   term   := factor ('and' factor)*
//   factor := 'not' factor | '(' expr ')' | atom
//   atom   := EVENT ('before' | 'after') EVENT
//
// EVENT is one or more non-keyword words; the words are joined with hyphens
// and normalized, so "camera-pedestrian detected" names the same event as
// "camera-pedestrian-detected".
//
// Rule files hold one rule per blank-line separated stanza. Lines starting
// with '#' are comments. Expressions may continue over several lines, and
// `alias <event> = <pattern>[, <pattern>...]` lines map a rule event onto
// chain events ('*' matches any run of characters).

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sdvguard/eventchain.hpp"
#include "sdvguard/llm_gateway.hpp"

namespace sdvguard::rules {

enum class Op { kBefore, kAfter };

struct Atom {
  std::string left;
  Op op = Op::kBefore;
  std::string right;

  bool operator==(const Atom&) const = default;
};

struct Expr {
  enum class Kind { kAtom, kAnd, kOr, kNot };

  Kind kind = Kind::kAtom;
  Atom atom;                  // kAtom only
  std::vector<Expr> children; // and/or: two or more; not: exactly one

  bool operator==(const Expr&) const = default;
};

enum class Mode { kRequire, kForbid };
std::string_view ToString(Mode mode);

// Rule event name -> chain event patterns.
using Aliases = std::map<std::string, std::vector<std::string>>;

struct SafetyRule {
  std::string name;
  Mode mode = Mode::kRequire;
  Expr expr;
  Aliases aliases;

  bool operator==(const SafetyRule&) const = default;
};

using RuleSet = std::vector<SafetyRule>;

RuleSet ParseRules(std::string_view text);

std::string ToString(const Atom& atom);
std::string ToString(const Expr& expr);

// A before B: every B has an A at a strictly smaller position.
// A after B: every A has a B at a strictly smaller position.
bool EvalAtom(const chain::EventSequence& sequence, const Atom& atom,
              const Aliases& aliases = {});
bool EvalExpr(const chain::EventSequence& sequence, const Expr& expr,
              const Aliases& aliases = {});

struct Witness {
  std::size_t path_index = 0;
  std::vector<std::string> events;
  std::vector<std::pair<std::string, bool>> atoms;  // every atom, in expression order
  bool expr_value = false;
};

struct RuleResult {
  std::string name;
  Mode mode = Mode::kRequire;
  std::string expr;
  bool passed = true;
  std::size_t paths_checked = 0;
  std::vector<Witness> witnesses;  // non-empty iff !passed
};

RuleResult EvalRule(const chain::ChainDocument& document, const SafetyRule& rule);

struct SafetyReport {
  std::string chain_digest;
  std::vector<RuleResult> rules;

  bool passed() const;
  std::size_t violations() const;
};

SafetyReport Check(const chain::ChainDocument& document, const RuleSet& rules);

nlohmann::ordered_json ToJson(const SafetyReport& report);
// Plain-text summary of the violations, used in correction prompts.
std::string DescribeViolations(const SafetyReport& report);

// Renders PC2b and returns the completion unchanged. Throws
// PreconditionError when the report has no violations.
std::string SuggestCorrection(std::string_view code, const SafetyReport& report,
                              llm::Gateway& gateway);

}  // namespace sdvguard::rules
