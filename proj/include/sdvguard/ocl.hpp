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

// The OCL subset used for topology security constraints.
//
//   file       := ('context' Class ('inv' Name ':' expr)+)*
//   expr       := implies
//   implies    := or ('implies' or)*          (right-associative)
//   or         := and ('or' and)*
//   and        := not ('and' not)*
//   not        := 'not' not | 'let' var ':' Type '=' expr 'in' expr | comparison
//   comparison := additive [('=' | '<>' | '<' | '<=' | '>' | '>=') additive]
//   additive   := '-' additive | postfix
//   postfix    := primary ('.' attr | '.oclIsTypeOf(' Class ')' | '.toReal()')*
//   primary    := 'self' | var | number | 'string' | Enum::literal | true | false
//               | '(' expr ')'
//
// Enum literals may contain hyphens (MessageStandardKind::IEEE-1722).
// Types for let: Real, Integer, String, Boolean, or a metamodel class.
// A let body extends as far right as possible. Backslashes are ignored so
// typeset rule text with trailing line breaks parses unchanged.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sdvguard/topology.hpp"

namespace sdvguard::ocl {

struct OclExpr {
  enum class Kind {
    kSelf, kVariable, kReal, kInteger, kString, kBoolean, kEnumLiteral,
    kNavigate, kIsTypeOf, kToReal, kNeg, kNot, kAnd, kOr, kImplies, kCompare, kLet
  };

  Kind kind = Kind::kSelf;
  // variable / navigated attribute / string value / comparison operator /
  // let variable / enum literal / oclIsTypeOf class
  std::string text;
  std::string type_name;  // enum name for kEnumLiteral, declared type for kLet
  double real = 0.0;
  long long integer = 0;
  bool boolean = false;
  std::vector<OclExpr> children;

  bool operator==(const OclExpr&) const = default;
};

std::string ToString(const OclExpr& expr);

struct Constraint {
  std::string name;
  std::string context;
  OclExpr body;

  bool operator==(const Constraint&) const = default;
};

using ConstraintSet = std::vector<Constraint>;

// Syntax only. Throws ParseError with line and column.
ConstraintSet ParseConstraints(std::string_view text);

// Throws ConstraintError naming the first unknown class, attribute, enum,
// literal or variable, or an operator applied to the wrong type.
void TypeCheck(const ConstraintSet& constraints, const topology::Metamodel& metamodel);

enum class Verdict { kPass, kFail, kNotApplicable };
std::string_view ToString(Verdict verdict);

struct Evaluation {
  std::string constraint;
  std::string object_id;
  Verdict verdict = Verdict::kNotApplicable;
  std::string reason;  // empty on pass
};

struct TopologyReport {
  std::vector<Evaluation> entries;  // constraint-major, objects in model order

  bool passed() const;
  std::size_t count(Verdict verdict) const;
  std::vector<Evaluation> failing() const;
};

// Every constraint against every object: objects whose class is the context
// or a descendant are evaluated, the rest are not-applicable. Evaluation
// faults (toReal on a non-number, ordering against null) are failures.
// Throws PreconditionError if the model does not conform, and
// ConstraintError if a constraint does not type-check.
TopologyReport EvalConstraints(const topology::InstanceModel& model,
                               const topology::Metamodel& metamodel,
                               const ConstraintSet& constraints);

// One tab-separated line per entry: constraint, object, verdict, reason.
std::string PassFailList(const TopologyReport& report);
nlohmann::ordered_json ToJson(const TopologyReport& report);

}  // namespace sdvguard::ocl
