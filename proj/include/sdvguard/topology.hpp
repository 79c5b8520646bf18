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

// Metamodels, instance models and the PlantUML object-diagram form.
//
// Metamodel file:
//   {"name": "...",
//    "enums":   [{"name": "E", "literals": ["a", "b-c"]}],
//    "classes": [{"name": "C", "abstract": false, "parent": "B",
//                 "attributes": [{"name": "x", "kind": "real"}]}]}
// Attribute kinds: string, real, int, bool, enum(E), ref(C).
//
// Instance file:
//   {"conformsTo": "...",
//    "objects": [{"id": "m1", "class": "Message",
//                 "attributes": {"payloadValue": "15.0"},
//                 "references": {"target": "steer1"}}]}
// Enum-valued attributes hold the bare literal as a string.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace sdvguard::topology {

enum class AttrKind { kString, kReal, kInt, kBool, kEnum, kRef };

struct AttributeDecl {
  std::string name;
  AttrKind kind = AttrKind::kString;
  std::string target;  // enum name for kEnum, class name for kRef

  bool operator==(const AttributeDecl&) const = default;
};

std::string KindString(const AttributeDecl& attribute);

struct ClassDecl {
  std::string name;
  bool abstract = false;
  std::optional<std::string> parent;
  std::vector<AttributeDecl> attributes;

  bool operator==(const ClassDecl&) const = default;
};

struct EnumDecl {
  std::string name;
  std::vector<std::string> literals;

  bool operator==(const EnumDecl&) const = default;
};

class Metamodel {
 public:
  // Throws MetamodelError: empty or duplicate classes, unknown parents or
  // targets, inheritance cycles, attributes redeclared along a chain.
  Metamodel(std::string name, std::vector<ClassDecl> classes, std::vector<EnumDecl> enums);

  const std::string& name() const { return name_; }
  const std::vector<ClassDecl>& classes() const { return classes_; }
  const std::vector<EnumDecl>& enums() const { return enums_; }

  const ClassDecl* FindClass(std::string_view name) const;
  const EnumDecl* FindEnum(std::string_view name) const;
  // Searches the class and its ancestors.
  const AttributeDecl* FindAttribute(std::string_view class_name,
                                     std::string_view attribute) const;
  // Reflexive.
  bool IsSubclassOf(std::string_view derived, std::string_view base) const;

  bool operator==(const Metamodel&) const = default;

 private:
  std::string name_;
  std::vector<ClassDecl> classes_;
  std::vector<EnumDecl> enums_;
};

Metamodel ParseMetamodel(std::string_view text);
std::string SerializeMetamodel(const Metamodel& metamodel);

using Value = std::variant<std::string, double, long long, bool>;
std::string ValueToString(const Value& value);

struct Object {
  std::string id;
  std::string class_name;
  std::map<std::string, Value> attributes;
  std::map<std::string, std::string> references;  // name -> object id

  bool operator==(const Object&) const = default;
};

struct InstanceModel {
  std::string conforms_to;
  std::vector<Object> objects;

  const Object* Find(std::string_view id) const;
  bool operator==(const InstanceModel&) const = default;
};

// Duplicate ids and references to missing objects are ParseErrors.
InstanceModel ParseInstance(std::string_view text);
nlohmann::ordered_json ToJson(const InstanceModel& model);
std::string SerializeInstance(const InstanceModel& model);

// Object-diagram subset:
//   object <id> : <Class> [{ <attr> = <value> ... }]
//   object <id> <<Class>> [{ ... }]
//   <id> : <attr> = <value>
//   <id> --> <id> : <reference>     (also ->, ..>)
//   ' conformsTo: <metamodel name>
// Quoted values are strings, values with '.' or an exponent are reals,
// other numbers ints, true/false bools, and anything else a bare string
// (E::lit keeps only lit).
InstanceModel ImportClassDiagram(std::string_view plantuml);
std::string ExportClassDiagram(const InstanceModel& model);

struct ConformanceIssue {
  std::string object_id;
  std::string message;

  bool operator==(const ConformanceIssue&) const = default;
};

struct ConformanceReport {
  std::vector<ConformanceIssue> issues;

  bool ok() const { return issues.empty(); }
  std::string Describe() const;
};

ConformanceReport Conform(const InstanceModel& model, const Metamodel& metamodel);

}  // namespace sdvguard::topology
