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

#include "sdvguard/topology.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::topology {
namespace {

using Json = nlohmann::ordered_json;

AttributeDecl ParseAttribute(const Json& j, const std::string& owner) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string() ||
      !j.contains("kind") || !j["kind"].is_string()) {
    throw MetamodelError("class " + owner + ": attribute needs string 'name' and 'kind'");
  }
  AttributeDecl a;
  a.name = j["name"].get<std::string>();
  const std::string kind = j["kind"].get<std::string>();
  static const std::regex kWrapped(R"(^(enum|ref)\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)$)");
  std::smatch m;
  if (kind == "string") a.kind = AttrKind::kString;
  else if (kind == "real") a.kind = AttrKind::kReal;
  else if (kind == "int") a.kind = AttrKind::kInt;
  else if (kind == "bool") a.kind = AttrKind::kBool;
  else if (std::regex_match(kind, m, kWrapped)) {
    a.kind = m[1] == "enum" ? AttrKind::kEnum : AttrKind::kRef;
    a.target = m[2];
  } else {
    throw MetamodelError("class " + owner + ": unknown attribute kind '" + kind + "'");
  }
  return a;
}

std::string Quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

Value ParseDiagramValue(std::string_view raw, std::size_t line) {
  raw = text::Trim(raw);
  if (raw.empty()) throw ParseError("missing value", line);
  if (raw.front() == '"' || raw.front() == '\'') {
    const char q = raw.front();
    if (raw.size() < 2 || raw.back() != q) throw ParseError("unterminated string", line);
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size()) ++i;
      out += raw[i];
    }
    return out;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  const bool realish = raw.find_first_of(".eE") != std::string_view::npos;
  if (!realish) {
    if (auto i = text::ParseInteger(raw)) return *i;
  } else if (auto r = text::ParseReal(raw)) {
    return *r;
  }
  if (auto sep = raw.find("::"); sep != std::string_view::npos) {
    return std::string(raw.substr(sep + 2));
  }
  return std::string(raw);
}

Value ParseJsonValue(const Json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) return j.get<double>();
  throw ParseError(where + ": attribute values must be strings, numbers or booleans");
}

Json ValueToJson(const Value& v) {
  return std::visit([](const auto& x) { return Json(x); }, v);
}

}  // namespace

std::string KindString(const AttributeDecl& a) {
  switch (a.kind) {
    case AttrKind::kString: return "string";
    case AttrKind::kReal: return "real";
    case AttrKind::kInt: return "int";
    case AttrKind::kBool: return "bool";
    case AttrKind::kEnum: return "enum(" + a.target + ")";
    case AttrKind::kRef: return "ref(" + a.target + ")";
  }
  return "?";
}

Metamodel::Metamodel(std::string name, std::vector<ClassDecl> classes,
                     std::vector<EnumDecl> enums)
    : name_(std::move(name)), classes_(std::move(classes)), enums_(std::move(enums)) {
  if (classes_.empty()) throw MetamodelError("metamodel has no classes");
  std::set<std::string> seen;
  for (const auto& e : enums_) {
    if (!seen.insert(e.name).second) throw MetamodelError("duplicate type name " + e.name);
    if (e.literals.empty()) throw MetamodelError("enum " + e.name + " has no literals");
    std::set<std::string> lits(e.literals.begin(), e.literals.end());
    if (lits.size() != e.literals.size()) {
      throw MetamodelError("enum " + e.name + " repeats a literal");
    }
  }
  for (const auto& c : classes_) {
    if (!seen.insert(c.name).second) throw MetamodelError("duplicate type name " + c.name);
  }
  for (const auto& c : classes_) {
    if (c.parent && !FindClass(*c.parent)) {
      throw MetamodelError("class " + c.name + " extends unknown class " + *c.parent);
    }
    std::set<std::string> chain{c.name};
    for (const ClassDecl* p = c.parent ? FindClass(*c.parent) : nullptr; p;
         p = p->parent ? FindClass(*p->parent) : nullptr) {
      if (!chain.insert(p->name).second) {
        throw MetamodelError("inheritance cycle through class " + p->name);
      }
    }
  }
  for (const auto& c : classes_) {
    std::set<std::string> names;
    for (const auto& a : c.attributes) {
      if (!names.insert(a.name).second) {
        throw MetamodelError("class " + c.name + " declares " + a.name + " twice");
      }
      if (a.kind == AttrKind::kEnum && !FindEnum(a.target)) {
        throw MetamodelError("attribute " + c.name + "." + a.name + " uses unknown enum " +
                             a.target);
      }
      if (a.kind == AttrKind::kRef && !FindClass(a.target)) {
        throw MetamodelError("attribute " + c.name + "." + a.name +
                             " references unknown class " + a.target);
      }
      for (const ClassDecl* p = c.parent ? FindClass(*c.parent) : nullptr; p;
           p = p->parent ? FindClass(*p->parent) : nullptr) {
        for (const auto& inherited : p->attributes) {
          if (inherited.name == a.name) {
            throw MetamodelError("class " + c.name + " redeclares inherited attribute " +
                                 a.name);
          }
        }
      }
    }
  }
}

const ClassDecl* Metamodel::FindClass(std::string_view name) const {
  for (const auto& c : classes_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const EnumDecl* Metamodel::FindEnum(std::string_view name) const {
  for (const auto& e : enums_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const AttributeDecl* Metamodel::FindAttribute(std::string_view class_name,
                                              std::string_view attribute) const {
  for (const ClassDecl* c = FindClass(class_name); c;
       c = c->parent ? FindClass(*c->parent) : nullptr) {
    for (const auto& a : c->attributes) {
      if (a.name == attribute) return &a;
    }
  }
  return nullptr;
}

bool Metamodel::IsSubclassOf(std::string_view derived, std::string_view base) const {
  for (const ClassDecl* c = FindClass(derived); c;
       c = c->parent ? FindClass(*c->parent) : nullptr) {
    if (c->name == base) return true;
  }
  return false;
}

Metamodel ParseMetamodel(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    auto [line, column] = text::LineColumn(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("malformed metamodel: ") + e.what(), line, column);
  }
  if (!j.is_object() || !j.contains("classes") || !j["classes"].is_array()) {
    throw MetamodelError("metamodel needs a 'classes' array");
  }
  std::string name = j.value("name", std::string());
  std::vector<EnumDecl> enums;
  if (j.contains("enums")) {
    if (!j["enums"].is_array()) throw MetamodelError("'enums' must be an array");
    for (const auto& je : j["enums"]) {
      if (!je.is_object() || !je.contains("name") || !je["name"].is_string() ||
          !je.contains("literals") || !je["literals"].is_array()) {
        throw MetamodelError("enum needs 'name' and 'literals'");
      }
      EnumDecl e;
      e.name = je["name"].get<std::string>();
      for (const auto& l : je["literals"]) {
        if (!l.is_string()) throw MetamodelError("enum " + e.name + ": literals are strings");
        e.literals.push_back(l.get<std::string>());
      }
      enums.push_back(std::move(e));
    }
  }
  std::vector<ClassDecl> classes;
  for (const auto& jc : j["classes"]) {
    if (!jc.is_object() || !jc.contains("name") || !jc["name"].is_string()) {
      throw MetamodelError("class needs a string 'name'");
    }
    ClassDecl c;
    c.name = jc["name"].get<std::string>();
    c.abstract = jc.value("abstract", false);
    if (jc.contains("parent") && !jc["parent"].is_null()) {
      if (!jc["parent"].is_string()) throw MetamodelError("class " + c.name + ": bad parent");
      c.parent = jc["parent"].get<std::string>();
    }
    if (jc.contains("attributes")) {
      if (!jc["attributes"].is_array()) {
        throw MetamodelError("class " + c.name + ": 'attributes' must be an array");
      }
      for (const auto& ja : jc["attributes"]) c.attributes.push_back(ParseAttribute(ja, c.name));
    }
    classes.push_back(std::move(c));
  }
  return Metamodel(std::move(name), std::move(classes), std::move(enums));
}

std::string SerializeMetamodel(const Metamodel& metamodel) {
  Json j;
  j["name"] = metamodel.name();
  j["enums"] = Json::array();
  for (const auto& e : metamodel.enums()) {
    j["enums"].push_back({{"name", e.name}, {"literals", e.literals}});
  }
  j["classes"] = Json::array();
  for (const auto& c : metamodel.classes()) {
    Json jc;
    jc["name"] = c.name;
    jc["abstract"] = c.abstract;
    if (c.parent) jc["parent"] = *c.parent;
    jc["attributes"] = Json::array();
    for (const auto& a : c.attributes) {
      jc["attributes"].push_back({{"name", a.name}, {"kind", KindString(a)}});
    }
    j["classes"].push_back(std::move(jc));
  }
  return j.dump(2) + "\n";
}

std::string ValueToString(const Value& value) {
  struct {
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double d) const { return text::FormatReal(d); }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  } visitor;
  return std::visit(visitor, value);
}

const Object* InstanceModel::Find(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

InstanceModel ParseInstance(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    auto [line, column] = text::LineColumn(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("malformed instance model: ") + e.what(), line, column);
  }
  if (!j.is_object() || !j.contains("objects") || !j["objects"].is_array()) {
    throw ParseError("instance model needs an 'objects' array");
  }
  InstanceModel model;
  model.conforms_to = j.value("conformsTo", std::string());
  std::set<std::string> ids;
  for (const auto& jo : j["objects"]) {
    if (!jo.is_object() || !jo.contains("id") || !jo["id"].is_string() ||
        !jo.contains("class") || !jo["class"].is_string()) {
      throw ParseError("object needs string 'id' and 'class'");
    }
    Object o;
    o.id = jo["id"].get<std::string>();
    o.class_name = jo["class"].get<std::string>();
    if (!ids.insert(o.id).second) throw ParseError("duplicate object id '" + o.id + "'");
    if (jo.contains("attributes")) {
      if (!jo["attributes"].is_object()) throw ParseError(o.id + ": attributes must be an object");
      for (const auto& [k, v] : jo["attributes"].items()) {
        o.attributes.emplace(k, ParseJsonValue(v, o.id + "." + k));
      }
    }
    if (jo.contains("references")) {
      if (!jo["references"].is_object()) throw ParseError(o.id + ": references must be an object");
      for (const auto& [k, v] : jo["references"].items()) {
        if (!v.is_string()) throw ParseError(o.id + "." + k + ": reference must be an id");
        o.references.emplace(k, v.get<std::string>());
      }
    }
    model.objects.push_back(std::move(o));
  }
  for (const auto& o : model.objects) {
    for (const auto& [k, target] : o.references) {
      if (!ids.count(target)) {
        throw ParseError(o.id + "." + k + " references unknown object '" + target + "'");
      }
    }
  }
  return model;
}

Json ToJson(const InstanceModel& model) {
  Json j;
  j["conformsTo"] = model.conforms_to;
  j["objects"] = Json::array();
  for (const auto& o : model.objects) {
    Json jo;
    jo["id"] = o.id;
    jo["class"] = o.class_name;
    jo["attributes"] = Json::object();
    for (const auto& [k, v] : o.attributes) jo["attributes"][k] = ValueToJson(v);
    jo["references"] = Json::object();
    for (const auto& [k, v] : o.references) jo["references"][k] = v;
    j["objects"].push_back(std::move(jo));
  }
  return j;
}

std::string SerializeInstance(const InstanceModel& model) { return ToJson(model).dump(2) + "\n"; }

InstanceModel ImportClassDiagram(std::string_view plantuml) {
  static const std::regex kObjectColon(
      R"(^object\s+([A-Za-z_][\w.-]*)\s*:\s*([A-Za-z_]\w*)\s*(\{?)\s*$)");
  static const std::regex kObjectStereo(
      R"(^object\s+([A-Za-z_][\w.-]*)\s*<<\s*([A-Za-z_]\w*)\s*>>\s*(\{?)\s*$)");
  static const std::regex kField(R"(^([A-Za-z_][\w.-]*)\s*:\s*([A-Za-z_]\w*)\s*=\s*(.+)$)");
  static const std::regex kArrow(
      R"(^([A-Za-z_][\w.-]*)\s*(?:-->|->|\.\.>)\s*([A-Za-z_][\w.-]*)\s*(?::\s*(.*))?$)");
  static const std::regex kBlockField(R"(^([A-Za-z_]\w*)\s*=\s*(.+)$)");
  static const std::regex kConformsTo(R"(^'\s*conformsTo\s*:\s*(\S+)\s*$)");

  InstanceModel model;
  std::map<std::string, std::size_t> index;
  const auto lines = text::SplitLines(plantuml);
  std::optional<std::size_t> open_block;
  bool started = false;
  bool ended = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::string line(text::Trim(lines[i]));
    std::smatch m;
    if (line.empty()) continue;
    if (ended) throw ParseError("content after @enduml", line_no);
    if (std::regex_match(line, m, kConformsTo)) {
      model.conforms_to = m[1];
      continue;
    }
    if (line[0] == '\'') continue;
    if (line == "@startuml") {
      if (started) throw ParseError("duplicate @startuml", line_no);
      started = true;
      continue;
    }
    if (!started) throw ParseError("diagram must begin with @startuml", line_no);
    if (line == "@enduml") {
      if (open_block) throw ParseError("unterminated object block", line_no);
      ended = true;
      continue;
    }
    if (open_block) {
      if (line == "}") {
        open_block.reset();
      } else if (std::regex_match(line, m, kBlockField)) {
        auto& obj = model.objects[*open_block];
        if (!obj.attributes.emplace(m[1], ParseDiagramValue(m[2].str(), line_no)).second) {
          throw ParseError("attribute '" + m[1].str() + "' set twice", line_no);
        }
      } else {
        throw ParseError("expected 'name = value' or '}'", line_no);
      }
      continue;
    }
    if (std::regex_match(line, m, kObjectColon) || std::regex_match(line, m, kObjectStereo)) {
      const std::string id = m[1];
      if (index.count(id)) throw ParseError("duplicate object id '" + id + "'", line_no);
      index.emplace(id, model.objects.size());
      model.objects.push_back({id, m[2], {}, {}});
      if (m[3] == "{") open_block = model.objects.size() - 1;
      continue;
    }
    if (std::regex_match(line, m, kArrow)) {
      const std::string from = m[1], to = m[2];
      if (!index.count(from) || !index.count(to)) {
        throw ImportError("line " + std::to_string(line_no) + ": arrow between undeclared objects " +
                          from + " and " + to);
      }
      const std::string label(text::Trim(m[3].str()));
      if (label.empty()) {
        throw ImportError("line " + std::to_string(line_no) + ": arrow needs a reference name");
      }
      auto& refs = model.objects[index[from]].references;
      if (!refs.emplace(label, to).second) {
        throw ImportError("line " + std::to_string(line_no) + ": reference " + from + "." + label +
                          " set twice");
      }
      continue;
    }
    if (std::regex_match(line, m, kField)) {
      auto it = index.find(m[1]);
      if (it == index.end()) {
        throw ImportError("line " + std::to_string(line_no) + ": field on undeclared object " +
                          m[1].str());
      }
      if (!model.objects[it->second]
               .attributes.emplace(m[2], ParseDiagramValue(m[3].str(), line_no))
               .second) {
        throw ParseError("attribute '" + m[2].str() + "' set twice", line_no);
      }
      continue;
    }
    throw ParseError("unsupported class-diagram line '" + line + "'", line_no);
  }
  if (!started) throw ParseError("diagram must begin with @startuml");
  if (!ended) throw ParseError("missing @enduml", lines.size());
  return model;
}

std::string ExportClassDiagram(const InstanceModel& model) {
  std::string out = "@startuml\n";
  if (!model.conforms_to.empty()) out += "' conformsTo: " + model.conforms_to + "\n";
  for (const auto& o : model.objects) {
    out += "object " + o.id + " : " + o.class_name;
    if (o.attributes.empty()) {
      out += "\n";
      continue;
    }
    out += " {\n";
    for (const auto& [k, v] : o.attributes) {
      out += "  " + k + " = " +
             (std::holds_alternative<std::string>(v) ? Quote(std::get<std::string>(v))
                                                     : ValueToString(v)) +
             "\n";
    }
    out += "}\n";
  }
  for (const auto& o : model.objects) {
    for (const auto& [k, target] : o.references) {
      out += o.id + " --> " + target + " : " + k + "\n";
    }
  }
  return out + "@enduml\n";
}

std::string ConformanceReport::Describe() const {
  std::string out;
  for (const auto& i : issues) {
    out += (i.object_id.empty() ? std::string("model") : i.object_id) + ": " + i.message + "\n";
  }
  return out;
}

ConformanceReport Conform(const InstanceModel& model, const Metamodel& metamodel) {
  ConformanceReport report;
  auto issue = [&](const std::string& id, std::string message) {
    report.issues.push_back({id, std::move(message)});
  };
  if (!model.conforms_to.empty() && !metamodel.name().empty() &&
      model.conforms_to != metamodel.name()) {
    issue("", "declares conformance to " + model.conforms_to + ", not " + metamodel.name());
  }
  std::set<std::string> ids;
  for (const auto& o : model.objects) {
    if (!ids.insert(o.id).second) issue(o.id, "duplicate object id");
  }
  for (const auto& o : model.objects) {
    const ClassDecl* c = metamodel.FindClass(o.class_name);
    if (c == nullptr) {
      issue(o.id, "unknown class " + o.class_name);
      continue;
    }
    if (c->abstract) issue(o.id, "instantiates abstract class " + c->name);
    for (const auto& [name, value] : o.attributes) {
      const AttributeDecl* a = metamodel.FindAttribute(o.class_name, name);
      if (a == nullptr) {
        issue(o.id, "unknown attribute " + o.class_name + "." + name);
        continue;
      }
      bool ok = false;
      switch (a->kind) {
        case AttrKind::kString:
          ok = std::holds_alternative<std::string>(value);
          break;
        case AttrKind::kReal:
          ok = std::holds_alternative<double>(value) || std::holds_alternative<long long>(value);
          break;
        case AttrKind::kInt:
          ok = std::holds_alternative<long long>(value);
          break;
        case AttrKind::kBool:
          ok = std::holds_alternative<bool>(value);
          break;
        case AttrKind::kEnum:
          if (const auto* s = std::get_if<std::string>(&value)) {
            const auto& lits = metamodel.FindEnum(a->target)->literals;
            ok = std::find(lits.begin(), lits.end(), *s) != lits.end();
          }
          break;
        case AttrKind::kRef:
          break;
      }
      if (a->kind == AttrKind::kRef) {
        issue(o.id, name + " is a reference, not an attribute");
      } else if (!ok) {
        issue(o.id, name + " = " + ValueToString(value) + " does not match kind " + KindString(*a));
      }
    }
    for (const auto& [name, target_id] : o.references) {
      const AttributeDecl* a = metamodel.FindAttribute(o.class_name, name);
      if (a == nullptr) {
        issue(o.id, "unknown reference " + o.class_name + "." + name);
        continue;
      }
      if (a->kind != AttrKind::kRef) {
        issue(o.id, name + " is an attribute of kind " + KindString(*a) + ", not a reference");
        continue;
      }
      const Object* target = model.Find(target_id);
      if (target == nullptr) {
        issue(o.id, name + " references missing object " + target_id);
      } else if (!metamodel.IsSubclassOf(target->class_name, a->target)) {
        issue(o.id, name + " references " + target_id + " of class " + target->class_name +
                        ", expected " + a->target);
      }
    }
  }
  return report;
}

}  // namespace sdvguard::topology
