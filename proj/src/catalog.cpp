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

#include "sdvguard/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <utility>

#include "json.hpp"
#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::catalog {
namespace {

using Json = nlohmann::ordered_json;

// Parses JSON, turning syntax errors into ParseError with line/column and
// duplicate object keys into CatalogError (ordered_json would otherwise keep
// the last one silently).
Json ParseJsonStrict(std::string_view text) {
  std::vector<std::set<std::string>> seen;
  std::vector<std::string> keys;
  auto callback = [&](int /*depth*/, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        seen.emplace_back();
        keys.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        if (!seen.empty()) seen.pop_back();
        if (!keys.empty()) keys.pop_back();
        break;
      case Json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        keys.back() = key;
        if (!seen.back().insert(key).second) {
          std::string path;
          for (const auto& k : keys) {
            if (k.empty() || k == "children") continue;
            if (!path.empty()) path += '.';
            path += k;
          }
          throw CatalogError("duplicate entry '" + path + "'");
        }
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return Json::parse(text.begin(), text.end(), callback);
  } catch (const Json::parse_error& e) {
    auto [line, column] = text::LineColumn(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("malformed catalog document: ") + e.what(), line,
                     column);
  }
}

std::optional<double> OptionalNumber(const Json& node, const char* field,
                                     const std::string& where) {
  if (!node.contains(field) || node[field].is_null()) return std::nullopt;
  if (!node[field].is_number()) {
    throw SchemaError(where + ": field '" + field + "' must be a number");
  }
  return node[field].get<double>();
}

std::optional<std::string> OptionalString(const Json& node, const char* field,
                                          const std::string& where) {
  if (!node.contains(field) || node[field].is_null()) return std::nullopt;
  if (!node[field].is_string()) {
    throw SchemaError(where + ": field '" + field + "' must be a string");
  }
  return node[field].get<std::string>();
}

bool IsLeafKind(std::string_view type) {
  return type == "sensor" || type == "actuator" || type == "attribute";
}

bool IsDescriptorKey(std::string_view key) {
  static const std::set<std::string, std::less<>> kKeys = {
      "type",    "datatype", "unit", "min",         "max",
      "allowed", "children", "uuid", "description", "comment",
      "default", "deprecation"};
  return kKeys.count(key) > 0;
}

VssSignal ParseLeaf(const Json& node, const std::string& path) {
  VssSignal leaf;
  leaf.path = path;
  const std::string where = "signal '" + path + "'";
  if (auto type = OptionalString(node, "type", where)) {
    if (*type == "sensor") {
      leaf.kind = SignalKind::kSensor;
    } else if (*type == "actuator") {
      leaf.kind = SignalKind::kActuator;
    } else if (*type == "attribute") {
      leaf.kind = SignalKind::kAttribute;
    } else {
      throw SchemaError(where + ": unknown node type '" + *type + "'");
    }
  }
  auto datatype_name = OptionalString(node, "datatype", where);
  if (!datatype_name) throw SchemaError(where + ": leaf is missing 'datatype'");
  leaf.datatype = ParseDataType(*datatype_name);
  if (!leaf.datatype) {
    throw SchemaError(where + ": unknown datatype '" + *datatype_name + "'");
  }
  leaf.unit = OptionalString(node, "unit", where);
  leaf.min = OptionalNumber(node, "min", where);
  leaf.max = OptionalNumber(node, "max", where);
  leaf.description = OptionalString(node, "description", where);
  if (node.contains("allowed") && !node["allowed"].is_null()) {
    if (!node["allowed"].is_array()) {
      throw SchemaError(where + ": 'allowed' must be an array of strings");
    }
    for (const auto& v : node["allowed"]) {
      if (!v.is_string()) {
        throw SchemaError(where + ": 'allowed' must be an array of strings");
      }
      leaf.allowed.push_back(v.get<std::string>());
    }
  }
  // VSS spells enumerations as string + allowed.
  if (*leaf.datatype == DataType::kString && !leaf.allowed.empty()) {
    leaf.datatype = DataType::kEnum;
  }
  return leaf;
}

void WalkNode(const Json& node, const std::string& path, std::vector<VssSignal>& out);

void WalkChildren(const Json& children, const std::string& path,
                  std::vector<VssSignal>& out) {
  if (!children.is_object()) {
    throw SchemaError("branch '" + path + "': 'children' must be an object");
  }
  for (const auto& [name, child] : children.items()) {
    if (name.empty()) throw SchemaError("branch '" + path + "' has an unnamed child");
    WalkNode(child, path.empty() ? name : path + "." + name, out);
  }
}

void WalkNode(const Json& node, const std::string& path, std::vector<VssSignal>& out) {
  if (!node.is_object()) throw SchemaError("node '" + path + "' must be an object");
  const std::string where = "node '" + path + "'";
  const auto type = OptionalString(node, "type", where);
  const bool has_children = node.contains("children");
  const bool leaf_like = node.contains("datatype") || (type && IsLeafKind(*type));

  if (has_children || (!leaf_like && type && *type == "branch")) {
    if (type && *type != "branch") {
      throw SchemaError(where + ": node with children must have type 'branch'");
    }
    VssSignal branch;
    branch.path = path;
    branch.kind = SignalKind::kBranch;
    branch.description = OptionalString(node, "description", where);
    out.push_back(std::move(branch));
    if (has_children) WalkChildren(node["children"], path, out);
    return;
  }
  if (leaf_like) {
    out.push_back(ParseLeaf(node, path));
    return;
  }
  bool any_descriptor = false;
  for (const auto& [key, _] : node.items()) any_descriptor |= IsDescriptorKey(key);
  if (any_descriptor) {
    if (type) throw SchemaError(where + ": unknown node type '" + *type + "'");
    // Descriptor-only node (e.g. just a description): a childless branch.
    VssSignal branch;
    branch.path = path;
    branch.kind = SignalKind::kBranch;
    branch.description = OptionalString(node, "description", where);
    out.push_back(std::move(branch));
    return;
  }
  // Compact form: every member is a child node.
  VssSignal branch;
  branch.path = path;
  branch.kind = SignalKind::kBranch;
  out.push_back(std::move(branch));
  WalkChildren(node, path, out);
}

void CheckBounds(const std::optional<double>& min, const std::optional<double>& max,
                 const std::string& where) {
  if (min && max && *min > *max) {
    throw SchemaError(where + ": min " + text::FormatReal(*min) + " exceeds max " +
                      text::FormatReal(*max));
  }
}

std::string HexFrameId(std::uint32_t id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%X", id);
  return buf;
}

std::uint32_t ParseFrameId(const Json& value, const std::string& where) {
  if (value.is_number_unsigned() || value.is_number_integer()) {
    const long long v = value.get<long long>();
    if (v < 0 || v > static_cast<long long>(kMaxFrameId)) {
      throw SchemaError(where + ": frame_id out of 29-bit range");
    }
    return static_cast<std::uint32_t>(v);
  }
  if (value.is_string()) {
    std::string_view s = text::Trim(value.get_ref<const std::string&>());
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      base = 16;
      s.remove_prefix(2);
    }
    unsigned long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw SchemaError(where + ": malformed frame_id '" +
                        value.get<std::string>() + "'");
    }
    if (v > kMaxFrameId) throw SchemaError(where + ": frame_id out of 29-bit range");
    return static_cast<std::uint32_t>(v);
  }
  throw SchemaError(where + ": frame_id must be a number or string");
}

int RequiredInt(const Json& node, const char* field, const std::string& where) {
  if (!node.contains(field) || !node[field].is_number_integer()) {
    throw SchemaError(where + ": field '" + field + "' must be an integer");
  }
  return node[field].get<int>();
}

double NumberOr(const Json& node, const char* field, double fallback,
                const std::string& where) {
  return OptionalNumber(node, field, where).value_or(fallback);
}

CatalogEntry EntryFor(const VssSignal& leaf) {
  CatalogEntry e;
  e.key = leaf.path;
  e.protocol = Protocol::kVss;
  e.datatype = *leaf.datatype;
  e.min = leaf.min;
  e.max = leaf.max;
  e.allowed = leaf.allowed;
  e.unit = leaf.unit;
  e.text = leaf.path + " " + std::string(ToString(*leaf.datatype));
  if (leaf.unit) e.text += " " + *leaf.unit;
  if (leaf.description) e.text += " " + *leaf.description;
  return e;
}

// A CAN message is one entry carrying a physical (real) value. Bounds are
// only meaningful when the message has a single signal.
CatalogEntry EntryFor(const CanMessage& message) {
  CatalogEntry e;
  e.key = message.name;
  e.protocol = Protocol::kCan;
  e.datatype = DataType::kFloat;
  e.text = message.name + " " + HexFrameId(message.frame_id) + " float";
  for (const auto& s : message.signals) {
    e.text += " " + s.name;
    if (s.unit) e.text += " " + *s.unit;
  }
  if (message.signals.size() == 1) {
    e.min = message.signals[0].min;
    e.max = message.signals[0].max;
    e.unit = message.signals[0].unit;
  }
  return e;
}

}  // namespace

std::string_view ToString(SignalKind kind) {
  switch (kind) {
    case SignalKind::kSensor: return "sensor";
    case SignalKind::kActuator: return "actuator";
    case SignalKind::kAttribute: return "attribute";
    case SignalKind::kBranch: return "branch";
  }
  return "?";
}

std::string_view ToString(DataType type) {
  switch (type) {
    case DataType::kBoolean: return "boolean";
    case DataType::kInt: return "int";
    case DataType::kFloat: return "float";
    case DataType::kString: return "string";
    case DataType::kEnum: return "enum";
  }
  return "?";
}

std::string_view ToString(Protocol protocol) {
  return protocol == Protocol::kVss ? "VSS" : "CAN";
}

std::string_view ToString(Violation v) {
  switch (v) {
    case Violation::kNone: return "ok";
    case Violation::kTypeMismatch: return "type-mismatch";
    case Violation::kBelowMin: return "below-min";
    case Violation::kAboveMax: return "above-max";
    case Violation::kNotAllowed: return "not-allowed";
  }
  return "?";
}

std::optional<DataType> ParseDataType(std::string_view name) {
  const std::string n = text::ToLower(text::Trim(name));
  if (n == "boolean" || n == "bool") return DataType::kBoolean;
  if (n == "int" || n == "integer" || n == "int8" || n == "int16" || n == "int32" ||
      n == "int64" || n == "uint8" || n == "uint16" || n == "uint32" ||
      n == "uint64" || n == "long") {
    return DataType::kInt;
  }
  if (n == "float" || n == "double" || n == "real" || n == "number") {
    return DataType::kFloat;
  }
  if (n == "string" || n == "str" || n == "text") return DataType::kString;
  if (n == "enum" || n == "enumeration") return DataType::kEnum;
  return std::nullopt;
}

std::optional<Protocol> ParseProtocol(std::string_view name) {
  const std::string n = text::NormalizeName(name);
  if (n == "vss") return Protocol::kVss;
  if (n == "can" || n == "can-fd" || n == "canfd") return Protocol::kCan;
  return std::nullopt;
}

SignalCatalog::SignalCatalog(std::vector<VssSignal> nodes) : nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const VssSignal& n = nodes_[i];
    if (n.path.empty()) throw SchemaError("signal with empty path");
    if (!node_index_.emplace(n.path, i).second) {
      throw CatalogError("duplicate path '" + n.path + "'");
    }
    const std::string where = "signal '" + n.path + "'";
    if (n.is_branch()) {
      if (n.datatype) throw SchemaError(where + ": branch must not carry a datatype");
      continue;
    }
    if (!n.datatype) throw SchemaError(where + ": leaf is missing 'datatype'");
    CheckBounds(n.min, n.max, where);
    if ((n.min || n.max) && *n.datatype != DataType::kInt &&
        *n.datatype != DataType::kFloat) {
      throw SchemaError(where + ": min/max require a numeric datatype");
    }
    if (*n.datatype == DataType::kEnum && n.allowed.empty()) {
      throw SchemaError(where + ": enum datatype requires a non-empty 'allowed' list");
    }
    if (!n.allowed.empty() && *n.datatype != DataType::kEnum) {
      throw SchemaError(where + ": 'allowed' is only valid for enum signals");
    }
    entry_index_.emplace(n.path, entries_.size());
    entries_.push_back(EntryFor(n));
  }
}

const VssSignal* SignalCatalog::FindNode(std::string_view path) const {
  auto it = node_index_.find(path);
  return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

bool SignalCatalog::HasBranch(std::string_view path) const {
  const VssSignal* n = FindNode(path);
  return n != nullptr && n->is_branch();
}

MessageCatalog::MessageCatalog(std::vector<CanMessage> messages)
    : messages_(std::move(messages)) {
  for (std::size_t i = 0; i < messages_.size(); ++i) {
    const CanMessage& m = messages_[i];
    const std::string where = "message '" + m.name + "'";
    if (m.name.empty()) throw SchemaError("CAN message with empty name");
    if (m.frame_id > kMaxFrameId) throw SchemaError(where + ": frame_id out of 29-bit range");
    if (m.dlc < 0 || m.dlc > kMaxDlc) {
      throw SchemaError(where + ": dlc " + std::to_string(m.dlc) + " outside 0-64");
    }
    if (!by_name_.emplace(m.name, i).second) {
      throw CatalogError("duplicate message name '" + m.name + "'");
    }
    if (!by_id_.emplace(m.frame_id, i).second) {
      throw CatalogError("duplicate frame_id " + HexFrameId(m.frame_id) + " ('" +
                         m.name + "')");
    }
    std::set<std::string> signal_names;
    for (const CanSignal& s : m.signals) {
      const std::string swhere = where + " signal '" + s.name + "'";
      if (s.name.empty()) throw SchemaError(where + ": signal with empty name");
      if (!signal_names.insert(s.name).second) {
        throw SchemaError(swhere + ": duplicate signal name");
      }
      if (s.bit_length < 1) throw SchemaError(swhere + ": bit_length must be >= 1");
      if (s.start_bit < 0) throw SchemaError(swhere + ": start_bit must be >= 0");
      if (s.scale == 0.0) throw SchemaError(swhere + ": scale must be non-zero");
      const long long end = static_cast<long long>(s.start_bit) + s.bit_length;
      if (end > static_cast<long long>(m.dlc) * 8) {
        throw SchemaError(swhere + ": bits " + std::to_string(s.start_bit) + ".." +
                          std::to_string(end) + " exceed payload of " +
                          std::to_string(m.dlc * 8) + " bits");
      }
      CheckBounds(s.min, s.max, swhere);
    }
    entries_.push_back(EntryFor(m));
  }
}

const CanMessage* MessageCatalog::FindByName(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &messages_[it->second];
}

const CanMessage* MessageCatalog::FindByFrameId(std::uint32_t frame_id) const {
  auto it = by_id_.find(frame_id);
  return it == by_id_.end() ? nullptr : &messages_[it->second];
}

SignalCatalog ParseVssCatalog(std::string_view text) {
  const Json root = ParseJsonStrict(text);
  if (!root.is_object()) throw SchemaError("VSS catalog root must be an object");
  std::vector<VssSignal> nodes;
  for (const auto& [name, node] : root.items()) {
    if (name.empty()) throw SchemaError("top-level node with empty name");
    WalkNode(node, name, nodes);
  }
  return SignalCatalog(std::move(nodes));
}

MessageCatalog ParseCanCatalog(std::string_view text) {
  const Json root = ParseJsonStrict(text);
  if (!root.is_array()) throw SchemaError("CAN catalog root must be an array");
  std::vector<CanMessage> messages;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const Json& node = root[i];
    std::string where = "message #" + std::to_string(i);
    if (!node.is_object()) throw SchemaError(where + " must be an object");
    CanMessage m;
    auto name = OptionalString(node, "name", where);
    if (!name || name->empty()) throw SchemaError(where + ": missing 'name'");
    m.name = *name;
    where = "message '" + m.name + "'";
    if (!node.contains("frame_id")) throw SchemaError(where + ": missing 'frame_id'");
    m.frame_id = ParseFrameId(node["frame_id"], where);
    m.dlc = RequiredInt(node, "dlc", where);
    if (node.contains("signals")) {
      if (!node["signals"].is_array()) {
        throw SchemaError(where + ": 'signals' must be an array");
      }
      for (const Json& sn : node["signals"]) {
        if (!sn.is_object()) throw SchemaError(where + ": signal must be an object");
        CanSignal s;
        auto sname = OptionalString(sn, "name", where);
        if (!sname || sname->empty()) throw SchemaError(where + ": signal missing 'name'");
        s.name = *sname;
        const std::string swhere = where + " signal '" + s.name + "'";
        s.start_bit = RequiredInt(sn, "start_bit", swhere);
        s.bit_length = RequiredInt(sn, "bit_length", swhere);
        s.scale = NumberOr(sn, "scale", 1.0, swhere);
        s.offset = NumberOr(sn, "offset", 0.0, swhere);
        s.min = OptionalNumber(sn, "min", swhere);
        s.max = OptionalNumber(sn, "max", swhere);
        s.unit = OptionalString(sn, "unit", swhere);
        m.signals.push_back(std::move(s));
      }
    }
    messages.push_back(std::move(m));
  }
  return MessageCatalog(std::move(messages));
}

std::string SerializeVssCatalog(const SignalCatalog& catalog) {
  Json root = Json::object();
  for (const VssSignal& n : catalog.nodes()) {
    // Walk down to the parent's children object; parents precede children
    // in pre-order so every intermediate branch already exists.
    Json* container = &root;
    std::string_view rest = n.path;
    std::string prefix;
    while (true) {
      const std::size_t dot = rest.find('.');
      if (dot == std::string_view::npos) break;
      const std::string segment(rest.substr(0, dot));
      prefix += (prefix.empty() ? "" : ".") + segment;
      const VssSignal* parent = catalog.FindNode(prefix);
      if (parent == nullptr || !parent->is_branch()) {
        // Dotted key with no branch node: keep the remainder as one key.
        break;
      }
      container = &(*container)[segment]["children"];
      rest.remove_prefix(dot + 1);
    }
    Json node = Json::object();
    node["type"] = std::string(ToString(n.kind));
    if (n.is_branch()) {
      if (n.description) node["description"] = *n.description;
      node["children"] = Json::object();
    } else {
      node["datatype"] = std::string(ToString(*n.datatype));
      if (n.unit) node["unit"] = *n.unit;
      if (n.min) node["min"] = *n.min;
      if (n.max) node["max"] = *n.max;
      if (!n.allowed.empty()) node["allowed"] = n.allowed;
      if (n.description) node["description"] = *n.description;
    }
    (*container)[std::string(rest)] = std::move(node);
  }
  return root.dump(2) + "\n";
}

std::string SerializeCanCatalog(const MessageCatalog& catalog) {
  Json root = Json::array();
  for (const CanMessage& m : catalog.messages()) {
    Json node = Json::object();
    node["frame_id"] = HexFrameId(m.frame_id);
    node["name"] = m.name;
    node["dlc"] = m.dlc;
    Json signals = Json::array();
    for (const CanSignal& s : m.signals) {
      Json sn = Json::object();
      sn["name"] = s.name;
      sn["start_bit"] = s.start_bit;
      sn["bit_length"] = s.bit_length;
      sn["scale"] = s.scale;
      sn["offset"] = s.offset;
      if (s.min) sn["min"] = *s.min;
      if (s.max) sn["max"] = *s.max;
      if (s.unit) sn["unit"] = *s.unit;
      signals.push_back(std::move(sn));
    }
    node["signals"] = std::move(signals);
    root.push_back(std::move(node));
  }
  return root.dump(2) + "\n";
}

std::optional<CatalogEntry> Lookup(const SignalCatalog& catalog, std::string_view key) {
  auto it = catalog.entry_index_.find(key);
  if (it == catalog.entry_index_.end()) return std::nullopt;
  return catalog.entries_[it->second];
}

std::optional<CatalogEntry> Lookup(const MessageCatalog& catalog, std::string_view key) {
  const CanMessage* m = catalog.FindByName(key);
  if (m == nullptr) return std::nullopt;
  return catalog.entries()[static_cast<std::size_t>(m - catalog.messages().data())];
}

ValueVerdict ValidateValue(const CatalogEntry& entry, std::string_view raw) {
  const std::string_view value = text::Trim(raw);
  auto mismatch = [&] {
    return ValueVerdict{Violation::kTypeMismatch,
                        "'" + std::string(value) + "' is not a valid " +
                            std::string(ToString(entry.datatype))};
  };
  auto range_check = [&](double v) -> ValueVerdict {
    if (entry.min && v < *entry.min) {
      return {Violation::kBelowMin, std::string(value) + " < min " +
                                        text::FormatReal(*entry.min)};
    }
    if (entry.max && v > *entry.max) {
      return {Violation::kAboveMax, std::string(value) + " > max " +
                                        text::FormatReal(*entry.max)};
    }
    return {};
  };
  switch (entry.datatype) {
    case DataType::kBoolean: {
      const std::string v = text::ToLower(value);
      if (v == "true" || v == "false") return {};
      return mismatch();
    }
    case DataType::kInt: {
      auto v = text::ParseInteger(value);
      if (!v) return mismatch();
      return range_check(static_cast<double>(*v));
    }
    case DataType::kFloat: {
      auto v = text::ParseReal(value);
      if (!v) return mismatch();
      return range_check(*v);
    }
    case DataType::kString:
      return {};
    case DataType::kEnum:
      if (std::find(entry.allowed.begin(), entry.allowed.end(), value) !=
          entry.allowed.end()) {
        return {};
      }
      return {Violation::kNotAllowed,
              "'" + std::string(value) + "' is not an allowed value"};
  }
  return mismatch();
}

}  // namespace sdvguard::catalog
