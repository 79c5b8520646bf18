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

#include "sdvguard/extraction.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::extraction {
namespace {

using Json = nlohmann::json;
using catalog::CatalogEntry;
using catalog::DataType;
using catalog::Protocol;

// End offset (exclusive) of the bracketed value starting at `open`, honoring
// JSON string quoting. npos when unbalanced.
std::size_t MatchBracket(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if (c == ']' || c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<Json> FirstObjectArray(std::string_view s) {
  for (std::size_t open = s.find('['); open != std::string_view::npos;
       open = s.find('[', open + 1)) {
    const std::size_t end = MatchBracket(s, open);
    if (end == std::string_view::npos) continue;
    Json candidate = Json::parse(s.substr(open, end - open), nullptr, false);
    if (candidate.is_discarded() || !candidate.is_array()) continue;
    const bool all_objects = std::all_of(candidate.begin(), candidate.end(),
                                         [](const Json& v) { return v.is_object(); });
    if (all_objects) return candidate;
  }
  return std::nullopt;
}

std::string ValueText(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string DescribeEntry(const CatalogEntry& e) {
  std::string line = "- " + e.key + " [" + std::string(catalog::ToString(e.protocol)) +
                     "] " + std::string(catalog::ToString(e.datatype));
  if (e.unit) line += " unit=" + *e.unit;
  if (e.min || e.max) {
    line += " range=[" + (e.min ? text::FormatReal(*e.min) : std::string("-inf")) + ", " +
            (e.max ? text::FormatReal(*e.max) : std::string("inf")) + "]";
  }
  if (!e.allowed.empty()) {
    line += " allowed=[";
    for (std::size_t i = 0; i < e.allowed.size(); ++i) {
      line += (i ? ", " : "") + e.allowed[i];
    }
    line += "]";
  }
  return line;
}

bool TypesCompatible(DataType declared, DataType catalog_type) {
  if (declared == catalog_type) return true;
  if (catalog_type == DataType::kFloat && declared == DataType::kInt) return true;
  if (catalog_type == DataType::kEnum && declared == DataType::kString) return true;
  return false;
}

struct Resolution {
  enum class Status { kFound, kWrongProtocol, kUnknown } status = Status::kUnknown;
  std::optional<CatalogEntry> entry;
  bool via_alias = false;
  std::string detail;
};

class Resolver {
 public:
  Resolver(const catalog::SignalCatalog& signals, const catalog::MessageCatalog& messages)
      : signals_(signals), messages_(messages) {
    for (const auto& e : signals.entries()) vss_aliases_[text::NormalizeName(e.key)].push_back(e);
    for (const auto& e : messages.entries()) can_aliases_[text::NormalizeName(e.key)].push_back(e);
  }

  Resolution Resolve(const ExtractedEntry& entry) const {
    const bool vss = entry.protocol == Protocol::kVss;
    auto exact_own = vss ? catalog::Lookup(signals_, entry.name)
                         : catalog::Lookup(messages_, entry.name);
    if (exact_own) return {Resolution::Status::kFound, exact_own, false, {}};
    auto exact_other = vss ? catalog::Lookup(messages_, entry.name)
                           : catalog::Lookup(signals_, entry.name);
    if (exact_other) {
      return {Resolution::Status::kWrongProtocol, exact_other, false,
              "'" + entry.name + "' is a " +
                  std::string(catalog::ToString(exact_other->protocol)) + " key"};
    }
    const std::string normalized = text::NormalizeName(entry.name);
    const auto& own = vss ? vss_aliases_ : can_aliases_;
    const auto& other = vss ? can_aliases_ : vss_aliases_;
    if (auto it = own.find(normalized); it != own.end()) {
      if (it->second.size() == 1) return {Resolution::Status::kFound, it->second[0], true, {}};
      return {Resolution::Status::kUnknown, std::nullopt, true,
              "alias '" + normalized + "' is ambiguous"};
    }
    if (auto it = other.find(normalized); it != other.end()) {
      if (it->second.size() == 1) {
        return {Resolution::Status::kWrongProtocol, it->second[0], true,
                "'" + entry.name + "' resolves to " +
                    std::string(catalog::ToString(it->second[0].protocol)) + " key '" +
                    it->second[0].key + "'"};
      }
      return {Resolution::Status::kUnknown, std::nullopt, true,
              "alias '" + normalized + "' is ambiguous"};
    }
    return {Resolution::Status::kUnknown, std::nullopt, false,
            "'" + entry.name + "' is not in the catalogs"};
  }

 private:
  const catalog::SignalCatalog& signals_;
  const catalog::MessageCatalog& messages_;
  std::map<std::string, std::vector<CatalogEntry>> vss_aliases_;
  std::map<std::string, std::vector<CatalogEntry>> can_aliases_;
};

}  // namespace

std::string_view ToString(RejectReason reason) {
  switch (reason) {
    case RejectReason::kUnknownName: return "unknown-name";
    case RejectReason::kTypeMismatch: return "type-mismatch";
    case RejectReason::kValueOutOfRange: return "value-out-of-range";
    case RejectReason::kProtocolMismatch: return "protocol-mismatch";
  }
  return "?";
}

std::vector<ExtractedEntry> ParseExtractionResponse(std::string_view raw) {
  auto array = FirstObjectArray(raw);
  if (!array) {
    throw ExtractionFormatError("completion contains no JSON array of entries",
                                std::string(raw));
  }
  std::vector<ExtractedEntry> out;
  for (std::size_t i = 0; i < array->size(); ++i) {
    const Json& obj = (*array)[i];
    auto fail = [&](const std::string& why) {
      throw ExtractionFormatError("entry #" + std::to_string(i) + ": " + why,
                                  std::string(raw));
    };
    for (const char* field : {"name", "type", "protocol"}) {
      if (!obj.contains(field)) fail(std::string("missing \"") + field + "\"");
      if (!obj[field].is_string()) fail(std::string("\"") + field + "\" must be a string");
    }
    ExtractedEntry e;
    e.name = std::string(text::Trim(obj["name"].get<std::string>()));
    if (e.name.empty()) fail("empty \"name\"");
    e.type = std::string(text::Trim(obj["type"].get<std::string>()));
    auto protocol = catalog::ParseProtocol(obj["protocol"].get<std::string>());
    if (!protocol) fail("unknown protocol '" + obj["protocol"].get<std::string>() + "'");
    e.protocol = *protocol;
    if (obj.contains("value") && !obj["value"].is_null()) e.value = ValueText(obj["value"]);
    out.push_back(std::move(e));
  }
  return out;
}

std::string BuildExtractionPrompt(std::string_view code, const retrieval::Chunk& chunk,
                                  std::string_view feedback) {
  std::string prompt =
      llm::RenderPrompt(llm::TemplateId::kExtractSignals, {{"code", std::string(code)}});
  prompt += "\n\nCandidate catalog entries:\n";
  for (const auto& r : chunk.entries) prompt += DescribeEntry(r.entry) + "\n";
  prompt +=
      "\nAnswer with a JSON array of objects with the fields \"name\", \"type\", "
      "\"value\" and \"protocol\" (VSS or CAN).";
  if (!feedback.empty()) {
    prompt += "\n\nThe validator rejected these entries; correct or drop them:\n";
    prompt += feedback;
  }
  return prompt;
}

std::vector<ExtractedEntry> ExtractEntries(std::string_view code,
                                           const std::vector<retrieval::Chunk>& chunks,
                                           llm::Gateway& gateway, std::string_view feedback) {
  if (text::Trim(code).empty()) throw PreconditionError("no code to analyze");
  if (chunks.empty()) throw PreconditionError("extraction needs at least one chunk");
  std::vector<ExtractedEntry> out;
  for (const auto& chunk : chunks) {
    const std::string completion =
        gateway.Complete(BuildExtractionPrompt(code, chunk, feedback));
    for (auto& e : ParseExtractionResponse(completion)) {
      const bool seen = std::any_of(out.begin(), out.end(), [&](const ExtractedEntry& o) {
        return o.name == e.name && o.protocol == e.protocol && o.value == e.value;
      });
      if (!seen) out.push_back(std::move(e));
    }
  }
  return out;
}

ExtractionReport ValidateEntries(const std::vector<ExtractedEntry>& entries,
                                 const catalog::SignalCatalog& signals,
                                 const catalog::MessageCatalog& messages,
                                 std::string source_digest) {
  ExtractionReport report;
  report.source_digest = std::move(source_digest);
  const Resolver resolver(signals, messages);

  for (const auto& e : entries) {
    const Resolution r = resolver.Resolve(e);
    if (r.status == Resolution::Status::kUnknown) {
      report.rejected.push_back({e, RejectReason::kUnknownName, r.detail});
      continue;
    }
    if (r.status == Resolution::Status::kWrongProtocol) {
      report.rejected.push_back({e, RejectReason::kProtocolMismatch, r.detail});
      continue;
    }
    const CatalogEntry& ce = *r.entry;
    if (!e.type.empty()) {
      auto declared = catalog::ParseDataType(e.type);
      if (!declared || !TypesCompatible(*declared, ce.datatype)) {
        report.rejected.push_back(
            {e, RejectReason::kTypeMismatch,
             "declared type '" + e.type + "' does not match catalog type " +
                 std::string(catalog::ToString(ce.datatype))});
        continue;
      }
    }
    if (e.value) {
      const catalog::ValueVerdict verdict = catalog::ValidateValue(ce, *e.value);
      if (verdict.violation == catalog::Violation::kTypeMismatch) {
        report.rejected.push_back({e, RejectReason::kTypeMismatch, verdict.detail});
        continue;
      }
      if (!verdict.ok()) {
        report.rejected.push_back({e, RejectReason::kValueOutOfRange,
                                   std::string(catalog::ToString(verdict.violation)) +
                                       ": " + verdict.detail});
        continue;
      }
    }
    report.accepted.push_back({e, ce.key, r.via_alias});
  }

  std::map<std::pair<std::string, Protocol>, std::set<std::string>> values;
  for (const auto& a : report.accepted) {
    values[{a.resolved_key, a.entry.protocol}].insert(a.entry.value.value_or("<none>"));
  }
  for (const auto& [key, vals] : values) {
    if (vals.size() < 2) continue;
    std::string note = "conflicting values for " + key.first + ":";
    for (const auto& v : vals) note += " " + v;
    report.notes.push_back(std::move(note));
  }
  return report;
}

std::string DescribeRejections(const ExtractionReport& report) {
  std::string out;
  for (const auto& r : report.rejected) {
    out += "- " + r.entry.name + " (" + std::string(catalog::ToString(r.entry.protocol)) +
           "): " + std::string(ToString(r.reason));
    if (!r.detail.empty()) out += " - " + r.detail;
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json ToJson(const ExtractedEntry& entry) {
  nlohmann::ordered_json j;
  j["name"] = entry.name;
  j["type"] = entry.type;
  j["value"] = entry.value ? nlohmann::ordered_json(*entry.value) : nullptr;
  j["protocol"] = std::string(catalog::ToString(entry.protocol));
  return j;
}

nlohmann::ordered_json ToJson(const ExtractionReport& report) {
  nlohmann::ordered_json j;
  j["source_digest"] = report.source_digest;
  j["accepted"] = nlohmann::ordered_json::array();
  for (const auto& a : report.accepted) {
    auto item = ToJson(a.entry);
    item["resolved_key"] = a.resolved_key;
    item["via_alias"] = a.via_alias;
    j["accepted"].push_back(std::move(item));
  }
  j["rejected"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rejected) {
    auto item = ToJson(r.entry);
    item["reason"] = std::string(ToString(r.reason));
    item["detail"] = r.detail;
    j["rejected"].push_back(std::move(item));
  }
  j["notes"] = report.notes;
  return j;
}

}  // namespace sdvguard::extraction
