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

// Signal/message extraction: prompt the model over code plus retrieved
// catalog chunks, parse the entry list it returns, and validate each entry
// against the catalogs before anything downstream trusts it.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sdvguard/catalog.hpp"
#include "sdvguard/llm_gateway.hpp"
#include "sdvguard/retrieval.hpp"

namespace sdvguard::extraction {

struct ExtractedEntry {
  std::string name;
  std::string type;
  std::optional<std::string> value;
  catalog::Protocol protocol = catalog::Protocol::kVss;

  bool operator==(const ExtractedEntry&) const = default;
};

enum class RejectReason { kUnknownName, kTypeMismatch, kValueOutOfRange, kProtocolMismatch };
std::string_view ToString(RejectReason reason);

struct AcceptedEntry {
  ExtractedEntry entry;
  std::string resolved_key;
  bool via_alias = false;

  bool operator==(const AcceptedEntry&) const = default;
};

struct RejectedEntry {
  ExtractedEntry entry;
  RejectReason reason = RejectReason::kUnknownName;
  std::string detail;

  bool operator==(const RejectedEntry&) const = default;
};

struct ExtractionReport {
  std::vector<AcceptedEntry> accepted;
  std::vector<RejectedEntry> rejected;
  std::string source_digest;
  std::vector<std::string> notes;

  bool operator==(const ExtractionReport&) const = default;
};

// First well-formed JSON array of objects anywhere in the text (code fences
// and surrounding prose are fine). Throws ExtractionFormatError if there is
// none, or if an object lacks name/type/protocol.
std::vector<ExtractedEntry> ParseExtractionResponse(std::string_view text);

// PC1 followed by the chunk's catalog context and the answer format. When
// `feedback` is non-empty it is appended as a correction request.
std::string BuildExtractionPrompt(std::string_view code, const retrieval::Chunk& chunk,
                                  std::string_view feedback = {});

// One completion per chunk; results unioned. An entry repeating an earlier
// (name, protocol, value) is dropped; a differing value is kept.
std::vector<ExtractedEntry> ExtractEntries(std::string_view code,
                                           const std::vector<retrieval::Chunk>& chunks,
                                           llm::Gateway& gateway,
                                           std::string_view feedback = {});

// Exact key first, then normalized alias (lowercase, non-alphanumerics to
// hyphens). Ambiguous aliases reject as unknown-name.
ExtractionReport ValidateEntries(const std::vector<ExtractedEntry>& entries,
                                 const catalog::SignalCatalog& signals,
                                 const catalog::MessageCatalog& messages,
                                 std::string source_digest = {});

// Lines describing every rejection, suitable for a retry prompt.
std::string DescribeRejections(const ExtractionReport& report);

nlohmann::ordered_json ToJson(const ExtractedEntry& entry);
nlohmann::ordered_json ToJson(const ExtractionReport& report);

}  // namespace sdvguard::extraction
