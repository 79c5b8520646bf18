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

// Ground-truth stores for VSS signals and CAN messages.
//
// A SignalCatalog holds every node of a VSS tree (branches included, for path
// validation); a MessageCatalog holds CAN messages keyed by name and frame id.
// Both flatten to CatalogEntry records, one per VSS leaf and one per CAN
// message, which is what retrieval indexes and extraction validates against.
// Catalogs are immutable once parsed.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sdvguard::catalog {

enum class SignalKind { kSensor, kActuator, kAttribute, kBranch };
enum class DataType { kBoolean, kInt, kFloat, kString, kEnum };
enum class Protocol { kVss, kCan };

std::string_view ToString(SignalKind kind);
std::string_view ToString(DataType type);
std::string_view ToString(Protocol protocol);

// Maps VSS and C-ish spellings (uint8, double, bool, ...) onto DataType.
std::optional<DataType> ParseDataType(std::string_view name);
std::optional<Protocol> ParseProtocol(std::string_view name);

struct VssSignal {
  std::string path;
  SignalKind kind = SignalKind::kSensor;
  std::optional<DataType> datatype;  // absent only for branches
  std::optional<std::string> unit;
  std::optional<double> min;
  std::optional<double> max;
  std::vector<std::string> allowed;
  std::optional<std::string> description;

  bool is_branch() const { return kind == SignalKind::kBranch; }
  bool operator==(const VssSignal&) const = default;
};

struct CanSignal {
  std::string name;
  int start_bit = 0;
  int bit_length = 1;
  double scale = 1.0;
  double offset = 0.0;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<std::string> unit;

  bool operator==(const CanSignal&) const = default;
};

inline constexpr std::uint32_t kMaxFrameId = 0x1FFFFFFF;
inline constexpr int kMaxDlc = 64;

struct CanMessage {
  std::uint32_t frame_id = 0;
  std::string name;
  int dlc = 8;
  std::vector<CanSignal> signals;

  bool operator==(const CanMessage&) const = default;
};

struct CatalogEntry {
  std::string key;
  Protocol protocol = Protocol::kVss;
  DataType datatype = DataType::kFloat;
  std::string text;
  std::optional<double> min;
  std::optional<double> max;
  std::vector<std::string> allowed;
  std::optional<std::string> unit;

  bool operator==(const CatalogEntry&) const = default;
};

class SignalCatalog {
 public:
  SignalCatalog() = default;
  // Nodes in document pre-order. Throws CatalogError on duplicate paths and
  // SchemaError on any VssSignal invariant violation.
  explicit SignalCatalog(std::vector<VssSignal> nodes);

  const std::vector<VssSignal>& nodes() const { return nodes_; }
  const std::vector<CatalogEntry>& entries() const { return entries_; }
  std::size_t leaf_count() const { return entries_.size(); }

  const VssSignal* FindNode(std::string_view path) const;
  bool HasBranch(std::string_view path) const;

  bool operator==(const SignalCatalog& other) const { return nodes_ == other.nodes_; }

 private:
  std::vector<VssSignal> nodes_;
  std::vector<CatalogEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> node_index_;
  std::map<std::string, std::size_t, std::less<>> entry_index_;

  friend std::optional<CatalogEntry> Lookup(const SignalCatalog&, std::string_view);
};

class MessageCatalog {
 public:
  MessageCatalog() = default;
  explicit MessageCatalog(std::vector<CanMessage> messages);

  const std::vector<CanMessage>& messages() const { return messages_; }
  const std::vector<CatalogEntry>& entries() const { return entries_; }

  const CanMessage* FindByName(std::string_view name) const;
  const CanMessage* FindByFrameId(std::uint32_t frame_id) const;

  bool operator==(const MessageCatalog& other) const {
    return messages_ == other.messages_;
  }

 private:
  std::vector<CanMessage> messages_;
  std::vector<CatalogEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::map<std::uint32_t, std::size_t> by_id_;
};

// VSS tree document (JSON). Branch nodes either carry `children` or, in the
// compact form, are plain objects whose members are the children.
SignalCatalog ParseVssCatalog(std::string_view text);

// JSON array of message objects; frame_id may be a number or a "0x.." string.
MessageCatalog ParseCanCatalog(std::string_view text);

std::string SerializeVssCatalog(const SignalCatalog& catalog);
std::string SerializeCanCatalog(const MessageCatalog& catalog);

// Exact, case-sensitive. Branch paths are never entries.
std::optional<CatalogEntry> Lookup(const SignalCatalog& catalog, std::string_view key);
std::optional<CatalogEntry> Lookup(const MessageCatalog& catalog, std::string_view key);

enum class Violation { kNone, kTypeMismatch, kBelowMin, kAboveMax, kNotAllowed };
std::string_view ToString(Violation v);

struct ValueVerdict {
  Violation violation = Violation::kNone;
  std::string detail;

  bool ok() const { return violation == Violation::kNone; }
};

// Bounds are inclusive on both sides.
ValueVerdict ValidateValue(const CatalogEntry& entry, std::string_view value);

}  // namespace sdvguard::catalog
