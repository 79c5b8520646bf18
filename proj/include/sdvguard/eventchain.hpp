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

// Event chains as PlantUML activity diagrams.
//
// Supported subset (anything else is a parse error):
//
//   @startuml / @enduml          delimiters
//   start, stop, end             terminals (`end` is a stop)
//   [#color]:label;              action; the label may span lines
//   if (cond) then (yes)         decision; guards default to yes / no
//   else [(no)]
//   endif | end if
//   note right|left: key=value   attaches one note field to the last action
//   note right|left ... end note block form, one key=value per line
//   ' comment
//
// Note keys are input, input_format, output, output_format.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sdvguard/extraction.hpp"
#include "sdvguard/llm_gateway.hpp"

namespace sdvguard::chain {

enum class NodeKind { kStart, kStop, kAction, kDecision, kMerge };
std::string_view ToString(NodeKind kind);

struct Notes {
  std::optional<std::string> input;
  std::optional<std::string> input_format;
  std::optional<std::string> output;
  std::optional<std::string> output_format;

  bool operator==(const Notes&) const = default;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::kAction;
  std::string label;
  std::optional<Notes> notes;

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::string from;
  std::string to;
  std::optional<std::string> guard;

  bool operator==(const Edge&) const = default;
};

struct ActivityGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  const Node* Find(std::string_view id) const;
  bool operator==(const ActivityGraph&) const = default;
};

// Throws StructureError listing offending node ids.
void ValidateGraph(const ActivityGraph& graph);

ActivityGraph ParseActivityDiagram(std::string_view text);

struct ChainMetadata {
  std::string source_digest;
  std::string prompt_digest;

  bool operator==(const ChainMetadata&) const = default;
};

struct ChainDocument {
  ActivityGraph graph;
  std::map<std::string, std::string> events;  // action node id -> event name
  ChainMetadata metadata;

  bool operator==(const ChainDocument&) const = default;
};

std::string NormalizeEvent(std::string_view label);

ChainDocument ToChainDocument(const ActivityGraph& graph, ChainMetadata metadata = {});

nlohmann::ordered_json ToJson(const ChainDocument& document);
std::string SerializeChain(const ChainDocument& document);
ChainDocument ParseChainDocument(std::string_view json);

struct EventOccurrence {
  std::size_t position = 0;
  std::string event;
  std::string node_id;

  bool operator==(const EventOccurrence&) const = default;
};

using EventSequence = std::vector<EventOccurrence>;

std::vector<std::string> Events(const EventSequence& sequence);

// Every maximal start->stop path, edges explored in declaration order.
// Throws UnsupportedStructureError on a cycle or when the path count exceeds
// `max_paths`.
std::vector<EventSequence> EnumeratePaths(const ChainDocument& document,
                                          std::size_t max_paths = 1'000'000);

inline constexpr std::string_view kEmptyDiagram = "@startuml\n@enduml";

std::string BuildChainPrompt(std::string_view code, std::string_view current_chain,
                             const std::vector<extraction::AcceptedEntry>& relevant);

struct GeneratedChain {
  std::string plantuml;
  std::string prompt_digest;
};

// Renders PC2, extracts the @startuml block from the completion and checks
// it parses. Throws ChainGenerationError with the raw text otherwise.
GeneratedChain GenerateChain(std::string_view code, std::string_view current_chain,
                             const std::vector<extraction::AcceptedEntry>& relevant,
                             llm::Gateway& gateway);

}  // namespace sdvguard::chain
