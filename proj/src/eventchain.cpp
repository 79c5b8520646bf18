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

#include "sdvguard/eventchain.hpp"

#include <algorithm>
#include <functional>
#include <regex>
#include <set>

#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::chain {
namespace {

using Json = nlohmann::ordered_json;

struct Exit {
  std::string from;
  std::optional<std::string> guard;
};

struct IfFrame {
  std::string decision;
  std::size_t line = 0;
  std::string no_guard = "no";
  bool has_else = false;
  std::vector<Exit> then_exits;
};

bool SetNote(Notes& notes, std::string_view key, std::string value) {
  std::optional<std::string>* slot = nullptr;
  if (key == "input") slot = &notes.input;
  else if (key == "input_format") slot = &notes.input_format;
  else if (key == "output") slot = &notes.output;
  else if (key == "output_format") slot = &notes.output_format;
  if (slot == nullptr) return false;
  *slot = std::move(value);
  return true;
}

class DiagramParser {
 public:
  explicit DiagramParser(std::string_view text) : lines_(text::SplitLines(text)) {}

  ActivityGraph Parse() {
    std::size_t i = 0;
    while (i < lines_.size() && Blank(lines_[i])) ++i;
    if (i == lines_.size() || !text::StartsWith(text::Trim(lines_[i]), "@startuml")) {
      throw ParseError("diagram must begin with @startuml", i < lines_.size() ? i + 1 : 0);
    }
    bool closed = false;
    for (++i; i < lines_.size(); ++i) {
      line_no_ = i + 1;
      const std::string line(text::Trim(lines_[i]));
      if (closed) {
        if (!line.empty()) throw ParseError("content after @enduml", line_no_);
        continue;
      }
      if (line.empty() || line[0] == '\'') continue;
      if (line == "@enduml") {
        closed = true;
        continue;
      }
      i = Statement(line, i);
    }
    if (!closed) throw ParseError("missing @enduml", lines_.size());
    if (!frames_.empty()) {
      throw ParseError("unbalanced if: missing endif", frames_.back().line);
    }
    if (in_note_block_) throw ParseError("unterminated note block", note_block_line_);
    std::size_t starts = 0;
    for (const auto& n : graph_.nodes) starts += n.kind == NodeKind::kStart;
    if (starts == 0) throw StructureError("diagram has no start", {});
    ValidateGraph(graph_);
    return std::move(graph_);
  }

 private:
  static bool Blank(const std::string& s) { return text::Trim(s).empty(); }

  std::string AddNode(NodeKind kind, std::string label) {
    Node node;
    node.id = "n" + std::to_string(graph_.nodes.size());
    node.kind = kind;
    node.label = std::move(label);
    for (auto& exit : pending_) graph_.edges.push_back({exit.from, node.id, exit.guard});
    pending_ = {{node.id, std::nullopt}};
    graph_.nodes.push_back(std::move(node));
    last_action_ = kind == NodeKind::kAction ? graph_.nodes.size() - 1 : npos;
    return graph_.nodes.back().id;
  }

  void AttachNote(std::string_view body) {
    if (last_action_ == npos) throw ParseError("note is not attached to an action", line_no_);
    body = text::Trim(body);
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("note must be key=value", line_no_);
    }
    const std::string key(text::Trim(body.substr(0, eq)));
    std::string value(text::Trim(body.substr(eq + 1)));
    Node& action = graph_.nodes[last_action_];
    if (!action.notes) action.notes = Notes{};
    if (!SetNote(*action.notes, key, std::move(value))) {
      throw ParseError("unknown note key '" + key + "'", line_no_);
    }
  }

  // Returns the index of the last line consumed.
  std::size_t Statement(const std::string& line, std::size_t index) {
    static const std::regex kIf(R"(^if\s*\((.*)\)\s*then\s*(?:\((.*)\))?$)");
    static const std::regex kElse(R"(^else\s*(?:\((.*)\))?$)");
    static const std::regex kNoteInline(R"(^note\s+(?:left|right)\s*:(.*)$)");
    static const std::regex kNoteBlock(R"(^note\s+(?:left|right)$)");
    std::smatch m;

    if (in_note_block_) {
      if (line == "end note" || line == "endnote") {
        in_note_block_ = false;
      } else {
        AttachNote(line);
      }
      return index;
    }
    if (line == "start") {
      if (has_start_) throw StructureError("diagram has more than one start", {});
      has_start_ = true;
      AddNode(NodeKind::kStart, "start");
      return index;
    }
    if (line == "stop" || line == "end") {
      AddNode(NodeKind::kStop, line);
      pending_.clear();
      return index;
    }
    if (line[0] == ':' || (line[0] == '#' && line.find(':') != std::string::npos)) {
      return Action(line, index);
    }
    if (std::regex_match(line, m, kIf)) {
      IfFrame frame;
      frame.line = line_no_;
      const std::string yes = m[2].matched ? std::string(text::Trim(m[2].str())) : "yes";
      frame.decision = AddNode(NodeKind::kDecision, std::string(text::Trim(m[1].str())));
      last_action_ = npos;
      pending_ = {{frame.decision, yes}};
      frames_.push_back(std::move(frame));
      return index;
    }
    if (std::regex_match(line, m, kElse)) {
      if (frames_.empty()) throw ParseError("else without if", line_no_);
      IfFrame& frame = frames_.back();
      if (frame.has_else) throw ParseError("duplicate else", line_no_);
      frame.has_else = true;
      if (m[1].matched) frame.no_guard = std::string(text::Trim(m[1].str()));
      frame.then_exits = std::move(pending_);
      pending_ = {{frame.decision, frame.no_guard}};
      last_action_ = npos;
      return index;
    }
    if (line == "endif" || line == "end if") {
      if (frames_.empty()) throw ParseError("endif without if", line_no_);
      IfFrame frame = std::move(frames_.back());
      frames_.pop_back();
      std::vector<Exit> exits;
      if (frame.has_else) {
        exits = std::move(frame.then_exits);
        exits.insert(exits.end(), pending_.begin(), pending_.end());
      } else {
        exits = std::move(pending_);
        exits.push_back({frame.decision, "else"});
      }
      pending_ = std::move(exits);
      if (pending_.empty()) {
        last_action_ = npos;
      } else {
        AddNode(NodeKind::kMerge, "");
      }
      return index;
    }
    if (std::regex_match(line, m, kNoteInline)) {
      AttachNote(m[1].str());
      return index;
    }
    if (std::regex_match(line, m, kNoteBlock)) {
      if (last_action_ == npos) {
        throw ParseError("note is not attached to an action", line_no_);
      }
      in_note_block_ = true;
      note_block_line_ = line_no_;
      return index;
    }
    throw ParseError("unsupported directive '" + line + "'", line_no_);
  }

  std::size_t Action(const std::string& first, std::size_t index) {
    std::string body = first;
    if (body[0] == '#') body = body.substr(body.find(':'));
    body = body.substr(1);
    const std::size_t start_line = line_no_;
    std::size_t i = index;
    while (body.empty() || body.back() != ';') {
      if (++i >= lines_.size()) throw ParseError("unterminated action label", start_line);
      const std::string next(text::Trim(lines_[i]));
      if (next == "@enduml") throw ParseError("unterminated action label", start_line);
      body += " " + next;
      line_no_ = i + 1;
    }
    body.pop_back();
    AddNode(NodeKind::kAction, std::string(text::Trim(body)));
    return i;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<std::string> lines_;
  std::size_t line_no_ = 0;
  ActivityGraph graph_;
  std::vector<Exit> pending_;
  std::vector<IfFrame> frames_;
  std::size_t last_action_ = npos;
  bool has_start_ = false;
  bool in_note_block_ = false;
  std::size_t note_block_line_ = 0;
};

NodeKind ParseKind(const std::string& s) {
  if (s == "start") return NodeKind::kStart;
  if (s == "stop") return NodeKind::kStop;
  if (s == "action") return NodeKind::kAction;
  if (s == "decision") return NodeKind::kDecision;
  if (s == "merge") return NodeKind::kMerge;
  throw SchemaError("unknown node kind '" + s + "'");
}

std::optional<std::string> OptionalField(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) throw SchemaError(std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

std::string RequiredField(const Json& j, const char* key, const std::string& where) {
  auto v = OptionalField(j, key);
  if (!v) throw SchemaError(where + ": missing '" + key + "'");
  return *v;
}

}  // namespace

std::string_view ToString(NodeKind kind) {
  switch (kind) {
    case NodeKind::kStart: return "start";
    case NodeKind::kStop: return "stop";
    case NodeKind::kAction: return "action";
    case NodeKind::kDecision: return "decision";
    case NodeKind::kMerge: return "merge";
  }
  return "?";
}

const Node* ActivityGraph::Find(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

void ValidateGraph(const ActivityGraph& graph) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!index.emplace(graph.nodes[i].id, i).second) {
      throw StructureError("duplicate node id", {graph.nodes[i].id});
    }
  }
  std::vector<std::vector<std::size_t>> out(graph.nodes.size()), in(graph.nodes.size());
  std::vector<std::vector<std::optional<std::string>>> guards(graph.nodes.size());
  for (const auto& e : graph.edges) {
    auto from = index.find(e.from);
    auto to = index.find(e.to);
    if (from == index.end() || to == index.end()) {
      throw StructureError("edge references an unknown node",
                           {from == index.end() ? e.from : e.to});
    }
    out[from->second].push_back(to->second);
    in[to->second].push_back(from->second);
    guards[from->second].push_back(e.guard);
  }

  std::vector<std::string> starts, stops;
  for (const auto& n : graph.nodes) {
    if (n.kind == NodeKind::kStart) starts.push_back(n.id);
    if (n.kind == NodeKind::kStop) stops.push_back(n.id);
  }
  if (starts.size() != 1) {
    throw StructureError(starts.empty() ? "graph has no start node"
                                        : "graph has more than one start node",
                         starts);
  }
  if (stops.empty()) throw StructureError("graph has no stop node", {});

  std::vector<std::string> bad;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const Node& n = graph.nodes[i];
    if (n.kind == NodeKind::kAction && out[i].size() != 1) bad.push_back(n.id);
    if (n.kind == NodeKind::kStop && !out[i].empty()) bad.push_back(n.id);
  }
  if (!bad.empty()) {
    throw StructureError("action nodes need exactly one outgoing edge and stop nodes none",
                         bad);
  }
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.nodes[i].kind != NodeKind::kDecision) continue;
    std::set<std::string> distinct;
    bool ok = out[i].size() >= 2;
    for (const auto& g : guards[i]) ok = ok && g && distinct.insert(*g).second;
    if (!ok) bad.push_back(graph.nodes[i].id);
  }
  if (!bad.empty()) {
    throw StructureError("decision nodes need two or more outgoing edges with distinct guards",
                         bad);
  }

  auto reach = [&](std::vector<std::size_t> frontier,
                   const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<bool> seen(graph.nodes.size(), false);
    for (auto f : frontier) seen[f] = true;
    while (!frontier.empty()) {
      const std::size_t v = frontier.back();
      frontier.pop_back();
      for (auto w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          frontier.push_back(w);
        }
      }
    }
    return seen;
  };
  const auto from_start = reach({index[starts[0]]}, out);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!from_start[i]) bad.push_back(graph.nodes[i].id);
  }
  if (!bad.empty()) throw StructureError("nodes unreachable from start", bad);
  std::vector<std::size_t> stop_idx;
  for (const auto& s : stops) stop_idx.push_back(index[s]);
  const auto to_stop = reach(stop_idx, in);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!to_stop[i]) bad.push_back(graph.nodes[i].id);
  }
  if (!bad.empty()) throw StructureError("nodes that cannot reach a stop", bad);
}

ActivityGraph ParseActivityDiagram(std::string_view text) {
  return DiagramParser(text).Parse();
}

std::string NormalizeEvent(std::string_view label) { return text::NormalizeName(label); }

ChainDocument ToChainDocument(const ActivityGraph& graph, ChainMetadata metadata) {
  ChainDocument doc;
  doc.graph = graph;
  doc.metadata = std::move(metadata);
  for (const auto& n : graph.nodes) {
    if (n.kind != NodeKind::kAction) continue;
    std::string event = NormalizeEvent(n.label);
    if (event.empty()) {
      throw TransformError("action " + n.id + " has an empty label");
    }
    doc.events.emplace(n.id, std::move(event));
  }
  return doc;
}

Json ToJson(const ChainDocument& document) {
  Json j;
  j["nodes"] = Json::array();
  for (const auto& n : document.graph.nodes) {
    Json node;
    node["id"] = n.id;
    node["kind"] = std::string(ToString(n.kind));
    node["label"] = n.label;
    if (auto it = document.events.find(n.id); it != document.events.end()) {
      node["event"] = it->second;
    }
    if (n.notes) {
      Json notes = Json::object();
      if (n.notes->input) notes["input"] = *n.notes->input;
      if (n.notes->input_format) notes["input_format"] = *n.notes->input_format;
      if (n.notes->output) notes["output"] = *n.notes->output;
      if (n.notes->output_format) notes["output_format"] = *n.notes->output_format;
      node["notes"] = std::move(notes);
    }
    j["nodes"].push_back(std::move(node));
  }
  j["edges"] = Json::array();
  for (const auto& e : document.graph.edges) {
    Json edge;
    edge["from"] = e.from;
    edge["to"] = e.to;
    if (e.guard) edge["guard"] = *e.guard;
    j["edges"].push_back(std::move(edge));
  }
  j["metadata"] = {{"source_digest", document.metadata.source_digest},
                   {"prompt_digest", document.metadata.prompt_digest}};
  return j;
}

std::string SerializeChain(const ChainDocument& document) {
  return ToJson(document).dump(2) + "\n";
}

ChainDocument ParseChainDocument(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    auto [line, column] = text::LineColumn(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("malformed chain document: ") + e.what(), line, column);
  }
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array() ||
      !j.contains("edges") || !j["edges"].is_array()) {
    throw SchemaError("chain document needs 'nodes' and 'edges' arrays");
  }
  ChainDocument doc;
  for (const auto& jn : j["nodes"]) {
    if (!jn.is_object()) throw SchemaError("chain node must be an object");
    Node n;
    n.id = RequiredField(jn, "id", "node");
    n.kind = ParseKind(RequiredField(jn, "kind", "node " + n.id));
    n.label = OptionalField(jn, "label").value_or("");
    if (jn.contains("notes")) {
      if (!jn["notes"].is_object()) throw SchemaError("node " + n.id + ": notes must be an object");
      Notes notes;
      for (const auto& [key, value] : jn["notes"].items()) {
        if (!value.is_string() || !SetNote(notes, key, value.get<std::string>())) {
          throw SchemaError("node " + n.id + ": bad note '" + key + "'");
        }
      }
      n.notes = std::move(notes);
    }
    if (n.kind == NodeKind::kAction) {
      auto event = OptionalField(jn, "event");
      if (!event || event->empty()) {
        throw TransformError("action " + n.id + " has no event name");
      }
      doc.events.emplace(n.id, *event);
    }
    doc.graph.nodes.push_back(std::move(n));
  }
  for (const auto& je : j["edges"]) {
    if (!je.is_object()) throw SchemaError("chain edge must be an object");
    doc.graph.edges.push_back(
        {RequiredField(je, "from", "edge"), RequiredField(je, "to", "edge"),
         OptionalField(je, "guard")});
  }
  if (j.contains("metadata") && j["metadata"].is_object()) {
    doc.metadata.source_digest = OptionalField(j["metadata"], "source_digest").value_or("");
    doc.metadata.prompt_digest = OptionalField(j["metadata"], "prompt_digest").value_or("");
  }
  ValidateGraph(doc.graph);
  return doc;
}

std::vector<std::string> Events(const EventSequence& sequence) {
  std::vector<std::string> out;
  out.reserve(sequence.size());
  for (const auto& o : sequence) out.push_back(o.event);
  return out;
}

std::vector<EventSequence> EnumeratePaths(const ChainDocument& document,
                                          std::size_t max_paths) {
  const auto& nodes = document.graph.nodes;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].id, i);
  std::vector<std::vector<std::size_t>> out(nodes.size());
  for (const auto& e : document.graph.edges) {
    out.at(index.at(e.from)).push_back(index.at(e.to));
  }
  std::size_t start = nodes.size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == NodeKind::kStart) start = i;
  }
  if (start == nodes.size()) throw StructureError("graph has no start node", {});

  // Cycle check first: 0 = unvisited, 1 = on stack, 2 = done.
  std::vector<int> color(nodes.size(), 0);
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    color[v] = 1;
    for (auto w : out[v]) {
      if (color[w] == 1) {
        throw UnsupportedStructureError("cycle through node " + nodes[w].id +
                                            " (loops are not supported)",
                                        nodes[w].id);
      }
      if (color[w] == 0) visit(w);
    }
    color[v] = 2;
  };
  visit(start);

  std::vector<EventSequence> paths;
  EventSequence current;
  std::function<void(std::size_t)> walk = [&](std::size_t v) {
    const Node& n = nodes[v];
    const bool is_action = n.kind == NodeKind::kAction;
    if (is_action) current.push_back({current.size(), document.events.at(n.id), n.id});
    if (n.kind == NodeKind::kStop) {
      if (paths.size() >= max_paths) {
        throw UnsupportedStructureError(
            "more than " + std::to_string(max_paths) + " execution paths", n.id);
      }
      paths.push_back(current);
    }
    for (auto w : out[v]) walk(w);
    if (is_action) current.pop_back();
  };
  walk(start);
  return paths;
}

std::string BuildChainPrompt(std::string_view code, std::string_view current_chain,
                             const std::vector<extraction::AcceptedEntry>& relevant) {
  std::string signals;
  for (const auto& a : relevant) {
    signals += "\n- " + a.resolved_key + " (" +
               std::string(catalog::ToString(a.entry.protocol)) + " " + a.entry.type + ")";
    if (a.entry.value) signals += " value=" + *a.entry.value;
  }
  if (signals.empty()) signals = "(none)";
  const std::string current = text::Trim(current_chain).empty()
                                  ? std::string(kEmptyDiagram)
                                  : std::string(current_chain);
  return llm::RenderPrompt(llm::TemplateId::kUpdateEventChain,
                           {{"current-event-chain", current},
                            {"code", std::string(code)},
                            {"relevant messages/signals", signals}});
}

GeneratedChain GenerateChain(std::string_view code, std::string_view current_chain,
                             const std::vector<extraction::AcceptedEntry>& relevant,
                             llm::Gateway& gateway) {
  const std::string prompt = BuildChainPrompt(code, current_chain, relevant);
  const std::string completion = gateway.Complete(prompt);
  auto block = text::ExtractPlantUmlBlock(completion);
  if (!block) {
    throw ChainGenerationError("generated event chain is unusable", completion,
                               "no @startuml/@enduml block");
  }
  try {
    ToChainDocument(ParseActivityDiagram(*block));
  } catch (const Error& e) {
    throw ChainGenerationError("generated event chain is unusable", completion, e.what());
  }
  return {*block + "\n", llm::PromptDigest(prompt)};
}

}  // namespace sdvguard::chain
