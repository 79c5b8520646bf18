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

#include "sdvguard/safety_rules.hpp"

#include <set>

#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::rules {
namespace {

using Json = nlohmann::ordered_json;

struct Token {
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
};

bool IsPunct(char c) { return c == '(' || c == ')' || c == ':' || c == '=' || c == ','; }

std::vector<Token> Lex(std::string_view line, std::size_t line_no, std::size_t offset = 0) {
  std::vector<Token> out;
  std::size_t i = offset;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (IsPunct(c)) {
      out.push_back({std::string(1, c), line_no, i + 1});
      ++i;
    } else {
      const std::size_t begin = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
             !IsPunct(line[i])) {
        ++i;
      }
      out.push_back({std::string(line.substr(begin, i - begin)), line_no, begin + 1});
    }
  }
  return out;
}

bool IsKeyword(const std::string& word) {
  const std::string w = text::ToLower(word);
  return w == "and" || w == "or" || w == "not" || w == "before" || w == "after";
}

class ExprParser {
 public:
  ExprParser(std::vector<Token> tokens, std::size_t end_line, std::size_t end_column)
      : tokens_(std::move(tokens)), end_line_(end_line), end_column_(end_column) {}

  Expr ParseAll() {
    Expr e = ParseOr();
    if (pos_ < tokens_.size()) Fail("unexpected '" + tokens_[pos_].text + "'");
    return e;
  }

 private:
  bool AtWord(std::string_view kw) const {
    return pos_ < tokens_.size() && text::ToLower(tokens_[pos_].text) == kw;
  }

  [[noreturn]] void Fail(const std::string& message) const {
    if (pos_ < tokens_.size()) {
      throw ParseError(message, tokens_[pos_].line, tokens_[pos_].column);
    }
    throw ParseError(message, end_line_, end_column_);
  }

  Expr ParseOr() {
    Expr node;
    node.kind = Expr::Kind::kOr;
    node.children.push_back(ParseAnd());
    while (AtWord("or")) {
      ++pos_;
      node.children.push_back(ParseAnd());
    }
    return node.children.size() == 1 ? std::move(node.children.front()) : node;
  }

  Expr ParseAnd() {
    Expr node;
    node.kind = Expr::Kind::kAnd;
    node.children.push_back(ParseFactor());
    while (AtWord("and")) {
      ++pos_;
      node.children.push_back(ParseFactor());
    }
    return node.children.size() == 1 ? std::move(node.children.front()) : node;
  }

  Expr ParseFactor() {
    if (AtWord("not")) {
      ++pos_;
      Expr node;
      node.kind = Expr::Kind::kNot;
      node.children.push_back(ParseFactor());
      return node;
    }
    if (AtWord("(")) {
      ++pos_;
      Expr inner = ParseOr();
      if (!AtWord(")")) Fail("expected ')'");
      ++pos_;
      return inner;
    }
    Expr node;
    node.atom.left = ParseEvent();
    if (AtWord("before")) {
      node.atom.op = Op::kBefore;
    } else if (AtWord("after")) {
      node.atom.op = Op::kAfter;
    } else {
      Fail("expected 'before' or 'after'");
    }
    ++pos_;
    node.atom.right = ParseEvent();
    return node;
  }

  std::string ParseEvent() {
    std::string joined;
    while (pos_ < tokens_.size() && !IsPunct(tokens_[pos_].text[0]) &&
           !IsKeyword(tokens_[pos_].text)) {
      if (!joined.empty()) joined += '-';
      joined += tokens_[pos_].text;
      ++pos_;
    }
    const std::string event = text::NormalizeName(joined);
    if (event.empty()) Fail("expected an event name");
    return event;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t end_line_;
  std::size_t end_column_;
};

void CollectAtoms(const Expr& expr, std::vector<const Atom*>& out) {
  if (expr.kind == Expr::Kind::kAtom) {
    out.push_back(&expr.atom);
    return;
  }
  for (const auto& c : expr.children) CollectAtoms(c, out);
}

bool Matches(const std::string& name, const std::string& event, const Aliases& aliases) {
  if (event == name) return true;
  auto it = aliases.find(name);
  if (it == aliases.end()) return false;
  for (const auto& pattern : it->second) {
    if (text::GlobMatch(pattern, event)) return true;
  }
  return false;
}

// every `later` occurrence has a `earlier` occurrence at a smaller position
bool Precedes(const chain::EventSequence& seq, const std::string& earlier,
              const std::string& later, const Aliases& aliases) {
  bool seen_earlier = false;
  for (const auto& occ : seq) {
    if (Matches(later, occ.event, aliases) && !seen_earlier) return false;
    if (Matches(earlier, occ.event, aliases)) seen_earlier = true;
  }
  return true;
}

SafetyRule ParseStanza(const std::vector<std::pair<std::size_t, std::string>>& lines) {
  SafetyRule rule;
  const auto& [first_no, first] = lines.front();
  const std::size_t colon = first.find(':');
  if (colon == std::string::npos) {
    throw ParseError("rule must start with 'name:'", first_no, 1);
  }
  rule.name = std::string(text::Trim(std::string_view(first).substr(0, colon)));
  if (rule.name.empty() ||
      rule.name.find_first_of(" \t()=,") != std::string::npos) {
    throw ParseError("invalid rule name '" + rule.name + "'", first_no, 1);
  }

  std::vector<Token> tokens = Lex(first, first_no, colon + 1);
  std::size_t end_line = first_no;
  std::size_t end_column = first.size() + 1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [no, line] = lines[i];
    auto lexed = Lex(line, no);
    if (!lexed.empty() && text::ToLower(lexed.front().text) == "alias") {
      std::size_t eq = 1;
      while (eq < lexed.size() && lexed[eq].text != "=") ++eq;
      if (eq == lexed.size()) throw ParseError("alias needs '='", no, lexed.front().column);
      std::string joined;
      for (std::size_t k = 1; k < eq; ++k) joined += (k > 1 ? "-" : "") + lexed[k].text;
      const std::string event = text::NormalizeName(joined);
      if (event.empty()) throw ParseError("alias needs an event name", no, lexed[eq].column);
      const std::size_t value_start = lexed[eq].column;  // 1-based column of '='
      std::vector<std::string> patterns;
      std::string_view rest = std::string_view(line).substr(value_start);
      while (!rest.empty()) {
        const std::size_t comma = rest.find(',');
        const std::string pattern = text::ToLower(text::Trim(rest.substr(0, comma)));
        if (pattern.empty()) throw ParseError("empty alias pattern", no, value_start);
        patterns.push_back(pattern);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
        if (text::Trim(rest).empty()) throw ParseError("empty alias pattern", no, line.size());
      }
      if (patterns.empty()) throw ParseError("empty alias pattern", no, value_start);
      auto& slot = rule.aliases[event];
      slot.insert(slot.end(), patterns.begin(), patterns.end());
      continue;
    }
    tokens.insert(tokens.end(), lexed.begin(), lexed.end());
    end_line = no;
    end_column = line.size() + 1;
  }

  if (!tokens.empty()) {
    const std::string w = text::ToLower(tokens.front().text);
    if (w == "require" || w == "forbid") {
      rule.mode = w == "require" ? Mode::kRequire : Mode::kForbid;
      tokens.erase(tokens.begin());
    }
  }
  rule.expr = ExprParser(std::move(tokens), end_line, end_column).ParseAll();
  return rule;
}

}  // namespace

std::string_view ToString(Mode mode) {
  return mode == Mode::kRequire ? "require" : "forbid";
}

RuleSet ParseRules(std::string_view text) {
  RuleSet rules;
  std::set<std::string> names;
  std::vector<std::pair<std::size_t, std::string>> stanza;
  auto flush = [&] {
    if (stanza.empty()) return;
    SafetyRule rule = ParseStanza(stanza);
    if (!names.insert(rule.name).second) {
      throw ParseError("duplicate rule name '" + rule.name + "'", stanza.front().first, 1);
    }
    rules.push_back(std::move(rule));
    stanza.clear();
  };
  const auto lines = text::SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view trimmed = text::Trim(lines[i]);
    if (trimmed.empty()) {
      flush();
    } else if (trimmed.front() != '#') {
      stanza.emplace_back(i + 1, lines[i]);
    }
  }
  flush();
  return rules;
}

std::string ToString(const Atom& atom) {
  return atom.left + (atom.op == Op::kBefore ? " before " : " after ") + atom.right;
}

std::string ToString(const Expr& expr) {
  switch (expr.kind) {
    case Expr::Kind::kAtom:
      return ToString(expr.atom);
    case Expr::Kind::kNot:
      return "not (" + ToString(expr.children.front()) + ")";
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr: {
      const std::string sep = expr.kind == Expr::Kind::kAnd ? " and " : " or ";
      std::string out;
      for (const auto& c : expr.children) {
        if (!out.empty()) out += sep;
        out += "(" + ToString(c) + ")";
      }
      return out;
    }
  }
  return {};
}

bool EvalAtom(const chain::EventSequence& sequence, const Atom& atom, const Aliases& aliases) {
  if (atom.op == Op::kBefore) return Precedes(sequence, atom.left, atom.right, aliases);
  return Precedes(sequence, atom.right, atom.left, aliases);
}

bool EvalExpr(const chain::EventSequence& sequence, const Expr& expr, const Aliases& aliases) {
  switch (expr.kind) {
    case Expr::Kind::kAtom:
      return EvalAtom(sequence, expr.atom, aliases);
    case Expr::Kind::kNot:
      return !EvalExpr(sequence, expr.children.front(), aliases);
    case Expr::Kind::kAnd:
      for (const auto& c : expr.children) {
        if (!EvalExpr(sequence, c, aliases)) return false;
      }
      return true;
    case Expr::Kind::kOr:
      for (const auto& c : expr.children) {
        if (EvalExpr(sequence, c, aliases)) return true;
      }
      return false;
  }
  return false;
}

RuleResult EvalRule(const chain::ChainDocument& document, const SafetyRule& rule) {
  RuleResult result;
  result.name = rule.name;
  result.mode = rule.mode;
  result.expr = ToString(rule.expr);
  const auto paths = chain::EnumeratePaths(document);
  result.paths_checked = paths.size();
  std::vector<const Atom*> atoms;
  CollectAtoms(rule.expr, atoms);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const bool value = EvalExpr(paths[i], rule.expr, rule.aliases);
    const bool ok = rule.mode == Mode::kRequire ? value : !value;
    if (ok) continue;
    Witness w;
    w.path_index = i;
    w.events = chain::Events(paths[i]);
    w.expr_value = value;
    for (const Atom* a : atoms) {
      w.atoms.emplace_back(ToString(*a), EvalAtom(paths[i], *a, rule.aliases));
    }
    result.witnesses.push_back(std::move(w));
  }
  result.passed = result.witnesses.empty();
  return result;
}

bool SafetyReport::passed() const { return violations() == 0; }

std::size_t SafetyReport::violations() const {
  std::size_t n = 0;
  for (const auto& r : rules) n += !r.passed;
  return n;
}

SafetyReport Check(const chain::ChainDocument& document, const RuleSet& rules) {
  SafetyReport report;
  report.chain_digest = text::Sha256Hex(chain::SerializeChain(document));
  for (const auto& rule : rules) report.rules.push_back(EvalRule(document, rule));
  return report;
}

Json ToJson(const SafetyReport& report) {
  Json j;
  j["verdict"] = report.passed() ? "pass" : "violated";
  j["chain_digest"] = report.chain_digest;
  j["rules"] = Json::array();
  for (const auto& r : report.rules) {
    Json jr;
    jr["name"] = r.name;
    jr["mode"] = std::string(ToString(r.mode));
    jr["expr"] = r.expr;
    jr["verdict"] = r.passed ? "pass" : "violated";
    jr["paths_checked"] = r.paths_checked;
    jr["witnesses"] = Json::array();
    for (const auto& w : r.witnesses) {
      Json jw;
      jw["path"] = w.path_index;
      jw["events"] = w.events;
      jw["atoms"] = Json::array();
      for (const auto& [atom, value] : w.atoms) {
        jw["atoms"].push_back({{"atom", atom}, {"value", value}});
      }
      jw["value"] = w.expr_value;
      jr["witnesses"].push_back(std::move(jw));
    }
    j["rules"].push_back(std::move(jr));
  }
  return j;
}

std::string DescribeViolations(const SafetyReport& report) {
  std::string out;
  for (const auto& r : report.rules) {
    if (r.passed) continue;
    for (const auto& w : r.witnesses) {
      out += "Rule " + r.name + " (" + std::string(ToString(r.mode)) + " " + r.expr +
             ") is violated on path " + std::to_string(w.path_index) + ": ";
      for (std::size_t i = 0; i < w.events.size(); ++i) {
        out += (i ? " -> " : "") + w.events[i];
      }
      if (w.events.empty()) out += "(no events)";
      out += "\n";
      for (const auto& [atom, value] : w.atoms) {
        out += "  " + atom + ": " + (value ? "true" : "false") + "\n";
      }
    }
  }
  return out;
}

std::string SuggestCorrection(std::string_view code, const SafetyReport& report,
                              llm::Gateway& gateway) {
  if (report.passed()) {
    throw PreconditionError("no violations to correct");
  }
  const std::string prompt =
      llm::RenderPrompt(llm::TemplateId::kCorrectCode,
                        {{"result", DescribeViolations(report)}, {"code", std::string(code)}});
  return gateway.Complete(prompt);
}

}  // namespace sdvguard::rules
