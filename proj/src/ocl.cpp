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

#include "sdvguard/ocl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <variant>

#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::ocl {
namespace {

using Json = nlohmann::ordered_json;
using Kind = OclExpr::Kind;

enum class Tok { kIdent, kNumber, kString, kEnumLit, kSymbol, kEnd };

struct Token {
  Tok type = Tok::kEnd;
  std::string text;       // identifier, symbol, string body, enum literal
  std::string enum_name;  // kEnumLit
  std::size_t line = 0;
  std::size_t column = 0;
};

bool IsIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IsIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> Lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '\\') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {  // OCL line comment
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (IsIdentStart(c)) {
      std::size_t j = i;
      while (j < src.size() && IsIdentChar(src[j])) ++j;
      t.type = Tok::kIdent;
      t.text = std::string(src.substr(i, j - i));
      if (j + 1 < src.size() && src[j] == ':' && src[j + 1] == ':') {
        std::size_t k = j + 2;
        while (k < src.size() && (IsIdentChar(src[k]) || src[k] == '-')) ++k;
        if (k == j + 2) throw ParseError("expected enum literal after '::'", line, col + (j - i) + 2);
        t.type = Tok::kEnumLit;
        t.enum_name = t.text;
        t.text = std::string(src.substr(j + 2, k - j - 2));
        j = k;
      }
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      t.type = Tok::kNumber;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '\'') {
      std::size_t j = i + 1;
      std::string body;
      while (j < src.size() && src[j] != '\'') {
        if (src[j] == '\n') throw ParseError("unterminated string", line, col);
        body += src[j++];
      }
      if (j == src.size()) throw ParseError("unterminated string", line, col);
      t.type = Tok::kString;
      t.text = std::move(body);
      advance(j + 1 - i);
    } else {
      static const char* kTwo[] = {"<>", "<=", ">="};
      std::string sym(1, c);
      for (const char* two : kTwo) {
        if (src.substr(i, 2) == two) sym = two;
      }
      if (sym.size() == 1 && std::string_view("=<>().:,-").find(c) == std::string_view::npos) {
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      t.type = Tok::kSymbol;
      t.text = sym;
      advance(sym.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

bool IsReserved(const std::string& w) {
  static const char* kWords[] = {"context", "inv", "let", "in", "implies", "and",
                                 "or", "not", "true", "false", "self"};
  for (const char* k : kWords) {
    if (w == k) return true;
  }
  return false;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(Lex(src)) {}

  ConstraintSet ParseFile() {
    ConstraintSet out;
    while (Peek().type != Tok::kEnd) {
      ExpectWord("context");
      const std::string context = ExpectIdent("class name");
      if (!AtWord("inv")) Fail("expected 'inv'");
      while (AtWord("inv")) {
        ++pos_;
        Constraint c;
        c.context = context;
        c.name = ExpectIdent("invariant name");
        ExpectSymbol(":");
        c.body = ParseExpr();
        out.push_back(std::move(c));
      }
      if (Peek().type != Tok::kEnd && !AtWord("context")) {
        Fail("unexpected '" + Peek().text + "'");
      }
    }
    return out;
  }

 private:
  const Token& Peek() const { return tokens_[pos_]; }
  bool AtWord(std::string_view w) const {
    return Peek().type == Tok::kIdent && Peek().text == w;
  }
  bool AtSymbol(std::string_view s) const {
    return Peek().type == Tok::kSymbol && Peek().text == s;
  }
  [[noreturn]] void Fail(const std::string& message) const {
    throw ParseError(message, Peek().line, Peek().column);
  }
  void ExpectWord(std::string_view w) {
    if (!AtWord(w)) Fail("expected '" + std::string(w) + "'");
    ++pos_;
  }
  void ExpectSymbol(std::string_view s) {
    if (!AtSymbol(s)) Fail("expected '" + std::string(s) + "'");
    ++pos_;
  }
  std::string ExpectIdent(const char* what) {
    if (Peek().type != Tok::kIdent || IsReserved(Peek().text)) {
      Fail(std::string("expected ") + what);
    }
    return tokens_[pos_++].text;
  }

  static OclExpr Node(Kind kind, std::vector<OclExpr> children = {}, std::string text = {}) {
    OclExpr e;
    e.kind = kind;
    e.children = std::move(children);
    e.text = std::move(text);
    return e;
  }

  OclExpr ParseExpr() { return ParseImplies(); }

  OclExpr ParseImplies() {
    OclExpr lhs = ParseOr();
    if (AtWord("implies")) {
      ++pos_;
      return Node(Kind::kImplies, {std::move(lhs), ParseImplies()});
    }
    return lhs;
  }

  OclExpr ParseOr() {
    OclExpr lhs = ParseAnd();
    while (AtWord("or")) {
      ++pos_;
      lhs = Node(Kind::kOr, {std::move(lhs), ParseAnd()});
    }
    return lhs;
  }

  OclExpr ParseAnd() {
    OclExpr lhs = ParseNot();
    while (AtWord("and")) {
      ++pos_;
      lhs = Node(Kind::kAnd, {std::move(lhs), ParseNot()});
    }
    return lhs;
  }

  OclExpr ParseNot() {
    if (AtWord("not")) {
      ++pos_;
      return Node(Kind::kNot, {ParseNot()});
    }
    if (AtWord("let")) {
      ++pos_;
      OclExpr e = Node(Kind::kLet);
      e.text = ExpectIdent("variable name");
      ExpectSymbol(":");
      e.type_name = ExpectIdent("type name");
      ExpectSymbol("=");
      OclExpr init = ParseExpr();
      ExpectWord("in");
      e.children.push_back(std::move(init));
      e.children.push_back(ParseExpr());
      return e;
    }
    return ParseComparison();
  }

  OclExpr ParseComparison() {
    OclExpr lhs = ParseUnary();
    static const char* kOps[] = {"=", "<>", "<", "<=", ">", ">="};
    for (const char* op : kOps) {
      if (AtSymbol(op)) {
        ++pos_;
        return Node(Kind::kCompare, {std::move(lhs), ParseUnary()}, op);
      }
    }
    return lhs;
  }

  OclExpr ParseUnary() {
    if (AtSymbol("-")) {
      ++pos_;
      OclExpr operand = ParseUnary();
      if (operand.kind == Kind::kReal) {
        operand.real = -operand.real;
        return operand;
      }
      if (operand.kind == Kind::kInteger) {
        operand.integer = -operand.integer;
        return operand;
      }
      return Node(Kind::kNeg, {std::move(operand)});
    }
    return ParsePostfix();
  }

  OclExpr ParsePostfix() {
    OclExpr e = ParsePrimary();
    while (AtSymbol(".")) {
      ++pos_;
      const std::string name = ExpectIdent("attribute or operation");
      if (name == "oclIsTypeOf") {
        ExpectSymbol("(");
        const std::string cls = ExpectIdent("class name");
        ExpectSymbol(")");
        e = Node(Kind::kIsTypeOf, {std::move(e)}, cls);
      } else if (name == "toReal") {
        ExpectSymbol("(");
        ExpectSymbol(")");
        e = Node(Kind::kToReal, {std::move(e)});
      } else {
        if (AtSymbol("(")) Fail("unsupported operation '" + name + "'");
        e = Node(Kind::kNavigate, {std::move(e)}, name);
      }
    }
    return e;
  }

  OclExpr ParsePrimary() {
    const Token& t = Peek();
    if (t.type == Tok::kNumber) {
      ++pos_;
      OclExpr e;
      if (t.text.find_first_of(".eE") != std::string::npos) {
        e.kind = Kind::kReal;
        e.real = text::ParseReal(t.text).value();
      } else {
        e.kind = Kind::kInteger;
        auto v = text::ParseInteger(t.text);
        if (!v) Fail("integer literal out of range");
        e.integer = *v;
      }
      return e;
    }
    if (t.type == Tok::kString) {
      ++pos_;
      return Node(Kind::kString, {}, t.text);
    }
    if (t.type == Tok::kEnumLit) {
      ++pos_;
      OclExpr e = Node(Kind::kEnumLiteral, {}, t.text);
      e.type_name = t.enum_name;
      return e;
    }
    if (AtSymbol("(")) {
      ++pos_;
      OclExpr e = ParseExpr();
      ExpectSymbol(")");
      return e;
    }
    if (AtWord("self")) {
      ++pos_;
      return Node(Kind::kSelf);
    }
    if (AtWord("true") || AtWord("false")) {
      OclExpr e = Node(Kind::kBoolean);
      e.boolean = t.text == "true";
      ++pos_;
      return e;
    }
    if (t.type == Tok::kIdent && !IsReserved(t.text)) {
      ++pos_;
      return Node(Kind::kVariable, {}, t.text);
    }
    if (t.type == Tok::kEnd) Fail("unexpected end of input");
    Fail("unexpected '" + t.text + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// ---- type checking ----------------------------------------------------

struct Type {
  enum K { kReal, kInteger, kString, kBoolean, kEnum, kObject } k = kBoolean;
  std::string name;  // enum or class
};

bool Numeric(const Type& t) { return t.k == Type::kReal || t.k == Type::kInteger; }

std::string Describe(const Type& t) {
  switch (t.k) {
    case Type::kReal: return "Real";
    case Type::kInteger: return "Integer";
    case Type::kString: return "String";
    case Type::kBoolean: return "Boolean";
    case Type::kEnum: return t.name;
    case Type::kObject: return t.name;
  }
  return "?";
}

Type FromAttribute(const topology::AttributeDecl& a) {
  switch (a.kind) {
    case topology::AttrKind::kString: return {Type::kString, {}};
    case topology::AttrKind::kReal: return {Type::kReal, {}};
    case topology::AttrKind::kInt: return {Type::kInteger, {}};
    case topology::AttrKind::kBool: return {Type::kBoolean, {}};
    case topology::AttrKind::kEnum: return {Type::kEnum, a.target};
    case topology::AttrKind::kRef: return {Type::kObject, a.target};
  }
  return {};
}

class Checker {
 public:
  Checker(const topology::Metamodel& mm, const Constraint& c) : mm_(mm), c_(c) {}

  void Run() {
    if (!mm_.FindClass(c_.context)) {
      Fail("unknown context class '" + c_.context + "'", c_.context);
    }
    const Type t = Check(c_.body, {});
    if (t.k != Type::kBoolean) Fail("invariant body is " + Describe(t) + ", not Boolean", c_.name);
  }

 private:
  using Scope = std::map<std::string, Type>;

  [[noreturn]] void Fail(const std::string& message, const std::string& symbol) const {
    throw ConstraintError(c_.name + ": " + message, symbol);
  }

  void Expect(bool ok, const std::string& what, const OclExpr& e) const {
    if (!ok) Fail(what + " in '" + ToString(e) + "'", ToString(e));
  }

  Type Check(const OclExpr& e, const Scope& scope) const {
    switch (e.kind) {
      case Kind::kSelf: return {Type::kObject, c_.context};
      case Kind::kVariable: {
        auto it = scope.find(e.text);
        if (it == scope.end()) Fail("unknown symbol '" + e.text + "'", e.text);
        return it->second;
      }
      case Kind::kReal: return {Type::kReal, {}};
      case Kind::kInteger: return {Type::kInteger, {}};
      case Kind::kString: return {Type::kString, {}};
      case Kind::kBoolean: return {Type::kBoolean, {}};
      case Kind::kEnumLiteral: {
        const auto* en = mm_.FindEnum(e.type_name);
        if (!en) Fail("unknown enumeration '" + e.type_name + "'", e.type_name);
        if (std::find(en->literals.begin(), en->literals.end(), e.text) == en->literals.end()) {
          Fail("unknown literal '" + e.type_name + "::" + e.text + "'", e.text);
        }
        return {Type::kEnum, e.type_name};
      }
      case Kind::kNavigate: {
        const Type owner = Check(e.children[0], scope);
        if (owner.k != Type::kObject) {
          Fail("cannot navigate '" + e.text + "' on " + Describe(owner), e.text);
        }
        const auto* a = mm_.FindAttribute(owner.name, e.text);
        if (!a) Fail("unknown attribute '" + owner.name + "." + e.text + "'", e.text);
        return FromAttribute(*a);
      }
      case Kind::kIsTypeOf: {
        const Type owner = Check(e.children[0], scope);
        Expect(owner.k == Type::kObject, "oclIsTypeOf needs an object", e);
        if (!mm_.FindClass(e.text)) Fail("unknown class '" + e.text + "'", e.text);
        return {Type::kBoolean, {}};
      }
      case Kind::kToReal: {
        const Type t = Check(e.children[0], scope);
        Expect(t.k == Type::kString || Numeric(t), "toReal needs a String or number", e);
        return {Type::kReal, {}};
      }
      case Kind::kNeg: {
        const Type t = Check(e.children[0], scope);
        Expect(Numeric(t), "unary minus needs a number", e);
        return t;
      }
      case Kind::kNot:
      case Kind::kAnd:
      case Kind::kOr:
      case Kind::kImplies:
        for (const auto& c : e.children) {
          Expect(Check(c, scope).k == Type::kBoolean, "operand is not Boolean", e);
        }
        return {Type::kBoolean, {}};
      case Kind::kCompare: {
        const Type l = Check(e.children[0], scope);
        const Type r = Check(e.children[1], scope);
        if (e.text == "=" || e.text == "<>") {
          const bool ok = (Numeric(l) && Numeric(r)) ||
                          (l.k == r.k && (l.k != Type::kEnum || l.name == r.name));
          Expect(ok, "cannot compare " + Describe(l) + " with " + Describe(r), e);
        } else {
          Expect(Numeric(l) && Numeric(r), "ordering needs numbers", e);
        }
        return {Type::kBoolean, {}};
      }
      case Kind::kLet: {
        Type declared;
        if (e.type_name == "Real") declared = {Type::kReal, {}};
        else if (e.type_name == "Integer") declared = {Type::kInteger, {}};
        else if (e.type_name == "String") declared = {Type::kString, {}};
        else if (e.type_name == "Boolean") declared = {Type::kBoolean, {}};
        else if (mm_.FindClass(e.type_name)) declared = {Type::kObject, e.type_name};
        else Fail("unknown type '" + e.type_name + "'", e.type_name);
        const Type init = Check(e.children[0], scope);
        const bool ok = (declared.k == Type::kReal && Numeric(init)) ||
                        (declared.k == init.k &&
                         (declared.k != Type::kObject || mm_.IsSubclassOf(init.name, declared.name)));
        Expect(ok, "let " + e.text + " : " + e.type_name + " initialised with " + Describe(init), e);
        Scope inner = scope;
        inner[e.text] = declared;
        return Check(e.children[1], inner);
      }
    }
    return {};
  }

  const topology::Metamodel& mm_;
  const Constraint& c_;
};

// ---- evaluation -------------------------------------------------------

struct EnumVal {
  std::string enum_name;
  std::string literal;

  bool operator==(const EnumVal&) const = default;
};

using Val = std::variant<std::monostate, bool, long long, double, std::string, EnumVal,
                         const topology::Object*>;

struct Fault {
  std::string reason;
};

class Evaluator {
 public:
  Evaluator(const topology::InstanceModel& model, const topology::Metamodel& mm)
      : model_(model), mm_(mm) {}

  bool Holds(const OclExpr& body, const topology::Object& self) {
    std::map<std::string, Val> scope;
    return AsBool(Eval(body, self, scope));
  }

 private:
  static bool AsBool(const Val& v) {
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    throw Fault{"null in a Boolean position"};
  }

  static std::optional<double> AsNumber(const Val& v) {
    if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
  }

  Val Eval(const OclExpr& e, const topology::Object& self, std::map<std::string, Val>& scope) {
    switch (e.kind) {
      case Kind::kSelf: return &self;
      case Kind::kVariable: return scope.at(e.text);
      case Kind::kReal: return e.real;
      case Kind::kInteger: return e.integer;
      case Kind::kString: return e.text;
      case Kind::kBoolean: return e.boolean;
      case Kind::kEnumLiteral: return EnumVal{e.type_name, e.text};
      case Kind::kNavigate: {
        const Val owner = Eval(e.children[0], self, scope);
        const auto* const* obj = std::get_if<const topology::Object*>(&owner);
        if (obj == nullptr) throw Fault{"navigation of '" + e.text + "' on null"};
        const auto* decl = mm_.FindAttribute((*obj)->class_name, e.text);
        if (decl->kind == topology::AttrKind::kRef) {
          auto it = (*obj)->references.find(e.text);
          if (it == (*obj)->references.end()) return std::monostate{};
          return model_.Find(it->second);
        }
        auto it = (*obj)->attributes.find(e.text);
        if (it == (*obj)->attributes.end()) return std::monostate{};
        const topology::Value& v = it->second;
        if (decl->kind == topology::AttrKind::kEnum) {
          return EnumVal{decl->target, std::get<std::string>(v)};
        }
        if (decl->kind == topology::AttrKind::kReal) {
          if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
        }
        return std::visit([](const auto& x) -> Val { return x; }, v);
      }
      case Kind::kIsTypeOf: {
        const Val owner = Eval(e.children[0], self, scope);
        const auto* const* obj = std::get_if<const topology::Object*>(&owner);
        return obj != nullptr && (*obj)->class_name == e.text;
      }
      case Kind::kToReal: {
        const Val v = Eval(e.children[0], self, scope);
        if (auto n = AsNumber(v)) return *n;
        if (const auto* s = std::get_if<std::string>(&v)) {
          if (auto r = text::ParseReal(text::Trim(*s))) return *r;
          throw Fault{"toReal: '" + *s + "' is not a number"};
        }
        throw Fault{"toReal on null"};
      }
      case Kind::kNeg: {
        const Val v = Eval(e.children[0], self, scope);
        if (const auto* i = std::get_if<long long>(&v)) return -*i;
        if (const auto* d = std::get_if<double>(&v)) return -*d;
        throw Fault{"unary minus on null"};
      }
      case Kind::kNot: return !AsBool(Eval(e.children[0], self, scope));
      case Kind::kAnd:
        return AsBool(Eval(e.children[0], self, scope)) && AsBool(Eval(e.children[1], self, scope));
      case Kind::kOr:
        return AsBool(Eval(e.children[0], self, scope)) || AsBool(Eval(e.children[1], self, scope));
      case Kind::kImplies:
        return !AsBool(Eval(e.children[0], self, scope)) || AsBool(Eval(e.children[1], self, scope));
      case Kind::kCompare: return Compare(e, Eval(e.children[0], self, scope),
                                          Eval(e.children[1], self, scope));
      case Kind::kLet: {
        Val init = Eval(e.children[0], self, scope);
        if (e.type_name == "Real") {
          if (const auto* i = std::get_if<long long>(&init)) init = static_cast<double>(*i);
        }
        auto saved = scope.find(e.text) != scope.end() ? std::optional<Val>(scope[e.text])
                                                       : std::nullopt;
        scope[e.text] = init;
        Val out = Eval(e.children[1], self, scope);
        if (saved) scope[e.text] = *saved;
        else scope.erase(e.text);
        return out;
      }
    }
    return std::monostate{};
  }

  static Val Compare(const OclExpr& e, const Val& l, const Val& r) {
    const std::string& op = e.text;
    const auto ln = AsNumber(l), rn = AsNumber(r);
    if (op == "=" || op == "<>") {
      bool eq;
      if (ln && rn) eq = *ln == *rn;
      else if (l.index() != r.index()) eq = false;
      else eq = l == r;
      return op == "=" ? eq : !eq;
    }
    if (!ln || !rn) throw Fault{"ordering '" + op + "' on null"};
    if (op == "<") return *ln < *rn;
    if (op == "<=") return *ln <= *rn;
    if (op == ">") return *ln > *rn;
    return *ln >= *rn;
  }

  const topology::InstanceModel& model_;
  const topology::Metamodel& mm_;
};

std::string FormatLiteral(const OclExpr& e) {
  if (e.kind == Kind::kReal) return text::FormatReal(e.real);
  return std::to_string(e.integer);
}

}  // namespace

std::string ToString(const OclExpr& e) {
  auto wrap = [](const OclExpr& c) {
    const bool leaf = c.kind == Kind::kSelf || c.kind == Kind::kVariable ||
                      c.kind == Kind::kReal || c.kind == Kind::kInteger ||
                      c.kind == Kind::kString || c.kind == Kind::kBoolean ||
                      c.kind == Kind::kEnumLiteral || c.kind == Kind::kNavigate ||
                      c.kind == Kind::kIsTypeOf || c.kind == Kind::kToReal;
    return leaf ? ToString(c) : "(" + ToString(c) + ")";
  };
  switch (e.kind) {
    case Kind::kSelf: return "self";
    case Kind::kVariable: return e.text;
    case Kind::kReal:
    case Kind::kInteger: return FormatLiteral(e);
    case Kind::kString: return "'" + e.text + "'";
    case Kind::kBoolean: return e.boolean ? "true" : "false";
    case Kind::kEnumLiteral: return e.type_name + "::" + e.text;
    case Kind::kNavigate: return wrap(e.children[0]) + "." + e.text;
    case Kind::kIsTypeOf: return wrap(e.children[0]) + ".oclIsTypeOf(" + e.text + ")";
    case Kind::kToReal: return wrap(e.children[0]) + ".toReal()";
    case Kind::kNeg: return "-" + wrap(e.children[0]);
    case Kind::kNot: return "not " + wrap(e.children[0]);
    case Kind::kAnd: return wrap(e.children[0]) + " and " + wrap(e.children[1]);
    case Kind::kOr: return wrap(e.children[0]) + " or " + wrap(e.children[1]);
    case Kind::kImplies: return wrap(e.children[0]) + " implies " + wrap(e.children[1]);
    case Kind::kCompare: return wrap(e.children[0]) + " " + e.text + " " + wrap(e.children[1]);
    case Kind::kLet:
      return "let " + e.text + " : " + e.type_name + " = " + ToString(e.children[0]) + " in " +
             ToString(e.children[1]);
  }
  return {};
}

ConstraintSet ParseConstraints(std::string_view text) {
  ConstraintSet set = Parser(text).ParseFile();
  std::map<std::string, int> seen;
  for (const auto& c : set) {
    if (seen[c.name]++) throw ParseError("duplicate invariant name '" + c.name + "'");
  }
  return set;
}

void TypeCheck(const ConstraintSet& constraints, const topology::Metamodel& metamodel) {
  for (const auto& c : constraints) Checker(metamodel, c).Run();
}

std::string_view ToString(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kNotApplicable: return "not-applicable";
  }
  return "?";
}

bool TopologyReport::passed() const { return count(Verdict::kFail) == 0; }

std::size_t TopologyReport::count(Verdict verdict) const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.verdict == verdict;
  return n;
}

std::vector<Evaluation> TopologyReport::failing() const {
  std::vector<Evaluation> out;
  for (const auto& e : entries) {
    if (e.verdict == Verdict::kFail) out.push_back(e);
  }
  return out;
}

TopologyReport EvalConstraints(const topology::InstanceModel& model,
                               const topology::Metamodel& metamodel,
                               const ConstraintSet& constraints) {
  const auto conformance = topology::Conform(model, metamodel);
  if (!conformance.ok()) {
    throw PreconditionError("instance model does not conform:\n" + conformance.Describe());
  }
  TypeCheck(constraints, metamodel);
  TopologyReport report;
  Evaluator evaluator(model, metamodel);
  for (const auto& c : constraints) {
    for (const auto& o : model.objects) {
      Evaluation ev{c.name, o.id, Verdict::kNotApplicable, {}};
      if (!metamodel.IsSubclassOf(o.class_name, c.context)) {
        ev.reason = o.class_name + " is outside context " + c.context;
      } else {
        try {
          if (evaluator.Holds(c.body, o)) {
            ev.verdict = Verdict::kPass;
          } else {
            ev.verdict = Verdict::kFail;
            ev.reason = "invariant evaluated to false";
          }
        } catch (const Fault& f) {
          ev.verdict = Verdict::kFail;
          ev.reason = "evaluation fault: " + f.reason;
        }
      }
      report.entries.push_back(std::move(ev));
    }
  }
  return report;
}

std::string PassFailList(const TopologyReport& report) {
  std::string out;
  for (const auto& e : report.entries) {
    out += e.constraint + "\t" + e.object_id + "\t" + std::string(ToString(e.verdict)) + "\t" +
           e.reason + "\n";
  }
  return out;
}

Json ToJson(const TopologyReport& report) {
  Json j;
  j["verdict"] = report.passed() ? "pass" : "fail";
  j["counts"] = {{"pass", report.count(Verdict::kPass)},
                 {"fail", report.count(Verdict::kFail)},
                 {"not-applicable", report.count(Verdict::kNotApplicable)}};
  j["entries"] = Json::array();
  for (const auto& e : report.entries) {
    Json je{{"constraint", e.constraint},
            {"object", e.object_id},
            {"verdict", std::string(ToString(e.verdict))}};
    if (!e.reason.empty()) je["reason"] = e.reason;
    j["entries"].push_back(std::move(je));
  }
  return j;
}

}  // namespace sdvguard::ocl
