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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sdvguard {

// Root of every error the library throws. `kind()` is a stable short tag
// used in run records and CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Syntax error in any of the text formats. Line and column are 1-based;
// zero means "unknown".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0,
             std::size_t column = 0)
      : Error("parse", Format(message, line, column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string Format(const std::string& message, std::size_t line,
                            std::size_t column) {
    if (line == 0) return message;
    std::string where = "line " + std::to_string(line);
    if (column != 0) where += ", column " + std::to_string(column);
    return where + ": " + message;
  }

  std::size_t line_;
  std::size_t column_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message) : Error("schema", message) {}
};

class CatalogError : public Error {
 public:
  explicit CatalogError(const std::string& message)
      : Error("catalog", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error("precondition", message) {}
};

class RetrievalError : public Error {
 public:
  RetrievalError(const std::string& message, int status = 0)
      : Error("retrieval", message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ChunkingError : public Error {
 public:
  explicit ChunkingError(const std::string& message)
      : Error("chunking", message) {}
};

class TemplateError : public Error {
 public:
  explicit TemplateError(const std::string& message)
      : Error("template", message) {}
};

// Non-2xx status or transport failure talking to the chat endpoint. Status 0
// means the request never got a response (connection refused, timeout).
class GatewayError : public Error {
 public:
  GatewayError(const std::string& message, int status)
      : Error("gateway", message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ReplayMissError : public Error {
 public:
  explicit ReplayMissError(std::string digest)
      : Error("replay-miss", "no recorded completion for prompt digest " + digest),
        digest_(std::move(digest)) {}
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

class ExtractionFormatError : public Error {
 public:
  ExtractionFormatError(const std::string& message, std::string raw)
      : Error("extraction-format", message), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

// Graph-level invariant violations (missing start, unreachable nodes, ...).
class StructureError : public Error {
 public:
  StructureError(const std::string& message, std::vector<std::string> offenders)
      : Error("structure", Format(message, offenders)),
        offenders_(std::move(offenders)) {}
  const std::vector<std::string>& offenders() const noexcept {
    return offenders_;
  }

 private:
  static std::string Format(const std::string& message,
                            const std::vector<std::string>& offenders) {
    std::string out = message;
    if (!offenders.empty()) {
      out += ": ";
      for (std::size_t i = 0; i < offenders.size(); ++i) {
        if (i) out += ", ";
        out += offenders[i];
      }
    }
    return out;
  }

  std::vector<std::string> offenders_;
};

class UnsupportedStructureError : public Error {
 public:
  UnsupportedStructureError(const std::string& message, std::string node)
      : Error("unsupported-structure", message), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

class TransformError : public Error {
 public:
  explicit TransformError(const std::string& message)
      : Error("transform", message) {}
};

class ChainGenerationError : public Error {
 public:
  ChainGenerationError(const std::string& message, std::string raw,
                       std::string parse_error)
      : Error("chain-generation", message + ": " + parse_error),
        raw_(std::move(raw)),
        parse_error_(std::move(parse_error)) {}
  const std::string& raw() const noexcept { return raw_; }
  const std::string& parse_error() const noexcept { return parse_error_; }

 private:
  std::string raw_;
  std::string parse_error_;
};

class MetamodelError : public Error {
 public:
  explicit MetamodelError(const std::string& message)
      : Error("metamodel", message) {}
};

class ConstraintError : public Error {
 public:
  ConstraintError(const std::string& message, std::string symbol = {})
      : Error("constraint", message), symbol_(std::move(symbol)) {}
  const std::string& symbol() const noexcept { return symbol_; }

 private:
  std::string symbol_;
};

class ImportError : public Error {
 public:
  explicit ImportError(const std::string& message) : Error("import", message) {}
};

// LLM-assisted generation that still failed after its automated retry. Both
// attempts' diagnostics are kept for the user.
class GenerationError : public Error {
 public:
  GenerationError(const std::string& message, std::vector<std::string> reports,
                  std::string raw = {})
      : Error("generation", message), reports_(std::move(reports)),
        raw_(std::move(raw)) {}
  const std::vector<std::string>& reports() const noexcept { return reports_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::vector<std::string> reports_;
  std::string raw_;
};

class DeploymentError : public Error {
 public:
  explicit DeploymentError(const std::string& message)
      : Error("deployment", message) {}
};

}  // namespace sdvguard
