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

// Prompt templates and the completion gateway.
//
// The gateway runs in one of three modes:
//   live    every prompt goes to the chat endpoint;
//   record  like live, and each (digest -> completion) pair is appended to a
//           replay store file;
//   replay  completions come only from a replay store; a miss is an error.
// Stores are keyed by the SHA-256 of the exact prompt text, so a recorded
// fixture stops matching as soon as a prompt changes by a single byte.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdvguard/http.hpp"

namespace sdvguard::llm {

enum class TemplateId { kExtractSignals, kUpdateEventChain, kCorrectCode,
                        kUpdateInstance, kGenerateConstraints, kCorrectInstance };

struct PromptTemplate {
  TemplateId id;
  std::string_view name;  // PC1, PC2, PC2b, PC3, PC4, PC4b
  std::string_view body;
  std::vector<std::string_view> required_placeholders;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

const std::vector<PromptTemplate>& Templates();
const PromptTemplate& GetTemplate(TemplateId id);
// Throws TemplateError for an unknown name.
const PromptTemplate& GetTemplate(std::string_view name);

// Substitutes every `{placeholder}` in one pass; bound text is never
// re-scanned. Throws TemplateError naming the first unbound placeholder.
std::string RenderPrompt(const PromptTemplate& tmpl, const Bindings& bindings);
std::string RenderPrompt(TemplateId id, const Bindings& bindings);
std::string RenderPrompt(std::string_view template_name, const Bindings& bindings);

inline constexpr int kDefaultMaxTokens = 4096;

struct CompletionRequest {
  std::string prompt;
  std::string model;
  std::optional<double> temperature;  // omitted from the wire when unset
  int max_tokens = kDefaultMaxTokens;
};

class Completer {
 public:
  virtual ~Completer() = default;
  virtual std::string Complete(const CompletionRequest& request) = 0;
};

// OpenAI-style chat completions: one user message, first choice returned.
class HttpChatCompleter final : public Completer {
 public:
  explicit HttpChatCompleter(http::Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string Complete(const CompletionRequest& request) override;

 private:
  http::Endpoint endpoint_;
};

// Builds an HttpChatCompleter from SDVGUARD_LLM_URL / SDVGUARD_LLM_KEY.
std::unique_ptr<Completer> CompleterFromEnvironment();

std::string PromptDigest(std::string_view prompt);

class ReplayStore {
 public:
  ReplayStore() = default;
  static ReplayStore Load(const std::filesystem::path& path);
  static ReplayStore Parse(std::string_view text);

  std::optional<std::string> Find(std::string_view digest) const;
  void Insert(std::string digest, std::string completion);
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

  // Canonical form: JSON object, keys sorted, two-space indent, trailing LF.
  std::string Serialize() const;
  void Save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

enum class GatewayMode { kLive, kRecord, kReplay };
std::string_view ToString(GatewayMode mode);

struct GatewayOptions {
  std::string model = "default";
  std::optional<double> temperature;
  int max_tokens = kDefaultMaxTokens;
};

class Gateway {
 public:
  static std::unique_ptr<Gateway> Live(std::shared_ptr<Completer> completer,
                                       GatewayOptions options = {});
  // Loads `store_path` if it exists and rewrites it after every completion.
  static std::unique_ptr<Gateway> Record(std::shared_ptr<Completer> completer,
                                         std::filesystem::path store_path,
                                         GatewayOptions options = {});
  static std::unique_ptr<Gateway> Replay(ReplayStore store, GatewayOptions options = {});

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  std::string Complete(const std::string& prompt);

  GatewayMode mode() const { return mode_; }
  const GatewayOptions& options() const { return options_; }
  std::size_t endpoint_calls() const;
  ReplayStore store() const;

 private:
  Gateway(GatewayMode mode, std::shared_ptr<Completer> completer, ReplayStore store,
          std::optional<std::filesystem::path> store_path, GatewayOptions options);

  GatewayMode mode_;
  std::shared_ptr<Completer> completer_;
  GatewayOptions options_;
  std::optional<std::filesystem::path> store_path_;
  mutable std::mutex mutex_;
  ReplayStore store_;
  std::size_t endpoint_calls_ = 0;
};

}  // namespace sdvguard::llm
