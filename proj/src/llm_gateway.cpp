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

#include "sdvguard/llm_gateway.hpp"

#include <cstdlib>

#include "json.hpp"
#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::llm {
namespace {

using Json = nlohmann::json;

// Prompt texts are kept verbatim; placeholders are written `{name}`.
const std::vector<PromptTemplate> kTemplates = {
    {TemplateId::kExtractSignals, "PC1",
     "You are extracting list of VSS signals and CAN messages based on given source "
     "code {code}.\n"
     "For each of the steps signals/messages, extract entry: name, type, value, "
     "protocol.",
     {"code"}},
    {TemplateId::kUpdateEventChain, "PC2",
     "You are updating PlantUml activity diagram about automotive event chain without "
     "comments and without explanations given as {current-event-chain}, based on given "
     "source code: {code}., taking into account {relevant messages/signals}.\n"
     "For each of event chain steps, the following parameters are considered as notes: "
     "input, input_format, output, output_format.",
     {"current-event-chain", "code", "relevant messages/signals"}},
    {TemplateId::kCorrectCode, "PC2b",
     "Based on code analysis outcome {result}, correct the following code {code} to "
     "eliminate the detected functional safety-related issues.",
     {"result", "code"}},
    {TemplateId::kUpdateInstance, "PC3",
     "Update model instance {current system}, with respect to {metamodel}, based on "
     "requirements {user input}.",
     {"current system", "metamodel", "user input"}},
    {TemplateId::kGenerateConstraints, "PC4",
     "Generate automotive system security constraints with respect to {metamodel}, "
     "based on reference specification {security guidelines}.",
     {"metamodel", "security guidelines"}},
    {TemplateId::kCorrectInstance, "PC4b",
     "Update automotive system model with respect to {metamodel}, based on current "
     "representation {current system} and analysis outcome {OCL pass/fail list}.",
     {"metamodel", "current system", "OCL pass/fail list"}},
};

bool IsHexDigest(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

const std::vector<PromptTemplate>& Templates() { return kTemplates; }

const PromptTemplate& GetTemplate(TemplateId id) {
  for (const auto& t : kTemplates) {
    if (t.id == id) return t;
  }
  throw TemplateError("unknown template id");
}

const PromptTemplate& GetTemplate(std::string_view name) {
  for (const auto& t : kTemplates) {
    if (t.name == name) return t;
  }
  throw TemplateError("unknown template '" + std::string(name) + "'");
}

std::string RenderPrompt(const PromptTemplate& tmpl, const Bindings& bindings) {
  for (std::string_view name : tmpl.required_placeholders) {
    if (bindings.find(name) == bindings.end()) {
      throw TemplateError("template " + std::string(tmpl.name) +
                          " is missing a binding for {" + std::string(name) + "}");
    }
  }
  std::string out;
  std::string_view body = tmpl.body;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const std::size_t open = body.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(body.substr(pos));
      break;
    }
    out.append(body.substr(pos, open - pos));
    const std::size_t close = body.find('}', open);
    if (close == std::string_view::npos) {
      out.append(body.substr(open));
      break;
    }
    const std::string_view name = body.substr(open + 1, close - open - 1);
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      out.append(body.substr(open, close - open + 1));
    } else {
      out.append(it->second);
    }
    pos = close + 1;
  }
  return out;
}

std::string RenderPrompt(TemplateId id, const Bindings& bindings) {
  return RenderPrompt(GetTemplate(id), bindings);
}

std::string RenderPrompt(std::string_view template_name, const Bindings& bindings) {
  return RenderPrompt(GetTemplate(template_name), bindings);
}

std::string HttpChatCompleter::Complete(const CompletionRequest& request) {
  Json body;
  body["model"] = request.model;
  body["messages"] = Json::array({{{"role", "user"}, {"content", request.prompt}}});
  body["max_tokens"] = request.max_tokens;
  if (request.temperature) body["temperature"] = *request.temperature;

  const http::Response response = http::PostJson(endpoint_, body.dump());
  if (!response.ok()) {
    std::string message = "chat endpoint returned status " + std::to_string(response.status);
    if (!response.error.empty()) message += ": " + response.error;
    throw GatewayError(message, response.status);
  }
  try {
    const Json parsed = Json::parse(response.body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw GatewayError(std::string("malformed chat response: ") + e.what(),
                       response.status);
  }
}

std::unique_ptr<Completer> CompleterFromEnvironment() {
  const char* url = std::getenv("SDVGUARD_LLM_URL");
  if (url == nullptr || *url == '\0') {
    throw ConfigError("SDVGUARD_LLM_URL is not set (needed for live/record mode)");
  }
  http::Endpoint endpoint;
  endpoint.url = url;
  if (const char* key = std::getenv("SDVGUARD_LLM_KEY")) endpoint.bearer_token = key;
  return std::make_unique<HttpChatCompleter>(std::move(endpoint));
}

std::string PromptDigest(std::string_view prompt) { return text::Sha256Hex(prompt); }

ReplayStore ReplayStore::Parse(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    auto [line, column] = text::LineColumn(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("malformed replay store: ") + e.what(), line, column);
  }
  if (!root.is_object()) throw SchemaError("replay store must be a JSON object");
  ReplayStore store;
  for (const auto& [digest, completion] : root.items()) {
    if (!IsHexDigest(digest)) {
      throw SchemaError("replay store key '" + digest + "' is not a SHA-256 hex digest");
    }
    if (!completion.is_string()) {
      throw SchemaError("replay store value for " + digest + " must be a string");
    }
    store.entries_.emplace(digest, completion.get<std::string>());
  }
  return store;
}

ReplayStore ReplayStore::Load(const std::filesystem::path& path) {
  return Parse(text::ReadFile(path));
}

std::optional<std::string> ReplayStore::Find(std::string_view digest) const {
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ReplayStore::Insert(std::string digest, std::string completion) {
  entries_[std::move(digest)] = std::move(completion);
}

std::string ReplayStore::Serialize() const {
  Json root = Json::object();
  for (const auto& [digest, completion] : entries_) root[digest] = completion;
  return root.dump(2) + "\n";
}

void ReplayStore::Save(const std::filesystem::path& path) const {
  const std::filesystem::path tmp = path.string() + ".tmp";
  text::WriteFile(tmp, Serialize());
  std::filesystem::rename(tmp, path);
}

std::string_view ToString(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::kLive: return "live";
    case GatewayMode::kRecord: return "record";
    case GatewayMode::kReplay: return "replay";
  }
  return "?";
}

Gateway::Gateway(GatewayMode mode, std::shared_ptr<Completer> completer, ReplayStore store,
                 std::optional<std::filesystem::path> store_path, GatewayOptions options)
    : mode_(mode),
      completer_(std::move(completer)),
      options_(std::move(options)),
      store_path_(std::move(store_path)),
      store_(std::move(store)) {}

std::unique_ptr<Gateway> Gateway::Live(std::shared_ptr<Completer> completer,
                                       GatewayOptions options) {
  if (!completer) throw ConfigError("live gateway needs a completer");
  return std::unique_ptr<Gateway>(new Gateway(GatewayMode::kLive, std::move(completer), {},
                                              std::nullopt, std::move(options)));
}

std::unique_ptr<Gateway> Gateway::Record(std::shared_ptr<Completer> completer,
                                         std::filesystem::path store_path,
                                         GatewayOptions options) {
  if (!completer) throw ConfigError("record gateway needs a completer");
  ReplayStore store;
  if (std::filesystem::exists(store_path)) store = ReplayStore::Load(store_path);
  return std::unique_ptr<Gateway>(new Gateway(GatewayMode::kRecord, std::move(completer),
                                              std::move(store), std::move(store_path),
                                              std::move(options)));
}

std::unique_ptr<Gateway> Gateway::Replay(ReplayStore store, GatewayOptions options) {
  return std::unique_ptr<Gateway>(new Gateway(GatewayMode::kReplay, nullptr,
                                              std::move(store), std::nullopt,
                                              std::move(options)));
}

std::string Gateway::Complete(const std::string& prompt) {
  const std::string digest = PromptDigest(prompt);
  if (mode_ == GatewayMode::kReplay) {
    auto hit = store_.Find(digest);
    if (!hit) throw ReplayMissError(digest);
    return *hit;
  }
  CompletionRequest request{prompt, options_.model, options_.temperature,
                            options_.max_tokens};
  std::string completion = completer_->Complete(request);
  std::lock_guard<std::mutex> lock(mutex_);
  ++endpoint_calls_;
  if (mode_ == GatewayMode::kRecord) {
    store_.Insert(digest, completion);
    store_.Save(*store_path_);
  }
  return completion;
}

std::size_t Gateway::endpoint_calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return endpoint_calls_;
}

ReplayStore Gateway::store() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return store_;
}

}  // namespace sdvguard::llm
