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

#include "sdvguard/topology_assist.hpp"

#include <functional>
#include <variant>

#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::topology {
namespace {

constexpr std::string_view kRetryHeader =
    "\n\nYour previous answer was rejected for the following reasons; answer again:\n";

std::string CurrentSystem(const std::optional<InstanceModel>& current) {
  return current ? ExportClassDiagram(*current) : ExportClassDiagram(InstanceModel{});
}

// Parses a completion into a conformant model or returns the problem.
std::variant<InstanceModel, std::string> AcceptInstance(const std::string& completion,
                                                        const Metamodel& metamodel) {
  auto block = text::ExtractPlantUmlBlock(completion);
  if (!block) return std::string("no @startuml/@enduml block in the answer");
  try {
    InstanceModel model = ImportClassDiagram(*block);
    if (model.conforms_to.empty()) model.conforms_to = metamodel.name();
    const auto report = Conform(model, metamodel);
    if (!report.ok()) return "the model does not conform to the metamodel:\n" + report.Describe();
    return model;
  } catch (const Error& e) {
    return std::string(e.what());
  }
}

template <typename T>
T WithRetry(const std::string& prompt, llm::Gateway& gateway,
            const std::function<std::variant<T, std::string>(const std::string&)>& accept,
            const std::string& what) {
  std::vector<std::string> reports;
  std::string raw;
  std::string current = prompt;
  for (int attempt = 0; attempt < 2; ++attempt) {
    raw = gateway.Complete(current);
    auto result = accept(raw);
    if (auto* ok = std::get_if<T>(&result)) return std::move(*ok);
    reports.push_back(std::get<std::string>(result));
    current = prompt + std::string(kRetryHeader) + reports.back();
  }
  throw GenerationError(what + " was rejected twice: " + reports.back(), reports, raw);
}

}  // namespace

InstanceModel GenerateInstance(std::string_view requirements, const Metamodel& metamodel,
                               const std::optional<InstanceModel>& current,
                               llm::Gateway& gateway) {
  if (text::Trim(requirements).empty() && current) return *current;
  const std::string prompt = llm::RenderPrompt(llm::TemplateId::kUpdateInstance,
                                               {{"current system", CurrentSystem(current)},
                                                {"metamodel", SerializeMetamodel(metamodel)},
                                                {"user input", std::string(requirements)}});
  return WithRetry<InstanceModel>(
      prompt, gateway, [&](const std::string& raw) { return AcceptInstance(raw, metamodel); },
      "generated instance model");
}

ocl::ConstraintSet GenerateConstraints(std::string_view guidelines, const Metamodel& metamodel,
                                       llm::Gateway& gateway) {
  if (text::Trim(guidelines).empty()) return {};
  const std::string prompt =
      llm::RenderPrompt(llm::TemplateId::kGenerateConstraints,
                        {{"metamodel", SerializeMetamodel(metamodel)},
                         {"security guidelines", std::string(guidelines)}});
  auto accept = [&](const std::string& raw) -> std::variant<ocl::ConstraintSet, std::string> {
    try {
      auto set = ocl::ParseConstraints(text::StripCodeFence(raw));
      if (set.empty()) return std::string("no constraints found in the answer");
      ocl::TypeCheck(set, metamodel);
      return set;
    } catch (const Error& e) {
      return std::string(e.what());
    }
  };
  return WithRetry<ocl::ConstraintSet>(prompt, gateway, accept, "generated constraint set");
}

Correction CorrectInstance(const InstanceModel& current, const ocl::TopologyReport& report,
                           const Metamodel& metamodel, const ocl::ConstraintSet& constraints,
                           llm::Gateway& gateway) {
  if (report.passed()) throw PreconditionError("no failing constraints to correct");
  const std::string prompt =
      llm::RenderPrompt(llm::TemplateId::kCorrectInstance,
                        {{"metamodel", SerializeMetamodel(metamodel)},
                         {"current system", ExportClassDiagram(current)},
                         {"OCL pass/fail list", ocl::PassFailList(report)}});
  InstanceModel model = WithRetry<InstanceModel>(
      prompt, gateway, [&](const std::string& raw) { return AcceptInstance(raw, metamodel); },
      "corrected instance model");
  ocl::TopologyReport fresh = ocl::EvalConstraints(model, metamodel, constraints);
  return {std::move(model), std::move(fresh)};
}

}  // namespace sdvguard::topology
