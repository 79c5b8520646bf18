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

// Model-assisted topology steps: instance generation, constraint generation
// and instance correction. Each result is parsed and checked before it is
// returned; a rejected completion gets one retry with the problem appended.

#pragma once

#include <optional>
#include <string_view>

#include "sdvguard/llm_gateway.hpp"
#include "sdvguard/ocl.hpp"
#include "sdvguard/topology.hpp"

namespace sdvguard::topology {

// Empty requirements with a current model return that model unchanged.
InstanceModel GenerateInstance(std::string_view requirements, const Metamodel& metamodel,
                               const std::optional<InstanceModel>& current,
                               llm::Gateway& gateway);

// Empty guidelines return an empty set without calling the model.
ocl::ConstraintSet GenerateConstraints(std::string_view guidelines, const Metamodel& metamodel,
                                       llm::Gateway& gateway);

struct Correction {
  InstanceModel model;
  ocl::TopologyReport report;  // the corrected model re-evaluated
};

// Throws PreconditionError when `report` has no failures.
Correction CorrectInstance(const InstanceModel& current, const ocl::TopologyReport& report,
                           const Metamodel& metamodel, const ocl::ConstraintSet& constraints,
                           llm::Gateway& gateway);

}  // namespace sdvguard::topology
