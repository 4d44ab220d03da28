/*
 * Copyright 2026 The KupenStack Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kupenstack/sim/types.hpp"

namespace kupenstack::sim {

struct NodeLoad {
  const SimNode* node = nullptr;
  std::int64_t workloads = 0;  // non-deleted VMs (or live units)
  std::int64_t usedVcpus = 0;
  std::int64_t usedRamMiB = 0;
};

/// Filter by health, role and selector, then by remaining capacity; pick the
/// node with the fewest workloads, ties broken by name. Throws NoValidHost
/// when nothing matches role+selector, QuotaExceeded when every match is
/// full. A null flavor skips the capacity filter.
std::string pickNode(const std::vector<NodeLoad>& loads, const Placement& placement,
                     const model::Flavor* flavor);

bool selectorMatches(const model::StringMap& selector, const model::StringMap& labels);

/// 3 control-plane + 3 compute nodes, 8 vcpus each. Compute nodes carry an
/// "aggregate" label (ssd, ssd, hdd) to express host aggregates.
std::vector<SimNode> defaultFleet();

/// Reads a fleet file: YAML list of {name, role, labels, vcpus, ramMiB}.
std::vector<SimNode> fleetFromJson(const Json& j);
Json fleetToJson(const std::vector<SimNode>& fleet);

}  // namespace kupenstack::sim
