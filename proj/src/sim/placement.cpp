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

#include "kupenstack/sim/placement.hpp"

#include <tuple>

namespace kupenstack::sim {

bool selectorMatches(const model::StringMap& selector, const model::StringMap& labels) {
  for (const auto& [k, v] : selector) {
    auto it = labels.find(k);
    if (it == labels.end() || it->second != v) return false;
  }
  return true;
}

std::string pickNode(const std::vector<NodeLoad>& loads, const Placement& placement,
                     const model::Flavor* flavor) {
  const NodeLoad* best = nullptr;
  bool anyMatch = false;
  for (const auto& load : loads) {
    const SimNode& n = *load.node;
    if (!n.healthy || n.role != placement.role || !selectorMatches(placement.selector, n.labels))
      continue;
    anyMatch = true;
    if (flavor != nullptr && (load.usedVcpus + flavor->vcpus > n.capacity.vcpus ||
                              load.usedRamMiB + flavor->ramMiB > n.capacity.ramMiB))
      continue;
    if (best == nullptr ||
        std::tie(load.workloads, n.name) < std::tie(best->workloads, best->node->name))
      best = &load;
  }
  if (!anyMatch) throw Error(ErrorCode::NoValidHost, "no node matches role and selector");
  if (best == nullptr) throw Error(ErrorCode::QuotaExceeded, "all matching nodes are full");
  return best->node->name;
}

std::vector<SimNode> defaultFleet() {
  std::vector<SimNode> fleet;
  for (int i = 0; i < 3; ++i) {
    SimNode n;
    n.name = "control-" + std::to_string(i);
    n.role = NodeRole::ControlPlane;
    n.labels = {{"kubernetes.io/hostname", n.name},
                {"node-role.kubernetes.io/control-plane", "true"}};
    fleet.push_back(n);
  }
  const char* aggregates[] = {"ssd", "ssd", "hdd"};
  for (int i = 0; i < 3; ++i) {
    SimNode n;
    n.name = "compute-" + std::to_string(i);
    n.role = NodeRole::Compute;
    n.labels = {{"kubernetes.io/hostname", n.name},
                {"node-role.kubernetes.io/compute", "true"},
                {"aggregate", aggregates[i]}};
    fleet.push_back(n);
  }
  return fleet;
}

std::vector<SimNode> fleetFromJson(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "fleet must be a list of nodes");
  std::vector<SimNode> fleet;
  for (const auto& item : j) {
    SimNode n;
    n.name = item.at("name").get<std::string>();
    auto role = item.value("role", std::string("compute"));
    if (role == "control-plane") {
      n.role = NodeRole::ControlPlane;
    } else if (role == "compute") {
      n.role = NodeRole::Compute;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown node role \"" + role + "\"");
    }
    if (item.contains("labels"))
      for (const auto& [k, v] : item.at("labels").items())
        n.labels[k] = v.is_string() ? v.get<std::string>() : v.dump();
    n.capacity.vcpus = item.value("vcpus", std::int64_t{8});
    n.capacity.ramMiB = item.value("ramMiB", std::int64_t{16384});
    fleet.push_back(std::move(n));
  }
  return fleet;
}

Json fleetToJson(const std::vector<SimNode>& fleet) {
  Json arr = Json::array();
  for (const auto& n : fleet) {
    arr.push_back({{"name", n.name},
                   {"role", to_string(n.role)},
                   {"labels", n.labels},
                   {"vcpus", n.capacity.vcpus},
                   {"ramMiB", n.capacity.ramMiB}});
  }
  return arr;
}

}  // namespace kupenstack::sim
