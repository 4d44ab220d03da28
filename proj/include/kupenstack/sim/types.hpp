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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kupenstack/common.hpp"
#include "kupenstack/model/cidr.hpp"
#include "kupenstack/model/codec.hpp"
#include "kupenstack/model/resource.hpp"

namespace kupenstack::sim {

using model::Json;

enum class NodeRole { ControlPlane, Compute };
const char* to_string(NodeRole role);

struct Capacity {
  std::int64_t vcpus = 8;
  std::int64_t ramMiB = 16384;
  bool operator==(const Capacity&) const = default;
};

struct SimNode {
  std::string name;
  NodeRole role = NodeRole::Compute;
  model::StringMap labels;
  bool healthy = true;
  Capacity capacity;
  std::optional<Tick> downUntil;
  bool operator==(const SimNode&) const = default;
};

enum class UnitState { Starting, Ready, Failed, Terminating };
const char* to_string(UnitState s);

/// One immutable replica of an OpenStack service. Identity is
/// service + version + configHash + uid; none of these change after creation.
struct ServiceUnit {
  std::string uid;
  std::string service;
  std::string version;
  std::string configHash;
  std::string node;
  UnitState state = UnitState::Starting;
  Tick startTick = 0;
  Tick readyAt = 0;
  ObjectKey owner;
  std::string failureCause;
  bool operator==(const ServiceUnit&) const = default;
};

enum class VmState { Building, Running, Failed, Deleted };
const char* to_string(VmState s);

struct SimVM {
  std::string id;
  std::string name;
  std::string projectID;
  std::string node;
  VmState state = VmState::Building;
  model::Flavor flavor;
  std::string imageID;
  std::optional<std::string> keypairID;
  std::optional<std::string> failureCause;
  Tick createdTick = 0;
  Tick readyAt = 0;
  bool operator==(const SimVM&) const = default;
};

struct SimProject {
  std::string id;
  std::string name;
  std::string domain = "default";
  bool operator==(const SimProject&) const = default;
};

enum class ImageState { Importing, Active, Failed };
const char* to_string(ImageState s);

struct SimImage {
  std::string id;
  std::string projectID;
  std::string name;
  std::string ownerTag;
  model::ImageSpec spec;
  ImageState state = ImageState::Importing;
  Tick readyAt = 0;
  bool operator==(const SimImage&) const = default;
};

struct SimNetwork {
  std::string id;
  std::string projectID;
  std::string name;
  bool shared = false;
  bool operator==(const SimNetwork&) const = default;
};

struct SimSubnet {
  std::string id;
  std::string projectID;
  std::string name;
  std::string networkID;
  model::Cidr cidr;
  model::IpRange pool;
  /// owner -> address
  std::map<std::string, model::Ipv4> allocations;
  bool operator==(const SimSubnet& o) const {
    return id == o.id && projectID == o.projectID && name == o.name &&
           networkID == o.networkID && cidr.network == o.cidr.network &&
           cidr.prefix == o.cidr.prefix && pool.first == o.pool.first &&
           pool.last == o.pool.last && allocations == o.allocations;
  }
};

struct SimRouter {
  std::string id;
  std::string projectID;
  std::string name;
  bool externalGateway = false;
  std::set<std::string> subnetIDs;
  bool operator==(const SimRouter&) const = default;
};

struct SimKeyPair {
  std::string id;
  std::string projectID;
  std::string name;
  std::string publicKey;
  bool operator==(const SimKeyPair&) const = default;
};

/// One simulator state change.
struct MutationEntry {
  Tick tick = 0;
  std::string actor;
  std::string operation;
  std::string target;
  std::string summary;  // "before->after"

  Json toJson() const;
  bool operator==(const MutationEntry&) const = default;
};

struct HealthEvent {
  Tick tick = 0;
  std::string target;  // "unit/<uid>" or "vm/<id>"
  std::string owner;   // owning object key, if known
  std::string cause;
  bool operator==(const HealthEvent&) const = default;
};

/// Placement request for a VM (Nova) or a service unit (fleet).
struct Placement {
  NodeRole role = NodeRole::Compute;
  model::StringMap selector;
};

struct VmRequest {
  std::string projectID;
  std::string name;
  model::Flavor flavor;
  std::string imageID;
  std::optional<std::string> keypairID;
  Placement placement;
};

struct UnitRequest {
  ObjectKey owner;
  std::string service;
  std::string version;
  std::string configHash;
};

/// Read-only copy of the whole simulated plane, for oracles and output.
struct SimView {
  Tick tick = 0;
  std::map<std::string, SimNode> nodes;
  std::map<std::string, ServiceUnit> units;
  std::map<std::string, SimProject> projects;
  std::map<std::string, SimImage> images;
  std::map<std::string, SimVM> vms;
  std::map<std::string, SimNetwork> networks;
  std::map<std::string, SimSubnet> subnets;
  std::map<std::string, SimRouter> routers;
  std::map<std::string, SimKeyPair> keypairs;

  /// Ids of every remote object the OpenStack services hold.
  std::set<std::string> remoteObjectIDs() const;
  /// Ready units for a service across all owners.
  std::int64_t readyUnits(std::string_view service) const;
};

}  // namespace kupenstack::sim
