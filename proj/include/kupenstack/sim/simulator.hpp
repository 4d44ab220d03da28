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

// In-process simulated planes: the node fleet, the OpenStack services behind
// their API facades, the fault injector, and the mutation log.
//
// Simulator state is private. Controllers reach it only through the facade
// objects (Keystone, Glance, Nova, Neutron, Fleet); the fault injector and the
// clock are the only other writers. Every state change appends exactly one
// MutationEntry.

#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kupenstack/common.hpp"
#include "kupenstack/sim/faults.hpp"
#include "kupenstack/sim/types.hpp"

namespace kupenstack::sim {

struct SimConfig {
  Tick vmBootLatency = 3;
  Tick unitStartLatency = 2;
  Tick imageImportLatency = 1;
  std::uint64_t seed = 0;
  std::vector<SimNode> fleet;  // empty -> defaultFleet()
};

class Simulator;

class Keystone {
 public:
  std::string createProject(const std::string& name);
  SimProject getProject(const std::string& id) const;
  std::optional<SimProject> findProject(const std::string& name) const;
  /// Fails with ProjectNotEmpty while any resource belongs to the project.
  void deleteProject(const std::string& id);

 private:
  friend class Simulator;
  explicit Keystone(Simulator& sim) : sim_(sim) {}
  Simulator& sim_;
};

class Glance {
 public:
  std::string createImage(const std::string& projectID, const std::string& name,
                          const std::string& ownerTag, const model::ImageSpec& spec);
  SimImage getImage(const std::string& id) const;
  std::optional<SimImage> findImageByOwner(const std::string& projectID,
                                           const std::string& ownerTag) const;
  void deleteImage(const std::string& id);

 private:
  friend class Simulator;
  explicit Glance(Simulator& sim) : sim_(sim) {}
  Simulator& sim_;
};

class Nova {
 public:
  std::string createVM(const VmRequest& request);
  SimVM getVM(const std::string& id) const;
  void deleteVM(const std::string& id);

  std::string createKeyPair(const std::string& projectID, const std::string& name,
                            const std::string& publicKey);
  SimKeyPair getKeyPair(const std::string& id) const;
  void deleteKeyPair(const std::string& id);

 private:
  friend class Simulator;
  explicit Nova(Simulator& sim) : sim_(sim) {}
  Simulator& sim_;
};

class Neutron {
 public:
  std::string createNetwork(const std::string& projectID, const std::string& name, bool shared);
  SimNetwork getNetwork(const std::string& id) const;
  void setNetworkShared(const std::string& id, bool shared);
  void deleteNetwork(const std::string& id);

  /// The network must belong to the project or be shared.
  std::string createSubnet(const std::string& projectID, const std::string& name,
                           const std::string& networkID, const std::string& cidr,
                           const std::optional<model::AllocationPool>& pool);
  SimSubnet getSubnet(const std::string& id) const;
  void deleteSubnet(const std::string& id);

  /// Lowest free address in the pool. Idempotent per owner.
  std::string allocateIP(const std::string& subnetID, const std::string& owner);
  void releaseIP(const std::string& subnetID, const std::string& address);

  std::string createRouter(const std::string& projectID, const std::string& name,
                           bool externalGateway);
  SimRouter getRouter(const std::string& id) const;
  void attachSubnet(const std::string& routerID, const std::string& subnetID);
  void detachSubnet(const std::string& routerID, const std::string& subnetID);
  void deleteRouter(const std::string& id);

 private:
  friend class Simulator;
  explicit Neutron(Simulator& sim) : sim_(sim) {}
  Simulator& sim_;
};

/// Kubernetes-side workload API: runs service units on control-plane nodes.
class Fleet {
 public:
  std::string createUnit(const UnitRequest& request);
  void deleteUnit(const std::string& uid);
  std::vector<ServiceUnit> listUnits(const ObjectKey& owner) const;
  std::optional<ServiceUnit> getUnit(const std::string& uid) const;
  std::vector<SimNode> listNodes() const;

 private:
  friend class Simulator;
  explicit Fleet(Simulator& sim) : sim_(sim) {}
  Simulator& sim_;
};

class FaultInjector {
 public:
  /// Applies an action now, regardless of its tick.
  void inject(const FaultAction& action);
  /// Queues actions to fire at their tick; reseeds the fault RNG.
  void loadSchedule(const FaultSchedule& schedule);

 private:
  friend class Simulator;
  explicit FaultInjector(Simulator& sim) : sim_(sim) {}
  Simulator& sim_;
};

class Simulator {
 public:
  Simulator(const LogicalClock& clock, SimConfig config);
  explicit Simulator(const LogicalClock& clock) : Simulator(clock, SimConfig{}) {}

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  Keystone& keystone() { return keystone_; }
  Glance& glance() { return glance_; }
  Nova& nova() { return nova_; }
  Neutron& neutron() { return neutron_; }
  Fleet& fleet() { return fleet_; }
  FaultInjector& faults() { return faults_; }

  /// Fires scheduled faults and completes timed transitions for `now`.
  void advance(Tick now);
  /// No pending timed transitions, scheduled faults or active outages.
  bool idle() const;

  SimView view() const;
  std::vector<MutationEntry> mutationLog() const;
  std::size_t mutationCount() const;
  std::string mutationLogJsonl() const;

  void recordHealthEvent(HealthEvent event);
  std::vector<HealthEvent> healthEvents() const;

  const SimConfig& config() const { return config_; }

  Json snapshot() const;
  void restore(const Json& j);

 private:
  friend class Keystone;
  friend class Glance;
  friend class Nova;
  friend class Neutron;
  friend class Fleet;
  friend class FaultInjector;

  void log(const std::string& actor, const std::string& op, const std::string& target,
           const std::string& summary);
  std::string nextID(const std::string& prefix);
  void requireService(const std::string& service) const;
  void requireProject(const std::string& projectID) const;
  void applyFault(const FaultAction& action);
  void failVM(SimVM& vm, const std::string& cause, const std::string& actor);
  void failUnit(ServiceUnit& unit, const std::string& cause, const std::string& actor);
  std::uint64_t randomIndex(std::uint64_t n);
  Tick now() const { return clock_.now(); }

  const LogicalClock& clock_;
  SimConfig config_;
  mutable std::recursive_mutex mu_;

  std::map<std::string, SimNode> nodes_;
  std::map<std::string, ServiceUnit> units_;
  std::map<std::string, SimProject> projects_;
  std::map<std::string, SimImage> images_;
  std::map<std::string, SimVM> vms_;
  std::map<std::string, SimNetwork> networks_;
  std::map<std::string, SimSubnet> subnets_;
  std::map<std::string, SimRouter> routers_;
  std::map<std::string, SimKeyPair> keypairs_;

  std::vector<FaultAction> scheduled_;
  std::map<std::string, Tick> apiBurstUntil_;
  std::vector<BootFailureRule> bootFailures_;
  std::mt19937_64 rng_;
  std::uint64_t idCounter_ = 0;
  std::vector<MutationEntry> log_;
  std::vector<HealthEvent> health_;

  Keystone keystone_{*this};
  Glance glance_{*this};
  Nova nova_{*this};
  Neutron neutron_{*this};
  Fleet fleet_{*this};
  FaultInjector faults_{*this};
};

/// Watches unit and VM health each tick and notifies the owning controller
/// of anything newly observed Failed.
class ValidationAgent {
 public:
  using Notify = std::function<void(const ObjectKey&)>;
  using VmOwnerLookup = std::function<std::optional<ObjectKey>(const std::string& vmID)>;

  ValidationAgent(Simulator& sim, Notify notify, VmOwnerLookup vmOwner);

  /// Returns the number of notifications sent.
  std::size_t sweep(Tick now);
  /// Failures exist that the next sweep would report.
  bool pending() const;

  Json snapshot() const;
  void restore(const Json& j);

 private:
  Simulator& sim_;
  Notify notify_;
  VmOwnerLookup vmOwner_;
  std::set<std::string> reportedUnits_;
  std::set<std::string> reportedVMs_;
};

}  // namespace kupenstack::sim
