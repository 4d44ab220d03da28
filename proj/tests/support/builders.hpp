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

// Small object builders shared by the unit and acceptance tests.

#include <string>
#include <vector>

#include "kupenstack/engine/engine.hpp"
#include "kupenstack/engine/scenario.hpp"
#include "kupenstack/model/resource.hpp"

namespace kupenstack::testing {

using model::ResourceObject;

inline model::ServiceSpec service(std::string name, std::string version, std::int64_t replicas,
                                  model::StringMap overrides = {}) {
  return {std::move(name), std::move(version), replicas, std::move(overrides)};
}

inline ResourceObject cloud(std::vector<model::ServiceSpec> services, std::string name = "desk") {
  model::OpenStackCloudSpec spec;
  spec.services = std::move(services);
  return model::makeObject<model::OpenStackCloud>(std::move(name), "", spec);
}

/// keystone x1, glance x1, nova x novaReplicas, neutron x1.
inline ResourceObject standardCloud(const std::string& novaVersion = "1.0.0",
                                    std::int64_t novaReplicas = 2) {
  return cloud({service("keystone", "1.0.0", 1), service("glance", "1.0.0", 1),
                service("nova", novaVersion, novaReplicas), service("neutron", "1.0.0", 1)});
}

inline ResourceObject ns(std::string name) {
  return model::makeObject<model::Namespace>(std::move(name), "", {});
}

inline ResourceObject image(std::string name, std::string n = "default",
                            std::string uri = "https://images.example/cirros.qcow2") {
  model::ImageSpec spec;
  spec.sourceURI = std::move(uri);
  return model::makeObject<model::Image>(std::move(name), std::move(n), spec);
}

inline ResourceObject keypair(std::string name, std::string n = "default") {
  return model::makeObject<model::KeyPair>(std::move(name), std::move(n),
                                           {"ssh-ed25519 AAAAC3NzaC1lZDI1NTE5 ops"});
}

inline ResourceObject network(std::string name, std::string n = "default", bool shared = false) {
  return model::makeObject<model::Network>(std::move(name), std::move(n), {shared});
}

inline ResourceObject subnet(std::string name, std::string networkRef, std::string cidr,
                             std::string n = "default") {
  model::SubnetSpec spec;
  spec.networkRef = std::move(networkRef);
  spec.cidr = std::move(cidr);
  return model::makeObject<model::Subnet>(std::move(name), std::move(n), spec);
}

inline ResourceObject router(std::string name, std::vector<std::string> subnets,
                             std::string n = "default") {
  model::RouterSpec spec;
  spec.subnetRefs = std::move(subnets);
  return model::makeObject<model::Router>(std::move(name), std::move(n), spec);
}

inline ResourceObject instance(std::string name, std::string n = "default",
                               model::StringMap selector = {}, std::string imageRef = "cirros",
                               std::vector<std::string> subnets = {"net-a"}) {
  model::InstanceSpec spec;
  spec.flavor = {1, 1024, 10};
  spec.imageRef = std::move(imageRef);
  spec.subnetRefs = std::move(subnets);
  spec.nodeSelector = std::move(selector);
  return model::makeObject<model::Instance>(std::move(name), std::move(n), spec);
}

/// Image "cirros", network "net", subnet "net-a" 10.0.0.0/24 in namespace n.
inline void applyBaseWorkload(engine::Engine& e, const std::string& n = "default") {
  e.apply(image("cirros", n));
  e.apply(network("net", n));
  e.apply(subnet("net-a", "net", "10.0.0.0/24", n));
}

inline ObjectKey key(std::string kind, std::string name, std::string n = "") {
  return {std::move(kind), std::move(n), std::move(name)};
}

inline const model::Condition* condition(const ResourceObject& obj, model::ConditionType t) {
  return model::findCondition(model::conditionsOf(obj), t);
}

inline bool isReady(const ResourceObject& obj) {
  return model::isConditionTrue(model::conditionsOf(obj), model::ConditionType::Ready);
}

inline std::string readyReason(const ResourceObject& obj) {
  const auto* c = condition(obj, model::ConditionType::Ready);
  return c == nullptr ? "" : c->reason;
}

/// Engine with a cloud applied and run until quiet.
inline std::unique_ptr<engine::Engine> readyEngine(std::uint64_t seed = 1,
                                                   ResourceObject c = standardCloud()) {
  engine::EngineOptions o;
  o.seed = seed;
  auto e = std::make_unique<engine::Engine>(o);
  e->apply(c);
  e->runUntilQuiescent(200);
  return e;
}

inline model::InstanceStatus instanceStatus(engine::Engine& e, const std::string& name,
                                            const std::string& n = "default") {
  return e.store().mustGet(key("Instance", name, n)).as<model::Instance>().status;
}

inline std::vector<sim::ServiceUnit> liveUnits(engine::Engine& e, const std::string& service) {
  std::vector<sim::ServiceUnit> out;
  for (const auto& [uid, u] : e.sim().view().units)
    if (u.service == service && u.state != sim::UnitState::Terminating) out.push_back(u);
  return out;
}

inline sim::FaultAction fault(const std::string& action, model::Json args, Tick tick = 0) {
  return sim::FaultAction::fromJson({{"tick", tick}, {"action", action}, {"args", args}});
}

}  // namespace kupenstack::testing
