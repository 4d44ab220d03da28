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

// Reconcilers for the declarative kinds. Each one reads the object, compares
// it with what the simulated services report, and issues the smallest set of
// API calls that moves the world toward the spec. None of them keep state
// between invocations beyond what is in the store or the services.

#include <optional>
#include <string>
#include <vector>

#include "kupenstack/common.hpp"
#include "kupenstack/model/resource.hpp"
#include "kupenstack/runtime/controller_runtime.hpp"
#include "kupenstack/sim/simulator.hpp"
#include "kupenstack/store/state_store.hpp"

namespace kupenstack::controllers {

using runtime::ReconcileOutcome;

struct Context {
  store::StateStore& store;
  sim::Simulator& sim;
  const LogicalClock& clock;
  runtime::ControllerConfig config;

  Tick now() const { return clock.now(); }
};

// ---- cloud lifecycle ---------------------------------------------------------

/// Desired unit template for one service.
struct ServicePlan {
  std::string service;
  std::string version;
  std::string configHash;
  std::int64_t replicas = 0;
  bool operator==(const ServicePlan&) const = default;
};

/// Pure: the unit templates a cloud spec asks for, keystone first, then in
/// spec order.
std::vector<ServicePlan> renderPlan(const model::OpenStackCloudSpec& spec);

/// Rollout bounds for immutable unit replacement.
inline constexpr std::int64_t kMaxSurge = 1;
inline constexpr std::int64_t kMaxUnavailable = 0;

class CloudController {
 public:
  explicit CloudController(Context ctx) : ctx_(ctx) {}
  ReconcileOutcome reconcile(const ObjectKey& key);
  runtime::ControllerHandle registerWith(runtime::Manager& manager);

 private:
  Context ctx_;
};

// ---- OpenStack resources ---------------------------------------------------------

inline constexpr std::int64_t kHealRetryLimit = 5;

class ResourceControllers {
 public:
  explicit ResourceControllers(Context ctx) : ctx_(ctx) {}

  ReconcileOutcome reconcileNamespace(const ObjectKey& key);
  ReconcileOutcome reconcileImage(const ObjectKey& key);
  ReconcileOutcome reconcileKeyPair(const ObjectKey& key);
  ReconcileOutcome reconcileNetwork(const ObjectKey& key);
  ReconcileOutcome reconcileSubnet(const ObjectKey& key);
  ReconcileOutcome reconcileRouter(const ObjectKey& key);
  ReconcileOutcome reconcileInstance(const ObjectKey& key);

  /// Registers one controller per kind, with the cross-kind watches.
  void registerWith(runtime::Manager& manager);

  /// Instance that currently owns a VM id, if any.
  std::optional<ObjectKey> vmOwner(const std::string& vmID) const;

 private:
  std::optional<std::string> projectFor(const std::string& ns) const;
  std::optional<model::ResourceObject> resolveNetwork(const model::ResourceObject& subnet) const;
  bool ensureFinalizer(model::ResourceObject& obj, std::string_view finalizer);
  void dropFinalizer(const ObjectKey& key, std::string_view finalizer);
  ReconcileOutcome healInstance(model::ResourceObject& obj, const std::string& projectID,
                                const std::string& cause);
  ReconcileOutcome createInstanceVM(model::ResourceObject& obj, const std::string& projectID);
  ReconcileOutcome deleteInstance(model::ResourceObject& obj);

  Context ctx_;
};

/// Wraps a reconciler so expected service errors become Failed outcomes
/// (and so retries with backoff) instead of panics.
runtime::Reconciler guarded(std::function<ReconcileOutcome(const ObjectKey&)> fn);

}  // namespace kupenstack::controllers
