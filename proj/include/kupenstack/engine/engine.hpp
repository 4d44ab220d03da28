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

// One process-local world: logical clock, state store, simulated fleet and
// services, controller manager and the health agent. Everything advances on
// the same tick.

#include <filesystem>
#include <memory>
#include <optional>

#include "kupenstack/controllers/controllers.hpp"
#include "kupenstack/runtime/controller_runtime.hpp"
#include "kupenstack/sim/simulator.hpp"
#include "kupenstack/store/state_store.hpp"

namespace kupenstack::engine {

using model::Json;

struct EngineOptions {
  std::uint64_t seed = 0;
  bool deterministic = true;
  bool recordInvocations = false;
  sim::SimConfig sim;
  runtime::ControllerConfig controller;
};

enum class ApplyResult { Created, Configured, Unchanged };
const char* to_string(ApplyResult r);

class Engine : public runtime::TickDriver {
 public:
  explicit Engine(EngineOptions options = {});
  /// Rebuilds a world from snapshot() output. Controllers are registered
  /// after the store is restored, so they start from its current state.
  Engine(EngineOptions options, const Json& snapshot);
  ~Engine() override;

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  LogicalClock& clock() { return clock_; }
  store::StateStore& store() { return *store_; }
  sim::Simulator& sim() { return *sim_; }
  runtime::Manager& manager() { return *manager_; }
  controllers::ResourceControllers& resources() { return *resources_; }
  const EngineOptions& options() const { return options_; }
  Tick now() const { return clock_.now(); }

  // TickDriver
  void advance(Tick now) override;
  bool idle() const override;

  /// Exactly `ticks` ticks.
  runtime::ManagerReport run(Tick ticks);
  /// Until controllers and simulator are both quiet, or the budget runs out.
  runtime::ManagerReport runUntilQuiescent(Tick budget);
  bool quiescent();

  /// Create-or-update with full spec replacement; retries conflicts.
  ApplyResult apply(const model::ResourceObject& desired);

  Json snapshot() const;
  void save(const std::filesystem::path& path) const;
  static std::unique_ptr<Engine> load(const std::filesystem::path& path,
                                      EngineOptions options = {});

 private:
  void wire(const Json* snapshot);

  EngineOptions options_;
  LogicalClock clock_;
  std::unique_ptr<store::StateStore> store_;
  std::unique_ptr<sim::Simulator> sim_;
  std::unique_ptr<runtime::Manager> manager_;
  std::unique_ptr<controllers::CloudController> cloud_;
  std::unique_ptr<controllers::ResourceControllers> resources_;
  std::unique_ptr<sim::ValidationAgent> agent_;
};

}  // namespace kupenstack::engine
