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

// Scripted runs: a timeline of applies, deletes and fault injections played
// against a fresh engine, with safety invariants sampled every tick.
//
//   seed: 7
//   ticks: 300
//   faults: [{tick: 40, action: crashVM, args: {random: true, count: 2}}]
//   steps:
//     - {tick: 0, op: apply, args: {file: manifests/cloud.yaml}}
//     - {tick: 5, op: apply, args: {manifest: {kind: Image, ...}}}
//     - {tick: 90, op: delete, args: {kind: Instance, name: web-0}}
//     - {tick: 60, op: inject, args: {action: crashUnit, service: nova}}
//
// A bare list is read as `steps`.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kupenstack/engine/engine.hpp"
#include "kupenstack/sim/faults.hpp"

namespace kupenstack::engine {

struct ScenarioStep {
  Tick tick = 0;
  std::string op;  // apply | delete | inject
  Json args = Json::object();
};

struct Scenario {
  std::optional<std::uint64_t> seed;
  std::optional<Tick> ticks;
  std::vector<sim::SimNode> fleet;
  std::vector<sim::FaultAction> faults;
  std::vector<ScenarioStep> steps;
  /// Manifests referenced by `file:` resolve against this directory.
  std::filesystem::path baseDir = ".";

  static Scenario parse(std::string_view yamlText, std::string_view source = "scenario",
                        std::filesystem::path baseDir = ".");
  static Scenario load(const std::filesystem::path& path);
};

struct InvariantResult {
  std::string name;
  bool passed = true;
  std::string detail;  // first violation
};

/// Samples safety properties tick by tick. Usable on any engine, with or
/// without a scenario.
class InvariantMonitor {
 public:
  /// Call once per tick after the engine stepped.
  void observe(Engine& engine);
  /// End-of-run checks (bijection, degraded) plus the sampled ones.
  std::vector<InvariantResult> finish(Engine& engine);

  static bool idStewardship(Engine& engine, std::string* detail = nullptr);
  static bool namespaceProjectBijection(Engine& engine, std::string* detail = nullptr);

 private:
  void fail(const std::string& name, const std::string& detail);

  std::map<std::string, InvariantResult> results_;
  std::map<std::string, std::string> unitIdentity_;
  struct InstanceTrack {
    std::optional<std::string> lastID;
    std::int64_t restartsAtLastID = 0;
    std::int64_t lastRestarts = 0;
  };
  std::map<std::string, InstanceTrack> instances_;
  std::size_t logChecked_ = 0;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<Tick> ticks;
  bool deterministic = true;
};

struct ScenarioReport {
  std::uint64_t seed = 0;
  Tick ticks = 0;
  bool passed = false;
  std::vector<InvariantResult> invariants;
  Json json;  // full report
  std::string digest;
  std::string mutationLog;  // jsonl export
};

inline constexpr Tick kDefaultScenarioTicks = 300;
inline const std::set<std::string> kApiActors = {"keystone", "glance",         "nova",
                                                 "neutron",  "fleet",          "fault-injector",
                                                 "sim-clock"};

ScenarioReport runScenario(const Scenario& scenario, const RunOptions& options = {});

/// Applies one step to an engine. Throws on malformed steps.
void applyStep(Engine& engine, const ScenarioStep& step, const std::filesystem::path& baseDir);

/// Objects, mutation log and health events of an engine as one canonical
/// JSON value; byte-identical across runs with the same seed and inputs.
Json worldJson(Engine& engine);

}  // namespace kupenstack::engine
