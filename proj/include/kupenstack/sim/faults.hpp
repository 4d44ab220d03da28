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

// Fault vocabulary and schedule file format.
//
//   - {tick: 40, action: crashVM, args: {random: true, count: 2}}
//   - {tick: 50, action: crashUnit, args: {service: nova}}
//   - {tick: 10, action: apiErrorBurst, args: {service: nova, ticks: 5}}
//   - {tick: 30, action: nodeDown, args: {name: compute-1, ticks: 10}}
//   - {tick: 0,  action: failBoot, args: {name: web-1, cause: "kernel panic"}}

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kupenstack/sim/types.hpp"

namespace kupenstack::sim {

enum class FaultKind { CrashVM, CrashUnit, ApiErrorBurst, NodeDown, FailBoot };
const char* to_string(FaultKind kind);
FaultKind parseFaultKind(std::string_view text);

struct FaultAction {
  Tick tick = 0;
  FaultKind kind = FaultKind::CrashVM;
  Json args = Json::object();

  Json toJson() const;
  static FaultAction fromJson(const Json& j);
};

struct FaultSchedule {
  std::uint64_t seed = 0;
  std::vector<FaultAction> actions;

  /// Accepts a bare list, or {seed, actions: [...]}. Throws ParseError.
  static FaultSchedule parse(std::string_view yamlText, std::string_view source = "schedule");
  Json toJson() const;
};

/// Boot-failure rule: VMs whose name (and optionally project name) match fail
/// when boot completes. remaining < 0 means persistent.
struct BootFailureRule {
  std::string name;
  std::string project;
  std::string cause;
  std::int64_t remaining = -1;
};

}  // namespace kupenstack::sim
