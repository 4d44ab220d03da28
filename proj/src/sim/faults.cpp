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

#include "kupenstack/sim/faults.hpp"

namespace kupenstack::sim {

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::CrashVM: return "crashVM";
    case FaultKind::CrashUnit: return "crashUnit";
    case FaultKind::ApiErrorBurst: return "apiErrorBurst";
    case FaultKind::NodeDown: return "nodeDown";
    case FaultKind::FailBoot: return "failBoot";
  }
  return "";
}

FaultKind parseFaultKind(std::string_view text) {
  for (auto k : {FaultKind::CrashVM, FaultKind::CrashUnit, FaultKind::ApiErrorBurst,
                 FaultKind::NodeDown, FaultKind::FailBoot}) {
    if (text == to_string(k)) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown fault action \"" + std::string(text) + "\"");
}

Json FaultAction::toJson() const {
  return {{"tick", tick}, {"action", to_string(kind)}, {"args", args}};
}

FaultAction FaultAction::fromJson(const Json& j) {
  if (!j.is_object() || !j.contains("action"))
    throw Error(ErrorCode::InvalidArgument, "fault entry needs an action");
  FaultAction a;
  a.tick = j.value("tick", Tick{0});
  a.kind = parseFaultKind(j.at("action").get<std::string>());
  if (j.contains("args") && !j.at("args").is_null()) a.args = j.at("args");
  if (!a.args.is_object()) throw Error(ErrorCode::InvalidArgument, "fault args must be a map");
  return a;
}

FaultSchedule FaultSchedule::parse(std::string_view yamlText, std::string_view source) {
  auto docs = model::yamlDocumentsToJson(yamlText, source);
  FaultSchedule schedule;
  if (docs.empty() || docs.front().is_null()) return schedule;
  const Json& root = docs.front();
  const Json* list = &root;
  if (root.is_object()) {
    schedule.seed = root.value("seed", std::uint64_t{0});
    if (!root.contains("actions")) throw model::ParseError(std::string(source), 1, "missing actions");
    list = &root.at("actions");
  }
  if (!list->is_array())
    throw model::ParseError(std::string(source), 1, "fault schedule must be a list");
  for (const auto& item : *list) {
    try {
      schedule.actions.push_back(FaultAction::fromJson(item));
    } catch (const std::exception& e) {
      throw model::ParseError(std::string(source), 1, e.what());
    }
  }
  return schedule;
}

Json FaultSchedule::toJson() const {
  Json actionsJson = Json::array();
  for (const auto& a : actions) actionsJson.push_back(a.toJson());
  return {{"seed", seed}, {"actions", actionsJson}};
}

}  // namespace kupenstack::sim
