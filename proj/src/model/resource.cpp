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

#include "kupenstack/model/resource.hpp"

#include <algorithm>

namespace kupenstack {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::AlreadyExists: return "AlreadyExists";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::CompactedRevision: return "CompactedRevision";
    case ErrorCode::DuplicateController: return "DuplicateController";
    case ErrorCode::ServiceUnavailable: return "ServiceUnavailable";
    case ErrorCode::QuotaExceeded: return "QuotaExceeded";
    case ErrorCode::NoValidHost: return "NoValidHost";
    case ErrorCode::ProjectNotEmpty: return "ProjectNotEmpty";
    case ErrorCode::InUse: return "InUse";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {
std::string joinViolations(const std::vector<Violation>& violations) {
  std::string out = "validation failed:";
  for (const auto& v : violations) out += " " + v.path + ": " + v.message + ";";
  return out;
}
}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(ErrorCode::ValidationFailed, joinViolations(violations)),
      violations_(std::move(violations)) {}

}  // namespace kupenstack

namespace kupenstack::model {

const Condition* findCondition(const Conditions& conditions, ConditionType type) {
  auto it = std::find_if(conditions.begin(), conditions.end(),
                         [type](const Condition& c) { return c.type == type; });
  return it == conditions.end() ? nullptr : &*it;
}

bool isConditionTrue(const Conditions& conditions, ConditionType type) {
  const auto* c = findCondition(conditions, type);
  return c != nullptr && c->status == ConditionStatus::True;
}

bool setCondition(Conditions& conditions, ConditionType type, ConditionStatus status,
                  std::string reason, std::string message, std::int64_t observedGeneration,
                  Tick now) {
  auto it = std::find_if(conditions.begin(), conditions.end(),
                         [type](const Condition& c) { return c.type == type; });
  if (it == conditions.end()) {
    conditions.push_back({type, status, std::move(reason), std::move(message),
                          observedGeneration, now});
    std::sort(conditions.begin(), conditions.end(),
              [](const Condition& a, const Condition& b) { return a.type < b.type; });
    return true;
  }
  Condition next{type, status, std::move(reason), std::move(message), observedGeneration,
                 it->status == status ? it->lastTransition : now};
  if (next == *it) return false;
  *it = std::move(next);
  return true;
}

const ServiceSpec* OpenStackCloudSpec::find(std::string_view service) const {
  for (const auto& s : services)
    if (s.name == service) return &s;
  return nullptr;
}

bool isKnownKind(std::string_view kind) {
  return std::find(kAllKinds.begin(), kAllKinds.end(), kind) != kAllKinds.end();
}

bool isNamespacedKind(std::string_view kind) {
  return std::find(kNamespacedKinds.begin(), kNamespacedKinds.end(), kind) !=
         kNamespacedKinds.end();
}

namespace {
template <std::size_t I = 0>
Body makeBodyAt(std::string_view kind) {
  if constexpr (I == std::variant_size_v<Body>) {
    throw Error(ErrorCode::UnknownKind, "unknown kind \"" + std::string(kind) + "\"");
  } else {
    using T = std::variant_alternative_t<I, Body>;
    if (T::kind == kind) return Body{std::in_place_index<I>};
    return makeBodyAt<I + 1>(kind);
  }
}
}  // namespace

Body makeBody(std::string_view kind) { return makeBodyAt(kind); }

std::string_view ResourceObject::kind() const {
  return std::visit([](const auto& b) { return std::decay_t<decltype(b)>::kind; }, body);
}

bool ResourceObject::specEquals(const ResourceObject& other) const {
  if (body.index() != other.body.index()) return false;
  return std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        return b.spec == std::get<T>(other.body).spec;
      },
      body);
}

bool ResourceObject::statusEquals(const ResourceObject& other) const {
  if (body.index() != other.body.index()) return false;
  return std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        return b.status == std::get<T>(other.body).status;
      },
      body);
}

void ResourceObject::assignSpec(const ResourceObject& from) {
  std::visit(
      [&](auto& b) {
        using T = std::decay_t<decltype(b)>;
        b.spec = std::get<T>(from.body).spec;
      },
      body);
}

void ResourceObject::assignStatus(const ResourceObject& from) {
  std::visit(
      [&](auto& b) {
        using T = std::decay_t<decltype(b)>;
        b.status = std::get<T>(from.body).status;
      },
      body);
}

std::vector<std::string> serviceAssignedIDs(const ResourceObject& obj) {
  std::vector<std::string> ids;
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Instance>) {
          if (b.status.instanceID) ids.push_back(*b.status.instanceID);
        } else if constexpr (std::is_same_v<T, Image>) {
          if (b.status.imageID) ids.push_back(*b.status.imageID);
        } else if constexpr (std::is_same_v<typename T::Status, RemoteStatus>) {
          if (b.status.serviceAssignedID) ids.push_back(*b.status.serviceAssignedID);
        } else if constexpr (std::is_same_v<T, Namespace>) {
          auto it = obj.meta.annotations.find(std::string(kProjectIdAnnotation));
          if (it != obj.meta.annotations.end()) ids.push_back(it->second);
        }
      },
      obj.body);
  return ids;
}

const Conditions& conditionsOf(const ResourceObject& obj) {
  return std::visit([](const auto& b) -> const Conditions& { return b.status.conditions; },
                    obj.body);
}

const char* to_string(ConditionType v) {
  switch (v) {
    case ConditionType::Ready: return "Ready";
    case ConditionType::Progressing: return "Progressing";
    case ConditionType::Degraded: return "Degraded";
  }
  return "";
}

const char* to_string(ConditionStatus v) {
  switch (v) {
    case ConditionStatus::True: return "True";
    case ConditionStatus::False: return "False";
    case ConditionStatus::Unknown: return "Unknown";
  }
  return "";
}

const char* to_string(InstancePhase v) {
  switch (v) {
    case InstancePhase::Pending: return "Pending";
    case InstancePhase::Building: return "Building";
    case InstancePhase::Running: return "Running";
    case InstancePhase::Failed: return "Failed";
    case InstancePhase::Healing: return "Healing";
    case InstancePhase::Terminating: return "Terminating";
  }
  return "";
}

const char* to_string(ImagePhase v) {
  switch (v) {
    case ImagePhase::Pending: return "Pending";
    case ImagePhase::Importing: return "Importing";
    case ImagePhase::Active: return "Active";
    case ImagePhase::Failed: return "Failed";
  }
  return "";
}

const char* to_string(RemotePhase v) {
  switch (v) {
    case RemotePhase::Pending: return "Pending";
    case RemotePhase::Active: return "Active";
    case RemotePhase::Failed: return "Failed";
    case RemotePhase::Deleting: return "Deleting";
  }
  return "";
}

std::string phaseOf(const ResourceObject& obj) {
  return std::visit(
      [&](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Instance>) {
          return to_string(b.status.phase);
        } else if constexpr (std::is_same_v<T, Image>) {
          return to_string(b.status.phase);
        } else if constexpr (std::is_same_v<T, Namespace>) {
          return b.status.phase.empty() ? "Pending" : b.status.phase;
        } else if constexpr (std::is_same_v<T, OpenStackCloud>) {
          if (isConditionTrue(b.status.conditions, ConditionType::Ready)) return "Ready";
          if (isConditionTrue(b.status.conditions, ConditionType::Degraded)) return "Degraded";
          if (isConditionTrue(b.status.conditions, ConditionType::Progressing))
            return "Progressing";
          return "Pending";
        } else {
          return to_string(b.status.phase);
        }
      },
      obj.body);
}

}  // namespace kupenstack::model
