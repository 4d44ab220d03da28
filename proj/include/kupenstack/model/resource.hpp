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

// Declarative resource vocabulary. Every kind is a {Spec, Status} pair held
// in a variant, so the kind of a ResourceObject can never disagree with its
// payload.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kupenstack/common.hpp"

namespace kupenstack::model {

inline constexpr std::string_view kApiVersion = "kupenstack.io/v1alpha1";
inline constexpr std::string_view kProjectIdAnnotation = "kupenstack.io/project-id";
inline constexpr std::string_view kProjectDrainFinalizer = "project-drain";
inline constexpr std::string_view kCloudTeardownFinalizer = "cloud-teardown";
inline constexpr std::string_view kRemoteCleanupFinalizer = "kupenstack.io/remote-cleanup";

/// Topology collapses to single defaults: one region per cluster, one
/// domain, one availability zone.
struct TopologyConstants {
  static constexpr std::string_view region = "default";
  static constexpr std::string_view domain = "default";
  static constexpr std::string_view availabilityZone = "default";
};

using StringMap = std::map<std::string, std::string>;

struct ObjectMeta {
  std::string name;
  std::string ns;
  std::string uid;
  std::int64_t resourceVersion = 0;
  std::int64_t generation = 0;
  Tick creationTimestamp = 0;
  StringMap labels;
  StringMap annotations;
  std::set<std::string> finalizers;
  std::optional<Tick> deletionTimestamp;

  bool operator==(const ObjectMeta&) const = default;
};

enum class ConditionType { Ready, Progressing, Degraded };
enum class ConditionStatus { True, False, Unknown };

struct Condition {
  ConditionType type = ConditionType::Ready;
  ConditionStatus status = ConditionStatus::Unknown;
  std::string reason;
  std::string message;
  std::int64_t observedGeneration = 0;
  Tick lastTransition = 0;

  bool operator==(const Condition&) const = default;
};

/// At most one condition per type; kept sorted by type.
using Conditions = std::vector<Condition>;

const Condition* findCondition(const Conditions& conditions, ConditionType type);
bool isConditionTrue(const Conditions& conditions, ConditionType type);

/// Upserts a condition. lastTransition only moves when status flips.
/// Returns true if anything changed.
bool setCondition(Conditions& conditions, ConditionType type, ConditionStatus status,
                  std::string reason, std::string message, std::int64_t observedGeneration,
                  Tick now);

// ---- Namespace -------------------------------------------------------------

struct NamespaceSpec {
  bool operator==(const NamespaceSpec&) const = default;
};

struct NamespaceStatus {
  std::string phase;  // Active | Terminating
  Conditions conditions;
  bool operator==(const NamespaceStatus&) const = default;
};

// ---- OpenStackCloud --------------------------------------------------------

inline const std::vector<std::string> kKnownServices = {"keystone", "glance", "nova",
                                                        "neutron"};

struct ServiceSpec {
  std::string name;
  std::string version;
  std::int64_t replicas = 1;
  StringMap configOverrides;
  bool operator==(const ServiceSpec&) const = default;
};

struct OpenStackCloudSpec {
  std::vector<ServiceSpec> services;
  bool operator==(const OpenStackCloudSpec&) const = default;

  const ServiceSpec* find(std::string_view service) const;
};

struct ServiceState {
  std::int64_t readyReplicas = 0;
  std::int64_t desiredReplicas = 0;
  std::string activeVersion;
  std::string activeConfigHash;
  bool operator==(const ServiceState&) const = default;
};

struct OpenStackCloudStatus {
  std::map<std::string, ServiceState> serviceStates;
  Conditions conditions;
  bool operator==(const OpenStackCloudStatus&) const = default;
};

// ---- Instance ---------------------------------------------------------------

struct Flavor {
  std::int64_t vcpus = 1;
  std::int64_t ramMiB = 512;
  std::int64_t diskGiB = 1;
  bool operator==(const Flavor&) const = default;
};

struct InstanceSpec {
  Flavor flavor;
  std::string imageRef;
  std::optional<std::string> keyPairRef;
  std::vector<std::string> subnetRefs;
  StringMap nodeSelector;
  bool operator==(const InstanceSpec&) const = default;
};

enum class InstancePhase { Pending, Building, Running, Failed, Healing, Terminating };

struct InstanceStatus {
  std::optional<std::string> instanceID;
  std::string node;
  std::vector<std::string> ipAddresses;
  InstancePhase phase = InstancePhase::Pending;
  std::int64_t restartCount = 0;
  // Consecutive heal attempts since the VM was last seen Running.
  std::int64_t healAttempts = 0;
  std::optional<Tick> nextHealTick;
  std::string lastFailureCause;
  Conditions conditions;
  bool operator==(const InstanceStatus&) const = default;
};

// ---- Image --------------------------------------------------------------------

struct ImageSpec {
  std::string sourceURI;
  std::string diskFormat = "qcow2";
  std::string containerFormat = "bare";
  bool operator==(const ImageSpec&) const = default;
};

enum class ImagePhase { Pending, Importing, Active, Failed };

struct ImageStatus {
  std::optional<std::string> imageID;
  ImagePhase phase = ImagePhase::Pending;
  Conditions conditions;
  bool operator==(const ImageStatus&) const = default;
};

// ---- Network / Subnet / Router / KeyPair --------------------------------------

enum class RemotePhase { Pending, Active, Failed, Deleting };

/// Status shared by the simple "ensure a remote object" kinds.
struct RemoteStatus {
  std::optional<std::string> serviceAssignedID;
  RemotePhase phase = RemotePhase::Pending;
  Conditions conditions;
  bool operator==(const RemoteStatus&) const = default;
};

struct NetworkSpec {
  bool shared = false;
  bool operator==(const NetworkSpec&) const = default;
};

struct AllocationPool {
  std::string start;
  std::string end;
  bool operator==(const AllocationPool&) const = default;
};

struct SubnetSpec {
  // "name" (same namespace) or "namespace/name" (shared network elsewhere).
  std::string networkRef;
  std::string cidr;
  std::optional<AllocationPool> allocationPool;
  bool operator==(const SubnetSpec&) const = default;
};

struct RouterSpec {
  std::vector<std::string> subnetRefs;
  bool externalGateway = false;
  bool operator==(const RouterSpec&) const = default;
};

struct KeyPairSpec {
  std::string publicKey;
  bool operator==(const KeyPairSpec&) const = default;
};

// ---- Kind payloads -------------------------------------------------------------

template <typename SpecT, typename StatusT>
struct Payload {
  using Spec = SpecT;
  using Status = StatusT;
  SpecT spec;
  StatusT status;
  bool operator==(const Payload&) const = default;
};

struct Namespace : Payload<NamespaceSpec, NamespaceStatus> {
  static constexpr std::string_view kind = "Namespace";
  static constexpr bool namespaced = false;
};
struct OpenStackCloud : Payload<OpenStackCloudSpec, OpenStackCloudStatus> {
  static constexpr std::string_view kind = "OpenStackCloud";
  static constexpr bool namespaced = false;
};
struct Instance : Payload<InstanceSpec, InstanceStatus> {
  static constexpr std::string_view kind = "Instance";
  static constexpr bool namespaced = true;
};
struct Image : Payload<ImageSpec, ImageStatus> {
  static constexpr std::string_view kind = "Image";
  static constexpr bool namespaced = true;
};
struct Network : Payload<NetworkSpec, RemoteStatus> {
  static constexpr std::string_view kind = "Network";
  static constexpr bool namespaced = true;
};
struct Subnet : Payload<SubnetSpec, RemoteStatus> {
  static constexpr std::string_view kind = "Subnet";
  static constexpr bool namespaced = true;
};
struct Router : Payload<RouterSpec, RemoteStatus> {
  static constexpr std::string_view kind = "Router";
  static constexpr bool namespaced = true;
};
struct KeyPair : Payload<KeyPairSpec, RemoteStatus> {
  static constexpr std::string_view kind = "KeyPair";
  static constexpr bool namespaced = true;
};

using Body = std::variant<Namespace, OpenStackCloud, Instance, Image, Network, Subnet, Router,
                          KeyPair>;

/// Kinds that live inside a namespace and block its deletion.
inline const std::vector<std::string> kNamespacedKinds = {"Instance", "Image",  "Network",
                                                          "Subnet",   "Router", "KeyPair"};
inline const std::vector<std::string> kAllKinds = {"Namespace", "OpenStackCloud", "Instance",
                                                   "Image",     "Network",        "Subnet",
                                                   "Router",    "KeyPair"};

bool isKnownKind(std::string_view kind);
bool isNamespacedKind(std::string_view kind);

/// Default-constructed body for a kind. Throws Error(UnknownKind).
Body makeBody(std::string_view kind);

/// Uniform envelope: metadata + kind-specific spec + status.
struct ResourceObject {
  ObjectMeta meta;
  Body body;

  std::string_view kind() const;
  ObjectKey key() const { return {std::string(kind()), meta.ns, meta.name}; }
  bool deleting() const { return meta.deletionTimestamp.has_value(); }

  template <typename T>
  T& as() { return std::get<T>(body); }
  template <typename T>
  const T& as() const { return std::get<T>(body); }
  template <typename T>
  bool is() const { return std::holds_alternative<T>(body); }

  bool specEquals(const ResourceObject& other) const;
  bool statusEquals(const ResourceObject& other) const;
  /// Copies the spec of `from` into this object (kinds must match).
  void assignSpec(const ResourceObject& from);
  void assignStatus(const ResourceObject& from);

  bool operator==(const ResourceObject&) const = default;
};

template <typename T>
ResourceObject makeObject(std::string name, std::string ns, typename T::Spec spec) {
  ResourceObject obj;
  obj.meta.name = std::move(name);
  obj.meta.ns = std::move(ns);
  T payload;
  payload.spec = std::move(spec);
  obj.body = std::move(payload);
  return obj;
}

/// Service-assigned remote IDs recorded in an object's status, if any.
std::vector<std::string> serviceAssignedIDs(const ResourceObject& obj);

/// Condition list of any kind's status.
const Conditions& conditionsOf(const ResourceObject& obj);

const char* to_string(ConditionType v);
const char* to_string(ConditionStatus v);
const char* to_string(InstancePhase v);
const char* to_string(ImagePhase v);
const char* to_string(RemotePhase v);

/// Short phase/ready word for table output.
std::string phaseOf(const ResourceObject& obj);

}  // namespace kupenstack::model
