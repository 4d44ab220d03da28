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

#include "kupenstack/sim/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "kupenstack/sim/placement.hpp"

namespace nlohmann {
template <typename T>
struct adl_serializer<std::optional<T>> {
  static void to_json(json& j, const std::optional<T>& v) {
    if (v) j = *v; else j = nullptr;
  }
  static void from_json(const json& j, std::optional<T>& v) {
    if (j.is_null()) v.reset(); else v = j.get<T>();
  }
};
}  // namespace nlohmann

namespace kupenstack {

inline void to_json(model::Json& j, const ObjectKey& k) {
  j = {{"kind", k.kind}, {"namespace", k.ns}, {"name", k.name}};
}
inline void from_json(const model::Json& j, ObjectKey& k) {
  k.kind = j.at("kind").get<std::string>();
  k.ns = j.at("namespace").get<std::string>();
  k.name = j.at("name").get<std::string>();
}

namespace model {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Flavor, vcpus, ramMiB, diskGiB)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ImageSpec, sourceURI, diskFormat, containerFormat)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Cidr, network, prefix)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(IpRange, first, last)
}  // namespace model

}  // namespace kupenstack

namespace kupenstack::sim {

NLOHMANN_JSON_SERIALIZE_ENUM(NodeRole, {{NodeRole::ControlPlane, "control-plane"},
                                        {NodeRole::Compute, "compute"}})
NLOHMANN_JSON_SERIALIZE_ENUM(UnitState, {{UnitState::Starting, "Starting"},
                                         {UnitState::Ready, "Ready"},
                                         {UnitState::Failed, "Failed"},
                                         {UnitState::Terminating, "Terminating"}})
NLOHMANN_JSON_SERIALIZE_ENUM(VmState, {{VmState::Building, "Building"},
                                       {VmState::Running, "Running"},
                                       {VmState::Failed, "Failed"},
                                       {VmState::Deleted, "Deleted"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ImageState, {{ImageState::Importing, "Importing"},
                                          {ImageState::Active, "Active"},
                                          {ImageState::Failed, "Failed"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Capacity, vcpus, ramMiB)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimNode, name, role, labels, healthy, capacity, downUntil)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ServiceUnit, uid, service, version, configHash, node, state,
                                   startTick, readyAt, owner, failureCause)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimVM, id, name, projectID, node, state, flavor, imageID,
                                   keypairID, failureCause, createdTick, readyAt)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimProject, id, name, domain)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimImage, id, projectID, name, ownerTag, spec, state, readyAt)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimNetwork, id, projectID, name, shared)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimSubnet, id, projectID, name, networkID, cidr, pool,
                                   allocations)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimRouter, id, projectID, name, externalGateway, subnetIDs)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimKeyPair, id, projectID, name, publicKey)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MutationEntry, tick, actor, operation, target, summary)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(HealthEvent, tick, target, owner, cause)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BootFailureRule, name, project, cause, remaining)

const char* to_string(NodeRole role) {
  return role == NodeRole::ControlPlane ? "control-plane" : "compute";
}

const char* to_string(UnitState s) {
  switch (s) {
    case UnitState::Starting: return "Starting";
    case UnitState::Ready: return "Ready";
    case UnitState::Failed: return "Failed";
    case UnitState::Terminating: return "Terminating";
  }
  return "";
}

const char* to_string(VmState s) {
  switch (s) {
    case VmState::Building: return "Building";
    case VmState::Running: return "Running";
    case VmState::Failed: return "Failed";
    case VmState::Deleted: return "Deleted";
  }
  return "";
}

const char* to_string(ImageState s) {
  switch (s) {
    case ImageState::Importing: return "Importing";
    case ImageState::Active: return "Active";
    case ImageState::Failed: return "Failed";
  }
  return "";
}

Json MutationEntry::toJson() const {
  Json j;
  to_json(j, *this);
  return j;
}

std::set<std::string> SimView::remoteObjectIDs() const {
  std::set<std::string> ids;
  auto add = [&](const auto& m) {
    for (const auto& [id, _] : m) ids.insert(id);
  };
  add(projects);
  add(images);
  add(vms);
  add(networks);
  add(subnets);
  add(routers);
  add(keypairs);
  return ids;
}

std::int64_t SimView::readyUnits(std::string_view service) const {
  return std::count_if(units.begin(), units.end(), [&](const auto& kv) {
    return kv.second.service == service && kv.second.state == UnitState::Ready;
  });
}

namespace {

template <typename Map>
auto& findOr404(Map& m, const std::string& id, const char* what) {
  auto it = m.find(id);
  if (it == m.end()) throw Error(ErrorCode::NotFound, std::string(what) + " " + id + " not found");
  return it->second;
}

std::string argString(const Json& args, const char* key, std::string fallback = {}) {
  if (!args.contains(key) || args.at(key).is_null()) return fallback;
  const auto& v = args.at(key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::int64_t argInt(const Json& args, const char* key, std::int64_t fallback) {
  if (!args.contains(key) || !args.at(key).is_number_integer()) return fallback;
  return args.at(key).get<std::int64_t>();
}

bool argBool(const Json& args, const char* key) {
  return args.contains(key) && args.at(key).is_boolean() && args.at(key).get<bool>();
}

}  // namespace

// ---- Simulator core --------------------------------------------------------------

Simulator::Simulator(const LogicalClock& clock, SimConfig config)
    : clock_(clock), config_(std::move(config)), rng_(config_.seed) {
  if (config_.fleet.empty()) config_.fleet = defaultFleet();
  for (const auto& n : config_.fleet) nodes_[n.name] = n;
}

void Simulator::log(const std::string& actor, const std::string& op, const std::string& target,
                    const std::string& summary) {
  log_.push_back({now(), actor, op, target, summary});
}

std::string Simulator::nextID(const std::string& prefix) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08llx", static_cast<unsigned long long>(++idCounter_));
  return prefix + "-" + buf;
}

std::uint64_t Simulator::randomIndex(std::uint64_t n) { return rng_() % n; }

void Simulator::requireService(const std::string& service) const {
  auto burst = apiBurstUntil_.find(service);
  if (burst != apiBurstUntil_.end() && burst->second > now())
    throw Error(ErrorCode::ServiceUnavailable, service + " API error burst");
  auto ready = [&](const std::string& s) {
    return std::any_of(units_.begin(), units_.end(), [&](const auto& kv) {
      return kv.second.service == s && kv.second.state == UnitState::Ready;
    });
  };
  if (!ready(service))
    throw Error(ErrorCode::ServiceUnavailable, "no ready " + service + " unit");
  if (service != "keystone" && !ready("keystone"))
    throw Error(ErrorCode::ServiceUnavailable, "keystone unavailable");
}

void Simulator::requireProject(const std::string& projectID) const {
  if (projects_.count(projectID) == 0)
    throw Error(ErrorCode::NotFound, "project " + projectID + " not found");
}

void Simulator::failVM(SimVM& vm, const std::string& cause, const std::string& actor) {
  log(actor, "vm.fail", vm.id, std::string(to_string(vm.state)) + "->Failed: " + cause);
  vm.state = VmState::Failed;
  vm.failureCause = cause;
}

void Simulator::failUnit(ServiceUnit& unit, const std::string& cause, const std::string& actor) {
  log(actor, "unit.fail", unit.uid, std::string(to_string(unit.state)) + "->Failed: " + cause);
  unit.state = UnitState::Failed;
  unit.failureCause = cause;
}

void Simulator::applyFault(const FaultAction& action) {
  const Json& a = action.args;
  const std::string actor = "fault-injector";
  switch (action.kind) {
    case FaultKind::CrashVM: {
      const auto cause = argString(a, "cause", "crashed by fault injector");
      std::vector<std::string> targets;
      if (a.contains("id")) {
        targets.push_back(argString(a, "id"));
      } else if (a.contains("name")) {
        for (const auto& [id, vm] : vms_)
          if (vm.name == argString(a, "name") && vm.state != VmState::Failed)
            targets.push_back(id);
      } else {
        std::vector<std::string> running;
        for (const auto& [id, vm] : vms_)
          if (vm.state == VmState::Running) running.push_back(id);
        auto count = argInt(a, "count", 1);
        for (std::int64_t i = 0; i < count && !running.empty(); ++i) {
          auto idx = randomIndex(running.size());
          targets.push_back(running[idx]);
          running.erase(running.begin() + static_cast<std::ptrdiff_t>(idx));
        }
      }
      for (const auto& id : targets) {
        auto it = vms_.find(id);
        if (it != vms_.end() && it->second.state != VmState::Failed)
          failVM(it->second, cause, actor);
      }
      break;
    }
    case FaultKind::CrashUnit: {
      const auto cause = argString(a, "cause", "crashed by fault injector");
      std::vector<std::string> targets;
      if (a.contains("id")) {
        targets.push_back(argString(a, "id"));
      } else {
        const auto service = argString(a, "service");
        std::vector<std::string> ready;
        for (const auto& [uid, u] : units_)
          if (u.state == UnitState::Ready && (service.empty() || u.service == service))
            ready.push_back(uid);
        auto count = argInt(a, "count", 1);
        for (std::int64_t i = 0; i < count && !ready.empty(); ++i) {
          auto idx = randomIndex(ready.size());
          targets.push_back(ready[idx]);
          ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(idx));
        }
      }
      for (const auto& uid : targets) {
        auto it = units_.find(uid);
        if (it != units_.end() &&
            (it->second.state == UnitState::Ready || it->second.state == UnitState::Starting))
          failUnit(it->second, cause, actor);
      }
      break;
    }
    case FaultKind::ApiErrorBurst: {
      const auto service = argString(a, "service");
      const auto until = now() + argInt(a, "ticks", 1);
      apiBurstUntil_[service] = std::max(apiBurstUntil_[service], until);
      log(actor, "api.burst", service, "available->erroring until " + std::to_string(until));
      break;
    }
    case FaultKind::NodeDown: {
      std::string name = argString(a, "name");
      if (name.empty() || argBool(a, "random")) {
        std::vector<std::string> healthy;
        const auto role = argString(a, "role");
        for (const auto& [n, node] : nodes_)
          if (node.healthy && (role.empty() || role == to_string(node.role))) healthy.push_back(n);
        if (healthy.empty()) break;
        name = healthy[randomIndex(healthy.size())];
      }
      auto& node = findOr404(nodes_, name, "node");
      const auto until = now() + argInt(a, "ticks", 1);
      if (node.healthy) log(actor, "node.down", name, "healthy->down");
      node.healthy = false;
      node.downUntil = std::max(node.downUntil.value_or(0), until);
      const auto cause = "node " + name + " down";
      for (auto& [id, vm] : vms_)
        if (vm.node == name && (vm.state == VmState::Building || vm.state == VmState::Running))
          failVM(vm, cause, actor);
      for (auto& [uid, u] : units_)
        if (u.node == name && (u.state == UnitState::Starting || u.state == UnitState::Ready))
          failUnit(u, cause, actor);
      break;
    }
    case FaultKind::FailBoot: {
      BootFailureRule rule{argString(a, "name"), argString(a, "project"),
                           argString(a, "cause", "boot failure"), argInt(a, "count", -1)};
      log(actor, "boot.failure-rule", rule.project.empty() ? rule.name : rule.project + "/" + rule.name,
          "none->" + (rule.remaining < 0 ? std::string("persistent")
                                         : std::to_string(rule.remaining) + " boots"));
      bootFailures_.push_back(std::move(rule));
      break;
    }
  }
}

void Simulator::advance(Tick t) {
  std::lock_guard lock(mu_);
  const std::string actor = "sim-clock";

  std::vector<FaultAction> due;
  std::vector<FaultAction> later;
  for (auto& f : scheduled_) (f.tick <= t ? due : later).push_back(std::move(f));
  scheduled_ = std::move(later);
  for (const auto& f : due) applyFault(f);

  for (auto& [name, node] : nodes_) {
    if (!node.healthy && node.downUntil && *node.downUntil <= t) {
      node.healthy = true;
      node.downUntil.reset();
      log(actor, "node.recover", name, "down->healthy");
    }
  }
  for (auto it = apiBurstUntil_.begin(); it != apiBurstUntil_.end();) {
    if (it->second <= t) {
      log(actor, "api.recover", it->first, "erroring->available");
      it = apiBurstUntil_.erase(it);
    } else {
      ++it;
    }
  }
  for (auto it = units_.begin(); it != units_.end();) {
    auto& u = it->second;
    if (u.state == UnitState::Terminating) {
      log(actor, "unit.remove", u.uid, "Terminating->Deleted");
      it = units_.erase(it);
      continue;
    }
    if (u.state == UnitState::Starting && u.readyAt <= t && nodes_.at(u.node).healthy) {
      log(actor, "unit.ready", u.uid, "Starting->Ready");
      u.state = UnitState::Ready;
    }
    ++it;
  }
  for (auto& [id, vm] : vms_) {
    if (vm.state != VmState::Building || vm.readyAt > t) continue;
    auto project = projects_.find(vm.projectID);
    const std::string projectName = project == projects_.end() ? "" : project->second.name;
    auto rule = std::find_if(bootFailures_.begin(), bootFailures_.end(), [&](const auto& r) {
      return r.remaining != 0 && r.name == vm.name &&
             (r.project.empty() || r.project == projectName);
    });
    if (rule != bootFailures_.end()) {
      if (rule->remaining > 0) --rule->remaining;
      failVM(vm, rule->cause, actor);
    } else {
      log(actor, "vm.boot", id, "Building->Running");
      vm.state = VmState::Running;
    }
  }
  for (auto& [id, img] : images_) {
    if (img.state == ImageState::Importing && img.readyAt <= t) {
      log(actor, "image.import", id, "Importing->Active");
      img.state = ImageState::Active;
    }
  }
}

bool Simulator::idle() const {
  std::lock_guard lock(mu_);
  if (!scheduled_.empty() || !apiBurstUntil_.empty()) return false;
  for (const auto& [_, n] : nodes_)
    if (!n.healthy) return false;
  for (const auto& [_, u] : units_)
    if (u.state == UnitState::Starting || u.state == UnitState::Terminating) return false;
  for (const auto& [_, vm] : vms_)
    if (vm.state == VmState::Building) return false;
  for (const auto& [_, img] : images_)
    if (img.state == ImageState::Importing) return false;
  return true;
}

SimView Simulator::view() const {
  std::lock_guard lock(mu_);
  return {now(),     nodes_,    units_,    projects_, images_,
          vms_,      networks_, subnets_,  routers_,  keypairs_};
}

std::vector<MutationEntry> Simulator::mutationLog() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t Simulator::mutationCount() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

std::string Simulator::mutationLogJsonl() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& e : log_) out += e.toJson().dump() + "\n";
  return out;
}

void Simulator::recordHealthEvent(HealthEvent event) {
  std::lock_guard lock(mu_);
  health_.push_back(std::move(event));
}

std::vector<HealthEvent> Simulator::healthEvents() const {
  std::lock_guard lock(mu_);
  return health_;
}

Json Simulator::snapshot() const {
  std::lock_guard lock(mu_);
  std::ostringstream rng;
  rng << rng_;
  Json scheduled = Json::array();
  for (const auto& f : scheduled_) scheduled.push_back(f.toJson());
  return {{"nodes", nodes_},       {"units", units_},
          {"projects", projects_}, {"images", images_},
          {"vms", vms_},           {"networks", networks_},
          {"subnets", subnets_},   {"routers", routers_},
          {"keypairs", keypairs_}, {"scheduled", scheduled},
          {"apiBursts", apiBurstUntil_}, {"bootFailures", bootFailures_},
          {"rng", rng.str()},      {"idCounter", idCounter_},
          {"log", log_},           {"health", health_},
          {"config",
           {{"vmBootLatency", config_.vmBootLatency},
            {"unitStartLatency", config_.unitStartLatency},
            {"imageImportLatency", config_.imageImportLatency},
            {"seed", config_.seed},
            {"fleet", fleetToJson(config_.fleet)}}}};
}

void Simulator::restore(const Json& j) {
  std::lock_guard lock(mu_);
  const auto& cfg = j.at("config");
  config_.vmBootLatency = cfg.at("vmBootLatency").get<Tick>();
  config_.unitStartLatency = cfg.at("unitStartLatency").get<Tick>();
  config_.imageImportLatency = cfg.at("imageImportLatency").get<Tick>();
  config_.seed = cfg.at("seed").get<std::uint64_t>();
  config_.fleet = fleetFromJson(cfg.at("fleet"));
  j.at("nodes").get_to(nodes_);
  j.at("units").get_to(units_);
  j.at("projects").get_to(projects_);
  j.at("images").get_to(images_);
  j.at("vms").get_to(vms_);
  j.at("networks").get_to(networks_);
  j.at("subnets").get_to(subnets_);
  j.at("routers").get_to(routers_);
  j.at("keypairs").get_to(keypairs_);
  scheduled_.clear();
  for (const auto& f : j.at("scheduled")) scheduled_.push_back(FaultAction::fromJson(f));
  j.at("apiBursts").get_to(apiBurstUntil_);
  j.at("bootFailures").get_to(bootFailures_);
  std::istringstream rng(j.at("rng").get<std::string>());
  rng >> rng_;
  idCounter_ = j.at("idCounter").get<std::uint64_t>();
  j.at("log").get_to(log_);
  j.at("health").get_to(health_);
}

// ---- Keystone ----------------------------------------------------------------------

std::string Keystone::createProject(const std::string& name) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("keystone");
  for (const auto& [_, p] : sim_.projects_)
    if (p.name == name) throw Error(ErrorCode::AlreadyExists, "project " + name + " exists");
  auto id = sim_.nextID("proj");
  sim_.projects_[id] = {id, name, "default"};
  sim_.log("keystone", "project.create", id, "none->" + name);
  return id;
}

SimProject Keystone::getProject(const std::string& id) const {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("keystone");
  return findOr404(sim_.projects_, id, "project");
}

std::optional<SimProject> Keystone::findProject(const std::string& name) const {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("keystone");
  for (const auto& [_, p] : sim_.projects_)
    if (p.name == name) return p;
  return std::nullopt;
}

void Keystone::deleteProject(const std::string& id) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("keystone");
  auto& p = findOr404(sim_.projects_, id, "project");
  auto owns = [&](const auto& m) {
    return std::any_of(m.begin(), m.end(),
                       [&](const auto& kv) { return kv.second.projectID == id; });
  };
  if (owns(sim_.images_) || owns(sim_.vms_) || owns(sim_.networks_) || owns(sim_.subnets_) ||
      owns(sim_.routers_) || owns(sim_.keypairs_))
    throw Error(ErrorCode::ProjectNotEmpty, "project " + p.name + " still owns resources");
  sim_.log("keystone", "project.delete", id, p.name + "->none");
  sim_.projects_.erase(id);
}

// ---- Glance --------------------------------------------------------------------------

std::string Glance::createImage(const std::string& projectID, const std::string& name,
                                const std::string& ownerTag, const model::ImageSpec& spec) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("glance");
  sim_.requireProject(projectID);
  const auto& uri = spec.sourceURI;
  if (uri.rfind("http://", 0) != 0 && uri.rfind("https://", 0) != 0 &&
      uri.rfind("file://", 0) != 0)
    throw Error(ErrorCode::InvalidArgument, "unsupported image source " + uri);
  auto id = sim_.nextID("img");
  sim_.images_[id] = {id,   projectID, name, ownerTag, spec, ImageState::Importing,
                      sim_.now() + sim_.config_.imageImportLatency};
  sim_.log("glance", "image.create", id, "none->Importing");
  return id;
}

SimImage Glance::getImage(const std::string& id) const {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("glance");
  return findOr404(sim_.images_, id, "image");
}

std::optional<SimImage> Glance::findImageByOwner(const std::string& projectID,
                                                 const std::string& ownerTag) const {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("glance");
  for (const auto& [_, img] : sim_.images_)
    if (img.projectID == projectID && img.ownerTag == ownerTag) return img;
  return std::nullopt;
}

void Glance::deleteImage(const std::string& id) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("glance");
  auto& img = findOr404(sim_.images_, id, "image");
  sim_.log("glance", "image.delete", id, std::string(to_string(img.state)) + "->none");
  sim_.images_.erase(id);
}

// ---- Nova ------------------------------------------------------------------------------

std::string Nova::createVM(const VmRequest& req) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("nova");
  sim_.requireProject(req.projectID);
  auto& img = findOr404(sim_.images_, req.imageID, "image");
  if (img.state != ImageState::Active)
    throw Error(ErrorCode::InvalidArgument, "image " + req.imageID + " is not active");
  if (img.projectID != req.projectID)
    throw Error(ErrorCode::NotFound, "image " + req.imageID + " not visible to project");
  if (req.keypairID) findOr404(sim_.keypairs_, *req.keypairID, "keypair");

  std::vector<NodeLoad> loads;
  for (const auto& [name, node] : sim_.nodes_) {
    NodeLoad l{&node, 0, 0, 0};
    for (const auto& [_, vm] : sim_.vms_) {
      if (vm.node != name || vm.state == VmState::Deleted) continue;
      ++l.workloads;
      l.usedVcpus += vm.flavor.vcpus;
      l.usedRamMiB += vm.flavor.ramMiB;
    }
    loads.push_back(l);
  }
  auto node = pickNode(loads, req.placement, &req.flavor);

  auto id = sim_.nextID("vm");
  SimVM vm;
  vm.id = id;
  vm.name = req.name;
  vm.projectID = req.projectID;
  vm.node = node;
  vm.flavor = req.flavor;
  vm.imageID = req.imageID;
  vm.keypairID = req.keypairID;
  vm.createdTick = sim_.now();
  vm.readyAt = sim_.now() + sim_.config_.vmBootLatency;
  sim_.vms_[id] = vm;
  sim_.log("nova", "vm.create", id, "none->Building on " + node + " name=" + req.name);
  return id;
}

SimVM Nova::getVM(const std::string& id) const {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("nova");
  return findOr404(sim_.vms_, id, "vm");
}

void Nova::deleteVM(const std::string& id) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("nova");
  auto& vm = findOr404(sim_.vms_, id, "vm");
  sim_.log("nova", "vm.delete", id, std::string(to_string(vm.state)) + "->Deleted");
  sim_.vms_.erase(id);
}

std::string Nova::createKeyPair(const std::string& projectID, const std::string& name,
                                const std::string& publicKey) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("nova");
  sim_.requireProject(projectID);
  auto id = sim_.nextID("kp");
  sim_.keypairs_[id] = {id, projectID, name, publicKey};
  sim_.log("nova", "keypair.create", id, "none->" + name);
  return id;
}

SimKeyPair Nova::getKeyPair(const std::string& id) const {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("nova");
  return findOr404(sim_.keypairs_, id, "keypair");
}

void Nova::deleteKeyPair(const std::string& id) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("nova");
  auto& kp = findOr404(sim_.keypairs_, id, "keypair");
  sim_.log("nova", "keypair.delete", id, kp.name + "->none");
  sim_.keypairs_.erase(id);
}

// ---- Neutron ----------------------------------------------------------------------------

std::string Neutron::createNetwork(const std::string& projectID, const std::string& name,
                                   bool shared) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  sim_.requireProject(projectID);
  auto id = sim_.nextID("net");
  sim_.networks_[id] = {id, projectID, name, shared};
  sim_.log("neutron", "network.create", id,
           std::string("none->") + (shared ? "shared" : "private"));
  return id;
}

SimNetwork Neutron::getNetwork(const std::string& id) const {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  return findOr404(sim_.networks_, id, "network");
}

void Neutron::setNetworkShared(const std::string& id, bool shared) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  auto& net = findOr404(sim_.networks_, id, "network");
  if (net.shared == shared) return;
  sim_.log("neutron", "network.update", id,
           std::string(net.shared ? "shared" : "private") + "->" + (shared ? "shared" : "private"));
  net.shared = shared;
}

void Neutron::deleteNetwork(const std::string& id) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  findOr404(sim_.networks_, id, "network");
  for (const auto& [_, s] : sim_.subnets_)
    if (s.networkID == id) throw Error(ErrorCode::InUse, "network " + id + " has subnets");
  sim_.log("neutron", "network.delete", id, "present->none");
  sim_.networks_.erase(id);
}

std::string Neutron::createSubnet(const std::string& projectID, const std::string& name,
                                  const std::string& networkID, const std::string& cidrText,
                                  const std::optional<model::AllocationPool>& pool) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  sim_.requireProject(projectID);
  auto net = sim_.networks_.find(networkID);
  if (net == sim_.networks_.end() ||
      (net->second.projectID != projectID && !net->second.shared))
    throw Error(ErrorCode::NotFound, "network " + networkID + " not visible to project");
  auto cidr = model::Cidr::parse(cidrText);
  if (!cidr || cidr->prefix > 30) throw Error(ErrorCode::InvalidArgument, "bad cidr " + cidrText);
  for (const auto& [_, s] : sim_.subnets_)
    if (s.networkID == networkID && s.cidr.overlaps(*cidr))
      throw Error(ErrorCode::InvalidArgument, "cidr overlaps subnet " + s.id);
  model::IpRange range = model::defaultPool(*cidr);
  if (pool) {
    auto start = model::parseIpv4(pool->start);
    auto end = model::parseIpv4(pool->end);
    if (!start || !end || *start > *end || *start < cidr->firstHost() || *end > cidr->lastHost())
      throw Error(ErrorCode::InvalidArgument, "allocation pool outside cidr");
    range = {*start, *end};
  }
  auto id = sim_.nextID("subnet");
  SimSubnet s;
  s.id = id;
  s.projectID = projectID;
  s.name = name;
  s.networkID = networkID;
  s.cidr = *cidr;
  s.pool = range;
  sim_.subnets_[id] = s;
  sim_.log("neutron", "subnet.create", id, "none->" + cidr->str());
  return id;
}

SimSubnet Neutron::getSubnet(const std::string& id) const {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  return findOr404(sim_.subnets_, id, "subnet");
}

void Neutron::deleteSubnet(const std::string& id) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  auto& s = findOr404(sim_.subnets_, id, "subnet");
  if (!s.allocations.empty())
    throw Error(ErrorCode::InUse, "subnet " + id + " has allocated addresses");
  for (const auto& [_, r] : sim_.routers_)
    if (r.subnetIDs.count(id) != 0)
      throw Error(ErrorCode::InUse, "subnet " + id + " is attached to router " + r.id);
  sim_.log("neutron", "subnet.delete", id, s.cidr.str() + "->none");
  sim_.subnets_.erase(id);
}

std::string Neutron::allocateIP(const std::string& subnetID, const std::string& owner) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  auto& s = findOr404(sim_.subnets_, subnetID, "subnet");
  if (auto it = s.allocations.find(owner); it != s.allocations.end())
    return model::formatIpv4(it->second);
  std::set<model::Ipv4> used;
  for (const auto& [_, a] : s.allocations) used.insert(a);
  for (std::uint64_t addr = s.pool.first; addr <= s.pool.last; ++addr) {
    auto ip = static_cast<model::Ipv4>(addr);
    if (used.count(ip) != 0) continue;
    s.allocations[owner] = ip;
    sim_.log("neutron", "ip.allocate", subnetID, "free->" + model::formatIpv4(ip) + " for " + owner);
    return model::formatIpv4(ip);
  }
  throw Error(ErrorCode::QuotaExceeded, "subnet " + subnetID + " pool exhausted");
}

void Neutron::releaseIP(const std::string& subnetID, const std::string& address) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  auto& s = findOr404(sim_.subnets_, subnetID, "subnet");
  auto ip = model::parseIpv4(address);
  for (auto it = s.allocations.begin(); it != s.allocations.end(); ++it) {
    if (ip && it->second == *ip) {
      sim_.log("neutron", "ip.release", subnetID, address + "->free");
      s.allocations.erase(it);
      return;
    }
  }
  throw Error(ErrorCode::NotFound, "address " + address + " not allocated in " + subnetID);
}

std::string Neutron::createRouter(const std::string& projectID, const std::string& name,
                                  bool externalGateway) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  sim_.requireProject(projectID);
  auto id = sim_.nextID("router");
  sim_.routers_[id] = {id, projectID, name, externalGateway, {}};
  sim_.log("neutron", "router.create", id, "none->" + name);
  return id;
}

SimRouter Neutron::getRouter(const std::string& id) const {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  return findOr404(sim_.routers_, id, "router");
}

void Neutron::attachSubnet(const std::string& routerID, const std::string& subnetID) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  auto& r = findOr404(sim_.routers_, routerID, "router");
  auto& s = findOr404(sim_.subnets_, subnetID, "subnet");
  if (r.subnetIDs.count(subnetID) != 0) return;
  if (s.projectID != r.projectID)
    throw Error(ErrorCode::NotFound, "subnet " + subnetID + " not visible to router");
  for (const auto& other : r.subnetIDs)
    if (sim_.subnets_.at(other).cidr.overlaps(s.cidr))
      throw Error(ErrorCode::InvalidArgument, "subnet " + subnetID + " overlaps " + other);
  r.subnetIDs.insert(subnetID);
  sim_.log("neutron", "router.attach", routerID, "detached->attached " + subnetID);
}

void Neutron::detachSubnet(const std::string& routerID, const std::string& subnetID) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  auto& r = findOr404(sim_.routers_, routerID, "router");
  if (r.subnetIDs.erase(subnetID) == 0) return;
  sim_.log("neutron", "router.detach", routerID, "attached->detached " + subnetID);
}

void Neutron::deleteRouter(const std::string& id) {
  std::lock_guard lock(sim_.mu_);
  sim_.requireService("neutron");
  auto& r = findOr404(sim_.routers_, id, "router");
  if (!r.subnetIDs.empty()) throw Error(ErrorCode::InUse, "router " + id + " has interfaces");
  sim_.log("neutron", "router.delete", id, r.name + "->none");
  sim_.routers_.erase(id);
}

// ---- Fleet -----------------------------------------------------------------------------

std::string Fleet::createUnit(const UnitRequest& req) {
  std::lock_guard lock(sim_.mu_);
  std::vector<NodeLoad> loads;
  for (const auto& [name, node] : sim_.nodes_) {
    NodeLoad l{&node, 0, 0, 0};
    for (const auto& [_, u] : sim_.units_)
      if (u.node == name && u.state != UnitState::Terminating) ++l.workloads;
    loads.push_back(l);
  }
  std::string node;
  try {
    node = pickNode(loads, Placement{NodeRole::ControlPlane, {}}, nullptr);
  } catch (const Error&) {
    throw Error(ErrorCode::ServiceUnavailable, "no schedulable control-plane node");
  }
  auto uid = sim_.nextID("unit");
  ServiceUnit u;
  u.uid = uid;
  u.service = req.service;
  u.version = req.version;
  u.configHash = req.configHash;
  u.node = node;
  u.startTick = sim_.now();
  u.readyAt = sim_.now() + sim_.config_.unitStartLatency;
  u.owner = req.owner;
  sim_.units_[uid] = u;
  sim_.log("fleet", "unit.create", uid,
           "none->Starting " + req.service + "@" + req.version + "#" + req.configHash + " on " +
               node);
  return uid;
}

void Fleet::deleteUnit(const std::string& uid) {
  std::lock_guard lock(sim_.mu_);
  auto& u = findOr404(sim_.units_, uid, "unit");
  if (u.state == UnitState::Terminating) return;
  sim_.log("fleet", "unit.delete", uid, std::string(to_string(u.state)) + "->Terminating");
  u.state = UnitState::Terminating;
}

std::vector<ServiceUnit> Fleet::listUnits(const ObjectKey& owner) const {
  std::lock_guard lock(sim_.mu_);
  std::vector<ServiceUnit> out;
  for (const auto& [_, u] : sim_.units_)
    if (u.owner == owner) out.push_back(u);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.startTick, a.uid) < std::tie(b.startTick, b.uid);
  });
  return out;
}

std::optional<ServiceUnit> Fleet::getUnit(const std::string& uid) const {
  std::lock_guard lock(sim_.mu_);
  auto it = sim_.units_.find(uid);
  if (it == sim_.units_.end()) return std::nullopt;
  return it->second;
}

std::vector<SimNode> Fleet::listNodes() const {
  std::lock_guard lock(sim_.mu_);
  std::vector<SimNode> out;
  for (const auto& [_, n] : sim_.nodes_) out.push_back(n);
  return out;
}

// ---- Faults ----------------------------------------------------------------------------

void FaultInjector::inject(const FaultAction& action) {
  std::lock_guard lock(sim_.mu_);
  sim_.applyFault(action);
}

void FaultInjector::loadSchedule(const FaultSchedule& schedule) {
  std::lock_guard lock(sim_.mu_);
  sim_.rng_.seed(schedule.seed);
  for (const auto& a : schedule.actions) sim_.scheduled_.push_back(a);
  std::stable_sort(sim_.scheduled_.begin(), sim_.scheduled_.end(),
                   [](const auto& a, const auto& b) { return a.tick < b.tick; });
}

// ---- Validation agent -------------------------------------------------------------------

ValidationAgent::ValidationAgent(Simulator& sim, Notify notify, VmOwnerLookup vmOwner)
    : sim_(sim), notify_(std::move(notify)), vmOwner_(std::move(vmOwner)) {}

std::size_t ValidationAgent::sweep(Tick now) {
  const SimView v = sim_.view();
  std::size_t sent = 0;
  auto send = [&](const ObjectKey& key) {
    try {
      notify_(key);
      ++sent;
    } catch (const Error&) {
      // No controller for the owner's kind; nothing to notify.
    }
  };

  std::set<std::string> failedUnits;
  for (const auto& [uid, u] : v.units) {
    if (u.state != UnitState::Failed) continue;
    failedUnits.insert(uid);
    if (reportedUnits_.count(uid) != 0) continue;
    sim_.recordHealthEvent({now, "unit/" + uid, u.owner.str(), u.failureCause});
    send(u.owner);
  }
  reportedUnits_ = std::move(failedUnits);

  std::set<std::string> failedVMs;
  for (const auto& [id, vm] : v.vms) {
    if (vm.state != VmState::Failed) continue;
    failedVMs.insert(id);
    if (reportedVMs_.count(id) != 0) continue;
    auto owner = vmOwner_ ? vmOwner_(id) : std::nullopt;
    sim_.recordHealthEvent(
        {now, "vm/" + id, owner ? owner->str() : std::string(), vm.failureCause.value_or("")});
    if (owner) send(*owner);
  }
  reportedVMs_ = std::move(failedVMs);
  return sent;
}

bool ValidationAgent::pending() const {
  const SimView v = sim_.view();
  for (const auto& [uid, u] : v.units)
    if (u.state == UnitState::Failed && reportedUnits_.count(uid) == 0) return true;
  for (const auto& [id, vm] : v.vms)
    if (vm.state == VmState::Failed && reportedVMs_.count(id) == 0) return true;
  return false;
}

Json ValidationAgent::snapshot() const {
  return {{"reportedUnits", reportedUnits_}, {"reportedVMs", reportedVMs_}};
}

void ValidationAgent::restore(const Json& j) {
  j.at("reportedUnits").get_to(reportedUnits_);
  j.at("reportedVMs").get_to(reportedVMs_);
}

}  // namespace kupenstack::sim
