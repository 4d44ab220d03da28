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

#include <algorithm>
#include <set>

#include "kupenstack/controllers/controllers.hpp"

namespace kupenstack::controllers {

using model::ConditionStatus;
using model::ConditionType;
using model::ResourceObject;

namespace {

const std::string kRemoteCleanup(model::kRemoteCleanupFinalizer);
const std::string kProjectDrain(model::kProjectDrainFinalizer);

/// Runs f; swallows NotFound. Returns false if the target was already gone.
template <typename F>
bool unlessGone(F&& f) {
  try {
    f();
    return true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotFound) throw;
    return false;
  }
}

ObjectKey namespaceKey(const std::string& name) { return {"Namespace", "", name}; }

std::vector<ObjectKey> keysOf(const store::ListResult& list) {
  std::vector<ObjectKey> keys;
  for (const auto& item : list.items) keys.push_back(item.key());
  return keys;
}

void setReady(model::Conditions& c, bool ok, const std::string& reason, const std::string& msg,
              std::int64_t gen, Tick now) {
  model::setCondition(c, ConditionType::Ready, ok ? ConditionStatus::True : ConditionStatus::False,
                      reason, msg, gen, now);
}

}  // namespace

std::optional<std::string> ResourceControllers::projectFor(const std::string& ns) const {
  auto obj = ctx_.store.get(namespaceKey(ns));
  if (!obj) return std::nullopt;
  auto it = obj->meta.annotations.find(std::string(model::kProjectIdAnnotation));
  if (it == obj->meta.annotations.end()) return std::nullopt;
  return it->second;
}

bool ResourceControllers::ensureFinalizer(ResourceObject& obj, std::string_view finalizer) {
  if (obj.meta.finalizers.count(std::string(finalizer)) != 0) return false;
  obj.meta.finalizers.insert(std::string(finalizer));
  obj = ctx_.store.update(obj);
  return true;
}

void ResourceControllers::dropFinalizer(const ObjectKey& key, std::string_view finalizer) {
  auto obj = ctx_.store.get(key);
  if (obj && obj->meta.finalizers.erase(std::string(finalizer)) != 0) ctx_.store.update(*obj);
}

std::optional<ObjectKey> ResourceControllers::vmOwner(const std::string& vmID) const {
  for (const auto& obj : ctx_.store.list("Instance").items)
    if (obj.as<model::Instance>().status.instanceID == vmID) return obj.key();
  return std::nullopt;
}

// ---- Namespace <-> project ----------------------------------------------------------

ReconcileOutcome ResourceControllers::reconcileNamespace(const ObjectKey& key) {
  auto current = ctx_.store.get(key);
  if (!current) return ReconcileOutcome::done();
  auto obj = *current;
  auto& keystone = ctx_.sim.keystone();
  const auto gen = obj.meta.generation;
  const std::string annotation(model::kProjectIdAnnotation);

  if (obj.deleting()) {
    std::size_t remaining = 0;
    for (const auto& kind : model::kNamespacedKinds) {
      remaining += ctx_.store.list(kind, obj.meta.name).items.size();
    }
    auto& st = obj.as<model::Namespace>().status;
    st.phase = "Terminating";
    setReady(st.conditions, false, "Terminating",
             std::to_string(remaining) + " namespaced objects remain", gen, ctx_.now());
    ctx_.store.updateStatus(obj);
    if (remaining > 0) return ReconcileOutcome::done();
    auto pid = obj.meta.annotations.find(annotation);
    if (pid != obj.meta.annotations.end())
      unlessGone([&] { keystone.deleteProject(pid->second); });
    dropFinalizer(key, kProjectDrain);
    return ReconcileOutcome::done();
  }

  ensureFinalizer(obj, kProjectDrain);
  std::optional<std::string> pid;
  if (auto it = obj.meta.annotations.find(annotation); it != obj.meta.annotations.end()) {
    if (unlessGone([&] { keystone.getProject(it->second); })) pid = it->second;
  }
  if (!pid) {
    try {
      auto found = keystone.findProject(obj.meta.name);
      pid = found ? found->id : keystone.createProject(obj.meta.name);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ServiceUnavailable) throw;
      // the OpenStackCloud watch wakes us once keystone is back
      auto& st = obj.as<model::Namespace>().status;
      st.phase = "Pending";
      setReady(st.conditions, false, "KeystoneUnavailable", e.what(), gen, ctx_.now());
      ctx_.store.updateStatus(obj);
      return ReconcileOutcome::done();
    }
    obj.meta.annotations[annotation] = *pid;
    obj = ctx_.store.update(obj);
  }
  auto& st = obj.as<model::Namespace>().status;
  st.phase = "Active";
  setReady(st.conditions, true, "ProjectBound", "", gen, ctx_.now());
  ctx_.store.updateStatus(obj);
  return ReconcileOutcome::done();
}

// ---- Image ----------------------------------------------------------------------------

ReconcileOutcome ResourceControllers::reconcileImage(const ObjectKey& key) {
  auto current = ctx_.store.get(key);
  if (!current) return ReconcileOutcome::done();
  auto obj = *current;
  auto& glance = ctx_.sim.glance();
  const auto gen = obj.meta.generation;

  if (obj.deleting()) {
    const auto& st = obj.as<model::Image>().status;
    if (st.imageID) unlessGone([&] { glance.deleteImage(*st.imageID); });
    if (auto pid = projectFor(obj.meta.ns)) {
      if (auto orphan = glance.findImageByOwner(*pid, obj.meta.uid))
        unlessGone([&] { glance.deleteImage(orphan->id); });
    }
    dropFinalizer(key, kRemoteCleanup);
    return ReconcileOutcome::done();
  }

  ensureFinalizer(obj, kRemoteCleanup);
  auto& st = obj.as<model::Image>().status;
  auto pid = projectFor(obj.meta.ns);
  if (!pid) {
    setReady(st.conditions, false, "ProjectPending", "namespace has no project yet", gen,
             ctx_.now());
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::done();
  }

  std::optional<sim::SimImage> img;
  if (st.imageID) unlessGone([&] { img = glance.getImage(*st.imageID); });
  if (!img) img = glance.findImageByOwner(*pid, obj.meta.uid);
  if (!img) {
    try {
      auto id = glance.createImage(*pid, obj.meta.name, obj.meta.uid,
                                   obj.as<model::Image>().spec);
      img = glance.getImage(id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidArgument) throw;
      st.phase = model::ImagePhase::Failed;
      setReady(st.conditions, false, "InvalidArgument", e.what(), gen, ctx_.now());
      ctx_.store.updateStatus(obj);
      return ReconcileOutcome::done();
    }
  }
  // The id is published only once the image is usable; until then the
  // owner tag is how a retry finds it again.
  bool importing = false;
  switch (img->state) {
    case sim::ImageState::Importing:
      importing = true;
      st.imageID.reset();
      st.phase = model::ImagePhase::Importing;
      setReady(st.conditions, false, "Importing", "", gen, ctx_.now());
      break;
    case sim::ImageState::Active:
      st.imageID = img->id;
      st.phase = model::ImagePhase::Active;
      setReady(st.conditions, true, "Available", "", gen, ctx_.now());
      break;
    case sim::ImageState::Failed:
      glance.deleteImage(img->id);
      st.imageID.reset();
      st.phase = model::ImagePhase::Failed;
      setReady(st.conditions, false, "ImportFailed", "", gen, ctx_.now());
      break;
  }
  ctx_.store.updateStatus(obj);
  return importing ? ReconcileOutcome::requeueAfter(1) : ReconcileOutcome::done();
}

// ---- KeyPair ----------------------------------------------------------------------------

ReconcileOutcome ResourceControllers::reconcileKeyPair(const ObjectKey& key) {
  auto current = ctx_.store.get(key);
  if (!current) return ReconcileOutcome::done();
  auto obj = *current;
  auto& nova = ctx_.sim.nova();
  const auto gen = obj.meta.generation;
  auto& st = obj.as<model::KeyPair>().status;

  if (obj.deleting()) {
    if (st.serviceAssignedID) unlessGone([&] { nova.deleteKeyPair(*st.serviceAssignedID); });
    dropFinalizer(key, kRemoteCleanup);
    return ReconcileOutcome::done();
  }
  ensureFinalizer(obj, kRemoteCleanup);
  auto& status = obj.as<model::KeyPair>().status;
  auto pid = projectFor(obj.meta.ns);
  if (!pid) {
    setReady(status.conditions, false, "ProjectPending", "namespace has no project yet", gen,
             ctx_.now());
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::done();
  }
  if (status.serviceAssignedID &&
      !unlessGone([&] { nova.getKeyPair(*status.serviceAssignedID); }))
    status.serviceAssignedID.reset();
  if (!status.serviceAssignedID)
    status.serviceAssignedID =
        nova.createKeyPair(*pid, obj.meta.name, obj.as<model::KeyPair>().spec.publicKey);
  status.phase = model::RemotePhase::Active;
  setReady(status.conditions, true, "Available", "", gen, ctx_.now());
  ctx_.store.updateStatus(obj);
  return ReconcileOutcome::done();
}

// ---- Network ----------------------------------------------------------------------------

ReconcileOutcome ResourceControllers::reconcileNetwork(const ObjectKey& key) {
  auto current = ctx_.store.get(key);
  if (!current) return ReconcileOutcome::done();
  auto obj = *current;
  auto& neutron = ctx_.sim.neutron();
  const auto gen = obj.meta.generation;

  if (obj.deleting()) {
    auto& st = obj.as<model::Network>().status;
    if (st.serviceAssignedID) {
      try {
        unlessGone([&] { neutron.deleteNetwork(*st.serviceAssignedID); });
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InUse) throw;
        st.phase = model::RemotePhase::Deleting;
        setReady(st.conditions, false, "MissingDependents", e.what(), gen, ctx_.now());
        ctx_.store.updateStatus(obj);
        return ReconcileOutcome::done();
      }
    }
    dropFinalizer(key, kRemoteCleanup);
    return ReconcileOutcome::done();
  }
  ensureFinalizer(obj, kRemoteCleanup);
  auto& st = obj.as<model::Network>().status;
  const bool shared = obj.as<model::Network>().spec.shared;
  auto pid = projectFor(obj.meta.ns);
  if (!pid) {
    setReady(st.conditions, false, "ProjectPending", "namespace has no project yet", gen,
             ctx_.now());
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::done();
  }
  std::optional<sim::SimNetwork> net;
  if (st.serviceAssignedID) unlessGone([&] { net = neutron.getNetwork(*st.serviceAssignedID); });
  if (!net) {
    st.serviceAssignedID = neutron.createNetwork(*pid, obj.meta.name, shared);
  } else if (net->shared != shared) {
    neutron.setNetworkShared(net->id, shared);
  }
  st.phase = model::RemotePhase::Active;
  setReady(st.conditions, true, "Available", "", gen, ctx_.now());
  ctx_.store.updateStatus(obj);
  return ReconcileOutcome::done();
}

// ---- Subnet -----------------------------------------------------------------------------

namespace {

ObjectKey networkKeyFor(const ResourceObject& subnet) {
  const auto& ref = subnet.as<model::Subnet>().spec.networkRef;
  auto slash = ref.find('/');
  if (slash == std::string::npos) return {"Network", subnet.meta.ns, ref};
  return {"Network", ref.substr(0, slash), ref.substr(slash + 1)};
}

}  // namespace

std::optional<ResourceObject> ResourceControllers::resolveNetwork(
    const ResourceObject& subnet) const {
  const auto key = networkKeyFor(subnet);
  auto net = ctx_.store.get(key);
  if (!net || net->deleting()) return std::nullopt;
  if (key.ns != subnet.meta.ns && !net->as<model::Network>().spec.shared) return std::nullopt;
  if (!net->as<model::Network>().status.serviceAssignedID) return std::nullopt;
  return net;
}

ReconcileOutcome ResourceControllers::reconcileSubnet(const ObjectKey& key) {
  auto current = ctx_.store.get(key);
  if (!current) return ReconcileOutcome::done();
  auto obj = *current;
  auto& neutron = ctx_.sim.neutron();
  const auto gen = obj.meta.generation;

  if (obj.deleting()) {
    auto& st = obj.as<model::Subnet>().status;
    if (st.serviceAssignedID) {
      try {
        unlessGone([&] { neutron.deleteSubnet(*st.serviceAssignedID); });
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InUse) throw;
        st.phase = model::RemotePhase::Deleting;
        setReady(st.conditions, false, "InUse", e.what(), gen, ctx_.now());
        ctx_.store.updateStatus(obj);
        return ReconcileOutcome::done();
      }
    }
    dropFinalizer(key, kRemoteCleanup);
    return ReconcileOutcome::done();
  }
  ensureFinalizer(obj, kRemoteCleanup);
  auto& st = obj.as<model::Subnet>().status;
  const auto& spec = obj.as<model::Subnet>().spec;
  auto pid = projectFor(obj.meta.ns);
  if (!pid) {
    setReady(st.conditions, false, "ProjectPending", "namespace has no project yet", gen,
             ctx_.now());
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::done();
  }
  if (st.serviceAssignedID && !unlessGone([&] { neutron.getSubnet(*st.serviceAssignedID); }))
    st.serviceAssignedID.reset();
  if (!st.serviceAssignedID) {
    auto net = resolveNetwork(obj);
    if (!net) {
      st.phase = model::RemotePhase::Pending;
      setReady(st.conditions, false, "MissingReference",
               "network " + spec.networkRef + " is not available", gen, ctx_.now());
      ctx_.store.updateStatus(obj);
      return ReconcileOutcome::done();
    }
    try {
      st.serviceAssignedID =
          neutron.createSubnet(*pid, obj.meta.name,
                               *net->as<model::Network>().status.serviceAssignedID, spec.cidr,
                               spec.allocationPool);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidArgument && e.code() != ErrorCode::NotFound) throw;
      st.phase = model::RemotePhase::Failed;
      setReady(st.conditions, false, to_string(e.code()), e.what(), gen, ctx_.now());
      ctx_.store.updateStatus(obj);
      return ReconcileOutcome::done();
    }
  }
  st.phase = model::RemotePhase::Active;
  setReady(st.conditions, true, "Available", "", gen, ctx_.now());
  ctx_.store.updateStatus(obj);
  return ReconcileOutcome::done();
}

// ---- Router -----------------------------------------------------------------------------

ReconcileOutcome ResourceControllers::reconcileRouter(const ObjectKey& key) {
  auto current = ctx_.store.get(key);
  if (!current) return ReconcileOutcome::done();
  auto obj = *current;
  auto& neutron = ctx_.sim.neutron();
  const auto gen = obj.meta.generation;

  if (obj.deleting()) {
    const auto& st = obj.as<model::Router>().status;
    if (st.serviceAssignedID) {
      unlessGone([&] {
        auto r = neutron.getRouter(*st.serviceAssignedID);
        for (const auto& s : r.subnetIDs) neutron.detachSubnet(r.id, s);
        neutron.deleteRouter(r.id);
      });
    }
    dropFinalizer(key, kRemoteCleanup);
    return ReconcileOutcome::done();
  }
  ensureFinalizer(obj, kRemoteCleanup);
  auto& st = obj.as<model::Router>().status;
  const auto& spec = obj.as<model::Router>().spec;
  auto pid = projectFor(obj.meta.ns);
  if (!pid) {
    setReady(st.conditions, false, "ProjectPending", "namespace has no project yet", gen,
             ctx_.now());
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::done();
  }
  std::optional<sim::SimRouter> router;
  if (st.serviceAssignedID) unlessGone([&] { router = neutron.getRouter(*st.serviceAssignedID); });
  if (!router) {
    st.serviceAssignedID = neutron.createRouter(*pid, obj.meta.name, spec.externalGateway);
    router = neutron.getRouter(*st.serviceAssignedID);
  }

  std::set<std::string> desired;
  std::vector<std::string> problems;
  for (const auto& ref : spec.subnetRefs) {
    auto subnet = ctx_.store.get({"Subnet", obj.meta.ns, ref});
    if (!subnet || subnet->deleting() ||
        !subnet->as<model::Subnet>().status.serviceAssignedID) {
      problems.push_back("subnet " + ref + " is not available");
      continue;
    }
    desired.insert(*subnet->as<model::Subnet>().status.serviceAssignedID);
  }
  for (const auto& s : router->subnetIDs)
    if (desired.count(s) == 0) neutron.detachSubnet(router->id, s);
  for (const auto& s : desired) {
    if (router->subnetIDs.count(s) != 0) continue;
    try {
      neutron.attachSubnet(router->id, s);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidArgument && e.code() != ErrorCode::NotFound) throw;
      problems.push_back(e.what());
    }
  }
  st.phase = model::RemotePhase::Active;
  std::string msg;
  for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
  setReady(st.conditions, problems.empty(), problems.empty() ? "Available" : "MissingReference",
           msg, gen, ctx_.now());
  ctx_.store.updateStatus(obj);
  return ReconcileOutcome::done();
}

// ---- Instance ---------------------------------------------------------------------------

namespace {

/// Service-assigned subnet ids for an instance's refs, in ref order; stops at
/// the first one that is not available.
std::vector<std::string> subnetIDsFor(const store::StateStore& store, const ResourceObject& obj,
                                      std::vector<std::string>* missing) {
  std::vector<std::string> ids;
  for (const auto& ref : obj.as<model::Instance>().spec.subnetRefs) {
    auto s = store.get({"Subnet", obj.meta.ns, ref});
    if (!s || s->deleting() || !s->as<model::Subnet>().status.serviceAssignedID) {
      if (missing) missing->push_back(ref);
      break;
    }
    ids.push_back(*s->as<model::Subnet>().status.serviceAssignedID);
  }
  return ids;
}

void releaseAddresses(sim::Neutron& neutron, const store::StateStore& store,
                      ResourceObject& obj) {
  auto& st = obj.as<model::Instance>().status;
  const auto& refs = obj.as<model::Instance>().spec.subnetRefs;
  for (std::size_t i = 0; i < st.ipAddresses.size() && i < refs.size(); ++i) {
    auto s = store.get({"Subnet", obj.meta.ns, refs[i]});
    if (!s || !s->as<model::Subnet>().status.serviceAssignedID) continue;
    unlessGone(
        [&] { neutron.releaseIP(*s->as<model::Subnet>().status.serviceAssignedID, st.ipAddresses[i]); });
  }
  st.ipAddresses.clear();
}

}  // namespace

ReconcileOutcome ResourceControllers::reconcileInstance(const ObjectKey& key) {
  auto current = ctx_.store.get(key);
  if (!current) return ReconcileOutcome::done();
  auto obj = *current;
  if (obj.deleting()) return deleteInstance(obj);

  ensureFinalizer(obj, kRemoteCleanup);
  const auto gen = obj.meta.generation;
  auto& st = obj.as<model::Instance>().status;
  auto pid = projectFor(obj.meta.ns);
  if (!pid) {
    setReady(st.conditions, false, "ProjectPending", "namespace has no project yet", gen,
             ctx_.now());
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::done();
  }
  if (!st.instanceID) return createInstanceVM(obj, *pid);

  std::optional<sim::SimVM> vm;
  unlessGone([&] { vm = ctx_.sim.nova().getVM(*st.instanceID); });
  if (!vm) return healInstance(obj, *pid, "instance disappeared");
  if (vm->state == sim::VmState::Failed)
    return healInstance(obj, *pid, vm->failureCause.value_or("unknown failure"));

  st.node = vm->node;
  std::vector<std::string> missing;
  const auto subnets = subnetIDsFor(ctx_.store, obj, &missing);
  try {
    for (std::size_t i = st.ipAddresses.size(); i < subnets.size(); ++i)
      st.ipAddresses.push_back(ctx_.sim.neutron().allocateIP(subnets[i], obj.meta.uid));
  } catch (const Error& e) {
    ctx_.store.updateStatus(obj);
    if (e.code() != ErrorCode::QuotaExceeded) throw;
    missing.push_back(e.what());
  }

  if (vm->state == sim::VmState::Building) {
    st.phase = model::InstancePhase::Building;
    setReady(st.conditions, false, "Booting", "", gen, ctx_.now());
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::requeueAfter(1);
  }
  st.phase = model::InstancePhase::Running;
  st.healAttempts = 0;
  st.nextHealTick.reset();
  if (missing.empty()) {
    setReady(st.conditions, true, "Running", "", gen, ctx_.now());
  } else {
    std::string msg;
    for (const auto& m : missing) msg += (msg.empty() ? "" : ", ") + m;
    setReady(st.conditions, false, "MissingReference", "unattached: " + msg, gen, ctx_.now());
  }
  model::setCondition(st.conditions, ConditionType::Degraded, ConditionStatus::False, "AsExpected",
                      "", gen, ctx_.now());
  ctx_.store.updateStatus(obj);
  return ReconcileOutcome::done();
}

ReconcileOutcome ResourceControllers::createInstanceVM(ResourceObject& obj,
                                                       const std::string& projectID) {
  const auto gen = obj.meta.generation;
  const auto& spec = obj.as<model::Instance>().spec;
  auto& st = obj.as<model::Instance>().status;
  const auto notReady = [&](const std::string& reason, const std::string& msg) {
    if (st.phase != model::InstancePhase::Healing) st.phase = model::InstancePhase::Pending;
    setReady(st.conditions, false, reason, msg, gen, ctx_.now());
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::done();
  };

  auto image = ctx_.store.get({"Image", obj.meta.ns, spec.imageRef});
  if (!image || image->deleting() ||
      image->as<model::Image>().status.phase != model::ImagePhase::Active)
    return notReady("MissingReference", "image " + spec.imageRef + " is not active");
  std::optional<std::string> keypairID;
  if (spec.keyPairRef) {
    auto kp = ctx_.store.get({"KeyPair", obj.meta.ns, *spec.keyPairRef});
    if (!kp || kp->deleting() || !kp->as<model::KeyPair>().status.serviceAssignedID)
      return notReady("MissingReference", "keypair " + *spec.keyPairRef + " is not available");
    keypairID = kp->as<model::KeyPair>().status.serviceAssignedID;
  }
  std::vector<std::string> missing;
  const auto subnets = subnetIDsFor(ctx_.store, obj, &missing);
  if (!missing.empty())
    return notReady("MissingReference", "subnet " + missing.front() + " is not available");

  sim::VmRequest req;
  req.projectID = projectID;
  req.name = obj.meta.name;
  req.flavor = spec.flavor;
  req.imageID = *image->as<model::Image>().status.imageID;
  req.keypairID = keypairID;
  req.placement = {sim::NodeRole::Compute, spec.nodeSelector};
  auto& nova = ctx_.sim.nova();
  std::string id;
  try {
    id = nova.createVM(req);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoValidHost && e.code() != ErrorCode::QuotaExceeded) throw;
    // Capacity can come back without any event on this object; the periodic
    // resync retries.
    return notReady(to_string(e.code()), e.what());
  }
  st.instanceID = id;
  st.node = nova.getVM(id).node;
  st.phase = model::InstancePhase::Building;
  setReady(st.conditions, false, "Booting", "", gen, ctx_.now());
  ctx_.store.updateStatus(obj);

  for (const auto& s : subnets) {
    st.ipAddresses.push_back(ctx_.sim.neutron().allocateIP(s, obj.meta.uid));
    ctx_.store.updateStatus(obj);
  }
  return ReconcileOutcome::requeueAfter(1);
}

ReconcileOutcome ResourceControllers::healInstance(ResourceObject& obj,
                                                   const std::string& projectID,
                                                   const std::string& cause) {
  const auto gen = obj.meta.generation;
  const auto now = ctx_.now();
  auto& st = obj.as<model::Instance>().status;
  st.lastFailureCause = cause;

  if (st.healAttempts >= kHealRetryLimit) {
    st.phase = model::InstancePhase::Failed;
    st.nextHealTick.reset();
    setReady(st.conditions, false, "HealRetryExhausted", cause, gen, now);
    model::setCondition(st.conditions, ConditionType::Degraded, ConditionStatus::True,
                        "HealRetryExhausted",
                        "gave up after " + std::to_string(st.healAttempts) +
                            " heal attempts: " + cause,
                        gen, now);
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::done();
  }
  if (!st.nextHealTick)
    st.nextHealTick = now + (st.healAttempts == 0 ? 0 : ctx_.config.backoffFor(st.healAttempts));
  if (now < *st.nextHealTick) {
    st.phase = model::InstancePhase::Healing;
    setReady(st.conditions, false, "Healing", cause, gen, now);
    ctx_.store.updateStatus(obj);
    return ReconcileOutcome::requeueAfter(*st.nextHealTick - now);
  }

  unlessGone([&] { ctx_.sim.nova().deleteVM(*st.instanceID); });
  releaseAddresses(ctx_.sim.neutron(), ctx_.store, obj);
  st.instanceID.reset();
  st.node.clear();
  st.restartCount += 1;
  st.healAttempts += 1;
  st.nextHealTick.reset();
  st.phase = model::InstancePhase::Healing;
  setReady(st.conditions, false, "Healing", cause, gen, now);
  ctx_.store.updateStatus(obj);
  return createInstanceVM(obj, projectID);
}

ReconcileOutcome ResourceControllers::deleteInstance(ResourceObject& obj) {
  auto& st = obj.as<model::Instance>().status;
  if (st.instanceID) {
    unlessGone([&] { ctx_.sim.nova().deleteVM(*st.instanceID); });
    st.instanceID.reset();
    st.phase = model::InstancePhase::Terminating;
    ctx_.store.updateStatus(obj);
  }
  if (!st.ipAddresses.empty()) {
    releaseAddresses(ctx_.sim.neutron(), ctx_.store, obj);
    ctx_.store.updateStatus(obj);
  }
  dropFinalizer(obj.key(), kRemoteCleanup);
  return ReconcileOutcome::done();
}

// ---- registration ------------------------------------------------------------------------

void ResourceControllers::registerWith(runtime::Manager& manager) {
  auto& store = ctx_.store;
  using runtime::SecondaryWatch;

  // Child kinds follow their namespace (project binding, termination).
  auto followNamespace = [&store](const std::string& kind) {
    return SecondaryWatch{"Namespace", [&store, kind](const ResourceObject& ns) {
                            return keysOf(store.list(kind, ns.meta.name));
                          }};
  };
  // Children matter to the namespace only while it is draining.
  std::vector<SecondaryWatch> nsWatches;
  for (const auto& kind : model::kNamespacedKinds) {
    nsWatches.push_back({kind, [&store](const ResourceObject& child) {
                           std::vector<ObjectKey> keys;
                           auto ns = store.get(namespaceKey(child.meta.ns));
                           if (ns && ns->deleting()) keys.push_back(ns->key());
                           return keys;
                         }});
  }
  // Service availability changes wake namespaces still waiting for a project.
  nsWatches.push_back({"OpenStackCloud", [&store](const ResourceObject&) {
                         std::vector<ObjectKey> keys;
                         const std::string annotation(model::kProjectIdAnnotation);
                         for (const auto& ns : store.list("Namespace").items)
                           if (ns.deleting() || ns.meta.annotations.count(annotation) == 0)
                             keys.push_back(ns.key());
                         return keys;
                       }});

  auto reg = [&](std::string_view kind,
                 ReconcileOutcome (ResourceControllers::*fn)(const ObjectKey&),
                 std::vector<SecondaryWatch> watches) {
    manager.registerController(
        std::string(kind), guarded([this, fn](const ObjectKey& key) { return (this->*fn)(key); }),
        ctx_.config, std::move(watches));
  };

  reg(model::Namespace::kind, &ResourceControllers::reconcileNamespace, nsWatches);
  reg(model::Image::kind, &ResourceControllers::reconcileImage, {followNamespace("Image")});
  reg(model::KeyPair::kind, &ResourceControllers::reconcileKeyPair, {followNamespace("KeyPair")});
  reg(model::Network::kind, &ResourceControllers::reconcileNetwork,
      {followNamespace("Network"),
       {"Subnet", [](const ResourceObject& s) { return std::vector{networkKeyFor(s)}; }}});

  reg(model::Subnet::kind, &ResourceControllers::reconcileSubnet,
      {followNamespace("Subnet"),
       {"Network",
        [&store](const ResourceObject& net) {
          std::vector<ObjectKey> keys;
          for (const auto& s : store.list("Subnet").items)
            if (networkKeyFor(s) == net.key()) keys.push_back(s.key());
          return keys;
        }},
       {"Instance",
        [](const ResourceObject& inst) {
          std::vector<ObjectKey> keys;
          for (const auto& ref : inst.as<model::Instance>().spec.subnetRefs)
            keys.push_back({"Subnet", inst.meta.ns, ref});
          return keys;
        }},
       {"Router", [](const ResourceObject& r) {
          std::vector<ObjectKey> keys;
          for (const auto& ref : r.as<model::Router>().spec.subnetRefs)
            keys.push_back({"Subnet", r.meta.ns, ref});
          return keys;
        }}});

  reg(model::Router::kind, &ResourceControllers::reconcileRouter,
      {followNamespace("Router"), {"Subnet", [&store](const ResourceObject& s) {
         std::vector<ObjectKey> keys;
         for (const auto& r : store.list("Router", s.meta.ns).items) {
           const auto& refs = r.as<model::Router>().spec.subnetRefs;
           if (std::find(refs.begin(), refs.end(), s.meta.name) != refs.end())
             keys.push_back(r.key());
         }
         return keys;
       }}});

  auto instancesReferencing = [&store](auto pred) {
    return [&store, pred](const ResourceObject& ref) {
      std::vector<ObjectKey> keys;
      for (const auto& inst : store.list("Instance", ref.meta.ns).items)
        if (pred(inst.as<model::Instance>().spec, ref.meta.name)) keys.push_back(inst.key());
      return keys;
    };
  };
  reg(model::Instance::kind, &ResourceControllers::reconcileInstance,
      {followNamespace("Instance"),
       {"Image", instancesReferencing([](const model::InstanceSpec& s, const std::string& n) {
          return s.imageRef == n;
        })},
       {"KeyPair", instancesReferencing([](const model::InstanceSpec& s, const std::string& n) {
          return s.keyPairRef == n;
        })},
       {"Subnet", instancesReferencing([](const model::InstanceSpec& s, const std::string& n) {
          return std::find(s.subnetRefs.begin(), s.subnetRefs.end(), n) != s.subnetRefs.end();
        })}});
}

}  // namespace kupenstack::controllers
