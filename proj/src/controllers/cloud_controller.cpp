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
#include <map>
#include <set>

#include "kupenstack/controllers/controllers.hpp"
#include "kupenstack/model/hash.hpp"

namespace kupenstack::controllers {

using model::ConditionStatus;
using model::ConditionType;
using model::OpenStackCloud;
using sim::ServiceUnit;
using sim::UnitState;

runtime::Reconciler guarded(std::function<ReconcileOutcome(const ObjectKey&)> fn) {
  return [fn = std::move(fn)](const ObjectKey& key) {
    try {
      return fn(key);
    } catch (const Error& e) {
      return ReconcileOutcome::failed(std::string(to_string(e.code())) + ": " + e.what());
    }
  };
}

std::vector<ServicePlan> renderPlan(const model::OpenStackCloudSpec& spec) {
  std::vector<ServicePlan> plan;
  for (const auto& s : spec.services)
    plan.push_back({s.name, s.version, model::hashConfig(s.configOverrides, s.version), s.replicas});
  std::stable_partition(plan.begin(), plan.end(),
                        [](const ServicePlan& p) { return p.service == "keystone"; });
  return plan;
}

namespace {

bool live(const ServiceUnit& u) {
  return u.state == UnitState::Starting || u.state == UnitState::Ready;
}

bool matches(const ServiceUnit& u, const ServicePlan& p) {
  return u.version == p.version && u.configHash == p.configHash;
}

}  // namespace

ReconcileOutcome CloudController::reconcile(const ObjectKey& key) {
  auto& fleet = ctx_.sim.fleet();
  auto current = ctx_.store.get(key);
  auto units = fleet.listUnits(key);

  if (!current) {
    for (const auto& u : units)
      if (u.state != UnitState::Terminating) fleet.deleteUnit(u.uid);
    return ReconcileOutcome::done();
  }
  auto obj = *current;
  const std::string finalizer(model::kCloudTeardownFinalizer);

  if (obj.deleting()) {
    for (const auto& u : units)
      if (u.state != UnitState::Terminating) fleet.deleteUnit(u.uid);
    if (!units.empty()) return ReconcileOutcome::requeueAfter(1);
    if (obj.meta.finalizers.erase(finalizer) != 0) ctx_.store.update(obj);
    return ReconcileOutcome::done();
  }
  if (obj.meta.finalizers.count(finalizer) == 0) {
    obj.meta.finalizers.insert(finalizer);
    obj = ctx_.store.update(obj);
  }

  const auto plan = renderPlan(obj.as<OpenStackCloud>().spec);
  std::set<std::string> planned;
  for (const auto& p : plan) planned.insert(p.service);

  // Failed units are never repaired in place, and units of services that
  // left the spec go away.
  bool sawFailure = false;
  for (const auto& u : units) {
    if (u.state == UnitState::Failed) sawFailure = true;
    if ((u.state == UnitState::Failed || (live(u) && planned.count(u.service) == 0)))
      fleet.deleteUnit(u.uid);
  }
  auto liveUnits = [&] {
    std::vector<ServiceUnit> out;
    for (const auto& u : fleet.listUnits(key))
      if (live(u)) out.push_back(u);
    return out;
  };
  auto all = liveUnits();
  const bool keystoneReady = std::any_of(all.begin(), all.end(), [](const ServiceUnit& u) {
    return u.service == "keystone" && u.state == UnitState::Ready;
  });

  for (const auto& p : plan) {
    std::vector<ServiceUnit> fresh, old;
    for (const auto& u : all) {
      if (u.service != p.service) continue;
      (matches(u, p) ? fresh : old).push_back(u);
    }
    if (fresh.empty() && old.empty() && p.service != "keystone" && !keystoneReady) continue;

    auto create = [&] {
      fleet.createUnit({key, p.service, p.version, p.configHash});
    };
    // listUnits is oldest first, so the front of each list goes first.
    if (std::int64_t(fresh.size()) > p.replicas) {
      for (std::size_t i = 0; i < fresh.size() - p.replicas; ++i) fleet.deleteUnit(fresh[i].uid);
      fresh.erase(fresh.begin(), fresh.begin() + std::ptrdiff_t(fresh.size() - p.replicas));
    }
    if (old.empty()) {
      for (auto n = std::int64_t(fresh.size()); n < p.replicas; ++n) create();
      continue;
    }

    // Rolling replacement: never drop below the desired ready count and
    // never exceed desired + surge.
    auto ready = [](const std::vector<ServiceUnit>& v) {
      return std::int64_t(std::count_if(v.begin(), v.end(), [](const ServiceUnit& u) {
        return u.state == UnitState::Ready;
      }));
    };
    std::int64_t readyFresh = ready(fresh);
    std::int64_t readyOld = ready(old);
    std::vector<ServiceUnit> keep;
    for (const auto& u : old) {
      if (u.state != UnitState::Ready) {
        fleet.deleteUnit(u.uid);
      } else {
        keep.push_back(u);
      }
    }
    std::size_t next = 0;
    while (next < keep.size() && readyFresh + readyOld - 1 >= p.replicas - kMaxUnavailable) {
      fleet.deleteUnit(keep[next++].uid);
      --readyOld;
    }
    const auto total = std::int64_t(fresh.size() + keep.size() - next);
    if (std::int64_t(fresh.size()) < p.replicas && total < p.replicas + kMaxSurge) create();
  }

  // Status from what is running now.
  const auto prev = obj.as<OpenStackCloud>().status;
  auto status = prev;
  status.serviceStates.clear();
  all = liveUnits();
  bool converged = true;
  bool degraded = sawFailure;
  std::string degradedMsg = sawFailure ? "unit failure observed" : "";
  std::string pending;
  for (const auto& p : plan) {
    std::int64_t readyAll = 0, readyFresh = 0, freshCount = 0;
    std::optional<ServiceUnit> oldest;
    for (const auto& u : all) {
      if (u.service != p.service) continue;
      if (u.state == UnitState::Ready) ++readyAll;
      if (matches(u, p)) {
        ++freshCount;
        if (u.state == UnitState::Ready) ++readyFresh;
      } else if (!oldest) {
        oldest = u;
      }
    }
    model::ServiceState st;
    st.desiredReplicas = p.replicas;
    st.readyReplicas = std::min(readyAll, p.replicas);
    const bool done = !oldest && readyFresh == p.replicas && freshCount == p.replicas;
    if (oldest) {
      st.activeVersion = oldest->version;
      st.activeConfigHash = oldest->configHash;
    } else {
      st.activeVersion = p.version;
      st.activeConfigHash = p.configHash;
    }
    if (!done) {
      converged = false;
      if (!pending.empty()) pending += ", ";
      pending += p.service + " " + std::to_string(readyFresh) + "/" + std::to_string(p.replicas);
    }
    if (readyAll < p.replicas) {
      auto it = prev.serviceStates.find(p.service);
      const bool wasFull = it != prev.serviceStates.end() &&
                           it->second.readyReplicas >= it->second.desiredReplicas &&
                           it->second.desiredReplicas > 0;
      const auto* prevDegraded =
          model::findCondition(prev.conditions, ConditionType::Degraded);
      const bool stillDegraded = prevDegraded && prevDegraded->status == ConditionStatus::True;
      if (wasFull || stillDegraded) {
        degraded = true;
        if (!degradedMsg.empty()) degradedMsg += "; ";
        degradedMsg += p.service + " has " + std::to_string(readyAll) + "/" +
                       std::to_string(p.replicas) + " ready";
      }
    }
    status.serviceStates[p.service] = st;
  }
  for (const auto& u : all)
    if (planned.count(u.service) == 0) converged = false;
  if (converged) degraded = false;

  const auto gen = obj.meta.generation;
  const auto now = ctx_.now();
  model::setCondition(status.conditions, ConditionType::Ready,
                      converged ? ConditionStatus::True : ConditionStatus::False,
                      converged ? "AllServicesReady" : (degraded ? "Degraded" : "Progressing"),
                      converged ? "" : "waiting on " + pending, gen, now);
  model::setCondition(status.conditions, ConditionType::Progressing,
                      converged ? ConditionStatus::False : ConditionStatus::True,
                      converged ? "Converged" : "RollingOut", converged ? "" : pending, gen, now);
  model::setCondition(status.conditions, ConditionType::Degraded,
                      degraded ? ConditionStatus::True : ConditionStatus::False,
                      degraded ? "ReplicasUnavailable" : "AsExpected", degraded ? degradedMsg : "",
                      gen, now);
  if (!(status == prev)) {
    obj.as<OpenStackCloud>().status = status;
    ctx_.store.updateStatus(obj);
  }
  return converged ? ReconcileOutcome::done() : ReconcileOutcome::requeueAfter(1);
}

runtime::ControllerHandle CloudController::registerWith(runtime::Manager& manager) {
  return manager.registerController(
      std::string(OpenStackCloud::kind),
      guarded([this](const ObjectKey& key) { return reconcile(key); }), ctx_.config);
}

}  // namespace kupenstack::controllers
