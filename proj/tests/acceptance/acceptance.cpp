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

// Acceptance suite. One PASS/FAIL line per criterion; exits 1 if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "builders.hpp"
#include "kupenstack/engine/scenario.hpp"
#include "kupenstack/model/codec.hpp"
#include "kupenstack/store/state_store.hpp"

using namespace kupenstack;
using namespace kupenstack::engine;
namespace kt = kupenstack::testing;
namespace fs = std::filesystem;
using model::ConditionType;
using model::Instance;
using model::InstancePhase;
using sim::NodeRole;
using sim::UnitState;

namespace {

const fs::path kRepo = KS_SOURCE_DIR;
const ObjectKey kCloud = kt::key("OpenStackCloud", "desk");

struct Outcome {
  bool passed = true;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

std::string str(const auto& v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

std::size_t countOps(const std::vector<sim::MutationEntry>& log, const std::string& op,
                     const std::string& needle = "") {
  std::size_t n = 0;
  for (const auto& m : log)
    if (m.operation == op && m.summary.find(needle) != std::string::npos) ++n;
  return n;
}

bool labelsSatisfy(const model::StringMap& labels, const model::StringMap& selector) {
  for (const auto& [k, v] : selector) {
    auto it = labels.find(k);
    if (it == labels.end() || it->second != v) return false;
  }
  return true;
}

bool conditionTrue(const model::ResourceObject& obj, ConditionType t) {
  const auto* c = kt::condition(obj, t);
  return c != nullptr && c->status == model::ConditionStatus::True;
}

/// Every remote id the simulator holds, straight from its tables.
std::set<std::string> remoteIDs(const sim::SimView& v) {
  std::set<std::string> ids;
  for (const auto& [id, _] : v.projects) ids.insert(id);
  for (const auto& [id, _] : v.images) ids.insert(id);
  for (const auto& [id, _] : v.vms) ids.insert(id);
  for (const auto& [id, _] : v.networks) ids.insert(id);
  for (const auto& [id, _] : v.subnets) ids.insert(id);
  for (const auto& [id, _] : v.routers) ids.insert(id);
  for (const auto& [id, _] : v.keypairs) ids.insert(id);
  return ids;
}

/// Ids recorded in live object statuses (and namespace annotations).
std::multiset<std::string> recordedIDs(Engine& e) {
  std::multiset<std::string> ids;
  auto& s = e.store();
  auto remote = [&](const std::string& kind, auto tag) {
    using T = decltype(tag);
    for (const auto& o : s.list(kind).items)
      if (const auto& id = o.template as<T>().status.serviceAssignedID) ids.insert(*id);
  };
  remote("Network", model::Network{});
  remote("Subnet", model::Subnet{});
  remote("Router", model::Router{});
  remote("KeyPair", model::KeyPair{});
  for (const auto& o : s.list("Image").items)
    if (const auto& id = o.as<model::Image>().status.imageID) ids.insert(*id);
  for (const auto& o : s.list("Instance").items)
    if (const auto& id = o.as<Instance>().status.instanceID) ids.insert(*id);
  for (const auto& o : s.list("Namespace").items) {
    auto it = o.meta.annotations.find(std::string(model::kProjectIdAnnotation));
    if (it != o.meta.annotations.end()) ids.insert(it->second);
  }
  return ids;
}

Outcome stewardship(Engine& e) {
  const auto remote = remoteIDs(e.sim().view());
  const auto recorded = recordedIDs(e);
  const std::set<std::string> recordedSet(recorded.begin(), recorded.end());
  if (recordedSet.size() != recorded.size()) return fail("one remote id recorded twice");
  for (const auto& id : remote)
    if (!recordedSet.count(id)) return fail("orphan remote id " + id);
  for (const auto& id : recordedSet)
    if (!remote.count(id)) return fail("status names missing remote id " + id);
  return {};
}

struct Shell {
  int code = -1;
  std::string out;
};

Shell shell(const std::string& cmd) {
  Shell r;
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p) != nullptr) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("ks-accept-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path path;
};

// ---- 1 -------------------------------------------------------------------------------

Outcome provisioning() {
  EngineOptions o;
  o.seed = 1;
  Engine e(o);
  const auto cloud = kt::standardCloud();
  e.apply(cloud);
  const auto view0 = e.sim().view();
  const Tick bound = 20 * static_cast<Tick>(view0.nodes.size());
  Tick readyAt = -1;
  for (Tick t = 0; t < bound && readyAt < 0; ++t) {
    e.run(1);
    if (kt::isReady(e.store().mustGet(kCloud))) readyAt = e.now();
  }
  if (readyAt < 0) return fail("not Ready within " + str(bound) + " ticks");

  std::map<std::string, std::int64_t> want;
  std::int64_t total = 0;
  for (const auto& s : cloud.as<model::OpenStackCloud>().spec.services) {
    want[s.name] = s.replicas;
    total += s.replicas;
  }
  const auto view = e.sim().view();
  std::map<std::string, std::int64_t> got;
  for (const auto& [uid, u] : view.units) {
    ++got[u.service];
    if (view.nodes.at(u.node).role != NodeRole::ControlPlane)
      return fail("unit " + uid + " on " + u.node);
  }
  if (static_cast<std::int64_t>(view.units.size()) != total)
    return fail(str(view.units.size()) + " units, want " + str(total));
  if (got != want) return fail("per-service unit counts differ from spec");
  return {true, "Ready at tick " + str(readyAt) + " (bound " + str(bound) + "), " +
                    str(total) + " units on control-plane"};
}

// ---- 2 -------------------------------------------------------------------------------

// Unit lifecycle as seen in the log. A unit is created once with its
// identity; every later entry for it is a bare state transition.
std::string inPlaceMutation(const std::vector<sim::MutationEntry>& log) {
  static const std::map<std::string, std::set<std::string>> from = {
      {"unit.ready", {"Starting"}},
      {"unit.fail", {"Starting", "Ready"}},
      {"unit.delete", {"Starting", "Ready", "Failed"}},
      {"unit.remove", {"Terminating"}}};
  std::map<std::string, std::string> state;
  for (const auto& m : log) {
    if (m.operation.rfind("unit.", 0) != 0) continue;
    if (m.operation == "unit.create") {
      if (state.count(m.target)) return "uid " + m.target + " created twice";
      state[m.target] = "Starting";
      continue;
    }
    auto f = from.find(m.operation);
    if (f == from.end()) return "unexpected op " + m.operation + " on " + m.target;
    if (m.summary.find('@') != std::string::npos || m.summary.find('#') != std::string::npos)
      return m.operation + " on " + m.target + " carries identity: " + m.summary;
    const auto arrow = m.summary.find("->");
    const auto before = m.summary.substr(0, arrow);
    if (!state.count(m.target) || state[m.target] != before || !f->second.count(before))
      return "illegal " + m.operation + " on " + m.target + ": " + m.summary;
    auto after = m.summary.substr(arrow + 2);
    after = after.substr(0, after.find(':'));
    state[m.target] = after;
  }
  return {};
}

Outcome upgrade() {
  Tick worst = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto e = kt::readyEngine(seed);
    const std::int64_t replicas = 2;
    auto target = kt::standardCloud("2.0.0", replicas);
    e->apply(target);
    const Tick start = e->now();
    bool done = false;
    for (Tick t = 0; t < 300 && !done; ++t) {
      e->run(1);
      const auto ready = e->sim().view().readyUnits("nova");
      if (ready < replicas)
        return fail("seed " + str(seed) + " tick " + str(e->now()) + ": " + str(ready) +
                    " ready nova units");
      const auto units = e->sim().view().units;
      done = kt::isReady(e->store().mustGet(kCloud)) &&
             std::all_of(units.begin(), units.end(), [](const auto& kv) {
               return kv.second.service != "nova" || kv.second.version == "2.0.0";
             });
    }
    if (!done) return fail("seed " + str(seed) + ": upgrade did not finish");
    e->runUntilQuiescent(100);
    auto nova = kt::liveUnits(*e, "nova");
    if (static_cast<std::int64_t>(nova.size()) != replicas)
      return fail("seed " + str(seed) + ": " + str(nova.size()) + " nova units at the end");
    for (const auto& u : nova)
      if (u.version != "2.0.0" || u.state != UnitState::Ready)
        return fail("seed " + str(seed) + ": unit " + u.uid + " " + u.version);
    if (auto bad = inPlaceMutation(e->sim().mutationLog()); !bad.empty())
      return fail("seed " + str(seed) + ": " + bad);
    worst = std::max(worst, e->now() - start);
  }
  return {true, "25 seeds, ready nova >= 2 every tick, slowest rollout " + str(worst) + " ticks"};
}

// ---- 3 -------------------------------------------------------------------------------

Outcome serviceSelfHeal() {
  auto e = kt::readyEngine(7);
  if (e->now() >= 50) return fail("cloud took until tick " + str(e->now()));
  e->run(49 - e->now());
  const auto before = kt::liveUnits(*e, "nova");
  std::set<std::string> beforeUIDs;
  for (const auto& u : before) beforeUIDs.insert(u.uid);
  sim::FaultSchedule s;
  s.seed = 7;
  s.actions.push_back(kt::fault("crashUnit", {{"service", "nova"}}, 50));
  e->sim().faults().loadSchedule(s);

  bool degraded = false;
  Tick readyAt = -1;
  std::optional<sim::ServiceUnit> crashed;
  while (e->now() < 50 + 30 && readyAt < 0) {
    e->run(1);
    if (!crashed)
      for (const auto& m : e->sim().mutationLog())
        if (m.operation == "unit.fail" && m.tick == 50)
          for (const auto& u : before)
            if (u.uid == m.target) crashed = u;
    auto cloud = e->store().mustGet(kCloud);
    degraded = degraded || conditionTrue(cloud, ConditionType::Degraded);
    if (crashed && kt::isReady(cloud) && !conditionTrue(cloud, ConditionType::Degraded))
      readyAt = e->now();
  }
  if (!crashed) return fail("no unit crashed at tick 50");
  if (readyAt < 0) return fail("cloud not Ready by tick 80");
  if (!degraded) return fail("Degraded=True never observed");
  const auto after = kt::liveUnits(*e, "nova");
  std::vector<sim::ServiceUnit> fresh;
  for (const auto& u : after)
    if (!beforeUIDs.count(u.uid)) fresh.push_back(u);
  if (fresh.size() != 1) return fail(str(fresh.size()) + " replacement units");
  if (fresh[0].version != crashed->version || fresh[0].configHash != crashed->configHash)
    return fail("replacement identity differs");
  return {true, "unit " + crashed->uid + " replaced by " + fresh[0].uid + ", Ready at tick " +
                    str(readyAt)};
}

// ---- 4 -------------------------------------------------------------------------------

Outcome vmSelfHeal() {
  auto e = kt::readyEngine(11);
  kt::applyBaseWorkload(*e);
  std::vector<std::string> names;
  for (int i = 0; i < 10; ++i) {
    names.push_back("vm-" + std::to_string(i));
    e->apply(kt::instance(names.back()));
  }
  if (e->now() > 60) return fail("setup ran past tick 60");
  e->run(60 - e->now());
  std::map<std::string, std::string> ids;
  for (const auto& n : names) {
    auto st = kt::instanceStatus(*e, n);
    if (st.phase != InstancePhase::Running || !st.instanceID)
      return fail(n + " not Running by tick 60");
    ids[n] = *st.instanceID;
  }
  std::mt19937_64 rng(60);
  auto victims = names;
  std::shuffle(victims.begin(), victims.end(), rng);
  victims.resize(3);
  for (const auto& v : victims) e->sim().faults().inject(kt::fault("crashVM", {{"id", ids[v]}}));

  Tick healedAt = -1;
  while (e->now() < 60 + 50 && healedAt < 0) {
    e->run(1);
    bool all = true;
    for (const auto& v : victims) {
      auto st = kt::instanceStatus(*e, v);
      all = all && st.phase == InstancePhase::Running && st.instanceID &&
            *st.instanceID != ids[v] && st.restartCount == 1;
    }
    if (all) healedAt = e->now();
  }
  if (healedAt < 0) return fail("crashed instances not Running with new ids by tick 110");
  e->runUntilQuiescent(50);
  for (const auto& n : names) {
    auto st = kt::instanceStatus(*e, n);
    const bool victim = std::find(victims.begin(), victims.end(), n) != victims.end();
    if (victim && (st.restartCount != 1 || *st.instanceID == ids[n]))
      return fail(n + " restartCount " + str(st.restartCount));
    if (!victim && (st.restartCount != 0 || st.instanceID != ids[n]))
      return fail("untouched " + n + " changed");
  }
  return {true, "3 replaced by tick " + str(healedAt) + ", 7 untouched"};
}

// ---- 5 -------------------------------------------------------------------------------

Outcome retryExhaustion() {
  auto e = kt::readyEngine(13);
  kt::applyBaseWorkload(*e);
  e->runUntilQuiescent(100);
  e->sim().faults().inject(kt::fault("failBoot", {{"name", "doomed"}, {"cause", "kernel panic"}}));
  e->apply(kt::instance("doomed"));
  e->runUntilQuiescent(400);
  const auto boots = countOps(e->sim().mutationLog(), "vm.create", "name=doomed");
  if (boots == 0) return fail("never booted");
  const auto heals = boots - 1;
  if (heals != 5) return fail(str(heals) + " heal attempts");
  auto obj = e->store().mustGet(kt::key("Instance", "doomed", "default"));
  const auto* degraded = kt::condition(obj, ConditionType::Degraded);
  if (degraded == nullptr || degraded->status != model::ConditionStatus::True)
    return fail("not Degraded");
  if (degraded->message.empty()) return fail("Degraded without a cause");
  e->run(200);
  const auto later = countOps(e->sim().mutationLog(), "vm.create", "name=doomed");
  if (later != boots) return fail(str(later - boots) + " attempts after exhaustion");
  return {true, "5 heals, then Degraded: " + degraded->message};
}

// ---- 6 -------------------------------------------------------------------------------

Outcome idempotency() {
  auto e = kt::readyEngine(17);
  kt::applyBaseWorkload(*e);
  e->apply(kt::keypair("ops"));
  e->apply(kt::router("edge", {"net-a"}));
  for (int i = 0; i < 3; ++i) {
    auto vm = kt::instance("web-" + std::to_string(i));
    vm.as<Instance>().spec.keyPairRef = "ops";
    e->apply(vm);
  }
  e->apply(kt::ns("team-a"));
  e->apply(kt::network("shared", "team-a", true));
  if (!e->runUntilQuiescent(200).quiescent) return fail("setup never quiescent");
  const auto before = e->sim().mutationCount();
  e->manager().resyncAll();
  if (!e->runUntilQuiescent(100).quiescent) return fail("not quiescent after resync");
  const auto added = e->sim().mutationCount() - before;
  if (added != 0) return fail(str(added) + " new log entries");
  return {true, "0 new entries over " + str(before)};
}

// ---- 7 -------------------------------------------------------------------------------

std::size_t namespacedObjects(Engine& e, const std::string& ns) {
  std::size_t n = 0;
  for (const auto& kind : model::kNamespacedKinds) n += e.store().list(kind, ns).items.size();
  return n;
}

Outcome bijection() {
  auto e = kt::readyEngine(19);
  std::mt19937_64 rng(19);
  std::size_t blockedSeen = 0;
  const std::string annotation(model::kProjectIdAnnotation);
  for (int op = 0; op < 200; ++op) {
    const auto ns = "team-" + std::to_string(rng() % 6);
    const auto img = "img-" + std::to_string(rng() % 3);
    auto current = e->store().get(kt::key("Namespace", ns));
    try {
      switch (rng() % 4) {
        case 0: e->apply(kt::ns(ns)); break;
        case 1:
          if (current) e->store().remove(current->key());
          break;
        case 2:
          if (current && !current->deleting()) e->apply(kt::image(img, ns));
          break;
        default:
          if (current) e->store().remove(kt::key("Image", img, ns));
      }
    } catch (const Error&) {
    }
    e->run(1 + static_cast<Tick>(rng() % 4));

    const auto view = e->sim().view();
    for (const auto& n : e->store().list("Namespace").items) {
      if (!n.deleting() || namespacedObjects(*e, n.meta.name) == 0) continue;
      ++blockedSeen;
      auto it = n.meta.annotations.find(annotation);
      if (it != n.meta.annotations.end() && !view.projects.count(it->second))
        return fail("op " + str(op) + ": project of " + n.meta.name +
                    " gone while objects remain");
    }
  }
  if (!e->runUntilQuiescent(400).quiescent) return fail("never quiescent");

  const auto view = e->sim().view();
  std::map<std::string, std::string> byID;  // project id -> namespace
  for (const auto& n : e->store().list("Namespace").items) {
    auto it = n.meta.annotations.find(annotation);
    if (it == n.meta.annotations.end()) return fail(n.meta.name + " has no project");
    if (!byID.emplace(it->second, n.meta.name).second) return fail("project shared");
  }
  for (const auto& [id, p] : view.projects) {
    auto it = byID.find(id);
    if (it == byID.end()) return fail("leaked project " + p.name);
    if (it->second != p.name) return fail("project " + p.name + " bound to " + it->second);
  }
  if (byID.size() != view.projects.size()) return fail("namespace without a live project");
  return {true, str(view.projects.size()) + " namespaces <-> projects, " + str(blockedSeen) +
                    " blocked-delete observations"};
}

// ---- 8 -------------------------------------------------------------------------------

void randomOp(Engine& e, std::mt19937_64& rng) {
  static const std::vector<std::string> nss = {"default", "team-a"};
  static const std::vector<model::StringMap> selectors = {
      {}, {{"aggregate", "ssd"}}, {{"aggregate", "hdd"}}, {{"aggregate", "gpu"}}};
  const auto& ns = nss[rng() % nss.size()];
  const auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  const auto roll = pick(100);
  if (roll < 55) {
    switch (pick(6)) {
      case 0: {
        const int i = pick(3);
        e.apply(kt::image("img-" + std::to_string(i), ns,
                          "https://images.example/img-" + std::to_string(i) + ".qcow2"));
        break;
      }
      case 1: e.apply(kt::network("net-" + std::to_string(pick(3)), ns, pick(4) == 0)); break;
      case 2: {
        const int i = pick(4);
        e.apply(kt::subnet("sub-" + std::to_string(i), "net-" + std::to_string(i % 3),
                           "10." + std::to_string(i) + ".0.0/24", ns));
        break;
      }
      case 3: e.apply(kt::keypair("kp-" + std::to_string(pick(2)), ns)); break;
      case 4: e.apply(kt::router("r-0", {"sub-" + std::to_string(pick(4))}, ns)); break;
      default:
        e.apply(kt::instance("vm-" + std::to_string(pick(6)), ns, selectors[rng() % 4],
                             "img-" + std::to_string(pick(3)), {"sub-" + std::to_string(pick(4))}));
    }
  } else if (roll < 85) {
    static const std::vector<std::string> kinds = {"Image",   "Network", "Subnet",
                                                   "KeyPair", "Router",  "Instance"};
    auto items = e.store().list(kinds[rng() % kinds.size()], ns).items;
    if (!items.empty()) e.store().remove(items[rng() % items.size()].key());
  } else {
    static const char* services[] = {"keystone", "glance", "nova", "neutron"};
    switch (pick(5)) {
      case 0: e.sim().faults().inject(kt::fault("crashVM", {{"random", true}})); break;
      case 1: e.sim().faults().inject(kt::fault("crashUnit", {{"random", true}})); break;
      case 2:
        e.sim().faults().inject(
            kt::fault("apiErrorBurst", {{"service", services[pick(4)]}, {"ticks", 1 + pick(5)}}));
        break;
      case 3:
        e.sim().faults().inject(
            kt::fault("nodeDown", {{"random", true}, {"ticks", 1 + pick(10)}}));
        break;
      default:
        e.sim().faults().inject(kt::fault(
            "failBoot", {{"name", "vm-" + std::to_string(pick(6))}, {"count", 1 + pick(3)}}));
    }
  }
}

Outcome stewardshipSweep() {
  std::size_t maxRemote = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto e = kt::readyEngine(seed);
    e->apply(kt::ns("team-a"));
    std::mt19937_64 rng(seed * 7919);
    while (e->now() < 500) {
      if (rng() % 4 == 0) {
        try {
          randomOp(*e, rng);
        } catch (const Error&) {
        }
      }
      e->run(1);
    }
    if (!e->runUntilQuiescent(1000).quiescent) return fail("seed " + str(seed) + ": not quiescent");
    if (auto r = stewardship(*e); !r.passed) return fail("seed " + str(seed) + ": " + r.detail);
    maxRemote = std::max(maxRemote, remoteIDs(e->sim().view()).size());
  }
  return {true, "50 seeds x 500 ticks, up to " + str(maxRemote) + " remote objects"};
}

// ---- 9 -------------------------------------------------------------------------------

Outcome placement() {
  auto e = kt::readyEngine(23);
  kt::applyBaseWorkload(*e);
  const std::vector<model::StringMap> selectors = {
      {},
      {{"aggregate", "ssd"}},
      {{"aggregate", "hdd"}},
      {{"kubernetes.io/hostname", "compute-1"}},
      {{"aggregate", "gpu"}},
      {{"aggregate", "ssd"}, {"kubernetes.io/hostname", "compute-2"}},
      {{"node-role.kubernetes.io/control-plane", "true"}}};
  std::map<std::string, model::StringMap> wanted;
  for (int i = 0; i < 20; ++i) {
    const auto name = "p-" + std::to_string(i);
    wanted[name] = selectors[static_cast<std::size_t>(i) % selectors.size()];
    e->apply(kt::instance(name, "default", wanted[name]));
  }
  e->runUntilQuiescent(200);
  const auto view = e->sim().view();
  std::size_t placed = 0, refused = 0;
  for (const auto& [name, sel] : wanted) {
    bool satisfiable = false;
    for (const auto& [_, n] : view.nodes)
      satisfiable = satisfiable || (n.role == NodeRole::Compute && labelsSatisfy(n.labels, sel));
    auto obj = e->store().mustGet(kt::key("Instance", name, "default"));
    const auto& st = obj.as<Instance>().status;
    std::vector<const sim::SimVM*> vms;
    for (const auto& [_, vm] : view.vms)
      if (vm.name == name) vms.push_back(&vm);
    if (!satisfiable) {
      if (kt::readyReason(obj) != "NoValidHost") return fail(name + ": " + kt::readyReason(obj));
      if (!vms.empty() || st.instanceID) return fail(name + " has a VM");
      ++refused;
      continue;
    }
    if (vms.size() != 1 || !st.instanceID || vms[0]->id != *st.instanceID)
      return fail(name + ": " + str(vms.size()) + " VMs");
    const auto& node = view.nodes.at(vms[0]->node);
    if (node.role != NodeRole::Compute || !labelsSatisfy(node.labels, sel))
      return fail(name + " placed on " + node.name);
    ++placed;
  }
  return {true, str(placed) + " placed correctly, " + str(refused) + " NoValidHost"};
}

// ---- 10 ------------------------------------------------------------------------------

Outcome determinism() {
  TempDir tmp;
  std::string detail;
  for (const auto* name : {"self-heal.yaml", "crash-loop.yaml", "rolling-upgrade.yaml"}) {
    std::string digests[2], logs[2];
    for (int i = 0; i < 2; ++i) {
      const auto report = tmp.path / ("r" + std::to_string(i) + ".json");
      const auto log = tmp.path / ("l" + std::to_string(i) + ".jsonl");
      shell("'" + std::string(KUPENCTL_PATH) + "' run-scenario -f '" +
            (kRepo / "scenarios" / name).string() + "' --seed 42 --report '" + report.string() +
            "' --log '" + log.string() + "'");
      try {
        digests[i] = model::Json::parse(slurp(report)).at("digest").get<std::string>();
      } catch (const std::exception& ex) {
        return fail(std::string(name) + ": no report (" + ex.what() + ")");
      }
      logs[i] = slurp(log);
    }
    if (logs[0].empty()) return fail(std::string(name) + ": empty mutation log");
    if (logs[0] != logs[1]) return fail(std::string(name) + ": mutation logs differ");
    if (digests[0] != digests[1]) return fail(std::string(name) + ": digests differ");
    if (!detail.empty()) detail += ", ";
    detail += std::string(name) + " " + digests[0].substr(0, 12);
  }
  return {true, detail};
}

// ---- 11 ------------------------------------------------------------------------------

Outcome gapFreedom() {
  using State = std::map<ObjectKey, model::ResourceObject>;
  std::size_t checkpoints = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    LogicalClock clock;
    store::StateStore s(&clock);
    s.create(kt::ns("default"));
    std::mt19937_64 rng(seed);
    const std::vector<std::string> kinds = {"Network", "KeyPair"};
    std::map<std::string, State> replayed;
    std::map<std::string, store::Watch> watches;
    for (const auto& kind : kinds) {
      auto base = s.list(kind);
      for (auto& o : base.items) replayed[kind][o.key()] = o;
      watches.emplace(kind, s.watch(kind, base.revision));
    }
    for (int op = 0; op < 1000; ++op) {
      clock.set(op);
      const auto& kind = kinds[rng() % kinds.size()];
      const auto name = "o" + std::to_string(rng() % 30);
      auto current = s.get(kt::key(kind, name, "default"));
      try {
        switch (rng() % 5) {
          case 0:
            if (!current) {
              auto obj = kind == "Network" ? kt::network(name) : kt::keypair(name);
              if (rng() % 3 == 0) obj.meta.finalizers.insert("hold");
              s.create(obj);
            }
            break;
          case 1:
            if (current) {
              current->meta.labels["v"] = std::to_string(op);
              s.update(*current);
            }
            break;
          case 2:
            if (current) {
              if (current->is<model::Network>())
                current->as<model::Network>().status.serviceAssignedID = std::to_string(op);
              else
                current->as<model::KeyPair>().status.serviceAssignedID = std::to_string(op);
              s.updateStatus(*current);
            }
            break;
          case 3:
            if (current) s.remove(current->key());
            break;
          default:
            if (current && current->deleting()) {
              current->meta.finalizers.clear();
              s.update(*current);
            }
        }
      } catch (const Error&) {
      }
      for (const auto& k : kinds) {
        for (const auto& ev : watches.at(k).poll()) {
          if (ev.type == store::EventType::Deleted)
            replayed[k].erase(ev.object.key());
          else
            replayed[k][ev.object.key()] = ev.object;
        }
        State direct;
        for (auto& o : s.list(k).items) direct[o.key()] = o;
        if (direct != replayed[k])
          return fail("seed " + str(seed) + " op " + str(op) + " kind " + k + " diverged");
        ++checkpoints;
      }
    }
  }
  return {true, str(checkpoints) + " checkpoints over 3 x 1000 ops"};
}

// ---- 12 ------------------------------------------------------------------------------

Outcome cliContract() {
  TempDir tmp;
  const auto ctl = "cd '" + tmp.path.string() + "' && KUPENSTACK_STATE='" +
                   (tmp.path / "s.state").string() + "' '" + KUPENCTL_PATH + "' ";
  const auto workloads = kRepo / "manifests" / "workloads.yaml";
  auto applied = shell(ctl + "apply --wait-ticks 0 -f '" + workloads.string() + "'");
  if (applied.code != 0) return fail("apply exit " + str(applied.code) + ": " + applied.out);
  std::size_t roundTrips = 0;
  for (const auto& doc : model::loadManifests(workloads)) {
    if (!doc.object) return fail("workloads.yaml does not parse");
    const auto& want = *doc.object;
    auto got = shell(ctl + "get " + std::string(want.kind()) + " " + want.meta.name + " -n " +
                     want.meta.ns + " -o yaml");
    if (got.code != 0) return fail("get " + want.meta.name + " exit " + str(got.code));
    auto back = model::parseManifests(got.out, "get");
    if (back.size() != 1 || !back[0].object) return fail("get output does not parse");
    if (!back[0].object->specEquals(want) || back[0].object->meta.labels != want.meta.labels)
      return fail(want.meta.name + " does not round-trip");
    ++roundTrips;
  }
  std::ofstream(tmp.path / "broken.yaml") << "kind: Image\nmetadata: {name: x\n";
  std::ofstream(tmp.path / "invalid.yaml")
      << "apiVersion: kupenstack.io/v1alpha1\nkind: Image\nmetadata: {name: x}\n"
         "spec: {sourceURI: \"\", colour: blue}\n";
  const std::vector<std::pair<std::string, int>> cases = {
      {"apply -f broken.yaml", 2},      {"apply -f invalid.yaml", 3},
      {"get instance nobody", 4},       {"describe network nobody", 4},
      {"delete keypair nobody", 4},     {"get image cirros -n nowhere", 4}};
  for (const auto& [args, want] : cases) {
    auto r = shell(ctl + args);
    if (r.code != want) return fail("'" + args + "' exit " + str(r.code) + ", want " + str(want));
  }
  return {true, str(roundTrips) + " round-trips, " + str(cases.size()) + " exit codes"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"provisioning-convergence", provisioning},
      {"zero-downtime-upgrade", upgrade},
      {"service-self-healing", serviceSelfHeal},
      {"vm-self-healing", vmSelfHeal},
      {"retry-exhaustion", retryExhaustion},
      {"idempotent-resync", idempotency},
      {"namespace-project-bijection", bijection},
      {"id-stewardship-sweep", stewardshipSweep},
      {"placement-correctness", placement},
      {"determinism", determinism},
      {"store-gap-freedom", gapFreedom},
      {"cli-contract", cliContract},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& ex) {
      r = fail(std::string("exception: ") + ex.what());
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    if (!r.passed) ++failures;
    std::cout << (r.passed ? "PASS" : "FAIL") << "  " << std::setw(2) << i + 1 << "  "
              << criteria[i].first << "  " << r.detail << "  (" << ms << " ms)" << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failures) << "/" << criteria.size()
            << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
