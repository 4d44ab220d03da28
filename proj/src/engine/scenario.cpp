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

#include "kupenstack/engine/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "kupenstack/model/hash.hpp"
#include "kupenstack/sim/placement.hpp"

namespace kupenstack::engine {

using model::ResourceObject;

// ---- parsing ----------------------------------------------------------------------------

Scenario Scenario::parse(std::string_view yamlText, std::string_view source,
                         std::filesystem::path baseDir) {
  auto docs = model::yamlDocumentsToJson(yamlText, source);
  Scenario sc;
  sc.baseDir = std::move(baseDir);
  if (docs.empty() || docs.front().is_null()) return sc;
  const Json& root = docs.front();
  auto bad = [&](const std::string& msg) { return model::ParseError(std::string(source), 1, msg); };

  const Json* steps = &root;
  if (root.is_object()) {
    for (const auto& [k, _] : root.items())
      if (k != "seed" && k != "ticks" && k != "fleet" && k != "faults" && k != "steps")
        throw bad("unknown field \"" + k + "\"");
    if (root.contains("seed")) {
      if (!root.at("seed").is_number_integer()) throw bad("seed must be an integer");
      sc.seed = root.at("seed").get<std::uint64_t>();
    }
    if (root.contains("ticks")) {
      if (!root.at("ticks").is_number_integer()) throw bad("ticks must be an integer");
      sc.ticks = root.at("ticks").get<Tick>();
    }
    try {
      if (root.contains("fleet")) sc.fleet = sim::fleetFromJson(root.at("fleet"));
      if (root.contains("faults")) {
        if (!root.at("faults").is_array()) throw bad("faults must be a list");
        for (const auto& f : root.at("faults")) sc.faults.push_back(sim::FaultAction::fromJson(f));
      }
    } catch (const model::ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw bad(e.what());
    }
    static const Json kEmpty = Json::array();
    steps = root.contains("steps") ? &root.at("steps") : &kEmpty;
  }
  if (!steps->is_array()) throw bad("steps must be a list");
  for (const auto& item : *steps) {
    if (!item.is_object() || !item.contains("op")) throw bad("each step needs an op");
    ScenarioStep step;
    step.tick = item.value("tick", Tick{0});
    step.op = item.at("op").get<std::string>();
    if (step.op != "apply" && step.op != "delete" && step.op != "inject")
      throw bad("unknown op \"" + step.op + "\"");
    if (item.contains("args")) {
      step.args = item.at("args");
    } else {
      step.args = item;
      step.args.erase("tick");
      step.args.erase("op");
    }
    if (!step.args.is_object()) throw bad("step args must be a map");
    sc.steps.push_back(std::move(step));
  }
  return sc;
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string(), path.parent_path());
}

// ---- steps --------------------------------------------------------------------------------

namespace {

void applyDocuments(Engine& engine, const std::vector<model::ManifestDocument>& docs) {
  for (const auto& d : docs) {
    if (!d.violations.empty()) throw ValidationError(d.violations);
    if (d.object) engine.apply(*d.object);
  }
}

}  // namespace

void applyStep(Engine& engine, const ScenarioStep& step, const std::filesystem::path& baseDir) {
  const Json& a = step.args;
  if (step.op == "apply") {
    if (a.contains("manifest")) engine.apply(model::decodeManifest(a.at("manifest")));
    if (a.contains("manifests"))
      for (const auto& m : a.at("manifests")) engine.apply(model::decodeManifest(m));
    if (a.contains("file"))
      applyDocuments(engine, model::loadManifests(baseDir / a.at("file").get<std::string>()));
    return;
  }
  if (step.op == "delete") {
    const auto kind = a.at("kind").get<std::string>();
    if (!model::isKnownKind(kind)) throw Error(ErrorCode::UnknownKind, "unknown kind " + kind);
    const auto ns = model::isNamespacedKind(kind) ? a.value("namespace", std::string("default"))
                                                  : std::string();
    try {
      engine.store().remove({kind, ns, a.at("name").get<std::string>()});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotFound) throw;
    }
    return;
  }
  if (step.op == "inject") {
    Json j = {{"tick", engine.now()}, {"action", a.at("action")}};
    if (a.contains("args")) {
      j["args"] = a.at("args");
    } else {
      Json rest = a;
      rest.erase("action");
      j["args"] = rest;
    }
    engine.sim().faults().inject(sim::FaultAction::fromJson(j));
    return;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown op " + step.op);
}

// ---- invariants -----------------------------------------------------------------------------

namespace {

std::vector<ResourceObject> allObjects(Engine& engine) {
  std::vector<ResourceObject> out;
  for (const auto& kind : model::kAllKinds)
    for (auto& obj : engine.store().list(kind).items) out.push_back(std::move(obj));
  return out;
}

}  // namespace

void InvariantMonitor::fail(const std::string& name, const std::string& detail) {
  auto& r = results_[name];
  if (r.passed) r.detail = detail;
  r.passed = false;
}

void InvariantMonitor::observe(Engine& engine) {
  const auto view = engine.sim().view();
  const auto tick = std::to_string(engine.now());
  for (const auto* name : {"capacity-conservation", "unit-immutability", "api-only-actors",
                           "restart-accounting", "ready-replicas-bounded", "id-stewardship"})
    results_.try_emplace(name, InvariantResult{name, true, ""});

  std::map<std::string, std::pair<std::int64_t, std::int64_t>> used;
  for (const auto& [_, vm] : view.vms) {
    if (vm.state == sim::VmState::Deleted) continue;
    used[vm.node].first += vm.flavor.vcpus;
    used[vm.node].second += vm.flavor.ramMiB;
  }
  for (const auto& [node, u] : used) {
    const auto& cap = view.nodes.at(node).capacity;
    if (u.first > cap.vcpus || u.second > cap.ramMiB)
      fail("capacity-conservation", "tick " + tick + ": node " + node + " over capacity");
  }

  for (const auto& [uid, u] : view.units) {
    auto identity = u.service + "|" + u.version + "|" + u.configHash + "|" + u.node + "|" +
                    u.owner.str();
    auto [it, inserted] = unitIdentity_.emplace(uid, identity);
    if (!inserted && it->second != identity)
      fail("unit-immutability", "tick " + tick + ": unit " + uid + " changed identity");
  }

  if (engine.sim().mutationCount() != logChecked_) {
    const auto log = engine.sim().mutationLog();
    for (std::size_t i = logChecked_; i < log.size(); ++i)
      if (kApiActors.count(log[i].actor) == 0)
        fail("api-only-actors", "entry " + std::to_string(i) + " by " + log[i].actor);
    logChecked_ = log.size();
  }

  for (const auto& obj : engine.store().list("Instance").items) {
    const auto& st = obj.as<model::Instance>().status;
    auto& track = instances_[obj.meta.uid];
    if (st.restartCount < track.lastRestarts)
      fail("restart-accounting", "tick " + tick + ": " + obj.key().str() + " restartCount fell");
    if (st.instanceID) {
      if (track.lastID && *track.lastID != *st.instanceID &&
          st.restartCount <= track.restartsAtLastID)
        fail("restart-accounting",
             "tick " + tick + ": " + obj.key().str() + " replaced without restart increment");
      if (track.lastID != st.instanceID) {
        track.lastID = st.instanceID;
        track.restartsAtLastID = st.restartCount;
      }
    }
    track.lastRestarts = st.restartCount;
  }

  for (const auto& obj : engine.store().list("OpenStackCloud").items) {
    for (const auto& [svc, s] : obj.as<model::OpenStackCloud>().status.serviceStates)
      if (s.readyReplicas > s.desiredReplicas)
        fail("ready-replicas-bounded", "tick " + tick + ": " + svc + " ready > desired");
  }

  // Stewardship is a property of settled states; mid-flight creates may
  // not have published their ids yet.
  std::string detail;
  if (engine.quiescent() && !idStewardship(engine, &detail))
    fail("id-stewardship", "tick " + tick + ": " + detail);
}

bool InvariantMonitor::idStewardship(Engine& engine, std::string* detail) {
  const auto view = engine.sim().view();
  std::set<std::string> recorded;
  std::set<std::pair<std::string, std::string>> instanceIPs;
  for (const auto& obj : allObjects(engine)) {
    for (const auto& id : model::serviceAssignedIDs(obj)) recorded.insert(id);
    if (obj.is<model::Instance>())
      for (const auto& ip : obj.as<model::Instance>().status.ipAddresses)
        instanceIPs.insert({obj.meta.uid, ip});
  }
  const auto remote = view.remoteObjectIDs();
  std::set<std::pair<std::string, std::string>> allocated;
  for (const auto& [_, s] : view.subnets)
    for (const auto& [owner, ip] : s.allocations) allocated.insert({owner, model::formatIpv4(ip)});

  auto firstDiff = [](const auto& a, const auto& b) -> std::string {
    for (const auto& x : a)
      if (b.count(x) == 0) return x;
    return {};
  };
  if (remote != recorded) {
    if (detail) {
      auto orphan = firstDiff(remote, recorded);
      *detail = orphan.empty() ? "status records unknown id " + firstDiff(recorded, remote)
                               : "remote id " + orphan + " has no owner";
    }
    return false;
  }
  if (allocated != instanceIPs) {
    if (detail) *detail = "address allocations disagree with instance status";
    return false;
  }
  return true;
}

bool InvariantMonitor::namespaceProjectBijection(Engine& engine, std::string* detail) {
  const auto view = engine.sim().view();
  if (view.readyUnits("keystone") == 0 && view.projects.empty()) return true;
  const std::string annotation(model::kProjectIdAnnotation);
  std::map<std::string, std::string> bound;  // project id -> namespace
  for (const auto& ns : engine.store().list("Namespace").items) {
    auto it = ns.meta.annotations.find(annotation);
    if (it == ns.meta.annotations.end()) {
      if (detail) *detail = "namespace " + ns.meta.name + " has no project";
      return false;
    }
    auto p = view.projects.find(it->second);
    if (p == view.projects.end() || p->second.name != ns.meta.name) {
      if (detail) *detail = "namespace " + ns.meta.name + " bound to missing project";
      return false;
    }
    if (!bound.emplace(it->second, ns.meta.name).second) {
      if (detail) *detail = "project " + it->second + " bound twice";
      return false;
    }
  }
  for (const auto& [id, p] : view.projects) {
    if (bound.count(id) == 0) {
      if (detail) *detail = "project " + p.name + " has no namespace";
      return false;
    }
  }
  return true;
}

std::vector<InvariantResult> InvariantMonitor::finish(Engine& engine) {
  std::string detail;
  results_.try_emplace("id-stewardship", InvariantResult{"id-stewardship", true, ""});
  const bool settled = engine.quiescent();
  if (settled && !idStewardship(engine, &detail)) fail("id-stewardship", "end: " + detail);
  InvariantResult bij{"namespace-project-bijection",
                      !settled || namespaceProjectBijection(engine, &detail), ""};
  if (!bij.passed) bij.detail = detail;
  results_[bij.name] = bij;

  InvariantResult degraded{"no-degraded-objects", true, ""};
  for (const auto& obj : allObjects(engine)) {
    if (model::isConditionTrue(model::conditionsOf(obj), model::ConditionType::Degraded)) {
      if (degraded.passed) degraded.detail = obj.key().str();
      degraded.passed = false;
    }
  }
  results_[degraded.name] = degraded;

  std::vector<InvariantResult> out;
  for (auto& [_, r] : results_) out.push_back(r);
  return out;
}

// ---- reports ---------------------------------------------------------------------------------

Json worldJson(Engine& engine) {
  Json objects = Json::array();
  for (const auto& obj : allObjects(engine)) objects.push_back(model::toJson(obj));
  const auto log = engine.sim().mutationLogJsonl();
  Json health = Json::array();
  for (const auto& h : engine.sim().healthEvents())
    health.push_back({{"tick", h.tick}, {"target", h.target}, {"owner", h.owner},
                      {"cause", h.cause}});
  return {{"tick", engine.now()},
          {"objects", objects},
          {"mutationLog",
           {{"entries", engine.sim().mutationCount()}, {"digest", model::digestHex(log)}}},
          {"healthEvents", health}};
}

ScenarioReport runScenario(const Scenario& scenario, const RunOptions& options) {
  ScenarioReport rep;
  rep.seed = options.seed.value_or(scenario.seed.value_or(0));
  rep.ticks = options.ticks.value_or(scenario.ticks.value_or(kDefaultScenarioTicks));

  EngineOptions eo;
  eo.seed = rep.seed;
  eo.deterministic = options.deterministic;
  eo.sim.fleet = scenario.fleet;
  Engine engine(eo);
  if (!scenario.faults.empty())
    engine.sim().faults().loadSchedule({rep.seed, scenario.faults});

  auto steps = scenario.steps;
  std::stable_sort(steps.begin(), steps.end(),
                   [](const auto& a, const auto& b) { return a.tick < b.tick; });
  InvariantMonitor monitor;
  Json stepErrors = Json::array();
  std::size_t next = 0;
  for (;;) {
    while (next < steps.size() && steps[next].tick <= engine.now()) {
      try {
        applyStep(engine, steps[next], scenario.baseDir);
      } catch (const std::exception& e) {
        stepErrors.push_back({{"tick", engine.now()}, {"op", steps[next].op}, {"error", e.what()}});
      }
      ++next;
    }
    if (engine.now() >= rep.ticks) break;
    engine.run(1);
    monitor.observe(engine);
  }
  rep.invariants = monitor.finish(engine);
  rep.invariants.push_back({"steps-applied", stepErrors.empty(),
                            stepErrors.empty() ? "" : stepErrors.front().dump()});
  rep.passed = std::all_of(rep.invariants.begin(), rep.invariants.end(),
                           [](const auto& r) { return r.passed; });

  Json invariants = Json::array();
  for (const auto& r : rep.invariants)
    invariants.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  Json degraded = Json::array();
  Json restarts = Json::object();
  for (const auto& obj : allObjects(engine)) {
    if (model::isConditionTrue(model::conditionsOf(obj), model::ConditionType::Degraded))
      degraded.push_back(obj.key().str());
    if (obj.is<model::Instance>())
      restarts[obj.key().str()] = obj.as<model::Instance>().status.restartCount;
  }
  auto world = worldJson(engine);
  rep.digest = model::digestHex(world.dump());
  rep.mutationLog = engine.sim().mutationLogJsonl();
  auto manager = engine.manager().report();
  manager.startTick = 0;
  manager.endTick = engine.now();
  manager.quiescent = engine.quiescent();
  rep.json = {{"seed", rep.seed},          {"ticks", rep.ticks},
              {"passed", rep.passed},      {"invariants", invariants},
              {"degraded", degraded},      {"restarts", restarts},
              {"stepErrors", stepErrors},  {"manager", manager.toJson()},
              {"world", world},            {"digest", rep.digest}};
  return rep;
}

}  // namespace kupenstack::engine
