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

// kupenctl: apply manifests, inspect objects, watch convergence and run
// failure scenarios against an embedded engine whose state persists in a
// snapshot file between invocations.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "kupenstack/engine/engine.hpp"
#include "kupenstack/engine/scenario.hpp"
#include "kupenstack/model/codec.hpp"

namespace fs = std::filesystem;
using namespace kupenstack;
using engine::Engine;
using model::Json;
using model::ResourceObject;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNotFound = 4;

constexpr Tick kDefaultWaitTicks = 200;

/// Exclusive advisory lock on "<state>.lock", held for the process lifetime.
class StateLock {
 public:
  explicit StateLock(const fs::path& state) {
    auto lockPath = state;
    lockPath += ".lock";
    fd_ = ::open(lockPath.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw Error(ErrorCode::InvalidArgument, "cannot open " + lockPath.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw Error(ErrorCode::Conflict, "state " + state.string() +
                                           " is locked by another kupenctl; try again later");
    }
  }
  ~StateLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  StateLock(const StateLock&) = delete;
  StateLock& operator=(const StateLock&) = delete;

 private:
  int fd_ = -1;
};

struct Globals {
  std::string state;
  std::uint64_t seed = 0;
};

fs::path statePath(const Globals& g) {
  if (!g.state.empty()) return g.state;
  if (const char* env = std::getenv("KUPENSTACK_STATE"); env != nullptr && *env != '\0')
    return env;
  return "kupenstack.state";
}

/// Opens (or creates) the persisted world under the lock.
struct Session {
  fs::path path;
  StateLock lock;
  std::unique_ptr<Engine> engine;

  explicit Session(const Globals& g) : path(statePath(g)), lock(path) {
    if (fs::exists(path)) {
      engine = Engine::load(path);
    } else {
      engine::EngineOptions o;
      o.seed = g.seed;
      engine = std::make_unique<Engine>(o);
    }
  }
  void save() { engine->save(path); }
};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

/// "instances", "Instance", "instance", "ns", "clouds" ... -> canonical kind.
std::optional<std::string> resolveKind(const std::string& text) {
  const auto t = lower(text);
  static const std::map<std::string, std::string> shortNames = {
      {"ns", "Namespace"}, {"cloud", "OpenStackCloud"}, {"clouds", "OpenStackCloud"},
      {"vm", "Instance"},  {"vms", "Instance"},         {"kp", "KeyPair"}};
  if (auto it = shortNames.find(t); it != shortNames.end()) return it->second;
  for (const auto& kind : model::kAllKinds) {
    const auto k = lower(kind);
    if (t == k || t == k + "s" || t == k + "es") return kind;
  }
  return std::nullopt;
}

std::string kindOrThrow(const std::string& text) {
  auto kind = resolveKind(text);
  if (!kind) throw Error(ErrorCode::UnknownKind, "unknown resource kind \"" + text + "\"");
  return *kind;
}

ObjectKey keyFor(const std::string& kind, const std::string& name, const std::string& ns) {
  return {kind, model::isNamespacedKind(kind) ? ns : std::string(), name};
}

std::string readyWord(const ResourceObject& obj) {
  const auto* c = model::findCondition(model::conditionsOf(obj), model::ConditionType::Ready);
  return c == nullptr ? "Unknown" : model::to_string(c->status);
}

std::string reasonOf(const ResourceObject& obj) {
  const auto* c = model::findCondition(model::conditionsOf(obj), model::ConditionType::Ready);
  return c == nullptr ? "" : c->reason;
}

void printTable(const std::vector<ResourceObject>& items, Tick now, bool showNamespace) {
  const bool instances = !items.empty() && items.front().is<model::Instance>();
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  if (showNamespace) header.push_back("NAMESPACE");
  for (const char* h : {"NAME", "PHASE", "READY", "REASON"}) header.push_back(h);
  if (instances) header.push_back("RESTARTS");
  header.push_back("AGE");
  rows.push_back(header);
  for (const auto& obj : items) {
    std::vector<std::string> row;
    if (showNamespace) row.push_back(obj.meta.ns);
    row.push_back(obj.meta.name);
    row.push_back(obj.deleting() ? "Terminating" : model::phaseOf(obj));
    row.push_back(readyWord(obj));
    row.push_back(reasonOf(obj));
    if (instances) row.push_back(std::to_string(obj.as<model::Instance>().status.restartCount));
    row.push_back(std::to_string(now - obj.meta.creationTimestamp) + "t");
    rows.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 3, ' ');
    }
    std::cout << line << "\n";
  }
}

void indentYaml(const std::string& yaml, const std::string& pad) {
  std::istringstream in(yaml);
  for (std::string line; std::getline(in, line);) std::cout << pad << line << "\n";
}

std::string yamlOf(const Json& j) {
  if (j.empty()) return "{}\n";
  return model::toYaml(j);
}

void describe(Engine& eng, const ResourceObject& obj) {
  std::cout << "Name:         " << obj.meta.name << "\n";
  if (!obj.meta.ns.empty()) std::cout << "Namespace:    " << obj.meta.ns << "\n";
  std::cout << "Kind:         " << obj.kind() << "\n";
  std::cout << "UID:          " << obj.meta.uid << "\n";
  std::cout << "Generation:   " << obj.meta.generation << "\n";
  std::cout << "Created:      tick " << obj.meta.creationTimestamp << " ("
            << eng.now() - obj.meta.creationTimestamp << " ticks ago)\n";
  if (obj.deleting())
    std::cout << "Deleting:     since tick " << *obj.meta.deletionTimestamp << "\n";
  if (!obj.meta.finalizers.empty()) {
    std::cout << "Finalizers:  ";
    for (const auto& f : obj.meta.finalizers) std::cout << " " << f;
    std::cout << "\n";
  }
  for (const auto& [k, v] : obj.meta.annotations)
    std::cout << "Annotation:   " << k << "=" << v << "\n";
  std::cout << "Spec:\n";
  indentYaml(yamlOf(model::specToJson(obj)), "  ");
  auto status = model::statusToJson(obj);
  status.erase("conditions");
  std::cout << "Status:\n";
  indentYaml(yamlOf(status), "  ");
  std::cout << "Conditions:\n";
  const auto& conds = model::conditionsOf(obj);
  if (conds.empty()) std::cout << "  <none>\n";
  for (const auto& c : conds) {
    std::cout << "  " << std::left << std::setw(12) << model::to_string(c.type) << std::setw(8)
              << model::to_string(c.status) << std::setw(22) << c.reason << "tick "
              << c.lastTransition;
    if (!c.message.empty()) std::cout << "  " << c.message;
    std::cout << "\n";
  }
  std::cout << "Health events:\n";
  std::vector<sim::HealthEvent> events;
  for (const auto& e : eng.sim().healthEvents())
    if (e.owner == obj.key().str()) events.push_back(e);
  if (events.empty()) std::cout << "  <none>\n";
  const std::size_t first = events.size() > 10 ? events.size() - 10 : 0;
  for (std::size_t i = first; i < events.size(); ++i)
    std::cout << "  tick " << events[i].tick << "  " << events[i].target << "  "
              << events[i].cause << "\n";
}

Json jsonFromScalar(const std::string& text) {
  auto docs = model::yamlDocumentsToJson(text, "argument");
  return docs.empty() ? Json(nullptr) : docs.front();
}

/// Advances until quiet or the budget runs out; reports how far it went.
void settle(Engine& eng, Tick budget) {
  if (budget > 0) eng.runUntilQuiescent(budget);
}

std::string blockers(Engine& eng, const ResourceObject& obj) {
  std::string out;
  for (const auto& f : obj.meta.finalizers) out += (out.empty() ? "" : ", ") + f;
  if (obj.is<model::Namespace>()) {
    std::size_t n = 0;
    for (const auto& kind : model::kNamespacedKinds)
      n += eng.store().list(kind, obj.meta.name).items.size();
    if (n > 0) out += " (" + std::to_string(n) + " namespaced objects remain)";
  } else {
    const auto reason = reasonOf(obj);
    if (!reason.empty() && readyWord(obj) == "False") out += " (" + reason + ")";
  }
  return out;
}

int exitFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError: return kExitParse;
    case ErrorCode::ValidationFailed: return kExitValidation;
    case ErrorCode::NotFound: return kExitNotFound;
    default: return kExitFailure;
  }
}

void printViolations(const std::string& where, const std::vector<Violation>& violations) {
  for (const auto& v : violations)
    std::cerr << "error: " << where << ": " << v.path << ": " << v.message << "\n";
}

// ---- commands -------------------------------------------------------------------------

int cmdApply(const Globals& g, const std::string& file, const std::string& ns, Tick wait) {
  Session s(g);
  std::vector<model::ManifestDocument> docs;
  try {
    docs = model::loadManifests(file, ns);
  } catch (const model::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  int rc = kExitOk;
  auto note = [&](int code) {
    if (rc == kExitOk) rc = code;
  };
  for (const auto& d : docs) {
    const auto where = d.source + " (line " + std::to_string(d.line) + ")";
    if (!d.violations.empty()) {
      printViolations(where, d.violations);
      note(kExitValidation);
      continue;
    }
    if (!d.object) continue;
    const auto& obj = *d.object;
    try {
      auto result = s.engine->apply(obj);
      std::cout << lower(std::string(obj.kind())) << "/" << obj.meta.name << " "
                << engine::to_string(result) << "\n";
    } catch (const ValidationError& e) {
      printViolations(where, e.violations());
      note(kExitValidation);
    } catch (const Error& e) {
      std::cerr << "error: " << where << ": " << e.what() << "\n";
      note(exitFor(e));
    }
  }
  settle(*s.engine, wait);
  s.save();
  return rc;
}

int cmdGet(const Globals& g, const std::string& kindText, const std::string& name,
           const std::string& ns, bool allNamespaces, const std::string& output) {
  Session s(g);
  const auto kind = kindOrThrow(kindText);
  std::vector<ResourceObject> items;
  if (!name.empty()) {
    auto obj = s.engine->store().get(keyFor(kind, name, ns));
    if (!obj) {
      std::cerr << "error: " << lower(kind) << " \"" << name << "\" not found\n";
      return kExitNotFound;
    }
    items.push_back(*obj);
  } else {
    std::optional<std::string> filter;
    if (model::isNamespacedKind(kind) && !allNamespaces) filter = ns;
    items = s.engine->store().list(kind, filter).items;
  }
  if (output == "json" || output == "yaml") {
    Json j;
    if (!name.empty()) {
      j = model::toJson(items.front());
    } else {
      j = {{"apiVersion", "v1"}, {"kind", "List"}, {"items", Json::array()}};
      for (const auto& o : items) j["items"].push_back(model::toJson(o));
    }
    if (output == "json") {
      std::cout << j.dump(2) << "\n";
    } else if (!name.empty()) {
      std::cout << model::toYaml(j);
    } else {
      for (const auto& o : items) std::cout << "---\n" << model::toYaml(model::toJson(o));
    }
    return kExitOk;
  }
  if (items.empty()) {
    std::cout << "No resources found.\n";
    return kExitOk;
  }
  printTable(items, s.engine->now(), allNamespaces && model::isNamespacedKind(kind));
  return kExitOk;
}

int cmdDescribe(const Globals& g, const std::string& kindText, const std::string& name,
                const std::string& ns) {
  Session s(g);
  const auto kind = kindOrThrow(kindText);
  auto obj = s.engine->store().get(keyFor(kind, name, ns));
  if (!obj) {
    std::cerr << "error: " << lower(kind) << " \"" << name << "\" not found\n";
    return kExitNotFound;
  }
  describe(*s.engine, *obj);
  return kExitOk;
}

int cmdDelete(const Globals& g, const std::string& kindText, const std::string& name,
              const std::string& file, const std::string& ns, Tick wait) {
  Session s(g);
  std::vector<ObjectKey> keys;
  if (!file.empty()) {
    try {
      for (const auto& d : model::loadManifests(file, ns)) {
        if (!d.violations.empty()) {
          printViolations(d.source, d.violations);
          return kExitValidation;
        }
        if (d.object) keys.push_back(d.object->key());
      }
    } catch (const model::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitParse;
    }
  } else {
    if (kindText.empty() || name.empty()) {
      std::cerr << "error: delete needs <kind> <name> or -f <file>\n";
      return kExitFailure;
    }
    keys.push_back(keyFor(kindOrThrow(kindText), name, ns));
  }
  int rc = kExitOk;
  std::vector<ObjectKey> marked;
  for (const auto& key : keys) {
    try {
      s.engine->store().remove(key);
      marked.push_back(key);
    } catch (const Error& e) {
      std::cerr << "error: " << lower(key.kind) << " \"" << key.name << "\" not found\n";
      if (rc == kExitOk) rc = exitFor(e);
    }
  }
  settle(*s.engine, wait);
  for (const auto& key : marked) {
    const auto label = lower(key.kind) + "/" + key.name;
    auto obj = s.engine->store().get(key);
    if (!obj) {
      std::cout << label << " deleted\n";
    } else {
      std::cout << label << " deleting (blocked by: " << blockers(*s.engine, *obj) << ")\n";
    }
  }
  s.save();
  return rc;
}

int cmdWatch(const Globals& g, const std::string& kindText, const std::string& name,
             const std::string& ns, bool untilReady, Tick ticks) {
  Session s(g);
  auto& eng = *s.engine;
  const auto kind = kindOrThrow(kindText);
  auto snapshot = [&] {
    std::map<std::string, std::string> lines;
    std::vector<ResourceObject> items;
    if (!name.empty()) {
      if (auto o = eng.store().get(keyFor(kind, name, ns))) items.push_back(*o);
    } else {
      std::optional<std::string> filter;
      if (model::isNamespacedKind(kind)) filter = ns;
      items = eng.store().list(kind, filter).items;
    }
    for (const auto& o : items) {
      std::string line = (o.deleting() ? std::string("Terminating") : model::phaseOf(o)) +
                         " ready=" + readyWord(o);
      const auto reason = reasonOf(o);
      if (!reason.empty()) line += " reason=" + reason;
      if (o.is<model::Instance>())
        line += " restarts=" + std::to_string(o.as<model::Instance>().status.restartCount);
      lines[lower(kind) + "/" + o.meta.name] = line;
    }
    return lines;
  };
  auto isReady = [&] {
    if (name.empty()) return false;
    auto o = eng.store().get(keyFor(kind, name, ns));
    return o && readyWord(*o) == "True";
  };

  auto last = snapshot();
  if (!name.empty() && last.empty()) {
    std::cerr << "error: " << lower(kind) << " \"" << name << "\" not found\n";
    return kExitNotFound;
  }
  for (const auto& [k, line] : last) std::cout << "tick " << eng.now() << "  " << k << "  " << line << "\n";
  int rc = kExitOk;
  if (untilReady && isReady()) {
    s.save();
    return kExitOk;
  }
  bool reachedReady = false;
  for (Tick i = 0; i < ticks; ++i) {
    eng.run(1);
    auto now = snapshot();
    for (const auto& [k, line] : now) {
      auto it = last.find(k);
      if (it == last.end() || it->second != line)
        std::cout << "tick " << eng.now() << "  " << k << "  " << line << "\n";
    }
    for (const auto& [k, _] : last)
      if (now.count(k) == 0) std::cout << "tick " << eng.now() << "  " << k << "  deleted\n";
    last = std::move(now);
    if (!name.empty() && last.empty()) {
      rc = kExitNotFound;
      break;
    }
    if (untilReady && isReady()) {
      reachedReady = true;
      break;
    }
  }
  if (untilReady && !reachedReady && rc == kExitOk) {
    std::cerr << "error: not ready after " << ticks << " ticks\n";
    rc = kExitFailure;
  }
  s.save();
  return rc;
}

int cmdTick(const Globals& g, Tick n, bool untilQuiet) {
  Session s(g);
  if (untilQuiet) {
    auto r = s.engine->runUntilQuiescent(n);
    std::cout << "tick " << s.engine->now() << (r.quiescent ? " (quiescent)" : "") << "\n";
  } else {
    s.engine->run(n);
    std::cout << "tick " << s.engine->now() << "\n";
  }
  s.save();
  return kExitOk;
}

int cmdInject(const Globals& g, const std::string& action, const std::vector<std::string>& args,
              const std::string& scheduleFile) {
  Session s(g);
  if (!scheduleFile.empty()) {
    std::ifstream in(scheduleFile);
    if (!in) {
      std::cerr << "error: cannot read " << scheduleFile << "\n";
      return kExitNotFound;
    }
    std::stringstream text;
    text << in.rdbuf();
    auto schedule = sim::FaultSchedule::parse(text.str(), scheduleFile);
    s.engine->sim().faults().loadSchedule(schedule);
    std::cout << "scheduled " << schedule.actions.size() << " fault actions\n";
  } else {
    Json a = Json::object();
    for (const auto& kv : args) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: argument \"" << kv << "\" is not key=value\n";
        return kExitParse;
      }
      a[kv.substr(0, eq)] = jsonFromScalar(kv.substr(eq + 1));
    }
    s.engine->sim().faults().inject(
        sim::FaultAction::fromJson({{"tick", s.engine->now()}, {"action", action}, {"args", a}}));
    std::cout << "injected " << action << " at tick " << s.engine->now() << "\n";
  }
  s.save();
  return kExitOk;
}

int cmdLog(const Globals& g, Tick since) {
  Session s(g);
  for (const auto& e : s.engine->sim().mutationLog())
    if (e.tick >= since) std::cout << e.toJson().dump() << "\n";
  return kExitOk;
}

int cmdRunScenario(const std::string& file, std::optional<std::uint64_t> seed,
                   std::optional<Tick> ticks, const std::string& reportPath,
                   const std::string& logPath) {
  engine::Scenario scenario;
  try {
    scenario = engine::Scenario::load(file);
  } catch (const model::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  auto report = engine::runScenario(scenario, {seed, ticks, true});
  for (const auto& r : report.invariants) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) std::cout << ": " << r.detail;
    std::cout << "\n";
  }
  for (const auto& d : report.json.at("degraded")) std::cout << "degraded: " << d.get<std::string>() << "\n";
  std::uint64_t restarts = 0;
  for (const auto& [_, n] : report.json.at("restarts").items()) restarts += n.get<std::uint64_t>();
  std::cout << "seed " << report.seed << ", " << report.ticks << " ticks, " << restarts
            << " restarts, digest " << report.digest << "\n";
  if (!reportPath.empty()) {
    std::ofstream out(reportPath, std::ios::trunc);
    out << report.json.dump(2) << "\n";
  }
  if (!logPath.empty()) std::ofstream(logPath, std::ios::trunc) << report.mutationLog;
  return report.passed ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kupenctl: declarative OpenStack-on-Kubernetes control at desk scale"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--state", g.state, "state snapshot file (default ./kupenstack.state, or $KUPENSTACK_STATE)");
  app.add_option("--seed", g.seed, "seed for a newly created state");

  std::string file, ns = "default", kind, name, output = "table", reportPath, logPath, action, schedule;
  Tick wait = kDefaultWaitTicks, ticks = 100, since = 0;
  bool allNs = false, untilReady = false, untilQuiet = false;
  std::optional<std::uint64_t> scenarioSeed;
  std::optional<Tick> scenarioTicks;
  std::vector<std::string> faultArgs;

  auto* apply = app.add_subcommand("apply", "create or update objects from manifests");
  apply->add_option("-f,--filename", file, "manifest file or directory")->required();
  apply->add_option("-n,--namespace", ns, "namespace for documents that name none");
  apply->add_option("--wait-ticks", wait, "ticks to run afterwards until quiet (0: none)");

  auto* get = app.add_subcommand("get", "list or show objects");
  get->add_option("kind", kind)->required();
  get->add_option("name", name);
  get->add_option("-n,--namespace", ns);
  get->add_flag("-A,--all-namespaces", allNs);
  get->add_option("-o,--output", output)->check(CLI::IsMember({"table", "json", "yaml"}));

  auto* desc = app.add_subcommand("describe", "show spec, status, conditions and health events");
  desc->add_option("kind", kind)->required();
  desc->add_option("name", name)->required();
  desc->add_option("-n,--namespace", ns);

  auto* del = app.add_subcommand("delete", "delete objects by name or manifest");
  del->add_option("kind", kind);
  del->add_option("name", name);
  del->add_option("-f,--filename", file);
  del->add_option("-n,--namespace", ns);
  del->add_option("--wait-ticks", wait, "ticks to run afterwards until quiet (0: none)");

  auto* watch = app.add_subcommand("watch", "advance the clock and print status changes");
  watch->add_option("kind", kind)->required();
  watch->add_option("name", name);
  watch->add_option("-n,--namespace", ns);
  watch->add_flag("--until-ready", untilReady, "stop with exit 0 once Ready=True");
  watch->add_option("--ticks", ticks, "maximum ticks to run");

  auto* tick = app.add_subcommand("tick", "advance the logical clock");
  Tick tickCount = 1;
  tick->add_option("count", tickCount, "ticks to run");
  tick->add_flag("--until-quiet", untilQuiet, "stop early once nothing is pending");

  auto* inject = app.add_subcommand("inject", "inject a fault now, or load a fault schedule");
  inject->add_option("action", action, "crashVM | crashUnit | apiErrorBurst | nodeDown | failBoot");
  inject->add_option("args", faultArgs, "key=value arguments");
  inject->add_option("-f,--filename", schedule, "fault schedule file");

  auto* log = app.add_subcommand("log", "print the simulator mutation log as JSON lines");
  log->add_option("--since", since, "first tick to show");

  auto* scen = app.add_subcommand("run-scenario", "run a scripted scenario and check invariants");
  scen->add_option("-f,--filename", file, "scenario file")->required();
  scen->add_option("--seed", scenarioSeed);
  scen->add_option("--ticks", scenarioTicks);
  scen->add_option("--report", reportPath, "write the JSON report here");
  scen->add_option("--log", logPath, "write the mutation log (JSON lines) here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*apply) return cmdApply(g, file, ns, wait);
    if (*get) return cmdGet(g, kind, name, ns, allNs, output);
    if (*desc) return cmdDescribe(g, kind, name, ns);
    if (*del) return cmdDelete(g, kind, name, file, ns, wait);
    if (*watch) return cmdWatch(g, kind, name, ns, untilReady, ticks);
    if (*tick) return cmdTick(g, tickCount, untilQuiet);
    if (*inject) {
      if (action.empty() && schedule.empty()) {
        std::cerr << "error: inject needs an action or -f <schedule>\n";
        return kExitFailure;
      }
      return cmdInject(g, action, faultArgs, schedule);
    }
    if (*log) return cmdLog(g, since);
    if (*scen) return cmdRunScenario(file, scenarioSeed, scenarioTicks, reportPath, logPath);
  } catch (const ValidationError& e) {
    printViolations("request", e.violations());
    return kExitValidation;
  } catch (const model::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exitFor(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
