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

// Level-triggered reconciliation machinery.
//
// Controllers subscribe to store watches and reduce every event to an object
// key in a deduplicating work queue. Reconcilers receive only the key and
// must read current state themselves. Time is the engine's logical clock;
// one manager step processes every key that is ready at the current tick.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kupenstack/common.hpp"
#include "kupenstack/model/codec.hpp"
#include "kupenstack/store/state_store.hpp"

namespace kupenstack::runtime {

struct ReconcileOutcome {
  enum class Kind { Done, RequeueAfter, Failed };

  Kind kind = Kind::Done;
  Tick after = 0;
  std::string error;

  static ReconcileOutcome done() { return {}; }
  static ReconcileOutcome requeueAfter(Tick ticks) { return {Kind::RequeueAfter, ticks, {}}; }
  static ReconcileOutcome failed(std::string error) {
    return {Kind::Failed, 0, std::move(error)};
  }
};

const char* to_string(ReconcileOutcome::Kind kind);

/// Level-triggered: the reconciler gets the key, never the event.
using Reconciler = std::function<ReconcileOutcome(const ObjectKey&)>;

struct ControllerConfig {
  int maxConcurrentReconciles = 1;
  Tick baseBackoff = 1;
  Tick maxBackoff = 64;
  Tick resyncPeriod = 100;

  void check() const;
  /// Delay after the n-th consecutive failure (n >= 1).
  Tick backoffFor(std::int64_t failures) const;
};

/// Maps events on another kind to keys of the owning controller.
struct SecondaryWatch {
  std::string kind;
  std::function<std::vector<ObjectKey>(const model::ResourceObject&)> map;
};

struct ControllerHandle {
  std::string kind;
};

struct ControllerStats {
  std::int64_t invocations = 0;
  std::int64_t failures = 0;
  std::int64_t panics = 0;
  std::int64_t reentrancyViolations = 0;
  std::size_t maxQueueDepth = 0;
  std::optional<Tick> quiescentAtTick;
};

struct ManagerReport {
  std::map<std::string, ControllerStats> controllers;
  Tick startTick = 0;
  Tick endTick = 0;
  bool quiescent = false;

  model::Json toJson() const;
};

struct InvocationRecord {
  Tick tick = 0;
  ObjectKey key;
  ReconcileOutcome::Kind outcome = ReconcileOutcome::Kind::Done;
};

/// Hook for the world outside the manager (the simulator) to advance with
/// the clock and to report whether it still has pending transitions.
class TickDriver {
 public:
  virtual ~TickDriver() = default;
  virtual void advance(Tick now) = 0;
  virtual bool idle() const = 0;
};

class Manager {
 public:
  struct Options {
    std::uint64_t seed = 0;
    /// Single-threaded, seeded controller order. When false, each
    /// controller's batch runs on up to maxConcurrentReconciles threads.
    bool deterministic = true;
    bool recordInvocations = false;
  };

  Manager(store::StateStore& store, LogicalClock& clock, Options options);
  Manager(store::StateStore& store, LogicalClock& clock) : Manager(store, clock, Options{}) {}
  ~Manager();

  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;

  /// Lists existing objects of `kind` (enqueuing all) and starts watching.
  ControllerHandle registerController(std::string kind, Reconciler reconciler,
                                      ControllerConfig config = {},
                                      std::vector<SecondaryWatch> secondary = {});

  /// Queues a key from outside the watch path (the validation agent).
  void enqueueExternal(const ObjectKey& key);

  /// Re-enqueues every live key of every controller.
  void resyncAll();

  /// Processes one tick of work at the clock's current time.
  void step();

  /// Advances the clock tick by tick until the budget is spent or, when
  /// stopWhenQuiescent, the system is quiescent.
  ManagerReport run(Tick tickBudget, TickDriver* driver = nullptr,
                    bool stopWhenQuiescent = true);

  /// Drains pending watch events into the queues, then reports whether all
  /// queues and delayed requeues are empty.
  bool quiescent();

  ManagerReport report() const;
  std::vector<InvocationRecord> invocations() const;
  bool hasController(std::string_view kind) const;
  std::size_t queueDepth(std::string_view kind) const;

 private:
  struct Controller;

  void drainWatches(Controller& c);
  void processBatch(Controller& c, std::vector<ObjectKey> batch);
  void reconcileOne(Controller& c, const ObjectKey& key);
  void enqueueLocked(Controller& c, const ObjectKey& key);
  std::vector<Controller*> orderedControllers();

  store::StateStore& store_;
  LogicalClock& clock_;
  Options options_;
  std::mt19937_64 rng_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Controller>, std::less<>> controllers_;
  std::vector<Controller*> registration_;
  std::vector<InvocationRecord> log_;
};

}  // namespace kupenstack::runtime
