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

#include "kupenstack/runtime/controller_runtime.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <thread>

namespace kupenstack::runtime {

const char* to_string(ReconcileOutcome::Kind kind) {
  switch (kind) {
    case ReconcileOutcome::Kind::Done: return "Done";
    case ReconcileOutcome::Kind::RequeueAfter: return "RequeueAfter";
    case ReconcileOutcome::Kind::Failed: return "Failed";
  }
  return "";
}

void ControllerConfig::check() const {
  if (maxConcurrentReconciles < 1)
    throw Error(ErrorCode::InvalidArgument, "maxConcurrentReconciles must be >= 1");
  if (baseBackoff < 1 || baseBackoff > maxBackoff)
    throw Error(ErrorCode::InvalidArgument, "require 1 <= baseBackoff <= maxBackoff");
  if (resyncPeriod < 1) throw Error(ErrorCode::InvalidArgument, "resyncPeriod must be >= 1");
}

Tick ControllerConfig::backoffFor(std::int64_t failures) const {
  Tick delay = baseBackoff;
  for (std::int64_t i = 1; i < failures && delay < maxBackoff; ++i) delay *= 2;
  return std::min(delay, maxBackoff);
}

model::Json ManagerReport::toJson() const {
  model::Json controllersJson = model::Json::object();
  for (const auto& [kind, s] : controllers) {
    controllersJson[kind] = {{"invocations", s.invocations},
                             {"failures", s.failures},
                             {"panics", s.panics},
                             {"maxQueueDepth", s.maxQueueDepth},
                             {"quiescentAtTick", s.quiescentAtTick
                                                     ? model::Json(*s.quiescentAtTick)
                                                     : model::Json(nullptr)}};
  }
  return {{"controllers", controllersJson},
          {"startTick", startTick},
          {"endTick", endTick},
          {"quiescent", quiescent}};
}

struct Manager::Controller {
  std::string kind;
  Reconciler reconciler;
  ControllerConfig config;
  std::vector<SecondaryWatch> secondary;
  std::optional<store::Watch> watch;
  std::map<std::string, store::Watch> secondaryWatches;

  // Pending FIFO with membership set for deduplication.
  std::deque<ObjectKey> queue;
  std::set<ObjectKey> pending;
  std::map<ObjectKey, Tick> delayed;
  std::map<ObjectKey, std::int64_t> failures;
  std::set<ObjectKey> inflight;
  Tick lastResync = 0;
  ControllerStats stats;
};

Manager::Manager(store::StateStore& store, LogicalClock& clock, Options options)
    : store_(store), clock_(clock), options_(options), rng_(options.seed) {}

Manager::~Manager() = default;

ControllerHandle Manager::registerController(std::string kind, Reconciler reconciler,
                                             ControllerConfig config,
                                             std::vector<SecondaryWatch> secondary) {
  config.check();
  std::lock_guard lock(mu_);
  if (controllers_.count(kind) != 0)
    throw Error(ErrorCode::DuplicateController, "controller for " + kind + " already registered");
  auto c = std::make_unique<Controller>();
  c->kind = kind;
  c->reconciler = std::move(reconciler);
  c->config = config;
  c->secondary = std::move(secondary);
  c->lastResync = clock_.now();

  auto listed = store_.list(kind);
  for (const auto& obj : listed.items) enqueueLocked(*c, obj.key());
  c->watch = store_.watch(kind, listed.revision);
  for (const auto& s : c->secondary)
    c->secondaryWatches.emplace(s.kind, store_.watch(s.kind, listed.revision));
  if (c->queue.empty()) c->stats.quiescentAtTick = clock_.now();

  registration_.push_back(c.get());
  controllers_.emplace(kind, std::move(c));
  return {std::move(kind)};
}

void Manager::enqueueLocked(Controller& c, const ObjectKey& key) {
  if (c.pending.insert(key).second) {
    c.queue.push_back(key);
    c.stats.maxQueueDepth = std::max(c.stats.maxQueueDepth, c.queue.size());
    c.stats.quiescentAtTick.reset();
  }
}

void Manager::enqueueExternal(const ObjectKey& key) {
  std::lock_guard lock(mu_);
  auto it = controllers_.find(key.kind);
  if (it == controllers_.end())
    throw Error(ErrorCode::UnknownKind, "no controller registered for kind " + key.kind);
  enqueueLocked(*it->second, key);
}

void Manager::resyncAll() {
  std::lock_guard lock(mu_);
  for (auto* c : registration_) {
    for (const auto& obj : store_.list(c->kind).items) enqueueLocked(*c, obj.key());
    c->lastResync = clock_.now();
  }
}

void Manager::drainWatches(Controller& c) {
  // Relist on compaction: enqueue everything and resume from the list point.
  auto relist = [&](store::Watch& w, const std::function<void(const model::ResourceObject&)>& f) {
    auto listed = store_.list(w.kind());
    for (const auto& obj : listed.items) f(obj);
    w = store_.watch(w.kind(), listed.revision);
  };
  auto primary = [&](const model::ResourceObject& obj) { enqueueLocked(c, obj.key()); };
  try {
    for (const auto& ev : c.watch->poll()) primary(ev.object);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CompactedRevision) throw;
    relist(*c.watch, primary);
  }
  for (const auto& s : c.secondary) {
    auto& w = c.secondaryWatches.at(s.kind);
    auto mapped = [&](const model::ResourceObject& obj) {
      for (const auto& key : s.map(obj)) enqueueLocked(c, key);
    };
    try {
      for (const auto& ev : w.poll()) mapped(ev.object);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CompactedRevision) throw;
      relist(w, mapped);
    }
  }
}

std::vector<Manager::Controller*> Manager::orderedControllers() {
  std::vector<Controller*> order = registration_;
  if (options_.deterministic && order.size() > 1) {
    // Fisher-Yates on raw engine output; portable across standard libraries.
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(rng_() % (i + 1));
      std::swap(order[i], order[j]);
    }
  }
  return order;
}

void Manager::step() {
  const Tick now = clock_.now();
  std::vector<std::pair<Controller*, std::vector<ObjectKey>>> batches;
  {
    std::lock_guard lock(mu_);
    for (auto* c : orderedControllers()) {
      drainWatches(*c);
      for (auto it = c->delayed.begin(); it != c->delayed.end();) {
        if (it->second <= now) {
          enqueueLocked(*c, it->first);
          it = c->delayed.erase(it);
        } else {
          ++it;
        }
      }
      if (now - c->lastResync >= c->config.resyncPeriod) {
        for (const auto& obj : store_.list(c->kind).items) enqueueLocked(*c, obj.key());
        c->lastResync = now;
      }
      std::vector<ObjectKey> batch(c->queue.begin(), c->queue.end());
      c->queue.clear();
      c->pending.clear();
      batches.emplace_back(c, std::move(batch));
    }
  }
  for (auto& [c, batch] : batches) processBatch(*c, std::move(batch));

  std::lock_guard lock(mu_);
  for (auto* c : registration_) {
    if (c->queue.empty() && c->delayed.empty() && !c->stats.quiescentAtTick)
      c->stats.quiescentAtTick = now;
  }
}

void Manager::processBatch(Controller& c, std::vector<ObjectKey> batch) {
  if (batch.empty()) return;
  if (options_.deterministic || c.config.maxConcurrentReconciles == 1 || batch.size() == 1) {
    for (const auto& key : batch) reconcileOne(c, key);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < batch.size(); i = next++) reconcileOne(c, batch[i]);
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(c.config.maxConcurrentReconciles),
                                       batch.size());
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

void Manager::reconcileOne(Controller& c, const ObjectKey& key) {
  {
    std::lock_guard lock(mu_);
    if (!c.inflight.insert(key).second) {
      ++c.stats.reentrancyViolations;
      enqueueLocked(c, key);
      return;
    }
    ++c.stats.invocations;
  }

  ReconcileOutcome outcome;
  bool panicked = false;
  try {
    outcome = c.reconciler(key);
  } catch (const std::exception& e) {
    outcome = ReconcileOutcome::failed(std::string("panic: ") + e.what());
    panicked = true;
  } catch (...) {
    outcome = ReconcileOutcome::failed("panic: unknown exception");
    panicked = true;
  }

  std::lock_guard lock(mu_);
  c.inflight.erase(key);
  const Tick now = clock_.now();
  if (options_.recordInvocations) log_.push_back({now, key, outcome.kind});
  c.delayed.erase(key);
  switch (outcome.kind) {
    case ReconcileOutcome::Kind::Done:
      c.failures.erase(key);
      break;
    case ReconcileOutcome::Kind::RequeueAfter:
      c.failures.erase(key);
      c.delayed[key] = now + std::max<Tick>(outcome.after, 1);
      break;
    case ReconcileOutcome::Kind::Failed: {
      ++c.stats.failures;
      if (panicked) ++c.stats.panics;
      auto n = ++c.failures[key];
      c.delayed[key] = now + c.config.backoffFor(n);
      break;
    }
  }
  if (!c.delayed.empty()) c.stats.quiescentAtTick.reset();
}

bool Manager::quiescent() {
  std::lock_guard lock(mu_);
  bool quiet = true;
  for (auto* c : registration_) {
    drainWatches(*c);
    if (!c->queue.empty() || !c->delayed.empty() || !c->inflight.empty()) quiet = false;
  }
  return quiet;
}

ManagerReport Manager::run(Tick tickBudget, TickDriver* driver, bool stopWhenQuiescent) {
  ManagerReport r;
  r.startTick = clock_.now();
  auto settled = [&] { return quiescent() && (driver == nullptr || driver->idle()); };
  for (Tick i = 0; i < tickBudget; ++i) {
    if (stopWhenQuiescent && settled()) break;
    const Tick now = clock_.advance();
    if (driver != nullptr) driver->advance(now);
    step();
  }
  auto final = report();
  final.startTick = r.startTick;
  final.endTick = clock_.now();
  final.quiescent = settled();
  return final;
}

ManagerReport Manager::report() const {
  std::lock_guard lock(mu_);
  ManagerReport r;
  for (const auto* c : registration_) r.controllers[c->kind] = c->stats;
  r.endTick = clock_.now();
  return r;
}

std::vector<InvocationRecord> Manager::invocations() const {
  std::lock_guard lock(mu_);
  return log_;
}

bool Manager::hasController(std::string_view kind) const {
  std::lock_guard lock(mu_);
  return controllers_.find(kind) != controllers_.end();
}

std::size_t Manager::queueDepth(std::string_view kind) const {
  std::lock_guard lock(mu_);
  auto it = controllers_.find(kind);
  return it == controllers_.end() ? 0 : it->second->queue.size();
}

}  // namespace kupenstack::runtime
