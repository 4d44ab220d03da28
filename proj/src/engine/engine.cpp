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

#include "kupenstack/engine/engine.hpp"

#include <fstream>

namespace kupenstack::engine {

const char* to_string(ApplyResult r) {
  switch (r) {
    case ApplyResult::Created: return "created";
    case ApplyResult::Configured: return "configured";
    case ApplyResult::Unchanged: return "unchanged";
  }
  return "";
}

Engine::Engine(EngineOptions options) : options_(std::move(options)) { wire(nullptr); }

Engine::Engine(EngineOptions options, const Json& snapshot) : options_(std::move(options)) {
  wire(&snapshot);
}

Engine::~Engine() = default;

void Engine::wire(const Json* snapshot) {
  if (snapshot) {
    options_.seed = snapshot->at("seed").get<std::uint64_t>();
    clock_.set(snapshot->at("tick").get<Tick>());
  }
  options_.controller.check();
  options_.sim.seed = options_.seed;
  store_ = std::make_unique<store::StateStore>(&clock_);
  sim_ = std::make_unique<sim::Simulator>(clock_, options_.sim);
  if (snapshot) {
    store_->restore(snapshot->at("store"));
    sim_->restore(snapshot->at("sim"));
  } else {
    store_->create(model::makeObject<model::Namespace>("default", "", {}));
  }

  manager_ = std::make_unique<runtime::Manager>(
      *store_, clock_,
      runtime::Manager::Options{options_.seed, options_.deterministic,
                                options_.recordInvocations});
  controllers::Context ctx{*store_, *sim_, clock_, options_.controller};
  cloud_ = std::make_unique<controllers::CloudController>(ctx);
  resources_ = std::make_unique<controllers::ResourceControllers>(ctx);
  cloud_->registerWith(*manager_);
  resources_->registerWith(*manager_);

  agent_ = std::make_unique<sim::ValidationAgent>(
      *sim_, [this](const ObjectKey& key) { manager_->enqueueExternal(key); },
      [this](const std::string& vmID) { return resources_->vmOwner(vmID); });
  if (snapshot) agent_->restore(snapshot->at("agent"));
}

void Engine::advance(Tick now) {
  sim_->advance(now);
  agent_->sweep(now);
}

bool Engine::idle() const { return sim_->idle() && !agent_->pending(); }

runtime::ManagerReport Engine::run(Tick ticks) { return manager_->run(ticks, this, false); }

runtime::ManagerReport Engine::runUntilQuiescent(Tick budget) {
  return manager_->run(budget, this, true);
}

bool Engine::quiescent() { return manager_->quiescent() && idle(); }

ApplyResult Engine::apply(const model::ResourceObject& desired) {
  for (int attempt = 0;; ++attempt) {
    auto current = store_->get(desired.key());
    if (!current) {
      try {
        store_->create(desired);
        return ApplyResult::Created;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AlreadyExists || attempt >= 5) throw;
        continue;
      }
    }
    auto next = *current;
    next.assignSpec(desired);
    next.meta.labels = desired.meta.labels;
    for (const auto& [k, v] : desired.meta.annotations) next.meta.annotations[k] = v;
    try {
      auto written = store_->update(next);
      return written.meta.resourceVersion == current->meta.resourceVersion
                 ? ApplyResult::Unchanged
                 : ApplyResult::Configured;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Conflict || attempt >= 5) throw;
    }
  }
}

Json Engine::snapshot() const {
  return {{"seed", options_.seed},
          {"tick", clock_.now()},
          {"store", store_->snapshot()},
          {"sim", sim_->snapshot()},
          {"agent", agent_->snapshot()}};
}

void Engine::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << snapshot().dump() << "\n";
  }
  std::filesystem::rename(tmp, path);
}

std::unique_ptr<Engine> Engine::load(const std::filesystem::path& path, EngineOptions options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return std::make_unique<Engine>(std::move(options), j);
}

}  // namespace kupenstack::engine
