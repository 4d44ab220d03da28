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

#include "kupenstack/store/state_store.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kupenstack/model/validate.hpp"

namespace kupenstack::store {

using model::Json;

const char* to_string(EventType t) {
  switch (t) {
    case EventType::Added: return "Added";
    case EventType::Modified: return "Modified";
    case EventType::Deleted: return "Deleted";
  }
  return "";
}

LabelSelector LabelSelector::parse(std::string_view text) {
  LabelSelector sel;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto term = text.substr(pos, comma - pos);
    auto eq = term.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw Error(ErrorCode::InvalidArgument, "bad label selector term \"" +
                                                  std::string(term) + "\"");
    sel.matchLabels[std::string(term.substr(0, eq))] = std::string(term.substr(eq + 1));
    pos = comma + 1;
  }
  return sel;
}

bool LabelSelector::matches(const model::StringMap& labels) const {
  for (const auto& [k, v] : matchLabels) {
    auto it = labels.find(k);
    if (it == labels.end() || it->second != v) return false;
  }
  return true;
}

std::vector<WatchEvent> Watch::poll() { return store_->eventsAfter(kind_, cursor_); }

std::vector<WatchEvent> Watch::wait(std::chrono::milliseconds timeout) {
  {
    std::unique_lock lock(store_->mu_);
    store_->changed_.wait_for(lock, timeout, [&] { return store_->revision_ > cursor_; });
  }
  return poll();
}

StateStore::StateStore(const LogicalClock* clock, std::size_t historyLimit)
    : clock_(clock), historyLimit_(historyLimit) {}

Revision StateStore::commit(EventType type, const ResourceObject& obj) {
  ++revision_;
  WatchEvent ev{type, obj, revision_};
  ev.object.meta.resourceVersion = revision_;
  history_.push_back(std::move(ev));
  while (history_.size() > historyLimit_) {
    compacted_ = history_.front().revision;
    history_.pop_front();
  }
  changed_.notify_all();
  return revision_;
}

void StateStore::checkNamespace(const ResourceObject& obj) const {
  if (!model::isNamespacedKind(obj.kind())) return;
  auto it = objects_.find(ObjectKey{"Namespace", "", obj.meta.ns});
  if (it == objects_.end())
    throw Error(ErrorCode::NotFound, "namespace \"" + obj.meta.ns + "\" not found");
  if (it->second.deleting())
    throw Error(ErrorCode::InvalidArgument,
                "namespace \"" + obj.meta.ns + "\" is terminating");
}

ResourceObject StateStore::create(ResourceObject obj) {
  auto result = model::validate(obj);
  if (!result.ok()) throw ValidationError(std::move(result.violations));

  std::lock_guard lock(mu_);
  const auto key = obj.key();
  if (objects_.count(key) != 0)
    throw Error(ErrorCode::AlreadyExists, key.str() + " already exists");
  checkNamespace(obj);

  const auto n = static_cast<unsigned long long>(++uidCounter_);
  char uid[48];
  std::snprintf(uid, sizeof uid, "%08llx-0000-4000-8000-%012llx", n,
                (n * 2654435761ULL) % 0xffffffffffffULL);
  obj.meta.uid = uid;
  obj.meta.generation = 1;
  obj.meta.creationTimestamp = now();
  obj.meta.deletionTimestamp.reset();
  obj.body = std::visit(
      [](const auto& b) -> model::Body {
        std::decay_t<decltype(b)> fresh;
        fresh.spec = b.spec;
        return fresh;
      },
      obj.body);
  obj.meta.resourceVersion = commit(EventType::Added, obj);
  objects_[key] = obj;
  return obj;
}

ResourceObject StateStore::finishWrite(ResourceObject next) {
  const auto key = next.key();
  if (next.deleting() && next.meta.finalizers.empty()) {
    next.meta.resourceVersion = commit(EventType::Deleted, next);
    objects_.erase(key);
    return next;
  }
  next.meta.resourceVersion = commit(EventType::Modified, next);
  objects_[key] = next;
  return next;
}

ResourceObject StateStore::update(const ResourceObject& obj) {
  std::lock_guard lock(mu_);
  const auto key = obj.key();
  auto it = objects_.find(key);
  if (it == objects_.end()) throw Error(ErrorCode::NotFound, key.str() + " not found");
  const ResourceObject& current = it->second;
  if (obj.meta.resourceVersion != current.meta.resourceVersion)
    throw Error(ErrorCode::Conflict, key.str() + ": stale resourceVersion " +
                                         std::to_string(obj.meta.resourceVersion) + " (current " +
                                         std::to_string(current.meta.resourceVersion) + ")");

  ResourceObject next = current;
  next.assignSpec(obj);
  next.meta.labels = obj.meta.labels;
  next.meta.annotations = obj.meta.annotations;
  next.meta.finalizers = obj.meta.finalizers;

  auto result = model::validateUpdate(current, next);
  if (!result.ok()) throw ValidationError(std::move(result.violations));

  const bool specChanged = !current.specEquals(next);
  if (!specChanged && next.meta == current.meta) return current;
  if (current.deleting() && next.meta.finalizers.size() > current.meta.finalizers.size())
    throw Error(ErrorCode::InvalidArgument, key.str() + ": cannot add finalizers while deleting");
  if (specChanged) ++next.meta.generation;
  return finishWrite(std::move(next));
}

ResourceObject StateStore::updateStatus(const ResourceObject& obj,
                                        std::optional<std::int64_t> expectedVersion) {
  std::lock_guard lock(mu_);
  const auto key = obj.key();
  auto it = objects_.find(key);
  if (it == objects_.end()) throw Error(ErrorCode::NotFound, key.str() + " not found");
  const ResourceObject& current = it->second;
  if (expectedVersion && *expectedVersion != current.meta.resourceVersion)
    throw Error(ErrorCode::Conflict, key.str() + ": stale resourceVersion");
  if (current.statusEquals(obj)) return current;
  ResourceObject next = current;
  next.assignStatus(obj);
  return finishWrite(std::move(next));
}

ResourceObject StateStore::remove(const ObjectKey& key) {
  std::lock_guard lock(mu_);
  auto it = objects_.find(key);
  if (it == objects_.end()) throw Error(ErrorCode::NotFound, key.str() + " not found");
  ResourceObject next = it->second;
  if (next.deleting()) return next;
  next.meta.deletionTimestamp = now();
  return finishWrite(std::move(next));
}

std::optional<ResourceObject> StateStore::get(const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  auto it = objects_.find(key);
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

ResourceObject StateStore::mustGet(const ObjectKey& key) const {
  auto obj = get(key);
  if (!obj) throw Error(ErrorCode::NotFound, key.str() + " not found");
  return *obj;
}

ListResult StateStore::list(std::string_view kind, std::optional<std::string> ns,
                            const LabelSelector& selector) const {
  std::lock_guard lock(mu_);
  ListResult result;
  result.revision = revision_;
  for (const auto& [key, obj] : objects_) {
    if (!kind.empty() && key.kind != kind) continue;
    if (ns && key.ns != *ns) continue;
    if (!selector.matches(obj.meta.labels)) continue;
    result.items.push_back(obj);
  }
  return result;
}

Watch StateStore::watch(std::string kind, Revision fromRevision) const {
  std::lock_guard lock(mu_);
  if (fromRevision < compacted_)
    throw Error(ErrorCode::CompactedRevision,
                "revision " + std::to_string(fromRevision) + " has been compacted (oldest " +
                    std::to_string(compacted_) + ")");
  return Watch(this, std::move(kind), fromRevision);
}

std::vector<WatchEvent> StateStore::eventsAfter(const std::string& kind, Revision& cursor) const {
  std::lock_guard lock(mu_);
  if (cursor < compacted_)
    throw Error(ErrorCode::CompactedRevision,
                "revision " + std::to_string(cursor) + " has been compacted");
  std::vector<WatchEvent> out;
  if (!history_.empty() && cursor < revision_) {
    auto first = history_.front().revision;
    std::size_t idx = cursor >= first ? static_cast<std::size_t>(cursor - first + 1) : 0;
    for (; idx < history_.size(); ++idx) {
      const auto& ev = history_[idx];
      if (kind.empty() || ev.object.kind() == kind) out.push_back(ev);
    }
  }
  cursor = revision_;
  return out;
}

Revision StateStore::revision() const {
  std::lock_guard lock(mu_);
  return revision_;
}

Revision StateStore::compactedRevision() const {
  std::lock_guard lock(mu_);
  return compacted_;
}

Json StateStore::snapshot() const {
  std::lock_guard lock(mu_);
  Json objects = Json::array();
  for (const auto& [key, obj] : objects_) objects.push_back(model::toJson(obj));
  return {{"revision", revision_}, {"uidCounter", uidCounter_}, {"objects", objects}};
}

void StateStore::restore(const Json& snapshot) {
  std::map<ObjectKey, ResourceObject> objects;
  for (const auto& j : snapshot.at("objects")) {
    auto obj = model::fromStoredJson(j);
    objects[obj.key()] = std::move(obj);
  }
  std::lock_guard lock(mu_);
  objects_ = std::move(objects);
  revision_ = snapshot.at("revision").get<Revision>();
  uidCounter_ = snapshot.at("uidCounter").get<std::uint64_t>();
  history_.clear();
  compacted_ = revision_;
  changed_.notify_all();
}

void StateStore::saveSnapshot(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << snapshot().dump(2) << "\n";
}

void StateStore::loadSnapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw model::ParseError(path.string(), 0, e.what());
  }
  restore(j);
}

}  // namespace kupenstack::store
