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

// Versioned, watchable object store: the declarative API backbone.
//
// Every successful write is assigned the next global revision and appended to
// a bounded history ring. Watches are cursors into that ring, so a watch
// started at the revision returned by list() observes every later write
// exactly once and in order.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kupenstack/common.hpp"
#include "kupenstack/model/codec.hpp"
#include "kupenstack/model/resource.hpp"

namespace kupenstack::store {

using Revision = std::int64_t;
using model::ResourceObject;

enum class EventType { Added, Modified, Deleted };
const char* to_string(EventType t);

struct WatchEvent {
  EventType type = EventType::Added;
  ResourceObject object;
  Revision revision = 0;
};

struct ListResult {
  std::vector<ResourceObject> items;
  Revision revision = 0;
};

/// Equality-based label selector ("k=v,k2=v2"); empty matches everything.
struct LabelSelector {
  model::StringMap matchLabels;

  static LabelSelector parse(std::string_view text);
  bool matches(const model::StringMap& labels) const;
};

class StateStore;

/// Ordered event stream for one kind (or all kinds when kind is empty).
/// Not thread-safe itself; the store it reads from is.
class Watch {
 public:
  /// Events committed after the cursor. Throws CompactedRevision if the
  /// cursor fell out of retained history.
  std::vector<WatchEvent> poll();
  /// Blocks until at least one event is available or the timeout expires.
  std::vector<WatchEvent> wait(std::chrono::milliseconds timeout);
  Revision cursor() const { return cursor_; }
  const std::string& kind() const { return kind_; }

 private:
  friend class StateStore;
  Watch(const StateStore* store, std::string kind, Revision from)
      : store_(store), kind_(std::move(kind)), cursor_(from) {}

  const StateStore* store_;
  std::string kind_;
  Revision cursor_;
};

class StateStore {
 public:
  static constexpr std::size_t kDefaultHistory = 1024;

  explicit StateStore(const LogicalClock* clock = nullptr,
                      std::size_t historyLimit = kDefaultHistory);

  StateStore(const StateStore&) = delete;
  StateStore& operator=(const StateStore&) = delete;

  /// Assigns uid, resourceVersion and generation=1. Status on the input is
  /// discarded.
  ResourceObject create(ResourceObject obj);

  /// Spec + metadata write (compare-and-swap on resourceVersion). Status on
  /// the input is ignored. Generation increments iff the spec changed.
  /// No-op writes return the stored object without a new revision.
  ResourceObject update(const ResourceObject& obj);

  /// Status-only write. When expectedVersion is set it is compared against
  /// the stored resourceVersion; otherwise the write is unconditional.
  ResourceObject updateStatus(const ResourceObject& obj,
                              std::optional<std::int64_t> expectedVersion = std::nullopt);

  /// Removes immediately when no finalizers remain; otherwise marks the
  /// object with a deletion timestamp.
  ResourceObject remove(const ObjectKey& key);

  std::optional<ResourceObject> get(const ObjectKey& key) const;
  ResourceObject mustGet(const ObjectKey& key) const;

  ListResult list(std::string_view kind, std::optional<std::string> ns = std::nullopt,
                  const LabelSelector& selector = {}) const;

  /// Starts a watch delivering events with revision > fromRevision.
  Watch watch(std::string kind, Revision fromRevision) const;

  Revision revision() const;
  /// Oldest revision a watch may resume from.
  Revision compactedRevision() const;

  model::Json snapshot() const;
  void restore(const model::Json& snapshot);
  void saveSnapshot(const std::filesystem::path& path) const;
  void loadSnapshot(const std::filesystem::path& path);

 private:
  friend class Watch;

  Revision commit(EventType type, const ResourceObject& obj);
  std::vector<WatchEvent> eventsAfter(const std::string& kind, Revision& cursor) const;
  Tick now() const { return clock_ != nullptr ? clock_->now() : 0; }
  void checkNamespace(const ResourceObject& obj) const;
  ResourceObject finishWrite(ResourceObject next);

  const LogicalClock* clock_;
  std::size_t historyLimit_;
  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::map<ObjectKey, ResourceObject> objects_;
  std::deque<WatchEvent> history_;
  Revision revision_ = 0;
  Revision compacted_ = 0;
  std::uint64_t uidCounter_ = 0;
};

}  // namespace kupenstack::store
