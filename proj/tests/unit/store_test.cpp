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

#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "builders.hpp"
#include "kupenstack/store/state_store.hpp"

using namespace kupenstack;
using namespace kupenstack::store;
namespace kt = kupenstack::testing;
using model::Network;
using model::ResourceObject;

namespace {

class StoreTest : public ::testing::Test {
 protected:
  void SetUp() override { store.create(kt::ns("default")); }
  LogicalClock clock;
  StateStore store{&clock};
};

using State = std::map<ObjectKey, ResourceObject>;

State listAll(const StateStore& s) {
  State out;
  for (const auto& kind : model::kAllKinds)
    for (auto& o : s.list(kind).items) out[o.key()] = o;
  return out;
}

void replay(State& state, const std::vector<WatchEvent>& events) {
  for (const auto& ev : events) {
    if (ev.type == EventType::Deleted)
      state.erase(ev.object.key());
    else
      state[ev.object.key()] = ev.object;
  }
}

}  // namespace

TEST_F(StoreTest, CreateAssignsGenerationOne) {
  auto obj = store.create(kt::image("cirros"));
  EXPECT_EQ(obj.meta.generation, 1);
  EXPECT_FALSE(obj.meta.uid.empty());
  EXPECT_EQ(obj.meta.resourceVersion, store.revision());
}

TEST_F(StoreTest, CreateTwiceIsAlreadyExists) {
  store.create(kt::image("cirros"));
  try {
    store.create(kt::image("cirros"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AlreadyExists);
  }
}

TEST_F(StoreTest, ReadYourWrite) {
  auto created = store.create(kt::image("cirros"));
  EXPECT_EQ(*store.get(created.key()), created);
}

TEST_F(StoreTest, CreateDiscardsStatus) {
  auto in = kt::network("n");
  in.as<Network>().status.serviceAssignedID = "net-forged";
  auto out = store.create(in);
  EXPECT_FALSE(out.as<Network>().status.serviceAssignedID);
}

TEST_F(StoreTest, NamespacedObjectNeedsNamespace) {
  try {
    store.create(kt::image("cirros", "nowhere"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
}

TEST_F(StoreTest, StaleUpdateConflicts) {
  auto a = store.create(kt::network("n"));
  auto b = a;
  a.as<Network>().spec.shared = true;
  store.update(a);
  b.meta.labels["x"] = "y";
  try {
    store.update(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Conflict);
  }
}

TEST_F(StoreTest, StatusWriteKeepsGeneration) {
  auto a = store.create(kt::network("n"));
  auto s = a;
  s.as<Network>().status.serviceAssignedID = "net-1";
  auto written = store.updateStatus(s, a.meta.resourceVersion);
  EXPECT_EQ(written.meta.generation, a.meta.generation);
  EXPECT_GT(written.meta.resourceVersion, a.meta.resourceVersion);
}

TEST_F(StoreTest, SpecWriteBumpsGeneration) {
  auto a = store.create(kt::network("n"));
  a.as<Network>().spec.shared = true;
  EXPECT_EQ(store.update(a).meta.generation, 2);
}

TEST_F(StoreTest, LabelOnlyWriteKeepsGeneration) {
  auto a = store.create(kt::network("n"));
  a.meta.labels["tier"] = "web";
  auto w = store.update(a);
  EXPECT_EQ(w.meta.generation, 1);
  EXPECT_GT(w.meta.resourceVersion, a.meta.resourceVersion);
}

TEST_F(StoreTest, NoOpWriteHasNoRevision) {
  auto a = store.create(kt::network("n"));
  const auto rev = store.revision();
  EXPECT_EQ(store.update(a).meta.resourceVersion, a.meta.resourceVersion);
  EXPECT_EQ(store.revision(), rev);
}

TEST_F(StoreTest, FinalizerHoldsDeletion) {
  clock.set(7);
  auto a = kt::ns("team-a");
  a.meta.finalizers.insert("project-drain");
  store.create(a);
  auto marked = store.remove(kt::key("Namespace", "team-a"));
  ASSERT_TRUE(marked.meta.deletionTimestamp);
  EXPECT_EQ(*marked.meta.deletionTimestamp, 7);
  auto still = store.get(kt::key("Namespace", "team-a"));
  ASSERT_TRUE(still);

  auto w = store.watch("Namespace", store.revision());
  still->meta.finalizers.clear();
  store.update(*still);
  EXPECT_FALSE(store.get(kt::key("Namespace", "team-a")));
  auto events = w.poll();
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].type, EventType::Deleted);
}

TEST_F(StoreTest, DeleteMissingIsNotFound) {
  try {
    store.remove(kt::key("Image", "ghost", "default"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
}

TEST(Store, EmptyWatchIsQuiet) {
  StateStore s;
  auto w = s.watch("Namespace", s.revision());
  EXPECT_TRUE(w.poll().empty());
  s.create(kt::ns("a"));
  auto ev = w.poll();
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].type, EventType::Added);
}

TEST(Store, CompactedCursorIsReported) {
  StateStore s(nullptr, 16);
  auto w = s.watch("", s.revision());
  for (int i = 0; i < 40; ++i) s.create(kt::ns("n" + std::to_string(i)));
  try {
    w.poll();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CompactedRevision);
  }
}

TEST(Store, LabelSelector) {
  auto sel = LabelSelector::parse("tier=web,env=prod");
  EXPECT_TRUE(sel.matches({{"tier", "web"}, {"env", "prod"}, {"x", "y"}}));
  EXPECT_FALSE(sel.matches({{"tier", "web"}}));
  EXPECT_TRUE(LabelSelector{}.matches({}));
}

// Replaying the watch from a list revision reproduces every later list.
TEST(Store, GapFreedomOverRandomWorkload) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    LogicalClock clock;
    StateStore s(&clock);
    std::mt19937_64 rng(seed);
    s.create(kt::ns("default"));
    auto base = s.list("Network");
    State replayed;
    for (auto& o : base.items) replayed[o.key()] = o;
    auto w = s.watch("Network", base.revision);

    for (int op = 0; op < 1000; ++op) {
      clock.set(op);
      const auto name = "n" + std::to_string(rng() % 40);
      auto current = s.get(kt::key("Network", name, "default"));
      try {
        switch (rng() % 5) {
          case 0:
            if (!current) {
              auto obj = kt::network(name);
              if (rng() % 3 == 0) obj.meta.finalizers.insert("hold");
              s.create(obj);
            }
            break;
          case 1:
            if (current) {
              current->as<Network>().spec.shared = !current->as<Network>().spec.shared;
              s.update(*current);
            }
            break;
          case 2:
            if (current) {
              current->as<Network>().status.serviceAssignedID = "net-" + std::to_string(op);
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
      if (op % 50 == 49) {
        replay(replayed, w.poll());
        State direct;
        for (auto& o : s.list("Network").items) direct[o.key()] = o;
        ASSERT_EQ(replayed, direct) << "seed " << seed << " op " << op;
      }
    }
  }
}

TEST(Store, ConcurrentCasWritersLoseNothing) {
  StateStore s;
  s.create(kt::ns("default"));
  s.create(kt::network("counter"));
  constexpr int kThreads = 8;
  constexpr int kIncrements = 200;
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < kIncrements; ++i) {
        for (;;) {
          auto obj = s.mustGet(kt::key("Network", "counter", "default"));
          const int n = obj.meta.annotations.count("n") ? std::stoi(obj.meta.annotations["n"]) : 0;
          obj.meta.annotations["n"] = std::to_string(n + 1);
          try {
            s.update(obj);
            break;
          } catch (const Error& e) {
            ASSERT_EQ(e.code(), ErrorCode::Conflict);
          }
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  auto final = s.mustGet(kt::key("Network", "counter", "default"));
  EXPECT_EQ(final.meta.annotations["n"], std::to_string(kThreads * kIncrements));
}

TEST(Store, TwoWatchersSeeTheSameSequence) {
  StateStore s;
  s.create(kt::ns("default"));
  const auto from = s.revision();
  auto w1 = s.watch("", from);
  auto w2 = s.watch("", from);
  std::vector<WatchEvent> seen1, seen2;
  std::atomic<bool> done{false};
  auto drain = [&](Watch& w, std::vector<WatchEvent>& out) {
    while (!done.load())
      for (auto& e : w.wait(std::chrono::milliseconds(5))) out.push_back(e);
  };
  std::thread t1([&] { drain(w1, seen1); });
  std::thread t2([&] { drain(w2, seen2); });
  std::vector<std::thread> writers;
  for (int t = 0; t < 4; ++t) {
    writers.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        auto obj = s.create(kt::network("n" + std::to_string(t) + "-" + std::to_string(i)));
        obj.as<Network>().spec.shared = true;
        s.update(obj);
        if (i % 2) s.remove(obj.key());
      }
    });
  }
  for (auto& w : writers) w.join();
  done = true;
  t1.join();
  t2.join();

  auto tail1 = w1.poll();
  seen1.insert(seen1.end(), tail1.begin(), tail1.end());
  auto tail2 = w2.poll();
  seen2.insert(seen2.end(), tail2.begin(), tail2.end());

  ASSERT_EQ(seen1.size(), seen2.size());
  EXPECT_EQ(static_cast<Revision>(seen1.size()), s.revision() - from);
  for (std::size_t i = 0; i < seen1.size(); ++i) {
    EXPECT_EQ(seen1[i].revision, seen2[i].revision);
    EXPECT_EQ(seen1[i].object, seen2[i].object);
    if (i > 0) EXPECT_EQ(seen1[i].revision, seen1[i - 1].revision + 1);
  }
}

TEST(Store, SnapshotRestoreRoundTrip) {
  LogicalClock clock;
  StateStore a(&clock);
  a.create(kt::ns("default"));
  a.create(kt::image("cirros"));
  StateStore b(&clock);
  b.restore(a.snapshot());
  EXPECT_EQ(listAll(a), listAll(b));
  EXPECT_EQ(a.revision(), b.revision());
  EXPECT_EQ(a.snapshot().dump(), b.snapshot().dump());
  // the uid counter is part of the snapshot
  EXPECT_EQ(a.create(kt::ns("x")).meta.uid, b.create(kt::ns("x")).meta.uid);
}
