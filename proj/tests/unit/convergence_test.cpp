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

#include "builders.hpp"

using namespace kupenstack;
using namespace kupenstack::engine;
namespace kt = kupenstack::testing;

namespace {

struct Storm {
  sim::FaultSchedule schedule;
  Tick quietFrom = 0;  // last fault tick plus any outage it started
};

// Finite random storm of unit crashes, control-plane outages and API bursts.
Storm randomStorm(std::uint64_t seed, Tick start) {
  std::mt19937_64 rng(seed);
  Storm s;
  s.schedule.seed = seed;
  const int n = 1 + static_cast<int>(rng() % 6);
  Tick t = start;
  for (int i = 0; i < n; ++i) {
    t += 1 + static_cast<Tick>(rng() % 15);
    const Tick len = 1 + static_cast<Tick>(rng() % 8);
    switch (rng() % 4) {
      case 0:
      case 1:
        s.schedule.actions.push_back(kt::fault(
            "crashUnit", {{"random", true}, {"count", 1 + static_cast<int>(rng() % 2)}}, t));
        break;
      case 2:
        s.schedule.actions.push_back(
            kt::fault("nodeDown", {{"random", true}, {"role", "control-plane"}, {"ticks", len}}, t));
        break;
      default: {
        static const char* services[] = {"keystone", "glance", "nova", "neutron"};
        s.schedule.actions.push_back(kt::fault(
            "apiErrorBurst", {{"service", services[rng() % 4]}, {"ticks", len}}, t));
      }
    }
    s.quietFrom = std::max(s.quietFrom, t + len);
  }
  return s;
}

}  // namespace

// After any finite storm the cloud is Ready again within 20 ticks per desired
// replica of the moment the storm is over.
TEST(Convergence, CloudRecoversFromRandomStorms) {
  const auto spec = kt::standardCloud();
  std::int64_t replicas = 0;
  for (const auto& s : spec.as<model::OpenStackCloud>().spec.services) replicas += s.replicas;
  const Tick bound = 20 * replicas;
  std::size_t unitFailures = 0;

  for (std::uint64_t seed = 1; seed <= 120; ++seed) {
    auto e = kt::readyEngine(seed);
    // half the runs also roll nova while the storm is on
    if (seed % 2 == 0) e->apply(kt::standardCloud("1.1.0", 3));
    auto storm = randomStorm(seed, e->now());
    e->sim().faults().loadSchedule(storm.schedule);
    e->run(storm.quietFrom - e->now());

    Tick readyAt = -1;
    for (Tick i = 0; i <= bound; ++i) {
      auto obj = e->store().mustGet(kt::key("OpenStackCloud", "desk"));
      if (kt::isReady(obj) && e->quiescent()) {
        readyAt = i;
        break;
      }
      e->run(1);
    }
    for (const auto& m : e->sim().mutationLog()) unitFailures += m.operation == "unit.fail";
    ASSERT_GE(readyAt, 0) << "seed " << seed << " not Ready within " << bound << " ticks";
    const auto want = seed % 2 == 0 ? std::string("1.1.0") : std::string("1.0.0");
    for (const auto& u : kt::liveUnits(*e, "nova")) EXPECT_EQ(u.version, want) << "seed " << seed;
    EXPECT_EQ(kt::liveUnits(*e, "nova").size(), seed % 2 == 0 ? 3u : 2u) << "seed " << seed;
  }
  // the storms did hurt
  EXPECT_GT(unitFailures, 120u);
}
