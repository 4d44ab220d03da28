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
#include "kupenstack/model/cidr.hpp"
#include "kupenstack/model/codec.hpp"
#include "kupenstack/model/hash.hpp"
#include "kupenstack/model/validate.hpp"

using namespace kupenstack;
using namespace kupenstack::model;
namespace kt = kupenstack::testing;

namespace {

bool hasViolation(const ValidationResult& r, const std::string& path, const std::string& msg) {
  for (const auto& v : r.violations)
    if (v.path == path && v.message.find(msg) != std::string::npos) return true;
  return false;
}

std::string randomLabel(std::mt19937_64& rng) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string s(1, 'a' + static_cast<char>(rng() % 26));
  const auto n = rng() % 10;
  for (std::uint64_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
  return s;
}

StringMap randomMap(std::mt19937_64& rng) {
  StringMap m;
  const auto n = rng() % 4;
  for (std::uint64_t i = 0; i < n; ++i) m[randomLabel(rng)] = randomLabel(rng);
  return m;
}

Conditions randomConditions(std::mt19937_64& rng) {
  Conditions out;
  for (auto t : {ConditionType::Ready, ConditionType::Progressing, ConditionType::Degraded}) {
    if (rng() % 2 == 0) continue;
    setCondition(out, t, static_cast<ConditionStatus>(rng() % 3), randomLabel(rng),
                 "msg " + randomLabel(rng), static_cast<std::int64_t>(rng() % 9),
                 static_cast<Tick>(rng() % 500));
  }
  return out;
}

// Stored objects of every kind with randomized spec, status and metadata.
ResourceObject randomObject(std::mt19937_64& rng) {
  const auto ns = randomLabel(rng);
  ResourceObject obj;
  switch (rng() % 8) {
    case 0: {
      obj = kt::ns(randomLabel(rng));
      obj.as<Namespace>().status.phase = rng() % 2 ? "Active" : "Terminating";
      obj.as<Namespace>().status.conditions = randomConditions(rng);
      break;
    }
    case 1: {
      obj = kt::cloud({kt::service("keystone", "1.0.0", 1),
                       kt::service("nova", "2.1", 1 + static_cast<std::int64_t>(rng() % 4),
                                   randomMap(rng))},
                      randomLabel(rng));
      auto& st = obj.as<OpenStackCloud>().status;
      st.serviceStates["nova"] = {1, 2, "2.1", "abc"};
      st.conditions = randomConditions(rng);
      break;
    }
    case 2: {
      obj = kt::instance(randomLabel(rng), ns, randomMap(rng));
      if (rng() % 2) obj.as<Instance>().spec.keyPairRef = randomLabel(rng);
      auto& st = obj.as<Instance>().status;
      if (rng() % 2) st.instanceID = "vm-" + randomLabel(rng);
      st.ipAddresses = {"10.0.0." + std::to_string(rng() % 250 + 2)};
      st.phase = static_cast<InstancePhase>(rng() % 6);
      st.restartCount = static_cast<std::int64_t>(rng() % 7);
      if (rng() % 2) st.nextHealTick = static_cast<Tick>(rng() % 100);
      st.conditions = randomConditions(rng);
      break;
    }
    case 3: {
      obj = kt::image(randomLabel(rng), ns);
      obj.as<Image>().status.phase = static_cast<ImagePhase>(rng() % 4);
      break;
    }
    case 4: {
      obj = kt::network(randomLabel(rng), ns, rng() % 2 == 0);
      obj.as<Network>().status.serviceAssignedID = "net-" + randomLabel(rng);
      break;
    }
    case 5: {
      obj = kt::subnet(randomLabel(rng), randomLabel(rng), "10.1.0.0/24", ns);
      if (rng() % 2) obj.as<Subnet>().spec.allocationPool = AllocationPool{"10.1.0.10", "10.1.0.20"};
      break;
    }
    case 6: {
      obj = kt::router(randomLabel(rng), {randomLabel(rng)}, ns);
      obj.as<Router>().spec.externalGateway = rng() % 2 == 0;
      break;
    }
    default: {
      obj = kt::keypair(randomLabel(rng), ns);
      obj.as<KeyPair>().status.phase = static_cast<RemotePhase>(rng() % 4);
    }
  }
  obj.meta.uid = "uid-" + randomLabel(rng);
  obj.meta.resourceVersion = static_cast<std::int64_t>(rng() % 1000) + 1;
  obj.meta.generation = static_cast<std::int64_t>(rng() % 5) + 1;
  obj.meta.creationTimestamp = static_cast<Tick>(rng() % 300);
  obj.meta.labels = randomMap(rng);
  obj.meta.annotations = randomMap(rng);
  if (rng() % 2) obj.meta.finalizers.insert(std::string(kRemoteCleanupFinalizer));
  if (rng() % 3 == 0) obj.meta.deletionTimestamp = static_cast<Tick>(rng() % 300);
  return obj;
}

}  // namespace

TEST(Validate, InstanceWithoutSubnetsIsRejected) {
  auto obj = kt::instance("web", "default", {}, "cirros", {});
  auto r = validate(obj);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(hasViolation(r, "spec.subnetRefs", "non-empty required"));
}

TEST(Validate, SubnetPoolInsideCidr) {
  auto obj = kt::subnet("a", "net", "10.0.0.0/24");
  obj.as<Subnet>().spec.allocationPool = AllocationPool{"10.0.0.10", "10.0.0.20"};
  EXPECT_TRUE(validate(obj).ok());
  obj.as<Subnet>().spec.allocationPool = AllocationPool{"10.0.1.10", "10.0.1.20"};
  EXPECT_TRUE(hasViolation(validate(obj), "spec.allocationPool", "within"));
}

TEST(Validate, CloudNeedsKeystone) {
  auto obj = kt::cloud({kt::service("nova", "1.0.0", 2)});
  EXPECT_TRUE(hasViolation(validate(obj), "spec.services", "keystone required"));
}

TEST(Validate, ReplicasMustBePositive) {
  auto obj = kt::cloud({kt::service("keystone", "1.0.0", 0)});
  EXPECT_TRUE(hasViolation(validate(obj), "spec.services[0].replicas", "positive"));
}

TEST(Validate, IgnoresStatus) {
  auto obj = kt::instance("web");
  auto before = validate(obj).violations;
  obj.as<Instance>().status.restartCount = -40;
  obj.as<Instance>().status.ipAddresses = {"not an ip"};
  EXPECT_EQ(validate(obj).violations, before);
}

TEST(Validate, IsPure) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto obj = randomObject(rng);
    EXPECT_EQ(validate(obj).violations, validate(obj).violations);
  }
}

TEST(Validate, ImmutableSpecUpdateRejected) {
  auto a = kt::image("cirros");
  auto b = a;
  b.as<Image>().spec.sourceURI = "https://elsewhere/img.qcow2";
  EXPECT_TRUE(hasViolation(validateUpdate(a, b), "spec", "immutable"));
  auto n = kt::network("n");
  auto m = n;
  m.as<Network>().spec.shared = true;
  EXPECT_TRUE(validateUpdate(n, m).ok());
}

TEST(Validate, Versions) {
  EXPECT_TRUE(isValidVersion("1.0.0"));
  EXPECT_TRUE(isValidVersion("v2"));
  EXPECT_TRUE(isValidVersion("2.0-rc1"));
  EXPECT_FALSE(isValidVersion(""));
  EXPECT_FALSE(isValidVersion("1.0.0.0"));
  EXPECT_FALSE(isValidVersion("01.2"));
}

TEST(HashConfig, DeterministicAndOrderInsensitive) {
  EXPECT_EQ(hashConfig({}, "1.0.0"), hashConfig({}, "1.0.0"));
  StringMap ab;
  ab["a"] = "1";
  ab["b"] = "2";
  StringMap ba;
  ba["b"] = "2";
  ba["a"] = "1";
  EXPECT_EQ(hashConfig(ab, "v"), hashConfig(ba, "v"));
  EXPECT_NE(hashConfig({{"a", "1"}}, "1.0.0"), hashConfig({{"a", "1"}}, "1.0.1"));
}

TEST(HashConfig, LengthPrefixingSeparatesBoundaries) {
  // Concatenation alone would make these equal.
  EXPECT_NE(hashConfig({{"ab", "c"}}, "1"), hashConfig({{"a", "bc"}}, "1"));
  EXPECT_NE(hashConfig({{"a", "1"}}, "1"), hashConfig({}, "a11"));
}

TEST(Fnv1a, KnownVectors) {
  // Published FNV-1a 64 test vectors.
  EXPECT_EQ(Fnv1a64().update("").value(), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64().update("a").value(), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64().update("foobar").value(), 0x85944171f73967e8ULL);
}

TEST(Cidr, ParseAndContain) {
  auto c = Cidr::parse("10.20.0.0/24");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->str(), "10.20.0.0/24");
  EXPECT_EQ(formatIpv4(c->firstHost()), "10.20.0.1");
  EXPECT_EQ(formatIpv4(c->lastHost()), "10.20.0.254");
  EXPECT_TRUE(c->contains(*parseIpv4("10.20.0.77")));
  EXPECT_FALSE(c->contains(*parseIpv4("10.20.1.1")));
  EXPECT_FALSE(Cidr::parse("10.20.0.1/24"));
  EXPECT_FALSE(Cidr::parse("10.20.0.0/33"));
  EXPECT_TRUE(c->overlaps(*Cidr::parse("10.20.0.128/25")));
  EXPECT_FALSE(c->overlaps(*Cidr::parse("10.21.0.0/24")));
  auto pool = defaultPool(*c);
  EXPECT_EQ(formatIpv4(pool.first), "10.20.0.2");
  EXPECT_EQ(pool.size(), 253u);
}

TEST(Codec, StoredRoundTripIsByteIdentical) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 500; ++i) {
    auto obj = randomObject(rng);
    const auto first = toCanonicalString(obj);
    auto back = fromStoredJson(Json::parse(first));
    EXPECT_EQ(toCanonicalString(back), first);
    EXPECT_EQ(back, obj);
  }
}

TEST(Codec, ManifestDecodeFillsDefaults) {
  auto docs = parseManifests(R"(apiVersion: kupenstack.io/v1alpha1
kind: Image
metadata: {name: cirros}
spec: {sourceURI: "https://x/cirros.qcow2"}
)",
                             "inline", "team-a");
  ASSERT_EQ(docs.size(), 1u);
  ASSERT_TRUE(docs[0].object);
  EXPECT_EQ(docs[0].object->meta.ns, "team-a");
  EXPECT_EQ(docs[0].object->as<Image>().spec.diskFormat, "qcow2");
}

TEST(Codec, ManifestReportsUnknownFieldsPerDocument) {
  auto docs = parseManifests(R"(apiVersion: kupenstack.io/v1alpha1
kind: Network
metadata: {name: a}
spec: {colour: blue}
---
apiVersion: kupenstack.io/v1alpha1
kind: Network
metadata: {name: b}
spec: {shared: true}
)",
                             "inline");
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_FALSE(docs[0].object);
  ASSERT_FALSE(docs[0].violations.empty());
  EXPECT_EQ(docs[0].violations[0].path, "spec.colour");
  ASSERT_TRUE(docs[1].object);
  EXPECT_TRUE(docs[1].object->as<Network>().spec.shared);
}

TEST(Codec, SyntaxErrorCarriesLine) {
  try {
    parseManifests("kind: Image\nmetadata: {name: x\n", "bad.yaml");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.file(), "bad.yaml");
    EXPECT_GE(e.line(), 2);
  }
}

TEST(Codec, ManifestYamlRoundTripsSpec) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    auto obj = randomObject(rng);
    obj.meta.deletionTimestamp.reset();
    if (!validate(obj).ok()) continue;
    auto docs = parseManifests(toYaml(toJson(obj)), "rt", obj.meta.ns);
    ASSERT_EQ(docs.size(), 1u);
    ASSERT_TRUE(docs[0].object) << toYaml(toJson(obj));
    EXPECT_TRUE(docs[0].object->specEquals(obj));
  }
}
