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

#include "kupenstack/model/validate.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "kupenstack/model/cidr.hpp"

namespace kupenstack::model {

bool isDnsLabel(std::string_view s) {
  if (s.empty() || s.size() > 63) return false;
  auto alnum = [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); };
  if (!alnum(s.front()) || !alnum(s.back())) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) { return alnum(c) || c == '-'; });
}

bool isValidVersion(std::string_view version) {
  static const std::regex re(R"(^v?(0|[1-9][0-9]*)(\.(0|[1-9][0-9]*)){0,2}(-[0-9A-Za-z.-]+)?$)");
  return std::regex_match(version.begin(), version.end(), re);
}

namespace {

class Checker {
 public:
  void require(bool cond, std::string path, std::string message) {
    if (!cond) out.push_back({std::move(path), std::move(message)});
  }
  std::vector<Violation> out;
};

void checkStringMap(Checker& c, const StringMap& m, const std::string& path) {
  for (const auto& [k, v] : m) c.require(!k.empty(), path, "empty key");
}

void checkMeta(Checker& c, const ResourceObject& obj) {
  c.require(isDnsLabel(obj.meta.name), "metadata.name",
            "must be a DNS label (lowercase alphanumerics and '-', at most 63 chars)");
  if (isNamespacedKind(obj.kind())) {
    c.require(isDnsLabel(obj.meta.ns), "metadata.namespace", "required DNS label");
  } else {
    c.require(obj.meta.ns.empty(), "metadata.namespace", "must be absent for cluster-scoped kind");
  }
  checkStringMap(c, obj.meta.labels, "metadata.labels");
  checkStringMap(c, obj.meta.annotations, "metadata.annotations");
}

void checkSpec(Checker& c, const OpenStackCloudSpec& spec) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < spec.services.size(); ++i) {
    const auto& s = spec.services[i];
    const std::string p = "spec.services[" + std::to_string(i) + "]";
    c.require(std::find(kKnownServices.begin(), kKnownServices.end(), s.name) !=
                  kKnownServices.end(),
              p + ".name", "must be one of keystone, glance, nova, neutron");
    c.require(seen.insert(s.name).second, p + ".name", "duplicate service");
    c.require(isValidVersion(s.version), p + ".version", "invalid version");
    c.require(s.replicas >= 1, p + ".replicas", "must be a positive integer");
    checkStringMap(c, s.configOverrides, p + ".configOverrides");
  }
  if (!spec.services.empty()) {
    c.require(seen.count("keystone") == 1, "spec.services", "keystone required");
  }
}

void checkSpec(Checker& c, const InstanceSpec& spec) {
  c.require(spec.flavor.vcpus >= 1, "spec.flavor.vcpus", "must be >= 1");
  c.require(spec.flavor.ramMiB >= 1, "spec.flavor.ramMiB", "must be >= 1");
  c.require(spec.flavor.diskGiB >= 1, "spec.flavor.diskGiB", "must be >= 1");
  c.require(isDnsLabel(spec.imageRef), "spec.imageRef", "required DNS label");
  if (spec.keyPairRef) c.require(isDnsLabel(*spec.keyPairRef), "spec.keyPairRef", "invalid name");
  c.require(!spec.subnetRefs.empty(), "spec.subnetRefs", "non-empty required");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < spec.subnetRefs.size(); ++i) {
    const std::string p = "spec.subnetRefs[" + std::to_string(i) + "]";
    c.require(isDnsLabel(spec.subnetRefs[i]), p, "invalid name");
    c.require(seen.insert(spec.subnetRefs[i]).second, p, "duplicate reference");
  }
  checkStringMap(c, spec.nodeSelector, "spec.nodeSelector");
}

void checkSpec(Checker& c, const ImageSpec& spec) {
  c.require(!spec.sourceURI.empty(), "spec.sourceURI", "required");
  c.require(spec.diskFormat == "qcow2" || spec.diskFormat == "raw", "spec.diskFormat",
            "must be qcow2 or raw");
  c.require(spec.containerFormat == "bare", "spec.containerFormat", "must be bare");
}

bool isNetworkRef(std::string_view ref) {
  auto slash = ref.find('/');
  if (slash == std::string_view::npos) return isDnsLabel(ref);
  return isDnsLabel(ref.substr(0, slash)) && isDnsLabel(ref.substr(slash + 1));
}

void checkSpec(Checker& c, const SubnetSpec& spec) {
  c.require(isNetworkRef(spec.networkRef), "spec.networkRef",
            "must be \"name\" or \"namespace/name\"");
  auto cidr = Cidr::parse(spec.cidr);
  c.require(cidr.has_value(), "spec.cidr", "must be an IPv4 CIDR with host bits zero");
  if (cidr) c.require(cidr->prefix <= 30, "spec.cidr", "prefix must be /30 or shorter");
  if (spec.allocationPool && cidr && cidr->prefix <= 30) {
    auto start = parseIpv4(spec.allocationPool->start);
    auto end = parseIpv4(spec.allocationPool->end);
    c.require(start.has_value(), "spec.allocationPool.start", "invalid IPv4 address");
    c.require(end.has_value(), "spec.allocationPool.end", "invalid IPv4 address");
    if (start && end) {
      c.require(*start <= *end, "spec.allocationPool", "start must not exceed end");
      c.require(*start >= cidr->firstHost() && *end <= cidr->lastHost(), "spec.allocationPool",
                "must lie within the cidr host range");
    }
  }
}

void checkSpec(Checker& c, const RouterSpec& spec) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < spec.subnetRefs.size(); ++i) {
    const std::string p = "spec.subnetRefs[" + std::to_string(i) + "]";
    c.require(isDnsLabel(spec.subnetRefs[i]), p, "invalid name");
    c.require(seen.insert(spec.subnetRefs[i]).second, p, "duplicate reference");
  }
}

void checkSpec(Checker& c, const KeyPairSpec& spec) {
  c.require(!spec.publicKey.empty(), "spec.publicKey", "required");
}

void checkSpec(Checker&, const NamespaceSpec&) {}
void checkSpec(Checker&, const NetworkSpec&) {}

}  // namespace

ValidationResult validate(const ResourceObject& obj) {
  Checker c;
  checkMeta(c, obj);
  std::visit([&](const auto& b) { checkSpec(c, b.spec); }, obj.body);
  return {std::move(c.out)};
}

ValidationResult validateUpdate(const ResourceObject& current, const ResourceObject& next) {
  ValidationResult result = validate(next);
  if (current.kind() != next.kind()) {
    result.violations.push_back({"kind", "kind cannot change"});
    return result;
  }
  const bool immutable = next.is<Instance>() || next.is<Image>() || next.is<Subnet>() ||
                         next.is<KeyPair>();
  if (immutable && !current.specEquals(next)) {
    result.violations.push_back({"spec", "field is immutable"});
  }
  return result;
}

}  // namespace kupenstack::model
