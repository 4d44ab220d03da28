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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kupenstack::model {

using Ipv4 = std::uint32_t;

std::optional<Ipv4> parseIpv4(std::string_view text);
std::string formatIpv4(Ipv4 addr);

/// IPv4 network in canonical form (host bits zero).
struct Cidr {
  Ipv4 network = 0;
  int prefix = 0;

  static std::optional<Cidr> parse(std::string_view text);

  Ipv4 mask() const { return prefix == 0 ? 0 : ~Ipv4{0} << (32 - prefix); }
  Ipv4 broadcast() const { return network | ~mask(); }
  /// First and last usable host address (excludes network and broadcast).
  Ipv4 firstHost() const { return network + 1; }
  Ipv4 lastHost() const { return broadcast() - 1; }
  bool contains(Ipv4 addr) const { return (addr & mask()) == network; }
  bool overlaps(const Cidr& other) const;
  std::string str() const;
};

/// Inclusive address range.
struct IpRange {
  Ipv4 first = 0;
  Ipv4 last = 0;
  std::uint64_t size() const { return std::uint64_t{last} - first + 1; }
};

/// Default pool skips the gateway (first host).
IpRange defaultPool(const Cidr& cidr);

}  // namespace kupenstack::model
