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

#include "kupenstack/model/cidr.hpp"

#include <charconv>

namespace kupenstack::model {

std::optional<Ipv4> parseIpv4(std::string_view text) {
  Ipv4 addr = 0;
  int octets = 0;
  std::size_t pos = 0;
  while (octets < 4) {
    std::size_t end = text.find('.', pos);
    if (octets == 3) end = text.size();
    if (end == std::string_view::npos || end == pos || end - pos > 3) return std::nullopt;
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, value);
    if (ec != std::errc{} || ptr != text.data() + end || value > 255) return std::nullopt;
    // No leading zeros ("010" is ambiguous).
    if (end - pos > 1 && text[pos] == '0') return std::nullopt;
    addr = (addr << 8) | value;
    ++octets;
    pos = end + 1;
  }
  return addr;
}

std::string formatIpv4(Ipv4 addr) {
  return std::to_string((addr >> 24) & 0xff) + "." + std::to_string((addr >> 16) & 0xff) + "." +
         std::to_string((addr >> 8) & 0xff) + "." + std::to_string(addr & 0xff);
}

std::optional<Cidr> Cidr::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto addr = parseIpv4(text.substr(0, slash));
  if (!addr) return std::nullopt;
  auto prefixText = text.substr(slash + 1);
  int prefix = -1;
  auto [ptr, ec] =
      std::from_chars(prefixText.data(), prefixText.data() + prefixText.size(), prefix);
  if (ec != std::errc{} || ptr != prefixText.data() + prefixText.size() || prefix < 0 ||
      prefix > 32 || prefixText.empty())
    return std::nullopt;
  Cidr c{*addr, prefix};
  if ((*addr & c.mask()) != *addr) return std::nullopt;  // host bits set
  return c;
}

bool Cidr::overlaps(const Cidr& other) const {
  return contains(other.network) || other.contains(network);
}

std::string Cidr::str() const { return formatIpv4(network) + "/" + std::to_string(prefix); }

IpRange defaultPool(const Cidr& cidr) { return {cidr.firstHost() + 1, cidr.lastHost()}; }

}  // namespace kupenstack::model
