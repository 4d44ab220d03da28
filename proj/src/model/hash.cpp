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

#include "kupenstack/model/hash.hpp"

#include <cstdio>

namespace kupenstack::model {

Fnv1a64& Fnv1a64::update(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

std::string Fnv1a64::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string digestHex(std::string_view bytes) { return Fnv1a64{}.update(bytes).hex(); }

namespace {
void field(Fnv1a64& h, std::string_view tag, std::string_view value) {
  h.update(tag).update(std::to_string(value.size())).update(":").update(value).update(";");
}
}  // namespace

std::string hashConfig(const StringMap& overrides, std::string_view version) {
  Fnv1a64 h;
  field(h, "v", version);
  // StringMap is ordered, so iteration is already key-sorted.
  for (const auto& [k, v] : overrides) {
    field(h, "k", k);
    field(h, "=", v);
  }
  return h.hex();
}

}  // namespace kupenstack::model
