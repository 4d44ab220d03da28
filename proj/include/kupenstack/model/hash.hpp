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
#include <string>
#include <string_view>

#include "kupenstack/model/resource.hpp"

namespace kupenstack::model {

/// 64-bit FNV-1a.
class Fnv1a64 {
 public:
  Fnv1a64& update(std::string_view bytes);
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string digestHex(std::string_view bytes);

/// Identity of an immutable service-unit generation. Hashes a length-prefixed
/// encoding of the version and the key-sorted overrides, so the result does
/// not depend on map insertion order.
std::string hashConfig(const StringMap& overrides, std::string_view version);

}  // namespace kupenstack::model
