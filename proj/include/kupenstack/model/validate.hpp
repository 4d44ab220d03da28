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

#include <string>
#include <string_view>
#include <vector>

#include "kupenstack/common.hpp"
#include "kupenstack/model/resource.hpp"

namespace kupenstack::model {

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  explicit operator bool() const { return ok(); }
};

/// Structural validation of metadata and spec. Pure; status is ignored.
ValidationResult validate(const ResourceObject& obj);

/// Checks that an update from `current` to `next` only touches mutable spec
/// fields. Returns violations for immutable-field changes.
ValidationResult validateUpdate(const ResourceObject& current, const ResourceObject& next);

/// Version strings accept an optional leading 'v', one to three numeric
/// components and an optional pre-release suffix ("1.2.3", "v2", "2.0-rc1").
bool isValidVersion(std::string_view version);
bool isDnsLabel(std::string_view s);

}  // namespace kupenstack::model
