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

#include <atomic>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kupenstack {

/// Logical time. Everything in the engine is measured in ticks.
using Tick = std::int64_t;

/// Shared logical clock, advanced only by the engine's tick loop.
class LogicalClock {
 public:
  Tick now() const { return now_.load(std::memory_order_acquire); }
  void set(Tick t) { now_.store(t, std::memory_order_release); }
  Tick advance() { return now_.fetch_add(1, std::memory_order_acq_rel) + 1; }

 private:
  std::atomic<Tick> now_{0};
};

/// (kind, namespace, name). Namespace is empty for cluster-scoped kinds.
struct ObjectKey {
  std::string kind;
  std::string ns;
  std::string name;

  auto operator<=>(const ObjectKey&) const = default;
  bool operator==(const ObjectKey&) const = default;

  std::string str() const {
    return ns.empty() ? kind + "/" + name : kind + "/" + ns + "/" + name;
  }
};

enum class ErrorCode {
  UnknownKind,
  ValidationFailed,
  AlreadyExists,
  NotFound,
  Conflict,
  CompactedRevision,
  DuplicateController,
  ServiceUnavailable,
  QuotaExceeded,
  NoValidHost,
  ProjectNotEmpty,
  InUse,
  InvalidArgument,
  ParseError,
};

const char* to_string(ErrorCode code);

/// Field-path violation reported by validation.
struct Violation {
  std::string path;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Base error for every engine failure. Carries a stable code so callers
/// (controllers, the CLI) can map it to a reason or exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace kupenstack
