/*
 * Copyright 2026 The skewjoin Authors
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

#include <stdexcept>
#include <string>
#include <string_view>

namespace skewjoin {

enum class ErrorKind {
  kInvalidSpec,
  kInvalidArgument,
  kParse,
  kLimitExceeded,
  kNotConverged,
  kUnsupported,
  kInfeasible,
  kInternal,
  kIo,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidSpec: return "invalid_spec";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kLimitExceeded: return "limit_exceeded";
    case ErrorKind::kNotConverged: return "not_converged";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kInternal: return "internal";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

// All library failures are reported through this exception type. The kind is
// stable and is what the CLI prints in its machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace skewjoin
