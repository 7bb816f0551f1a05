/*
 * Copyright 2026 The cspforge Authors
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

namespace cspforge {

/// Root of every error raised by the library. `kind()` is a stable
/// machine-readable tag used in reports and HTTP responses.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define CSPFORGE_DEFINE_ERROR(Name)                                  \
  class Name : public ::cspforge::Error {                            \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

CSPFORGE_DEFINE_ERROR(PreconditionError);

}  // namespace cspforge
