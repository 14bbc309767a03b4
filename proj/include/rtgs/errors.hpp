// Copyright 2026 The rtgs-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace rtgs {

// Raised when a configuration or argument is outside its documented domain.
class InvalidConfiguration : public std::invalid_argument {
 public:
  explicit InvalidConfiguration(const std::string& what)
      : std::invalid_argument(what) {}
  InvalidConfiguration(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}

  // Name of the offending field, empty when not field-specific.
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Raised when a caller breaks an operation's precondition (unsorted input,
// out-of-range index).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what)
      : std::logic_error(what) {}
};

}  // namespace rtgs
