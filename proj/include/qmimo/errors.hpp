// Copyright 2026 The qmimo Authors
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
#include <utility>

namespace qmimo {

/// Operand shapes do not fit together (wrong dimension, bad subsystem split).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The request is valid but too large for dense exact simulation.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A stage was applied in an order the model does not define
/// (crosstalk after erasure).
class OrderingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A named parameter is outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  ParameterError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline void require_unit_interval(const std::string& field, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ParameterError(field, "must lie in [0, 1], got " + std::to_string(value));
  }
}

}  // namespace qmimo
