// Copyright 2026 The murag Authors
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

#ifndef MURAG_EPSILON_HPP_
#define MURAG_EPSILON_HPP_

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>

#include "murag/errors.hpp"

namespace murag {

// A privacy budget held as an integer number of micro-epsilon (1e-6 eps).
// Every sufficiency test on budgets is an integer comparison.
class EpsilonAmount {
 public:
  static constexpr std::int64_t kMicroPerUnit = 1'000'000;

  constexpr EpsilonAmount() = default;

  static constexpr EpsilonAmount FromMicro(std::int64_t micro) {
    if (micro < 0) throw PreconditionError("epsilon must be non-negative");
    return EpsilonAmount(micro);
  }

  // Quantizes to the nearest micro-epsilon.
  static EpsilonAmount FromDouble(double epsilon) {
    if (!std::isfinite(epsilon) || epsilon < 0.0) {
      throw PreconditionError("epsilon must be finite and non-negative, got " +
                              std::to_string(epsilon));
    }
    const double scaled = epsilon * static_cast<double>(kMicroPerUnit);
    if (scaled > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2)) {
      throw PreconditionError("epsilon too large");
    }
    return EpsilonAmount(std::llround(scaled));
  }

  constexpr std::int64_t micro() const { return micro_; }
  constexpr double value() const {
    return static_cast<double>(micro_) / static_cast<double>(kMicroPerUnit);
  }
  constexpr bool is_zero() const { return micro_ == 0; }

  constexpr auto operator<=>(const EpsilonAmount&) const = default;

  friend constexpr EpsilonAmount operator+(EpsilonAmount a, EpsilonAmount b) {
    return EpsilonAmount(a.micro_ + b.micro_);
  }
  // Throws when the result would be negative.
  friend constexpr EpsilonAmount operator-(EpsilonAmount a, EpsilonAmount b) {
    if (b.micro_ > a.micro_) throw PreconditionError("negative epsilon");
    return EpsilonAmount(a.micro_ - b.micro_);
  }
  friend constexpr EpsilonAmount operator*(EpsilonAmount a, std::int64_t n) {
    if (n < 0) throw PreconditionError("negative multiplier");
    return EpsilonAmount(a.micro_ * n);
  }
  friend constexpr EpsilonAmount operator*(std::int64_t n, EpsilonAmount a) {
    return a * n;
  }
  // Whole number of times b fits in a (floor division).
  friend constexpr std::int64_t operator/(EpsilonAmount a, EpsilonAmount b) {
    if (b.micro_ == 0) throw PreconditionError("division by zero epsilon");
    return a.micro_ / b.micro_;
  }
  EpsilonAmount& operator+=(EpsilonAmount other) { return *this = *this + other; }
  EpsilonAmount& operator-=(EpsilonAmount other) { return *this = *this - other; }

 private:
  constexpr explicit EpsilonAmount(std::int64_t micro) : micro_(micro) {}
  std::int64_t micro_ = 0;
};

inline EpsilonAmount Eps(double epsilon) { return EpsilonAmount::FromDouble(epsilon); }

}  // namespace murag

#endif  // MURAG_EPSILON_HPP_
