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

#ifndef MURAG_ERRORS_HPP_
#define MURAG_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace murag {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (bad argument, malformed input).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A privacy filter would have been overdrawn. Always a logic bug in the
// caller: budgets must be checked through the active set before charging.
class FilterViolation : public Error {
 public:
  using Error::Error;
};

// Transient failure talking to an external generator; the caller may retry.
class RetriableError : public Error {
 public:
  using Error::Error;
};

// An external component answered with something that cannot be interpreted.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace murag

#endif  // MURAG_ERRORS_HPP_
