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

#ifndef MURAG_METRICS_HPP_
#define MURAG_METRICS_HPP_

#include <algorithm>
#include <span>
#include <vector>

#include "murag/errors.hpp"
#include "murag/mechanisms.hpp"

namespace murag {

// 1 when any gold answer occurs as a contiguous run inside the prediction.
inline int MatchAccuracy(std::span<const Token> prediction,
                         const std::vector<std::vector<Token>>& gold) {
  Require(!gold.empty(), "match accuracy needs at least one gold answer");
  for (const auto& answer : gold) {
    if (std::search(prediction.begin(), prediction.end(), answer.begin(), answer.end()) !=
        prediction.end() || answer.empty()) {
      return 1;
    }
  }
  return 0;
}

}  // namespace murag

#endif  // MURAG_METRICS_HPP_
