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

// Core differentially private primitives: Laplace noise, the exponential
// mechanism over token histograms, and token counting.

#ifndef MURAG_MECHANISMS_HPP_
#define MURAG_MECHANISMS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "murag/epsilon.hpp"
#include "murag/errors.hpp"
#include "murag/noise.hpp"

namespace murag {

using Token = std::uint32_t;

// End-of-sequence is vocabulary index 0 everywhere in this library.
inline constexpr Token kEos = 0;

// Per-token vote counts over a fixed vocabulary.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(std::size_t vocab_size) : counts_(vocab_size, 0) {}
  explicit Histogram(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {}

  std::size_t vocab_size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  std::uint64_t operator[](std::size_t token) const { return counts_.at(token); }
  void Add(std::size_t token) { ++counts_.at(token); }
  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (auto c : counts_) sum += c;
    return sum;
  }
  std::span<const std::uint64_t> counts() const { return counts_; }

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::vector<std::uint64_t> counts_;
};

// Inverse-CDF transform of one uniform draw u in (0, 1) into Laplace(0, scale).
inline double LaplaceFromUniform(double u, double scale) {
  const double centered = u - 0.5;
  const double sign = centered < 0 ? -1.0 : (centered > 0 ? 1.0 : 0.0);
  return -sign * scale * std::log1p(-2.0 * std::fabs(centered));
}

// One Laplace(0, scale) draw. Consumes exactly one uniform, or none in
// noiseless mode where the draw is replaced by 0.
template <UniformSource Noise>
double SampleLaplace(double scale, Noise& noise) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw PreconditionError("Laplace scale must be positive and finite, got " +
                            std::to_string(scale));
  }
  if (noise.noiseless()) return 0.0;
  return LaplaceFromUniform(noise.Uniform(), scale);
}

// Argmax with ties broken towards the lowest index.
inline std::size_t ArgMax(const Histogram& hist) {
  Require(!hist.empty(), "argmax of an empty histogram");
  const auto counts = hist.counts();
  return static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// Closed-form selection probabilities p_j proportional to
// exp(eps * u_j / (2 * sensitivity)). Utilities are shifted by their maximum
// before exponentiating so large eps * u never overflows.
inline std::vector<double> ExponentialMechanismProbabilities(
    const Histogram& hist, EpsilonAmount epsilon, double sensitivity) {
  Require(!hist.empty(), "exponential mechanism needs a non-empty histogram");
  Require(!epsilon.is_zero(), "exponential mechanism needs epsilon > 0");
  Require(sensitivity > 0.0 && std::isfinite(sensitivity),
          "sensitivity must be positive");
  const auto counts = hist.counts();
  const double top = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  const double factor = epsilon.value() / (2.0 * sensitivity);
  std::vector<double> weights(counts.size());
  double total = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    weights[j] = std::exp(factor * (static_cast<double>(counts[j]) - top));
    total += weights[j];
  }
  for (double& w : weights) w /= total;
  return weights;
}

// Samples an index from the exponential mechanism. Noiseless mode returns
// the argmax (lowest index on ties) without consuming randomness.
template <UniformSource Noise>
std::size_t ExponentialMechanism(const Histogram& hist, EpsilonAmount epsilon,
                                 double sensitivity, Noise& noise) {
  const std::vector<double> probs =
      ExponentialMechanismProbabilities(hist, epsilon, sensitivity);
  if (noise.noiseless()) return ArgMax(hist);
  const double target = noise.Uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0) continue;
    cumulative += probs[j];
    last_positive = j;
    if (target < cumulative) return j;
  }
  // Rounding left the cumulative sum a hair below 1.
  return last_positive;
}

inline Histogram CountTokens(std::span<const Token> tokens, std::size_t vocab_size) {
  Require(vocab_size > 0, "vocabulary size must be positive");
  Histogram hist(vocab_size);
  for (Token t : tokens) {
    if (t >= vocab_size) {
      throw PreconditionError("token " + std::to_string(t) +
                              " outside vocabulary of size " + std::to_string(vocab_size));
    }
    hist.Add(t);
  }
  return hist;
}

}  // namespace murag

#endif  // MURAG_MECHANISMS_HPP_
