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

// Token generation: the greedy generator contract, the scripted stand-in
// used for desk-scale experiments, and single-query DP-RAG (sparse vector
// technique over voter histograms plus the exponential mechanism).

#ifndef MURAG_GENERATOR_HPP_
#define MURAG_GENERATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "murag/corpus.hpp"
#include "murag/epsilon.hpp"
#include "murag/errors.hpp"
#include "murag/mechanisms.hpp"
#include "murag/noise.hpp"

namespace murag {

// A deterministic greedy decoder: identical inputs give identical outputs,
// and a call with an empty context must not depend on any corpus.
class TokenGenerator {
 public:
  virtual ~TokenGenerator() = default;
  virtual Token NextToken(const QueryRecord& query, std::span<const Document> context,
                          std::span<const Token> prefix) = 0;
  virtual std::size_t vocab_size() const = 0;
};

inline std::uint64_t Fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct StubConfig {
  // Probability that the generator "knows" a query's answer without context.
  double p_base = 0.3;
  Token wrong_token = 1;
  std::uint64_t seed = 0;
  std::size_t vocab_size = 256;
};

// Scripted generator. With a context document whose planted fact matches the
// query it continues that fact's answer and then emits EOS. Otherwise it
// answers from "parametric knowledge" for a deterministic p_base fraction of
// queries, and emits the designated wrong token followed by EOS for the rest.
class StubGenerator final : public TokenGenerator {
 public:
  explicit StubGenerator(StubConfig config = {}) : config_(config) {
    Require(config.p_base >= 0.0 && config.p_base <= 1.0, "p_base must lie in [0, 1]");
    Require(config.vocab_size >= 2, "vocabulary needs at least two tokens");
    Require(config.wrong_token != kEos && config.wrong_token < config.vocab_size,
            "wrong token must be a non-EOS vocabulary entry");
  }

  bool Knows(const QueryRecord& query) const {
    const double u = BitsToOpenUnit(SplitMix64(config_.seed ^ Fnv1a64(query.id)));
    return u < config_.p_base;
  }

  Token NextToken(const QueryRecord& query, std::span<const Document> context,
                  std::span<const Token> prefix) override {
    const std::string& key = query.FactKey();
    for (const Document& doc : context) {
      if (doc.fact && doc.fact->key == key) return Continue(doc.fact->answer, prefix);
    }
    if (Knows(query) && !query.answers.empty()) return Continue(query.answers.front(), prefix);
    return prefix.empty() ? config_.wrong_token : kEos;
  }

  std::size_t vocab_size() const override { return config_.vocab_size; }
  const StubConfig& config() const { return config_; }

 private:
  static Token Continue(std::span<const Token> answer, std::span<const Token> prefix) {
    if (prefix.size() < answer.size() &&
        std::equal(prefix.begin(), prefix.end(), answer.begin())) {
      return answer[prefix.size()];
    }
    return kEos;
  }

  StubConfig config_;
};

struct DpRagParams {
  EpsilonAmount eps_total = Eps(10.0);  // eps: whole-call budget
  EpsilonAmount eps_token = Eps(2.0);   // eps_0: budget per discovery
  std::size_t max_tokens = 8;
  std::size_t voters = 30;
  std::size_t docs_per_voter = 1;
  double threshold = 15.0;  // theta, in votes

  std::size_t RetrievalSize() const { return voters * docs_per_voter; }
  // c = floor(eps / eps_0).
  std::int64_t Discoveries() const { return eps_total / eps_token; }
  // eps_Lap = eps_Expo = eps_0 / 2.
  EpsilonAmount HalfTokenBudget() const { return EpsilonAmount::FromMicro(eps_token.micro() / 2); }

  void Validate() const {
    Require(!eps_token.is_zero(), "per-token budget must be positive");
    Require(eps_token.micro() % 2 == 0, "per-token budget must split evenly in micro-eps");
    Require(eps_token <= eps_total, "per-token budget exceeds the total budget");
    Require(max_tokens >= 1, "max_tokens must be positive");
    Require(voters >= 1, "need at least one voter");
    Require(docs_per_voter >= 1, "need at least one document per voter");
    Require(std::isfinite(threshold), "vote threshold must be finite");
  }
};

struct DpRagResult {
  std::vector<Token> tokens;
  std::size_t discoveries = 0;
  // Number of times the noisy threshold was (re)drawn.
  std::size_t threshold_draws = 0;
  // Threshold hint handed down by an adaptive orchestrator; recorded only.
  std::optional<double> tau_hint;
};

// Single-query DP-RAG. `docs` must already hold exactly voters *
// docs_per_voter documents in rank order (padded upstream); voter i gets the
// i-th contiguous chunk. Randomness is drawn in a fixed order per step:
// comparison noise, then (on a discovery) the exponential mechanism draw and
// the fresh threshold.
template <UniformSource Noise>
DpRagResult DpRagAnswer(const QueryRecord& query, std::span<const Document> docs,
                        TokenGenerator& generator, const DpRagParams& params, Noise& noise,
                        std::optional<double> tau_hint = std::nullopt) {
  params.Validate();
  if (docs.size() != params.RetrievalSize()) {
    throw PreconditionError("DP-RAG expects " + std::to_string(params.RetrievalSize()) +
                            " documents, got " + std::to_string(docs.size()));
  }
  const double eps_half = params.HalfTokenBudget().value();
  const EpsilonAmount eps_expo = params.HalfTokenBudget();
  const std::size_t vocab = generator.vocab_size();

  DpRagResult result;
  result.tau_hint = tau_hint;
  std::int64_t discoveries_left = params.Discoveries();

  double noisy_threshold = params.threshold + SampleLaplace(2.0 / eps_half, noise);
  result.threshold_draws = 1;

  // Padding never reaches the generator: a voter whose chunk is all padding
  // makes the same context-free call as the baseline.
  std::vector<std::vector<Document>> owned;
  std::vector<std::span<const Document>> contexts(params.voters);
  for (std::size_t i = 0; i < params.voters; ++i) {
    const auto chunk = docs.subspan(i * params.docs_per_voter, params.docs_per_voter);
    if (std::none_of(chunk.begin(), chunk.end(), [](const Document& d) { return d.IsEmpty(); })) {
      contexts[i] = chunk;
      continue;
    }
    owned.resize(params.voters);
    for (const Document& d : chunk) {
      if (!d.IsEmpty()) owned[i].push_back(d);
    }
    contexts[i] = owned[i];
  }

  std::vector<Token> votes(params.voters);
  for (std::size_t step = 0; step < params.max_tokens; ++step) {
    const std::span<const Token> prefix(result.tokens);
    const double comparison_noise = SampleLaplace(4.0 / eps_half, noise);
    const Token baseline = generator.NextToken(query, {}, prefix);
    for (std::size_t i = 0; i < params.voters; ++i) {
      votes[i] = generator.NextToken(query, contexts[i], prefix);
    }
    if (baseline >= vocab) throw ProtocolError("generator returned an out-of-vocabulary token");
    const Histogram hist = CountTokens(votes, vocab);
    const double support = static_cast<double>(hist[baseline]);

    Token next;
    if (support + comparison_noise <= noisy_threshold) {
      next = static_cast<Token>(ExponentialMechanism(hist, eps_expo, 1.0, noise));
      --discoveries_left;
      ++result.discoveries;
      noisy_threshold = params.threshold + SampleLaplace(2.0 / eps_half, noise);
      ++result.threshold_draws;
    } else {
      next = baseline;
    }
    result.tokens.push_back(next);
    if (next == kEos || discoveries_left == 0) break;
  }
  return result;
}

// Plain greedy decoding with a fixed context; no privacy.
inline std::vector<Token> GreedyAnswer(const QueryRecord& query, std::span<const Document> context,
                                       TokenGenerator& generator, std::size_t max_tokens) {
  std::vector<Token> out;
  while (out.size() < max_tokens) {
    const Token t = generator.NextToken(query, context, out);
    out.push_back(t);
    if (t == kEos) break;
  }
  return out;
}

}  // namespace murag

#endif  // MURAG_GENERATOR_HPP_
