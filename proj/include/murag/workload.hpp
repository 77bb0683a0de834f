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

// Synthetic corpora and query streams with controllable document reuse.
//
// Every query q has a set of relevant documents whose embeddings sit at a
// known cosine from the query embedding; the rest of the corpus is random
// background. Per-query "levels" vary the cosine band, so score distributions
// differ across queries the way they do for real retrievers.
//
//  * independent: relevant sets are pairwise disjoint.
//  * correlated:  queries come in groups around a shared topic vector and each
//    group shares round(overlap * relevant_per_query) documents; a shared
//    document still carries the planted fact of exactly one group member and
//    sits closest to that member.

#ifndef MURAG_WORKLOAD_HPP_
#define MURAG_WORKLOAD_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "murag/corpus.hpp"
#include "murag/errors.hpp"
#include "murag/noise.hpp"

namespace murag {

enum class WorkloadMode { kIndependent, kCorrelated };

struct WorkloadSpec {
  std::size_t corpus_size = 5000;
  std::size_t dim = 128;
  std::size_t num_queries = 100;
  WorkloadMode mode = WorkloadMode::kIndependent;
  std::size_t relevant_per_query = 40;
  double overlap = 0.5;
  std::uint64_t seed = 1;
  // Queries per correlation group.
  std::size_t group_size = 2;
  std::size_t vocab_size = 256;
  // Answers are 1..max_answer_len tokens long, uniformly.
  std::size_t max_answer_len = 5;
  // Probability that a relevant document carries its query's planted fact.
  double fact_fraction = 0.8;
};

struct Workload {
  Corpus corpus;
  std::vector<QueryRecord> queries;
  // Planted relevant document ids per query, ascending.
  std::vector<std::vector<std::string>> relevant;
};

namespace workload_internal {

// Cosine band of relevant documents: [level - kBandWidth, level] with the
// level drawn per query from [kLevelLo, kLevelHi].
inline constexpr double kLevelLo = 0.80;
inline constexpr double kLevelHi = 0.97;
inline constexpr double kBandWidth = 0.05;
// Cosine between each grouped query and its group's topic vector.
inline constexpr double kGroupCohesion = 0.9;
inline constexpr std::size_t kQueryTokens = 4;
inline constexpr std::size_t kDocTokens = 12;
inline constexpr std::uint64_t kWorkloadStream = 0x574F524B;  // "WORK"

inline std::vector<double> RandomUnit(std::size_t dim, NoiseSource& noise) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = noise.Gaussian();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

// Unit vector whose inner product with the unit vector `target` is exactly
// `cosine` (up to rounding).
inline std::vector<double> AtCosine(const std::vector<double>& target, double cosine,
                                    NoiseSource& noise) {
  const std::size_t dim = target.size();
  std::vector<double> ortho;
  double norm = 0.0;
  do {
    ortho = RandomUnit(dim, noise);
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += ortho[i] * target[i];
    norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      ortho[i] -= dot * target[i];
      norm += ortho[i] * ortho[i];
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  const double sine = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
  std::vector<double> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = cosine * target[i] + sine * ortho[i] / norm;
  return out;
}

inline Token RandomToken(std::size_t vocab_size, NoiseSource& noise) {
  // 0 is EOS and 1 is the scripted generator's designated wrong answer.
  return static_cast<Token>(2 + noise.Bits() % (vocab_size - 2));
}

inline std::vector<Token> RandomTokens(std::size_t n, std::size_t vocab_size,
                                       NoiseSource& noise) {
  std::vector<Token> out(n);
  for (auto& t : out) t = RandomToken(vocab_size, noise);
  return out;
}

struct PendingDoc {
  std::vector<double> embedding;
  std::optional<Fact> fact;
  std::vector<std::size_t> relevant_to;
};

}  // namespace workload_internal

inline void ValidateWorkloadSpec(const WorkloadSpec& spec) {
  Require(spec.corpus_size >= 1, "corpus_size must be positive");
  Require(spec.dim >= 2, "dim must be at least 2");
  Require(spec.relevant_per_query >= 1, "relevant_per_query must be positive");
  Require(spec.overlap >= 0.0 && spec.overlap <= 1.0, "overlap must lie in [0, 1]");
  Require(spec.group_size >= 1, "group_size must be positive");
  Require(spec.vocab_size >= 3, "vocab_size must be at least 3");
  Require(spec.max_answer_len >= 1, "max_answer_len must be positive");
  Require(spec.fact_fraction >= 0.0 && spec.fact_fraction <= 1.0,
          "fact_fraction must lie in [0, 1]");
}

inline Workload GenerateSyntheticWorkload(const WorkloadSpec& spec) {
  using namespace workload_internal;
  ValidateWorkloadSpec(spec);
  NoiseSource noise(spec.seed, kWorkloadStream);
  const std::size_t T = spec.num_queries;
  const std::size_t R = spec.relevant_per_query;

  std::vector<QueryRecord> queries(T);
  std::vector<double> levels(T);
  std::vector<PendingDoc> pending;

  auto make_fact_doc = [&](std::size_t owner, bool force_fact, bool top_of_band) {
    PendingDoc doc;
    const double cosine =
        top_of_band ? levels[owner] : levels[owner] - kBandWidth * noise.Uniform();
    doc.embedding = AtCosine(queries[owner].embedding, cosine, noise);
    if (force_fact || noise.Uniform() < spec.fact_fraction) {
      doc.fact = Fact{queries[owner].FactKey(), queries[owner].answers.front()};
    }
    return doc;
  };

  auto init_query = [&](std::size_t t, std::vector<double> embedding) {
    QueryRecord& q = queries[t];
    char buf[32];
    std::snprintf(buf, sizeof(buf), "q-%05zu", t);
    q.id = buf;
    q.tokens = RandomTokens(kQueryTokens, spec.vocab_size, noise);
    q.embedding = std::move(embedding);
    const std::size_t len = 1 + noise.Bits() % spec.max_answer_len;
    q.answers = {RandomTokens(len, spec.vocab_size, noise)};
    levels[t] = kLevelLo + (kLevelHi - kLevelLo) * noise.Uniform();
  };

  if (spec.mode == WorkloadMode::kIndependent) {
    if (T * R > spec.corpus_size) {
      throw PreconditionError("infeasible workload: " + std::to_string(T * R) +
                              " relevant documents exceed corpus size " +
                              std::to_string(spec.corpus_size));
    }
    for (std::size_t t = 0; t < T; ++t) {
      init_query(t, RandomUnit(spec.dim, noise));
      for (std::size_t j = 0; j < R; ++j) {
        PendingDoc doc = make_fact_doc(t, j == 0, j == 0);
        doc.relevant_to = {t};
        pending.push_back(std::move(doc));
      }
    }
  } else {
    const std::size_t shared = static_cast<std::size_t>(
        std::llround(spec.overlap * static_cast<double>(R)));
    const std::size_t own = R - shared;
    std::size_t needed = 0;
    for (std::size_t start = 0; start < T; start += spec.group_size) {
      const std::size_t g = std::min(spec.group_size, T - start);
      if (own == 0 && shared < g) {
        throw PreconditionError("infeasible workload: a group member would own no document");
      }
      needed += shared + g * own;
    }
    if (needed > spec.corpus_size) {
      throw PreconditionError("infeasible workload: " + std::to_string(needed) +
                              " relevant documents exceed corpus size " +
                              std::to_string(spec.corpus_size));
    }
    for (std::size_t start = 0, group = 0; start < T; start += spec.group_size, ++group) {
      const std::size_t g = std::min(spec.group_size, T - start);
      const std::vector<double> topic = RandomUnit(spec.dim, noise);
      for (std::size_t i = 0; i < g; ++i) {
        init_query(start + i, AtCosine(topic, kGroupCohesion, noise));
        queries[start + i].group = "g-" + std::to_string(group);
      }
      std::vector<std::size_t> members(g);
      for (std::size_t i = 0; i < g; ++i) members[i] = start + i;
      std::vector<bool> has_fact(g, false);
      for (std::size_t j = 0; j < shared; ++j) {
        const std::size_t owner = j % g;
        const bool first = j < g && own == 0;
        PendingDoc doc = make_fact_doc(start + owner, first, first);
        doc.relevant_to = members;
        pending.push_back(std::move(doc));
      }
      for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < own; ++j) {
          PendingDoc doc = make_fact_doc(start + i, j == 0, j == 0);
          doc.relevant_to = {start + i};
          pending.push_back(std::move(doc));
        }
      }
    }
  }

  while (pending.size() < spec.corpus_size) {
    pending.push_back(PendingDoc{RandomUnit(spec.dim, noise), std::nullopt, {}});
  }

  // Shuffle so that ids (and hence tie-breaks and sampling order) carry no
  // information about which query a document belongs to.
  for (std::size_t i = pending.size(); i > 1; --i) {
    std::swap(pending[i - 1], pending[noise.Bits() % i]);
  }

  Workload out;
  out.relevant.resize(T);
  std::vector<Document> docs;
  docs.reserve(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "doc-%06zu", i);
    Document d;
    d.id = buf;
    d.embedding = std::move(pending[i].embedding);
    d.tokens = RandomTokens(kDocTokens, spec.vocab_size, noise);
    if (pending[i].fact) {
      d.tokens.insert(d.tokens.end(), pending[i].fact->answer.begin(),
                      pending[i].fact->answer.end());
    }
    d.fact = std::move(pending[i].fact);
    for (std::size_t t : pending[i].relevant_to) out.relevant[t].push_back(d.id);
    docs.push_back(std::move(d));
  }
  out.corpus = Corpus(std::move(docs));
  out.queries = std::move(queries);
  return out;
}

}  // namespace murag

#endif  // MURAG_WORKLOAD_HPP_
