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

// Documents, queries, relevance scoring and the retrieval helpers shared by
// every orchestrator: Top-K with padding, score bins, Poisson subsampling and
// retrieval precision.

#ifndef MURAG_CORPUS_HPP_
#define MURAG_CORPUS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "murag/errors.hpp"
#include "murag/mechanisms.hpp"
#include "murag/noise.hpp"

namespace murag {

// Reserved id of the padding document produced by TopK.
inline constexpr std::string_view kEmptyDocumentId = "<empty>";

// A planted question/answer pair used by the scripted generator.
struct Fact {
  std::string key;
  std::vector<Token> answer;

  friend bool operator==(const Fact&, const Fact&) = default;
};

struct Document {
  std::string id;
  std::vector<Token> tokens;
  std::vector<double> embedding;
  std::optional<Fact> fact;

  bool IsEmpty() const { return id == kEmptyDocumentId; }
  friend bool operator==(const Document&, const Document&) = default;
};

inline Document EmptyDocument(std::size_t dim) {
  return Document{std::string(kEmptyDocumentId), {}, std::vector<double>(dim, 0.0),
                  std::nullopt};
}

struct QueryRecord {
  std::string id;
  std::vector<Token> tokens;
  std::vector<double> embedding;
  std::vector<std::vector<Token>> answers;
  std::optional<std::string> group;
  // Key matched against Document::fact. Empty means "use the query id".
  std::string fact_key;

  const std::string& FactKey() const { return fact_key.empty() ? id : fact_key; }
  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

struct ScoreInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed_hi = false;

  bool Contains(double score) const {
    return score >= lo && (closed_hi ? score <= hi : score < hi);
  }
};

// Discretization of [lo, hi] into equal-width bins [a_i, a_{i+1}); the top
// bin also contains hi itself.
class ScoreBins {
 public:
  ScoreBins(double lo = 70.0, double hi = 100.0, double width = 0.2)
      : lo_(lo), hi_(hi), width_(width) {
    Require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "score range needs lo < hi");
    Require(std::isfinite(width) && width > 0.0, "bin width must be positive");
    const double ratio = (hi - lo) / width;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::fabs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
      throw PreconditionError("score range is not a whole number of bins");
    }
    count_ = static_cast<std::size_t>(rounded);
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return width_; }
  std::size_t count() const { return count_; }

  // Lower edge of ascending bin i; Edge(count()) == hi.
  double Edge(std::size_t i) const {
    return i >= count_ ? hi_ : lo_ + static_cast<double>(i) * width_;
  }

  // Ascending bin index holding the score; out-of-range scores are clamped.
  std::size_t IndexOf(double score) const {
    if (!(score > lo_)) return 0;
    if (score >= hi_) return count_ - 1;
    auto idx = static_cast<std::size_t>(std::floor((score - lo_) / width_));
    idx = std::min(idx, count_ - 1);
    while (idx > 0 && score < Edge(idx)) --idx;
    while (idx + 1 < count_ && score >= Edge(idx + 1)) ++idx;
    return idx;
  }

  ScoreInterval Interval(std::size_t i) const {
    return ScoreInterval{Edge(i), Edge(i + 1), i + 1 == count_};
  }

  // Highest scores first.
  std::vector<ScoreInterval> Descending() const {
    std::vector<ScoreInterval> out;
    out.reserve(count_);
    for (std::size_t i = count_; i-- > 0;) out.push_back(Interval(i));
    return out;
  }

 private:
  double lo_;
  double hi_;
  double width_;
  std::size_t count_ = 0;
};

// Inner product of the embeddings mapped affinely from [-1, 1] onto the
// configured score range and clamped to it. The empty document scores lo.
inline double Relevance(const Document& doc, const QueryRecord& query,
                        const ScoreBins& bins) {
  if (doc.IsEmpty()) return bins.lo();
  if (doc.embedding.size() != query.embedding.size()) {
    throw PreconditionError("embedding dimension mismatch between document '" + doc.id +
                            "' and query '" + query.id + "'");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < doc.embedding.size(); ++i) {
    dot += doc.embedding[i] * query.embedding[i];
  }
  const double score = bins.lo() + (dot + 1.0) * 0.5 * (bins.hi() - bins.lo());
  return std::clamp(score, bins.lo(), bins.hi());
}

struct ScoredDocument {
  const Document* doc = nullptr;
  double score = 0.0;
};

// Descending score, ties by ascending id.
inline bool RanksBefore(const ScoredDocument& a, const ScoredDocument& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc->id < b.doc->id;
}

inline std::vector<ScoredDocument> ScoreAll(std::span<const Document* const> docs,
                                            const QueryRecord& query,
                                            const ScoreBins& bins) {
  std::vector<ScoredDocument> scored;
  scored.reserve(docs.size());
  for (const Document* doc : docs) scored.push_back({doc, Relevance(*doc, query, bins)});
  return scored;
}

// The k best candidates in rank order, padded with empty documents to exactly k.
inline std::vector<Document> TopKScored(std::vector<ScoredDocument> candidates,
                                        std::size_t k, std::size_t dim) {
  Require(k >= 1, "top-k needs k >= 1");
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), RanksBefore);
  std::vector<Document> out;
  out.reserve(k);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(*candidates[i].doc);
  while (out.size() < k) out.push_back(EmptyDocument(dim));
  return out;
}

inline std::vector<Document> TopK(std::span<const Document* const> candidates, std::size_t k,
                                  const QueryRecord& query, const ScoreBins& bins) {
  return TopKScored(ScoreAll(candidates, query, bins), k, query.embedding.size());
}

inline std::vector<Document> TopK(std::span<const Document> candidates, std::size_t k,
                                  const QueryRecord& query, const ScoreBins& bins) {
  std::vector<const Document*> ptrs;
  ptrs.reserve(candidates.size());
  for (const auto& d : candidates) ptrs.push_back(&d);
  return TopK(std::span<const Document* const>(ptrs), k, query, bins);
}

// Includes each document independently with probability gamma. One uniform
// is consumed per document, visiting documents in ascending id order; the
// result is in that order too.
template <UniformSource Noise>
std::vector<const Document*> PoissonSample(std::span<const Document* const> docs, double gamma,
                                           Noise& noise) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw PreconditionError("sampling rate must lie in (0, 1), got " + std::to_string(gamma));
  }
  std::vector<const Document*> ordered(docs.begin(), docs.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const Document* a, const Document* b) { return a->id < b->id; });
  std::vector<const Document*> kept;
  for (const Document* doc : ordered) {
    if (noise.Uniform() < gamma) kept.push_back(doc);
  }
  return kept;
}

// Immutable document store with unique ids and a uniform embedding dimension.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
    dim_ = docs_.empty() ? 0 : docs_.front().embedding.size();
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      const Document& d = docs_[i];
      Require(!d.IsEmpty(), "document id '" + d.id + "' is reserved");
      Require(d.embedding.size() == dim_,
              "document '" + d.id + "' has embedding dimension " +
                  std::to_string(d.embedding.size()) + ", expected " + std::to_string(dim_));
      if (!index_.emplace(d.id, i).second) {
        throw PreconditionError("duplicate document id '" + d.id + "'");
      }
    }
    for (const auto& d : docs_) ptrs_.push_back(&d);
  }
  Corpus(const Corpus& other) : Corpus(other.docs_) {}
  Corpus& operator=(const Corpus& other) {
    if (this != &other) *this = Corpus(other.docs_);
    return *this;
  }
  Corpus(Corpus&&) = default;
  Corpus& operator=(Corpus&&) = default;

  std::span<const Document> documents() const { return docs_; }
  std::span<const Document* const> pointers() const { return ptrs_; }
  std::size_t size() const { return docs_.size(); }
  std::size_t dim() const { return dim_; }

  const Document* Find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &docs_[it->second];
  }

  std::vector<std::string> Ids() const {
    std::vector<std::string> ids;
    ids.reserve(docs_.size());
    for (const auto& d : docs_) ids.push_back(d.id);
    return ids;
  }

 private:
  std::vector<Document> docs_;
  std::vector<const Document*> ptrs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dim_ = 0;
};

// Ids of the true top-k documents for a query, ignoring any budgets.
inline std::vector<std::string> TrueTopIds(const Corpus& corpus, const QueryRecord& query,
                                           std::size_t k, const ScoreBins& bins) {
  std::vector<std::string> ids;
  for (const auto& d : TopK(corpus.pointers(), k, query, bins)) {
    if (!d.IsEmpty()) ids.push_back(d.id);
  }
  return ids;
}

// |retrieved ∩ reference| / |retrieved|, defined as 1 for an empty retrieval.
inline double QueryPrecision(std::span<const std::string> retrieved,
                             std::span<const std::string> reference) {
  if (retrieved.empty()) return 1.0;
  std::unordered_set<std::string_view> ref(reference.begin(), reference.end());
  std::size_t hits = 0;
  for (const auto& id : retrieved) hits += ref.count(id);
  return static_cast<double>(hits) / static_cast<double>(retrieved.size());
}

// Mean per-query precision against the true top-reference_k, in percent.
inline double RetrievalPrecision(const std::vector<std::vector<std::string>>& retrieved,
                                 std::size_t reference_k, const Corpus& corpus,
                                 std::span<const QueryRecord> queries, const ScoreBins& bins) {
  Require(retrieved.size() == queries.size(), "one retrieved set per query is required");
  Require(reference_k >= 1 && reference_k <= corpus.size(),
          "reference k must lie in [1, corpus size]");
  if (queries.empty()) return 100.0;
  double sum = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto reference = TrueTopIds(corpus, queries[q], reference_k, bins);
    sum += QueryPrecision(retrieved[q], reference);
  }
  return 100.0 * sum / static_cast<double>(queries.size());
}

}  // namespace murag

#endif  // MURAG_CORPUS_HPP_
