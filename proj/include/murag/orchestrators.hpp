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

// Multi-query private RAG. MuRAG screens documents with a fixed relevance
// threshold; MuRAG-Ada releases a per-query threshold from noisy prefix sums
// over score bins. Both keep an individual privacy filter per document, so
// the whole run is (M * eps_q)-DP no matter how many queries are answered.
// Naive and Poisson-subsampled composition baselines and two non-private
// references are provided for comparison.

#ifndef MURAG_ORCHESTRATORS_HPP_
#define MURAG_ORCHESTRATORS_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "murag/corpus.hpp"
#include "murag/epsilon.hpp"
#include "murag/errors.hpp"
#include "murag/generator.hpp"
#include "murag/ledger.hpp"
#include "murag/mechanisms.hpp"
#include "murag/metrics.hpp"
#include "murag/noise.hpp"

namespace murag {

struct QueryOutcome {
  std::string query_id;
  std::vector<Token> answer;
  // Released threshold (adaptive runs only).
  std::optional<double> tau;
  // K-th best score among documents eligible for thresholding (adaptive runs).
  std::optional<double> tau_exact;
  // Documents whose contents were used for this query; for filter-based
  // methods this is exactly the set charged for generation.
  std::vector<std::string> retrieved;
  // Non-padding documents handed to the voters, in rank order.
  std::vector<std::string> context;
  std::vector<ChargeRecord> charges;
  std::size_t discoveries = 0;
  int match = 0;
  double precision = 1.0;
};

struct PrivacyClaim {
  double epsilon = 0.0;
  bool unbounded = false;
};

struct RunReport {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<QueryOutcome> queries;
  PrivacyClaim claim;
  double match_accuracy = 0.0;
  // Percent.
  double retrieval_precision = 100.0;
  std::optional<double> mean_tau_abs_error;
  // Not serialized, so that report files stay byte-reproducible.
  double wall_clock_seconds = 0.0;
  std::vector<ChargeRecord> charge_log;
};

// ---------------------------------------------------------------------------
// Privacy claims.

// Per-query budget that makes T Poisson-subsampled eps_q-DP calls compose to
// eps_total: solves T * log(1 + gamma * (e^eps_q - 1)) = eps_total.
inline double AmplifiedEpsPerQuery(double eps_total, std::size_t num_queries, double gamma) {
  Require(eps_total > 0.0 && std::isfinite(eps_total), "total epsilon must be positive");
  Require(num_queries >= 1, "need at least one query");
  Require(gamma > 0.0 && gamma < 1.0, "sampling rate must lie in (0, 1)");
  return std::log1p(std::expm1(eps_total / static_cast<double>(num_queries)) / gamma);
}

inline double SubsampledClaim(double eps_q, std::size_t num_queries, double gamma) {
  return static_cast<double>(num_queries) * std::log1p(gamma * std::expm1(eps_q));
}

// ---------------------------------------------------------------------------
// Configurations.

struct MuragConfig {
  // Fixed relevance threshold; -inf admits every document.
  double tau = 95.0;
  int max_retrievals = 1;  // M
  EpsilonAmount eps_q = Eps(10.0);
  // eps_total is replaced by eps_q for each call.
  DpRagParams dp;
  ScoreBins bins;
  // Offer earlier (query, answer) pairs as free context in padding slots.
  bool reuse_history = false;

  std::size_t k() const { return dp.RetrievalSize(); }
  void Validate() const {
    Require(max_retrievals >= 1, "M must be at least 1");
    Require(!eps_q.is_zero(), "eps_q must be positive");
    Require(tau == -std::numeric_limits<double>::infinity() ||
                (tau >= bins.lo() && tau <= bins.hi()),
            "tau must lie within the score range");
    DpRagParams call = dp;
    call.eps_total = eps_q;
    call.Validate();
  }
};

struct MuragAdaConfig {
  ScoreBins bins;
  int max_retrievals = 1;  // M
  EpsilonAmount eps_thr = Eps(1.0);
  EpsilonAmount eps_rag = Eps(9.0);
  // eps_total is replaced by eps_rag for each call.
  DpRagParams dp;
  bool reuse_history = false;

  EpsilonAmount eps_q() const { return eps_thr + eps_rag; }
  std::size_t k() const { return dp.RetrievalSize(); }
  void Validate() const {
    Require(max_retrievals >= 1, "M must be at least 1");
    Require(!eps_thr.is_zero(), "eps_thr must be positive");
    Require(!eps_rag.is_zero(), "eps_rag must be positive");
    DpRagParams call = dp;
    call.eps_total = eps_rag;
    call.Validate();
  }
};

namespace orchestrators_internal {

inline std::vector<std::string> IdsOf(std::span<const ScoredDocument> docs) {
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& s : docs) ids.push_back(s.doc->id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline std::vector<std::string> ContextIds(std::span<const Document> docs) {
  std::vector<std::string> ids;
  for (const auto& d : docs) {
    if (!d.IsEmpty()) ids.push_back(d.id);
  }
  return ids;
}

inline std::vector<ChargeRecord> Charges(std::span<const std::string> ids, EpsilonAmount amount,
                                         std::size_t query_index) {
  std::vector<ChargeRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back({query_index, id, amount});
  return out;
}

// Answers already released are public; turning them into documents is
// post-processing and costs no budget.
class AnswerHistory {
 public:
  void Record(const QueryRecord& query, std::span<const Token> answer) {
    std::vector<Token> body(answer.begin(), answer.end());
    while (!body.empty() && body.back() == kEos) body.pop_back();
    if (body.empty()) return;
    Document doc;
    doc.id = "history:" + query.id;
    doc.tokens = body;
    doc.embedding = query.embedding;
    doc.fact = Fact{query.FactKey(), body};
    docs_.push_back(std::move(doc));
  }

  // Replaces padding slots with the most relevant history documents whose
  // score clears the threshold (strictly, when `strict`).
  void FillPadding(std::vector<Document>& docs, const QueryRecord& query, const ScoreBins& bins,
                   double threshold, bool strict) const {
    std::vector<ScoredDocument> eligible;
    for (const auto& d : docs_) {
      const double s = Relevance(d, query, bins);
      if (strict ? s > threshold : s >= threshold) eligible.push_back({&d, s});
    }
    std::sort(eligible.begin(), eligible.end(), RanksBefore);
    std::size_t next = 0;
    for (auto& slot : docs) {
      if (next >= eligible.size()) break;
      if (slot.IsEmpty()) slot = *eligible[next++].doc;
    }
  }

 private:
  std::vector<Document> docs_;
};

inline void Finalize(RunReport& report, const Corpus& corpus,
                     std::span<const QueryRecord> queries, const ScoreBins& bins,
                     std::size_t reference_k) {
  const std::size_t ref_k = std::min(std::max<std::size_t>(reference_k, 1), corpus.size());
  double match_sum = 0.0;
  double precision_sum = 0.0;
  double tau_err_sum = 0.0;
  std::size_t tau_count = 0;
  for (std::size_t i = 0; i < report.queries.size(); ++i) {
    QueryOutcome& out = report.queries[i];
    out.match = MatchAccuracy(out.answer, queries[i].answers);
    const auto reference = TrueTopIds(corpus, queries[i], ref_k, bins);
    out.precision = QueryPrecision(out.retrieved, reference);
    match_sum += out.match;
    precision_sum += out.precision;
    if (out.tau && out.tau_exact) {
      tau_err_sum += std::fabs(*out.tau - *out.tau_exact);
      ++tau_count;
    }
  }
  const double n = static_cast<double>(report.queries.size());
  report.match_accuracy = report.queries.empty() ? 0.0 : match_sum / n;
  report.retrieval_precision = report.queries.empty() ? 100.0 : 100.0 * precision_sum / n;
  if (tau_count > 0) report.mean_tau_abs_error = tau_err_sum / static_cast<double>(tau_count);
}

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace orchestrators_internal

// ---------------------------------------------------------------------------
// MuRAG: fixed threshold plus individual filters.

class MuragSession {
 public:
  MuragSession(const Corpus& corpus, MuragConfig config, TokenGenerator& generator)
      : corpus_(corpus),
        config_((config.Validate(), std::move(config))),
        generator_(generator),
        ledger_(corpus.Ids(), config_.max_retrievals, config_.eps_q) {}

  template <UniformSource Noise>
  QueryOutcome Answer(const QueryRecord& query, Noise& noise) {
    using namespace orchestrators_internal;
    const std::size_t t = next_index_++;
    QueryOutcome out;
    out.query_id = query.id;

    // A_t: documents that can still afford eps_q; D_t: those above tau.
    std::vector<ScoredDocument> passing;
    for (const Document* doc : corpus_.pointers()) {
      if (!ledger_.Admits(doc->id, config_.eps_q)) continue;
      const double score = Relevance(*doc, query, config_.bins);
      if (score > config_.tau) passing.push_back({doc, score});
    }
    out.retrieved = IdsOf(passing);
    ledger_.Charge(out.retrieved, config_.eps_q, t);
    out.charges = Charges(out.retrieved, config_.eps_q, t);

    std::vector<Document> docs = TopKScored(std::move(passing), config_.k(), corpus_.dim());
    if (config_.reuse_history) {
      history_.FillPadding(docs, query, config_.bins, config_.tau, /*strict=*/true);
    }
    out.context = ContextIds(docs);

    DpRagParams call = config_.dp;
    call.eps_total = config_.eps_q;
    DpRagResult result = DpRagAnswer(query, docs, generator_, call, noise);
    out.answer = std::move(result.tokens);
    out.discoveries = result.discoveries;
    if (config_.reuse_history) history_.Record(query, out.answer);
    return out;
  }

  const BudgetLedger& ledger() const { return ledger_; }
  const MuragConfig& config() const { return config_; }

 private:
  const Corpus& corpus_;
  MuragConfig config_;
  TokenGenerator& generator_;
  BudgetLedger ledger_;
  orchestrators_internal::AnswerHistory history_;
  std::size_t next_index_ = 0;
};

// ---------------------------------------------------------------------------
// MuRAG-Ada: per-query threshold from noisy prefix sums over score bins.

class MuragAdaSession {
 public:
  MuragAdaSession(const Corpus& corpus, MuragAdaConfig config, TokenGenerator& generator)
      : corpus_(corpus),
        config_((config.Validate(), std::move(config))),
        generator_(generator),
        ledger_(corpus.Ids(), config_.max_retrievals, config_.eps_q()) {}

  template <UniformSource Noise>
  QueryOutcome Answer(const QueryRecord& query, Noise& noise) {
    using namespace orchestrators_internal;
    const std::size_t t = next_index_++;
    const std::size_t k = config_.k();
    const ScoreBins& bins = config_.bins;
    QueryOutcome out;
    out.query_id = query.id;

    std::vector<std::vector<ScoredDocument>> by_bin(bins.count());
    std::vector<double> eligible_scores;
    for (const Document* doc : corpus_.pointers()) {
      const double score = Relevance(*doc, query, bins);
      by_bin[bins.IndexOf(score)].push_back({doc, score});
      if (ledger_.Admits(doc->id, config_.eps_thr)) eligible_scores.push_back(score);
    }
    if (eligible_scores.size() >= k) {
      std::nth_element(eligible_scores.begin(), eligible_scores.begin() + (k - 1),
                       eligible_scores.end(), std::greater<>());
      out.tau_exact = eligible_scores[k - 1];
    } else {
      out.tau_exact = bins.lo();
    }

    // Step 1: scan bins from the top, adding |A_t^(i)| + Lap(1/eps_thr) to
    // the running sum, until it reaches k.
    const double thr_scale = 1.0 / config_.eps_thr.value();
    double noisy_sum = 0.0;
    std::vector<ScoredDocument> accumulated;
    for (std::size_t i = bins.count(); i-- > 0;) {
      std::vector<ScoredDocument> in_bin;
      for (const auto& s : by_bin[i]) {
        if (ledger_.Admits(s.doc->id, config_.eps_thr)) in_bin.push_back(s);
      }
      noisy_sum += static_cast<double>(in_bin.size()) + SampleLaplace(thr_scale, noise);
      const auto ids = IdsOf(in_bin);
      ledger_.Charge(ids, config_.eps_thr, t);
      const auto charged = Charges(ids, config_.eps_thr, t);
      out.charges.insert(out.charges.end(), charged.begin(), charged.end());
      accumulated.insert(accumulated.end(), in_bin.begin(), in_bin.end());
      if (noisy_sum >= static_cast<double>(k)) {
        out.tau = bins.Edge(i);
        break;
      }
    }
    // Bins exhausted without reaching k: release the lowest edge and go on
    // with everything accumulated.
    if (!out.tau) out.tau = bins.lo();

    // Step 2: DP-RAG on the accumulated documents that can afford eps_rag.
    std::vector<ScoredDocument> usable;
    for (const auto& s : accumulated) {
      if (ledger_.Admits(s.doc->id, config_.eps_rag)) usable.push_back(s);
    }
    out.retrieved = IdsOf(usable);
    std::vector<Document> docs = TopKScored(usable, k, corpus_.dim());
    if (config_.reuse_history) {
      history_.FillPadding(docs, query, bins, *out.tau, /*strict=*/false);
    }
    out.context = ContextIds(docs);

    DpRagParams call = config_.dp;
    call.eps_total = config_.eps_rag;
    DpRagResult result = DpRagAnswer(query, docs, generator_, call, noise, out.tau);
    ledger_.Charge(out.retrieved, config_.eps_rag, t);
    const auto charged = Charges(out.retrieved, config_.eps_rag, t);
    out.charges.insert(out.charges.end(), charged.begin(), charged.end());

    out.answer = std::move(result.tokens);
    out.discoveries = result.discoveries;
    if (config_.reuse_history) history_.Record(query, out.answer);
    return out;
  }

  const BudgetLedger& ledger() const { return ledger_; }
  const MuragAdaConfig& config() const { return config_; }

 private:
  const Corpus& corpus_;
  MuragAdaConfig config_;
  TokenGenerator& generator_;
  BudgetLedger ledger_;
  orchestrators_internal::AnswerHistory history_;
  std::size_t next_index_ = 0;
};

// ---------------------------------------------------------------------------
// Whole runs.

template <UniformSource Noise>
RunReport RunMurag(std::span<const QueryRecord> queries, const Corpus& corpus,
                   const MuragConfig& config, TokenGenerator& generator, Noise& noise) {
  orchestrators_internal::Stopwatch clock;
  MuragSession session(corpus, config, generator);
  RunReport report;
  report.method = "murag";
  for (const auto& q : queries) report.queries.push_back(session.Answer(q, noise));
  report.claim = {session.ledger().TotalPrivacyClaim().value(), false};
  report.charge_log = session.ledger().charge_log();
  orchestrators_internal::Finalize(report, corpus, queries, config.bins, config.k());
  report.wall_clock_seconds = clock.Seconds();
  return report;
}

template <UniformSource Noise>
RunReport RunMuragAda(std::span<const QueryRecord> queries, const Corpus& corpus,
                      const MuragAdaConfig& config, TokenGenerator& generator, Noise& noise) {
  orchestrators_internal::Stopwatch clock;
  MuragAdaSession session(corpus, config, generator);
  RunReport report;
  report.method = "murag-ada";
  for (const auto& q : queries) report.queries.push_back(session.Answer(q, noise));
  report.claim = {session.ledger().TotalPrivacyClaim().value(), false};
  report.charge_log = session.ledger().charge_log();
  orchestrators_internal::Finalize(report, corpus, queries, config.bins, config.k());
  report.wall_clock_seconds = clock.Seconds();
  return report;
}

// Independent DP-RAG per query over the whole corpus; basic composition.
template <UniformSource Noise>
RunReport RunNaiveMulti(std::span<const QueryRecord> queries, const Corpus& corpus,
                        EpsilonAmount eps_q, DpRagParams dp, TokenGenerator& generator,
                        Noise& noise, const ScoreBins& bins = {}) {
  orchestrators_internal::Stopwatch clock;
  dp.eps_total = eps_q;
  dp.Validate();
  RunReport report;
  report.method = "naive";
  for (const auto& q : queries) {
    QueryOutcome out;
    out.query_id = q.id;
    const auto docs = TopK(corpus.pointers(), dp.RetrievalSize(), q, bins);
    out.context = orchestrators_internal::ContextIds(docs);
    out.retrieved = out.context;
    auto result = DpRagAnswer(q, docs, generator, dp, noise);
    out.answer = std::move(result.tokens);
    out.discoveries = result.discoveries;
    report.queries.push_back(std::move(out));
  }
  report.claim = {(eps_q * static_cast<std::int64_t>(queries.size())).value(), false};
  orchestrators_internal::Finalize(report, corpus, queries, bins, dp.RetrievalSize());
  report.wall_clock_seconds = clock.Seconds();
  return report;
}

// Poisson-subsample the corpus per query, then DP-RAG on the subsample.
// eps_q is real-valued so that the claim can be matched to an amplified
// budget exactly; DP-RAG itself runs on eps_q rounded down to micro-eps.
template <UniformSource Noise>
RunReport RunSubsampleMulti(std::span<const QueryRecord> queries, const Corpus& corpus,
                            double gamma, double eps_q, DpRagParams dp,
                            TokenGenerator& generator, Noise& noise,
                            const ScoreBins& bins = {}) {
  orchestrators_internal::Stopwatch clock;
  Require(gamma > 0.0 && gamma < 1.0, "sampling rate must lie in (0, 1)");
  Require(eps_q > 0.0 && std::isfinite(eps_q), "eps_q must be positive");
  dp.eps_total = EpsilonAmount::FromMicro(static_cast<std::int64_t>(std::floor(eps_q * 1e6)));
  dp.Validate();
  RunReport report;
  report.method = "subsample";
  for (const auto& q : queries) {
    QueryOutcome out;
    out.query_id = q.id;
    const auto sample = PoissonSample(corpus.pointers(), gamma, noise);
    const auto docs = TopK(std::span<const Document* const>(sample), dp.RetrievalSize(), q, bins);
    out.context = orchestrators_internal::ContextIds(docs);
    out.retrieved = out.context;
    auto result = DpRagAnswer(q, docs, generator, dp, noise);
    out.answer = std::move(result.tokens);
    out.discoveries = result.discoveries;
    report.queries.push_back(std::move(out));
  }
  report.claim = {SubsampledClaim(eps_q, queries.size(), gamma), false};
  orchestrators_internal::Finalize(report, corpus, queries, bins, dp.RetrievalSize());
  report.wall_clock_seconds = clock.Seconds();
  return report;
}

// Greedy generation with the true top-k as context (k = 0 means no context).
inline RunReport RunNonPrivateRag(std::span<const QueryRecord> queries, const Corpus& corpus,
                                  std::size_t k, TokenGenerator& generator,
                                  std::size_t max_tokens = 8, const ScoreBins& bins = {},
                                  std::size_t reference_k = 0) {
  orchestrators_internal::Stopwatch clock;
  RunReport report;
  report.method = k == 0 ? "non-rag" : "nonprivate-rag";
  for (const auto& q : queries) {
    QueryOutcome out;
    out.query_id = q.id;
    std::vector<Document> context;
    if (k > 0) {
      for (auto& d : TopK(corpus.pointers(), k, q, bins)) {
        if (!d.IsEmpty()) context.push_back(std::move(d));
      }
    }
    out.context = orchestrators_internal::ContextIds(context);
    out.retrieved = out.context;
    out.answer = GreedyAnswer(q, context, generator, max_tokens);
    report.queries.push_back(std::move(out));
  }
  report.claim = {std::numeric_limits<double>::infinity(), true};
  orchestrators_internal::Finalize(report, corpus, queries, bins,
                                   reference_k > 0 ? reference_k : std::max<std::size_t>(k, 1));
  report.wall_clock_seconds = clock.Seconds();
  return report;
}

inline RunReport RunNonRag(std::span<const QueryRecord> queries, const Corpus& corpus,
                           TokenGenerator& generator, std::size_t max_tokens = 8,
                           const ScoreBins& bins = {}) {
  return RunNonPrivateRag(queries, corpus, 0, generator, max_tokens, bins);
}

}  // namespace murag

#endif  // MURAG_ORCHESTRATORS_HPP_
