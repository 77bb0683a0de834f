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

// Desk-scale interrogation (membership inference) attack. Each candidate
// document carries a unique planted fact; the adversary asks m probes whose
// embeddings sit next to the candidate and scores membership as the fraction
// of probes answered correctly.

#ifndef MURAG_ATTACK_HPP_
#define MURAG_ATTACK_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "murag/corpus.hpp"
#include "murag/errors.hpp"
#include "murag/generator.hpp"
#include "murag/metrics.hpp"
#include "murag/noise.hpp"
#include "murag/orchestrators.hpp"
#include "murag/workload.hpp"

namespace murag {

struct Probe {
  QueryRecord query;
  std::vector<Token> expected;
};

struct ProbeSet {
  std::string target_id;
  std::vector<Probe> probes;
};

// Probes share the target's fact key, so only the target can answer them.
inline ProbeSet BuildProbeSet(const Document& doc, std::size_t m, NoiseSource& noise,
                              double cosine = 0.98) {
  Require(m >= 1, "probe count must be positive");
  Require(doc.fact.has_value(), "probe target '" + doc.id + "' has no planted fact");
  Require(cosine > 0.0 && cosine <= 1.0, "probe cosine must lie in (0, 1]");
  ProbeSet set;
  set.target_id = doc.id;
  for (std::size_t i = 0; i < m; ++i) {
    Probe p;
    p.query.id = doc.id + "/probe-" + std::to_string(i);
    p.query.tokens = doc.tokens;
    p.query.embedding = workload_internal::AtCosine(doc.embedding, cosine, noise);
    p.query.answers = {doc.fact->answer};
    p.query.fact_key = doc.fact->key;
    p.expected = doc.fact->answer;
    set.probes.push_back(std::move(p));
  }
  return set;
}

// `answer` is the system under attack: QueryRecord -> token sequence. Probes
// go through it like any other query and pay for retrieval the same way.
template <typename AnswerFn>
double MembershipScore(const ProbeSet& probes, AnswerFn&& answer) {
  Require(!probes.probes.empty(), "empty probe set");
  std::size_t hits = 0;
  for (const Probe& p : probes.probes) {
    const std::vector<Token> out = answer(p.query);
    hits += static_cast<std::size_t>(MatchAccuracy(out, {p.expected}));
  }
  return static_cast<double>(hits) / static_cast<double>(probes.probes.size());
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Threshold sweep from +inf down over the distinct scores. Tied in/out scores
// move both rates at once, so the trapezoid gives them half credit and the
// AUC equals the normalized Mann-Whitney statistic. The area is accumulated
// in integers to make that equality exact.
inline RocCurve RocAuc(std::span<const double> in_scores, std::span<const double> out_scores) {
  Require(!in_scores.empty() && !out_scores.empty(), "ROC needs non-empty score lists");
  std::vector<std::pair<double, int>> all;
  for (double s : in_scores) all.push_back({s, 1});
  for (double s : out_scores) all.push_back({s, 0});
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  const auto n_in = static_cast<std::uint64_t>(in_scores.size());
  const auto n_out = static_cast<std::uint64_t>(out_scores.size());
  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t twice_area = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::uint64_t dtp = 0;
    std::uint64_t dfp = 0;
    const double s = all[i].first;
    for (; i < all.size() && all[i].first == s; ++i) (all[i].second ? dtp : dfp) += 1;
    twice_area += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(n_out),
                          static_cast<double>(tp) / static_cast<double>(n_in)});
  }
  roc.auc = static_cast<double>(twice_area) / static_cast<double>(2 * n_in * n_out);
  return roc;
}

// ---------------------------------------------------------------------------
// Simulation.

enum class AttackSystem { kNonPrivateRag, kMurag, kMuragAda };

struct AttackConfig {
  std::size_t members = 50;
  std::size_t background = 450;
  std::size_t dim = 128;
  std::size_t vocab_size = 256;
  std::size_t max_answer_len = 5;
  std::size_t probes = 30;
  double probe_cosine = 0.98;
  AttackSystem system = AttackSystem::kMurag;
  MuragConfig murag;
  MuragAdaConfig ada;
  // Context size and decoding length for the non-private system.
  std::size_t k = 30;
  std::size_t max_tokens = 8;
  StubConfig stub = {0.0, 1, 0, 256};
  // One live system (and ledger) for every candidate instead of a fresh one
  // per candidate.
  bool shared_ledger = false;
  std::uint64_t seed = 1;
};

// Members and non-members are drawn from the same generator and split by a
// random permutation; only members enter the corpus.
struct AttackPopulation {
  Corpus corpus;
  std::vector<Document> candidates;
  std::vector<bool> member;
};

inline constexpr std::uint64_t kAttackStream = 0x41545443;  // "ATTC"

inline AttackPopulation GenerateAttackPopulation(const AttackConfig& config) {
  using namespace workload_internal;
  Require(config.members >= 1, "need at least one member");
  Require(config.dim >= 2, "dim must be at least 2");
  Require(config.vocab_size >= 3, "vocab_size must be at least 3");
  Require(config.max_answer_len >= 1, "max_answer_len must be positive");
  NoiseSource noise(config.seed, kAttackStream);
  const std::size_t n = 2 * config.members;
  std::vector<Document> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cand-%04zu", i);
    Document& d = candidates[i];
    d.id = buf;
    d.embedding = RandomUnit(config.dim, noise);
    const std::size_t len = 1 + noise.Bits() % config.max_answer_len;
    d.fact = Fact{std::string("fact-") + buf, RandomTokens(len, config.vocab_size, noise)};
    d.tokens = RandomTokens(kDocTokens, config.vocab_size, noise);
    d.tokens.insert(d.tokens.end(), d.fact->answer.begin(), d.fact->answer.end());
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[noise.Bits() % i]);
  std::vector<bool> member(n, false);
  for (std::size_t i = 0; i < config.members; ++i) member[order[i]] = true;

  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    if (member[i]) docs.push_back(candidates[i]);
  }
  for (std::size_t i = 0; i < config.background; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "bg-%06zu", i);
    Document d;
    d.id = buf;
    d.embedding = RandomUnit(config.dim, noise);
    d.tokens = RandomTokens(kDocTokens, config.vocab_size, noise);
    docs.push_back(std::move(d));
  }
  return {Corpus(std::move(docs)), std::move(candidates), std::move(member)};
}

struct CandidateScore {
  std::string id;
  bool member = false;
  double score = 0.0;
};

struct AttackReport {
  std::vector<CandidateScore> candidates;
  RocCurve roc;
};

namespace attack_internal {

// A live system that answers queries one at a time.
class System {
 public:
  System(const AttackConfig& config, const Corpus& corpus, TokenGenerator& generator)
      : config_(config), corpus_(corpus), generator_(generator) {
    if (config.system == AttackSystem::kMurag) {
      murag_ = std::make_unique<MuragSession>(corpus, config.murag, generator);
    } else if (config.system == AttackSystem::kMuragAda) {
      ada_ = std::make_unique<MuragAdaSession>(corpus, config.ada, generator);
    }
  }

  std::vector<Token> Answer(const QueryRecord& q, NoiseSource& noise) {
    if (murag_) return murag_->Answer(q, noise).answer;
    if (ada_) return ada_->Answer(q, noise).answer;
    std::vector<Document> context;
    for (auto& d : TopK(corpus_.pointers(), config_.k, q, config_.murag.bins)) {
      if (!d.IsEmpty()) context.push_back(std::move(d));
    }
    return GreedyAnswer(q, context, generator_, config_.max_tokens);
  }

 private:
  const AttackConfig& config_;
  const Corpus& corpus_;
  TokenGenerator& generator_;
  std::unique_ptr<MuragSession> murag_;
  std::unique_ptr<MuragAdaSession> ada_;
};

}  // namespace attack_internal

inline AttackReport RunAttack(const AttackConfig& config, bool noiseless = false) {
  const AttackPopulation pop = GenerateAttackPopulation(config);
  StubGenerator generator(config.stub);
  NoiseSource root(config.seed, kAttackStream + 1, noiseless);
  NoiseSource shared_noise = root.Substream(0);
  std::unique_ptr<attack_internal::System> shared;
  if (config.shared_ledger) {
    shared = std::make_unique<attack_internal::System>(config, pop.corpus, generator);
  }

  AttackReport report;
  std::vector<double> in_scores;
  std::vector<double> out_scores;
  for (std::size_t i = 0; i < pop.candidates.size(); ++i) {
    NoiseSource probe_noise = root.Substream(2 * i + 1);
    const ProbeSet probes =
        BuildProbeSet(pop.candidates[i], config.probes, probe_noise, config.probe_cosine);
    double score = 0.0;
    if (shared) {
      score = MembershipScore(
          probes, [&](const QueryRecord& q) { return shared->Answer(q, shared_noise); });
    } else {
      attack_internal::System system(config, pop.corpus, generator);
      NoiseSource noise = root.Substream(2 * i + 2);
      score = MembershipScore(probes,
                              [&](const QueryRecord& q) { return system.Answer(q, noise); });
    }
    report.candidates.push_back({pop.candidates[i].id, pop.member[i], score});
    (pop.member[i] ? in_scores : out_scores).push_back(score);
  }
  report.roc = RocAuc(in_scores, out_scores);
  return report;
}

}  // namespace murag

#endif  // MURAG_ATTACK_HPP_
