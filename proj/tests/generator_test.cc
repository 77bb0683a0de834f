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

#include "murag/generator.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "murag/corpus.hpp"
#include "murag/epsilon.hpp"
#include "murag/errors.hpp"
#include "murag/mechanisms.hpp"
#include "murag/noise.hpp"

namespace murag {
namespace {

QueryRecord Query(const std::string& id, std::vector<Token> answer) {
  QueryRecord q;
  q.id = id;
  q.tokens = {9, 9};
  q.embedding = {1.0};
  q.answers = {std::move(answer)};
  return q;
}

Document FactDoc(const std::string& id, const std::string& key, std::vector<Token> answer) {
  Document d;
  d.id = id;
  d.embedding = {1.0};
  d.fact = Fact{key, std::move(answer)};
  return d;
}

Document PlainDoc(const std::string& id) {
  Document d;
  d.id = id;
  d.embedding = {1.0};
  return d;
}

TEST(StubGeneratorTest, ContinuesMatchingFact) {
  StubGenerator gen(StubConfig{0.0, 1, 0, 16});
  const QueryRecord q = Query("q1", {7, 8});
  const std::vector<Document> ctx = {PlainDoc("x"), FactDoc("d", "q1", {7, 8})};
  const std::vector<Token> none;
  EXPECT_EQ(gen.NextToken(q, ctx, none), 7);
  const std::vector<Token> p1 = {7};
  EXPECT_EQ(gen.NextToken(q, ctx, p1), 8);
  const std::vector<Token> p2 = {7, 8};
  EXPECT_EQ(gen.NextToken(q, ctx, p2), kEos);
  // A prefix that left the fact gets EOS.
  const std::vector<Token> off = {3};
  EXPECT_EQ(gen.NextToken(q, ctx, off), kEos);
}

TEST(StubGeneratorTest, FactKeyOverridesQueryId) {
  StubGenerator gen(StubConfig{0.0, 1, 0, 16});
  QueryRecord q = Query("probe-1", {7});
  q.fact_key = "fact-a";
  const std::vector<Document> ctx = {FactDoc("d", "fact-a", {5})};
  EXPECT_EQ(gen.NextToken(q, ctx, {}), 5);
  const std::vector<Document> other = {FactDoc("d", "probe-1", {5})};
  EXPECT_EQ(gen.NextToken(q, other, {}), 1);
}

TEST(StubGeneratorTest, EmptyContextFollowsPBase) {
  const QueryRecord q = Query("q1", {7});
  StubGenerator never(StubConfig{0.0, 1, 0, 16});
  EXPECT_EQ(never.NextToken(q, {}, {}), 1);
  const std::vector<Token> p = {1};
  EXPECT_EQ(never.NextToken(q, {}, p), kEos);
  StubGenerator always(StubConfig{1.0, 1, 0, 16});
  EXPECT_EQ(always.NextToken(q, {}, {}), 7);
}

TEST(StubGeneratorTest, PBaseFractionIsDeterministic) {
  StubGenerator gen(StubConfig{0.3, 1, 42, 16});
  int knows = 0;
  for (int i = 0; i < 10000; ++i) {
    const QueryRecord q = Query("q-" + std::to_string(i), {7});
    const bool k = gen.Knows(q);
    EXPECT_EQ(k, gen.Knows(q));
    knows += k ? 1 : 0;
  }
  EXPECT_NEAR(knows / 10000.0, 0.3, 0.02);
}

TEST(StubGeneratorTest, RejectsBadConfig) {
  EXPECT_THROW(StubGenerator(StubConfig{1.5, 1, 0, 16}), PreconditionError);
  EXPECT_THROW(StubGenerator(StubConfig{0.5, 0, 0, 16}), PreconditionError);
  EXPECT_THROW(StubGenerator(StubConfig{0.5, 16, 0, 16}), PreconditionError);
}

DpRagParams SmallParams(std::size_t m) {
  DpRagParams p;
  p.voters = m;
  p.docs_per_voter = 1;
  p.threshold = static_cast<double>(m) / 2.0;
  p.eps_total = Eps(10.0);
  p.eps_token = Eps(2.0);
  p.max_tokens = 8;
  return p;
}

TEST(DpRagTest, NoiselessDiscoveryEmitsArgmax) {
  StubGenerator gen(StubConfig{0.0, 1, 0, 16});
  const QueryRecord q = Query("q1", {5});
  std::vector<Document> docs;
  for (int i = 0; i < 4; ++i) docs.push_back(FactDoc("d" + std::to_string(i), "q1", {5}));
  NoiseSource noise(0, 0, /*noiseless=*/true);
  const DpRagResult r = DpRagAnswer(q, docs, gen, SmallParams(4), noise);
  EXPECT_EQ(r.tokens, (std::vector<Token>{5, kEos}));
  EXPECT_EQ(r.discoveries, 1u);
  EXPECT_EQ(r.threshold_draws, 2u);
}

TEST(DpRagTest, NoiselessKeepsBaselineWhenVotersAgree) {
  StubGenerator gen(StubConfig{1.0, 1, 0, 16});
  const QueryRecord q = Query("q1", {5});
  std::vector<Document> docs;
  for (int i = 0; i < 4; ++i) docs.push_back(FactDoc("d" + std::to_string(i), "q1", {5}));
  NoiseSource noise(0, 0, /*noiseless=*/true);
  const DpRagResult r = DpRagAnswer(q, docs, gen, SmallParams(4), noise);
  EXPECT_EQ(r.tokens, (std::vector<Token>{5, kEos}));
  EXPECT_EQ(r.discoveries, 0u);
  EXPECT_EQ(r.threshold_draws, 1u);
}

// Votes and baseline are drawn from a per-call hash so every step is a coin
// flip between discovery and baseline.
class RandomGenerator final : public TokenGenerator {
 public:
  explicit RandomGenerator(std::uint64_t salt) : salt_(salt) {}
  Token NextToken(const QueryRecord&, std::span<const Document> context,
                  std::span<const Token> prefix) override {
    std::uint64_t h = salt_ + prefix.size() * 1000003;
    for (const auto& d : context) h = SplitMix64(h ^ Fnv1a64(d.id));
    return static_cast<Token>(1 + SplitMix64(h) % 5);
  }
  std::size_t vocab_size() const override { return 6; }

 private:
  std::uint64_t salt_;
};

TEST(DpRagTest, DiscoveriesNeverExceedBudget) {
  const QueryRecord q = Query("q1", {5});
  std::vector<Document> docs;
  for (int i = 0; i < 6; ++i) docs.push_back(PlainDoc("d" + std::to_string(i)));
  DpRagParams p = SmallParams(6);
  p.max_tokens = 40;
  std::size_t max_seen = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    RandomGenerator gen(seed);
    NoiseSource noise(seed, 3);
    const DpRagResult r = DpRagAnswer(q, docs, gen, p, noise);
    ASSERT_LE(r.discoveries, 5u);
    ASSERT_EQ(r.threshold_draws, r.discoveries + 1);
    ASSERT_LE(r.tokens.size(), p.max_tokens);
    max_seen = std::max(max_seen, r.discoveries);
  }
  EXPECT_EQ(max_seen, 5u);
}

// Records every context passed to the generator.
class RecordingGenerator final : public TokenGenerator {
 public:
  Token NextToken(const QueryRecord&, std::span<const Document> context,
                  std::span<const Token> prefix) override {
    sizes.push_back(context.size());
    if (!prefix.empty()) return kEos;
    return context.empty() ? 3 : 4;
  }
  std::size_t vocab_size() const override { return 8; }
  std::vector<std::size_t> sizes;
};

TEST(DpRagTest, PaddingChunkVotesLikeBaseline) {
  const QueryRecord q = Query("q1", {5});
  DpRagParams p = SmallParams(3);
  p.docs_per_voter = 2;
  p.threshold = 0.5;
  // Voter 0: real docs; voter 1: half padding; voter 2: all padding.
  const std::vector<Document> docs = {PlainDoc("a"),      PlainDoc("b"),      PlainDoc("c"),
                                      EmptyDocument(1), EmptyDocument(1), EmptyDocument(1)};
  RecordingGenerator gen;
  NoiseSource noise(0, 0, /*noiseless=*/true);
  const DpRagResult r = DpRagAnswer(q, docs, gen, p, noise);
  ASSERT_GE(gen.sizes.size(), 4u);
  EXPECT_EQ(gen.sizes[0], 0u);  // baseline
  EXPECT_EQ(gen.sizes[1], 2u);
  EXPECT_EQ(gen.sizes[2], 1u);
  EXPECT_EQ(gen.sizes[3], 0u);
  // Baseline 3 gets the padded voter's vote: s = 1 > 0.5, so no discovery.
  EXPECT_EQ(r.tokens.front(), 3);
  EXPECT_EQ(r.discoveries, 0u);
}

TEST(DpRagTest, AllPaddingNeverDiscovers) {
  StubGenerator gen(StubConfig{0.0, 1, 0, 16});
  const QueryRecord q = Query("q1", {5});
  const std::vector<Document> docs(4, EmptyDocument(1));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    NoiseSource noiseless(seed, 0, true);
    EXPECT_EQ(DpRagAnswer(q, docs, gen, SmallParams(4), noiseless).discoveries, 0u);
  }
}

TEST(DpRagTest, NeighbouringChunksMoveSupportByAtMostOne) {
  StubGenerator gen(StubConfig{0.0, 1, 0, 16});
  const QueryRecord q = Query("q1", {5});
  const std::size_t m = 5;
  std::vector<Document> base;
  for (std::size_t i = 0; i < m; ++i) {
    base.push_back(i % 2 ? FactDoc("f" + std::to_string(i), "q1", {5})
                         : PlainDoc("p" + std::to_string(i)));
  }
  auto histogram = [&](const std::vector<Document>& docs) {
    std::vector<Token> votes;
    for (const auto& d : docs) votes.push_back(gen.NextToken(q, std::span(&d, 1), {}));
    return CountTokens(votes, 16);
  };
  const Token b = gen.NextToken(q, {}, {});
  const Histogram h0 = histogram(base);
  const std::vector<Document> replacements = {PlainDoc("z"), FactDoc("y", "q1", {5}),
                                              FactDoc("w", "q1", {9}), EmptyDocument(1)};
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& rep : replacements) {
      std::vector<Document> nb = base;
      nb[i] = rep;
      const Histogram h1 = histogram(nb);
      std::int64_t l1 = 0;
      for (std::size_t j = 0; j < 16; ++j) {
        l1 += std::llabs(static_cast<std::int64_t>(h0[j]) - static_cast<std::int64_t>(h1[j]));
      }
      EXPECT_LE(l1, 2);
      EXPECT_LE(std::llabs(static_cast<std::int64_t>(h0[b]) - static_cast<std::int64_t>(h1[b])),
                1);
    }
  }
}

TEST(DpRagTest, WrongDocumentCountThrows) {
  StubGenerator gen;
  const QueryRecord q = Query("q1", {5});
  const std::vector<Document> docs(3, PlainDoc("a"));
  NoiseSource noise(1);
  EXPECT_THROW(DpRagAnswer(q, docs, gen, SmallParams(4), noise), PreconditionError);
}

TEST(DpRagTest, InvalidParamsThrow) {
  StubGenerator gen;
  const QueryRecord q = Query("q1", {5});
  const std::vector<Document> docs(2, PlainDoc("a"));
  NoiseSource noise(1);
  DpRagParams p = SmallParams(2);
  p.eps_token = Eps(20.0);
  EXPECT_THROW(DpRagAnswer(q, docs, gen, p, noise), PreconditionError);
  p = SmallParams(2);
  p.eps_token = EpsilonAmount::FromMicro(3);
  EXPECT_THROW(DpRagAnswer(q, docs, gen, p, noise), PreconditionError);
  p = SmallParams(2);
  p.max_tokens = 0;
  EXPECT_THROW(DpRagAnswer(q, docs, gen, p, noise), PreconditionError);
}

TEST(DpRagTest, TauHintIsRecordedOnly) {
  StubGenerator gen(StubConfig{0.0, 1, 0, 16});
  const QueryRecord q = Query("q1", {5});
  const std::vector<Document> docs(4, FactDoc("d", "q1", {5}));
  NoiseSource a(9, 1);
  NoiseSource b(9, 1);
  const DpRagResult with = DpRagAnswer(q, docs, gen, SmallParams(4), a, 91.4);
  const DpRagResult without = DpRagAnswer(q, docs, gen, SmallParams(4), b);
  ASSERT_TRUE(with.tau_hint.has_value());
  EXPECT_DOUBLE_EQ(*with.tau_hint, 91.4);
  EXPECT_FALSE(without.tau_hint.has_value());
  EXPECT_EQ(with.tokens, without.tokens);
}

TEST(GreedyAnswerTest, StopsAtEosOrLimit) {
  StubGenerator gen(StubConfig{0.0, 1, 0, 16});
  const QueryRecord q = Query("q1", {5, 6, 7});
  const std::vector<Document> ctx = {FactDoc("d", "q1", {5, 6, 7})};
  EXPECT_EQ(GreedyAnswer(q, ctx, gen, 8), (std::vector<Token>{5, 6, 7, kEos}));
  EXPECT_EQ(GreedyAnswer(q, ctx, gen, 2), (std::vector<Token>{5, 6}));
  EXPECT_EQ(GreedyAnswer(q, {}, gen, 8), (std::vector<Token>{1, kEos}));
}

}  // namespace
}  // namespace murag
