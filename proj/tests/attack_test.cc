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

#include "murag/attack.hpp"

#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "murag/errors.hpp"
#include "murag/noise.hpp"
#include "murag/orchestrators.hpp"

namespace murag {
namespace {

double BruteForceAuc(const std::vector<double>& in, const std::vector<double>& out) {
  double wins = 0.0;
  for (double a : in) {
    for (double b : out) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  }
  return wins / static_cast<double>(in.size() * out.size());
}

TEST(RocAucTest, Examples) {
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{1, 1}, std::vector<double>{0, 0}).auc, 1.0);
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}).auc, 0.5);
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{0.9, 0.4}, std::vector<double>{0.6, 0.1}).auc, 0.75);
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{0, 0}, std::vector<double>{1, 1}).auc, 0.0);
}

TEST(RocAucTest, EmptyInputThrows) {
  const std::vector<double> none;
  const std::vector<double> one = {1.0};
  EXPECT_THROW(RocAuc(none, one), PreconditionError);
  EXPECT_THROW(RocAuc(one, none), PreconditionError);
}

TEST(RocAucTest, MatchesPairwiseCountAndTrapezoid) {
  NoiseSource noise(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n_in = 1 + noise.Bits() % 50;
    const std::size_t n_out = 1 + noise.Bits() % 50;
    const std::uint64_t levels = 1 + noise.Bits() % 12;  // few levels, many ties
    std::vector<double> in(n_in);
    std::vector<double> out(n_out);
    for (auto& s : in) s = static_cast<double>(noise.Bits() % levels) / 10.0;
    for (auto& s : out) s = static_cast<double>(noise.Bits() % levels) / 10.0;
    const RocCurve roc = RocAuc(in, out);
    ASSERT_EQ(roc.auc, BruteForceAuc(in, out)) << trial;
    double trapezoid = 0.0;
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
      ASSERT_GE(roc.points[i].fpr, roc.points[i - 1].fpr);
      ASSERT_GE(roc.points[i].tpr, roc.points[i - 1].tpr);
      trapezoid += (roc.points[i].fpr - roc.points[i - 1].fpr) *
                   (roc.points[i].tpr + roc.points[i - 1].tpr) / 2.0;
    }
    ASSERT_NEAR(trapezoid, roc.auc, 1e-12);
    EXPECT_DOUBLE_EQ(roc.points.back().fpr, 1.0);
    EXPECT_DOUBLE_EQ(roc.points.back().tpr, 1.0);
  }
}

AttackConfig SmallConfig(AttackSystem system) {
  AttackConfig c;
  c.members = 10;
  c.background = 40;
  c.dim = 32;
  c.probes = 6;
  c.k = 5;
  c.system = system;
  c.murag.dp.voters = 5;
  c.murag.dp.threshold = 2.5;
  c.ada.dp.voters = 5;
  c.ada.dp.threshold = 2.5;
  c.seed = 3;
  return c;
}

TEST(ProbeSetTest, ProbesTargetTheFact) {
  const AttackPopulation pop = GenerateAttackPopulation(SmallConfig(AttackSystem::kMurag));
  const Document& target = pop.candidates[0];
  NoiseSource noise(4);
  const ProbeSet set = BuildProbeSet(target, 30, noise);
  ASSERT_EQ(set.probes.size(), 30u);
  EXPECT_EQ(set.target_id, target.id);
  std::vector<Document> docs(pop.corpus.documents().begin(), pop.corpus.documents().end());
  if (!pop.member[0]) docs.push_back(target);
  const Corpus corpus(docs);
  const ScoreBins bins;
  for (const Probe& p : set.probes) {
    EXPECT_EQ(p.query.fact_key, target.fact->key);
    EXPECT_EQ(p.expected, target.fact->answer);
    EXPECT_EQ(TrueTopIds(corpus, p.query, 1, bins).front(), target.id);
  }
  const ProbeSet one = BuildProbeSet(target, 1, noise);
  EXPECT_EQ(one.probes.size(), 1u);
}

TEST(ProbeSetTest, RejectsBadInput) {
  Document plain;
  plain.id = "x";
  plain.embedding = {1.0, 0.0};
  NoiseSource noise(1);
  EXPECT_THROW(BuildProbeSet(plain, 3, noise), PreconditionError);
  plain.fact = Fact{"k", {4}};
  EXPECT_THROW(BuildProbeSet(plain, 0, noise), PreconditionError);
}

TEST(MembershipScoreTest, NonPrivateSeparatesMembers) {
  const AttackConfig config = SmallConfig(AttackSystem::kNonPrivateRag);
  const AttackPopulation pop = GenerateAttackPopulation(config);
  StubGenerator gen(config.stub);
  attack_internal::System system(config, pop.corpus, gen);
  NoiseSource noise(6);
  for (std::size_t i = 0; i < pop.candidates.size(); ++i) {
    const ProbeSet probes = BuildProbeSet(pop.candidates[i], 5, noise);
    const double score =
        MembershipScore(probes, [&](const QueryRecord& q) { return system.Answer(q, noise); });
    EXPECT_DOUBLE_EQ(score, pop.member[i] ? 1.0 : 0.0) << pop.candidates[i].id;
  }
}

TEST(MembershipScoreTest, FilterCapsAnswerableProbes) {
  AttackConfig config = SmallConfig(AttackSystem::kMurag);
  config.murag.tau = 90.0;
  config.murag.max_retrievals = 1;
  const AttackPopulation pop = GenerateAttackPopulation(config);
  std::size_t target = 0;
  while (!pop.member[target]) ++target;
  StubGenerator gen(config.stub);
  MuragSession session(pop.corpus, config.murag, gen);
  NoiseSource noise(0, 0, /*noiseless=*/true);
  NoiseSource probe_noise(2);
  const ProbeSet probes = BuildProbeSet(pop.candidates[target], 10, probe_noise);
  const double score = MembershipScore(
      probes, [&](const QueryRecord& q) { return session.Answer(q, noise).answer; });
  EXPECT_LE(score, 1.0 / 10.0);
  // The probes paid for retrieval like any query: the target is exhausted.
  EXPECT_EQ(session.ledger().Remaining(pop.candidates[target].id), Eps(0.0));
}

TEST(MembershipScoreTest, EmptyProbeSetThrows) {
  ProbeSet empty;
  EXPECT_THROW(MembershipScore(empty, [](const QueryRecord&) { return std::vector<Token>{}; }),
               PreconditionError);
}

TEST(RunAttackTest, SmallPopulation) {
  const AttackReport open = RunAttack(SmallConfig(AttackSystem::kNonPrivateRag));
  EXPECT_DOUBLE_EQ(open.roc.auc, 1.0);
  EXPECT_EQ(open.candidates.size(), 20u);
  const AttackReport guarded = RunAttack(SmallConfig(AttackSystem::kMurag));
  EXPECT_LE(guarded.roc.auc, 0.75);
  const AttackReport again = RunAttack(SmallConfig(AttackSystem::kMurag));
  ASSERT_EQ(again.candidates.size(), guarded.candidates.size());
  for (std::size_t i = 0; i < again.candidates.size(); ++i) {
    EXPECT_EQ(again.candidates[i].score, guarded.candidates[i].score);
  }
  AttackConfig shared = SmallConfig(AttackSystem::kMuragAda);
  shared.shared_ledger = true;
  const AttackReport ada = RunAttack(shared);
  EXPECT_EQ(ada.candidates.size(), 20u);
}

TEST(AttackPopulationTest, BalancedSplit) {
  const AttackPopulation pop = GenerateAttackPopulation(SmallConfig(AttackSystem::kMurag));
  std::size_t members = 0;
  for (std::size_t i = 0; i < pop.candidates.size(); ++i) {
    if (pop.member[i]) {
      ++members;
      EXPECT_NE(pop.corpus.Find(pop.candidates[i].id), nullptr);
    } else {
      EXPECT_EQ(pop.corpus.Find(pop.candidates[i].id), nullptr);
    }
  }
  EXPECT_EQ(members, 10u);
  EXPECT_EQ(pop.corpus.size(), 50u);
}

}  // namespace
}  // namespace murag
