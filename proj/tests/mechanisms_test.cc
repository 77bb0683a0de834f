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

#include "murag/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "murag/epsilon.hpp"
#include "murag/errors.hpp"
#include "murag/noise.hpp"

namespace murag {
namespace {

// Hands out a fixed list of uniforms; counts how many were consumed.
class ScriptedUniforms {
 public:
  explicit ScriptedUniforms(std::vector<double> values, bool noiseless = false)
      : values_(std::move(values)), noiseless_(noiseless) {}
  double Uniform() { return values_.at(next_++); }
  bool noiseless() const { return noiseless_; }
  std::size_t consumed() const { return next_; }

 private:
  std::vector<double> values_;
  bool noiseless_;
  std::size_t next_ = 0;
};

static_assert(UniformSource<ScriptedUniforms>);

TEST(EpsilonAmountTest, QuantizesToMicroEpsilon) {
  EXPECT_EQ(Eps(10.0).micro(), 10'000'000);
  EXPECT_EQ(Eps(0.7187).micro(), 718'700);
  EXPECT_EQ(Eps(1e-7).micro(), 0);
  EXPECT_DOUBLE_EQ(Eps(2.5).value(), 2.5);
}

TEST(EpsilonAmountTest, ArithmeticIsExact) {
  EXPECT_EQ(Eps(2.0) * 5, Eps(10.0));
  EXPECT_EQ(Eps(10.0) - Eps(4.0), Eps(6.0));
  EXPECT_EQ(Eps(10.0) / Eps(2.0), 5);
  EXPECT_EQ(Eps(9.0) / Eps(2.0), 4);
  EXPECT_EQ(Eps(1.0) + Eps(9.0), Eps(10.0));
  // 0.1 + 0.2 drifts in floating point but not in micro-eps.
  EXPECT_EQ(Eps(0.1) + Eps(0.2), Eps(0.3));
}

TEST(EpsilonAmountTest, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(Eps(-1.0), PreconditionError);
  EXPECT_THROW(Eps(std::nan("")), PreconditionError);
  EXPECT_THROW(EpsilonAmount::FromMicro(-1), PreconditionError);
  EXPECT_THROW(Eps(1.0) - Eps(2.0), PreconditionError);
}

TEST(NoiseSourceTest, SameSeedAndStreamReproduce) {
  NoiseSource a(42, 7);
  NoiseSource b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.Bits(), b.Bits());
}

TEST(NoiseSourceTest, StreamsDiffer) {
  NoiseSource a(42, 7);
  NoiseSource b(42, 8);
  NoiseSource c(43, 7);
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.Bits();
    same_ab += x == b.Bits();
    same_ac += x == c.Bits();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(NoiseSourceTest, SubstreamsAreDeterministicAndDistinct) {
  const NoiseSource root(5, 1);
  NoiseSource x = root.Substream(3);
  NoiseSource y = root.Substream(3);
  NoiseSource z = root.Substream(4);
  NoiseSource other_parent = NoiseSource(5, 2).Substream(3);
  const auto vx = x.Bits();
  EXPECT_EQ(vx, y.Bits());
  EXPECT_NE(vx, z.Bits());
  EXPECT_NE(vx, other_parent.Bits());
}

TEST(NoiseSourceTest, UniformIsInOpenUnitInterval) {
  EXPECT_GT(BitsToOpenUnit(0), 0.0);
  EXPECT_LT(BitsToOpenUnit(~0ULL), 1.0);
  EXPECT_TRUE(std::isfinite(LaplaceFromUniform(BitsToOpenUnit(0), 1.0)));
  EXPECT_TRUE(std::isfinite(LaplaceFromUniform(BitsToOpenUnit(~0ULL), 1.0)));
  NoiseSource n(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = n.Uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(LaplaceTest, InverseCdfExamples) {
  EXPECT_DOUBLE_EQ(LaplaceFromUniform(0.5, 1.0), 0.0);
  EXPECT_NEAR(LaplaceFromUniform(0.75, 1.0), std::log(2.0), 1e-12);
  EXPECT_NEAR(LaplaceFromUniform(0.75, 4.0), 4.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(LaplaceFromUniform(0.25, 1.0), -std::log(2.0), 1e-12);
}

TEST(LaplaceTest, ConsumesExactlyOneUniform) {
  ScriptedUniforms u({0.75, 0.5});
  EXPECT_NEAR(SampleLaplace(1.0, u), 0.6931471805599453, 1e-12);
  EXPECT_EQ(u.consumed(), 1u);
  EXPECT_DOUBLE_EQ(SampleLaplace(3.0, u), 0.0);
  EXPECT_EQ(u.consumed(), 2u);
}

TEST(LaplaceTest, NoiselessReturnsZeroWithoutDrawing) {
  ScriptedUniforms u({}, /*noiseless=*/true);
  EXPECT_EQ(SampleLaplace(2.0, u), 0.0);
  EXPECT_EQ(u.consumed(), 0u);
}

TEST(LaplaceTest, RejectsBadScale) {
  NoiseSource n(1);
  EXPECT_THROW(SampleLaplace(0.0, n), PreconditionError);
  EXPECT_THROW(SampleLaplace(-1.0, n), PreconditionError);
  EXPECT_THROW(SampleLaplace(INFINITY, n), PreconditionError);
}

double LaplaceCdf(double x, double b) {
  return x < 0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b);
}

TEST(LaplaceTest, KolmogorovSmirnovAgainstAnalyticCdf) {
  for (double scale : {0.5, 1.0, 4.0}) {
    NoiseSource n(2024, static_cast<std::uint64_t>(scale * 10));
    std::vector<double> xs(100000);
    for (double& x : xs) x = SampleLaplace(scale, n);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    const double count = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = LaplaceCdf(xs[i], scale);
      ks = std::max({ks, std::fabs(f - i / count), std::fabs((i + 1) / count - f)});
    }
    EXPECT_LT(ks, 0.01) << "scale " << scale;
  }
}

TEST(CountTokensTest, Examples) {
  const std::vector<Token> none;
  EXPECT_EQ(CountTokens(none, 3), Histogram(std::vector<std::uint64_t>{0, 0, 0}));
  const std::vector<Token> a = {2, 0, 2};
  EXPECT_EQ(CountTokens(a, 3), Histogram(std::vector<std::uint64_t>{1, 0, 2}));
  const std::vector<Token> b = {1, 1, 1, 1};
  EXPECT_EQ(CountTokens(b, 2), Histogram(std::vector<std::uint64_t>{0, 4}));
}

TEST(CountTokensTest, OutOfRangeTokenThrows) {
  const std::vector<Token> a = {0, 3};
  EXPECT_THROW(CountTokens(a, 3), PreconditionError);
}

TEST(CountTokensTest, PermutationInvariantAndTotalMatches) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Token> tokens(rng() % 20);
    for (auto& t : tokens) t = rng() % 6;
    const Histogram h = CountTokens(tokens, 6);
    EXPECT_EQ(h.total(), tokens.size());
    std::shuffle(tokens.begin(), tokens.end(), rng);
    EXPECT_EQ(CountTokens(tokens, 6), h);
  }
}

// Reference: normalize exp(eps * u / (2 * du)) directly.
std::vector<double> EmOracle(const std::vector<std::uint64_t>& counts, double eps, double du) {
  std::vector<double> w(counts.size());
  double total = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    w[j] = std::exp(eps * static_cast<double>(counts[j]) / (2.0 * du));
    total += w[j];
  }
  for (double& x : w) x /= total;
  return w;
}

TEST(ExponentialMechanismTest, UniformUtilities) {
  const Histogram h(std::vector<std::uint64_t>{5, 5, 5, 5});
  for (double eps : {0.1, 1.0, 50.0}) {
    for (double p : ExponentialMechanismProbabilities(h, Eps(eps), 1.0)) {
      EXPECT_NEAR(p, 0.25, 1e-12);
    }
  }
}

TEST(ExponentialMechanismTest, WeightRatio) {
  const Histogram h(std::vector<std::uint64_t>{1, 0});
  const auto p = ExponentialMechanismProbabilities(h, Eps(2.0), 1.0);
  EXPECT_NEAR(p[0] / p[1], std::exp(1.0), 1e-12);
}

TEST(ExponentialMechanismTest, ClosedFormMatchesOracle) {
  const Histogram h(std::vector<std::uint64_t>{3, 1, 0, 0});
  const auto p = ExponentialMechanismProbabilities(h, Eps(2.0), 1.0);
  const auto want = EmOracle({3, 1, 0, 0}, 2.0, 1.0);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(p[j], want[j], 1e-12);
  // Frozen from the oracle: e^3, e^1, 1, 1 normalized.
  EXPECT_NEAR(p[0], 0.809776, 1e-6);
  EXPECT_NEAR(p[1], 0.109591, 1e-6);
  EXPECT_NEAR(p[2], 0.040316, 1e-6);
}

TEST(ExponentialMechanismTest, OverflowSafe) {
  const Histogram h(std::vector<std::uint64_t>{100000, 99999, 0});
  const auto p = ExponentialMechanismProbabilities(h, Eps(100.0), 1.0);
  for (double x : p) EXPECT_TRUE(std::isfinite(x));
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  EXPECT_NEAR(p[0] / p[1], std::exp(50.0), std::exp(50.0) * 1e-9);
}

TEST(ExponentialMechanismTest, Errors) {
  NoiseSource n(1);
  EXPECT_THROW(ExponentialMechanism(Histogram(), Eps(1.0), 1.0, n), PreconditionError);
  const Histogram h(std::vector<std::uint64_t>{1, 2});
  EXPECT_THROW(ExponentialMechanism(h, Eps(0.0), 1.0, n), PreconditionError);
  EXPECT_THROW(ExponentialMechanism(h, Eps(1.0), 0.0, n), PreconditionError);
}

TEST(ExponentialMechanismTest, NoiselessIsArgmaxLowestIndex) {
  ScriptedUniforms u({}, /*noiseless=*/true);
  EXPECT_EQ(ExponentialMechanism(Histogram(std::vector<std::uint64_t>{1, 3, 3}), Eps(1.0), 1.0, u),
            1u);
  EXPECT_EQ(ExponentialMechanism(Histogram(std::vector<std::uint64_t>{2, 2}), Eps(1.0), 1.0, u),
            0u);
  EXPECT_EQ(u.consumed(), 0u);
}

TEST(ExponentialMechanismTest, SamplingUsesCumulativeOrder) {
  // p = (0.5, 0.5): u below 0.5 selects index 0, above selects index 1.
  const Histogram h(std::vector<std::uint64_t>{2, 2});
  ScriptedUniforms u({0.25, 0.75});
  EXPECT_EQ(ExponentialMechanism(h, Eps(1.0), 1.0, u), 0u);
  EXPECT_EQ(ExponentialMechanism(h, Eps(1.0), 1.0, u), 1u);
}

TEST(ExponentialMechanismTest, EmpiricalFrequenciesWithinTotalVariation) {
  std::mt19937 rng(17);
  for (std::size_t vocab = 1; vocab <= 8; ++vocab) {
    std::vector<std::uint64_t> counts(vocab);
    for (auto& c : counts) c = rng() % 5;
    const Histogram h(counts);
    const double eps = 0.5 + (rng() % 4);
    const auto want = EmOracle(counts, eps, 1.0);
    NoiseSource n(99, vocab);
    std::vector<double> freq(vocab, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) freq[ExponentialMechanism(h, Eps(eps), 1.0, n)] += 1.0;
    double tv = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) tv += 0.5 * std::fabs(freq[j] / draws - want[j]);
    EXPECT_LT(tv, 0.01) << "vocab " << vocab;
  }
}

TEST(ExponentialMechanismTest, NeighbouringHistogramsWithinEpsRatio) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t vocab = 1 + rng() % 8;
    std::vector<std::uint64_t> a(vocab);
    for (auto& c : a) c = rng() % 10;
    std::vector<std::uint64_t> b = a;
    const std::size_t bin = rng() % vocab;
    if (b[bin] > 0 && rng() % 2) {
      --b[bin];
    } else {
      ++b[bin];
    }
    const double eps = 0.1 + (rng() % 30) / 10.0;
    const auto p = ExponentialMechanismProbabilities(Histogram(a), Eps(eps), 1.0);
    const auto q = ExponentialMechanismProbabilities(Histogram(b), Eps(eps), 1.0);
    const double e = Eps(eps).value();
    for (std::size_t j = 0; j < vocab; ++j) {
      ASSERT_LE(p[j] / q[j], std::exp(e) * (1 + 1e-12));
      ASSERT_LE(q[j] / p[j], std::exp(e) * (1 + 1e-12));
    }
  }
}

}  // namespace
}  // namespace murag
