#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "phrasespec/core.hpp"
#include "test_util.hpp"

namespace phrasespec {
namespace {

using testing_util::error_code_of;

TEST(Normalize, SymmetricWeights) {
  const std::vector<double> w{2, 2};
  const auto d = normalize(w);
  EXPECT_DOUBLE_EQ(d[0], 0.5);
  EXPECT_DOUBLE_EQ(d[1], 0.5);
}

TEST(Normalize, OneHotIsUnchanged) {
  const std::vector<double> w{1, 0, 0};
  EXPECT_EQ(normalize(w), CategoricalDistribution::one_hot(3, 0));
}

TEST(Normalize, HandDivision) {
  const std::vector<double> w{7, 3};
  const auto d = normalize(w);
  EXPECT_NEAR(d[0], 0.7, 1e-15);
  EXPECT_NEAR(d[1], 0.3, 1e-15);
}

TEST(Normalize, RejectsBadWeights) {
  EXPECT_EQ(error_code_of([] { normalize(std::vector<double>{0, 0}); }),
            ErrorCode::kAllZeroWeights);
  EXPECT_EQ(error_code_of([] { normalize(std::vector<double>{1, -0.5}); }),
            ErrorCode::kInvalidWeight);
  EXPECT_EQ(error_code_of([] {
              normalize(std::vector<double>{1, std::numeric_limits<double>::quiet_NaN()});
            }),
            ErrorCode::kInvalidWeight);
  EXPECT_EQ(error_code_of([] {
              normalize(std::vector<double>{1, std::numeric_limits<double>::infinity()});
            }),
            ErrorCode::kInvalidWeight);
}

TEST(NormalizeProperty, IdempotentAndSumsToOne) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<double> w(n);
    for (auto& x : w) x = rng.uniform() * 100.0;
    w[rng.below(n)] += 1.0;
    const auto once = normalize(w);
    const auto twice = normalize(once.probs());
    EXPECT_EQ(once, twice);
    double sum = 0.0;
    for (double p : once.probs()) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(CategoricalDistribution, ValidatesInput) {
  EXPECT_EQ(error_code_of([] { CategoricalDistribution({0.5, 0.4}); }),
            ErrorCode::kInvalidDistribution);
  EXPECT_EQ(error_code_of([] { CategoricalDistribution({1.5, -0.5}); }),
            ErrorCode::kInvalidDistribution);
  EXPECT_EQ(error_code_of([] { CategoricalDistribution::uniform(3).at(3); }),
            ErrorCode::kInvalidToken);
}

TEST(CategoricalDistribution, ArgmaxPrefersSmallestIdOnTies) {
  EXPECT_EQ(CategoricalDistribution({0.2, 0.4, 0.4}).argmax(), 1u);
  EXPECT_EQ(CategoricalDistribution::uniform(5).argmax(), 0u);
}

TEST(LogProbRatio, HandCalculation) {
  const CategoricalDistribution p({0.7, 0.3});
  const CategoricalDistribution q({0.5, 0.5});
  EXPECT_NEAR(log_prob_ratio(p, q, 0).value, std::log(1.4), 1e-15);
  EXPECT_NEAR(log_prob_ratio(p, q, 0).value, 0.3365, 1e-4);
}

TEST(LogProbRatio, IdentityAndFloor) {
  const CategoricalDistribution p({0.2, 0.8});
  EXPECT_EQ(log_prob_ratio(p, p, 1).value, 0.0);

  const CategoricalDistribution zero({0.0, 0.2, 0.8});
  const CategoricalDistribution q({0.2, 0.4, 0.4});
  const LogRatio r = log_prob_ratio(zero, q, 0);
  EXPECT_TRUE(r.is_floor());
  EXPECT_EQ(r.value, LogRatio::kFloor);
  EXPECT_EQ(r.linear(), 0.0);
}

TEST(LogProbRatio, DrafterZeroProbability) {
  const CategoricalDistribution p({0.5, 0.5});
  const CategoricalDistribution q({1.0, 0.0});
  EXPECT_EQ(error_code_of([&] { log_prob_ratio(p, q, 1); }), ErrorCode::kDrafterZeroProb);
}

TEST(LogProbRatioProperty, ExponentRecoversRatio) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(8);
    const auto p = sample_dirichlet(n, 1.0, rng);
    const auto q = sample_dirichlet(n, 1.0, rng);
    const auto v = static_cast<TokenId>(rng.below(n));
    if (p[v] == 0.0 || q[v] == 0.0) continue;
    const double ratio = p[v] / q[v];
    EXPECT_NEAR(std::exp(log_prob_ratio(p, q, v).value), ratio, 1e-12 * std::max(1.0, ratio));
  }
}

TEST(Sample, DegenerateDistribution) {
  Rng rng(1);
  const auto d = CategoricalDistribution::one_hot(3, 0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(d, rng), 0u);
}

TEST(Sample, ReproducibleForSeed) {
  const auto d = CategoricalDistribution::uniform(2);
  Rng a(42), b(42);
  for (int i = 0; i < 64; ++i) EXPECT_EQ(sample(d, a), sample(d, b));
}

TEST(Sample, LawOfLargeNumbers) {
  const CategoricalDistribution d({0.7, 0.3});
  Rng rng(2024);
  constexpr int kDraws = 100000;
  int zeros = 0;
  for (int i = 0; i < kDraws; ++i) zeros += sample(d, rng) == 0 ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(zeros) / kDraws, 0.7, 0.01);
}

TEST(Rng, BelowStaysInRange) {
  Rng rng(9);
  for (std::uint64_t n : {1ull, 2ull, 3ull, 7ull, 1000ull}) {
    for (int i = 0; i < 200; ++i) EXPECT_LT(rng.below(n), n);
  }
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(TotalVariation, Basics) {
  const std::vector<double> a{0.7, 0.3};
  const std::vector<double> b{0.5, 0.5};
  EXPECT_NEAR(total_variation(a, b), 0.2, 1e-15);
  EXPECT_EQ(total_variation(a, a), 0.0);
}

TEST(CheckTokens, RejectsOutOfRange) {
  const TokenSequence ok{0, 1, 2};
  EXPECT_NO_THROW(check_tokens(ok, 3));
  EXPECT_EQ(error_code_of([&] { check_tokens(ok, 2); }), ErrorCode::kInvalidToken);
}

}  // namespace
}  // namespace phrasespec
