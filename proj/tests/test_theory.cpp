#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "phrasespec/theory.hpp"
#include "test_util.hpp"

namespace phrasespec {
namespace {

using namespace theory;
using testing_util::error_code_of;

const CategoricalDistribution kP({0.7, 0.3});
const CategoricalDistribution kQ({0.5, 0.5});

TEST(Alpha, Cases) {
  EXPECT_NEAR(alpha(kP, kP), 1.0, 1e-15);
  EXPECT_EQ(alpha(CategoricalDistribution({1, 0}), CategoricalDistribution({0, 1})), 0.0);
  EXPECT_NEAR(alpha(kP, kQ), 0.8, 1e-15);
}

TEST(AlphaProperty, EqualsOverlapMass) {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 2 + rng.below(9);
    const auto p = sample_dirichlet(n, 0.5, rng);
    const auto q = sample_dirichlet(n, 0.5, rng);
    double overlap = 0.0;
    for (std::size_t x = 0; x < n; ++x) overlap += std::min(p.probs()[x], q.probs()[x]);
    EXPECT_NEAR(alpha(p, q), overlap, 1e-12);
    // 1 - TV(p, q) is the same quantity.
    EXPECT_NEAR(alpha(p, q), 1.0 - total_variation(p.probs(), q.probs()), 1e-12);
  }
}

TEST(AlphaSeq, Products) {
  const std::vector<CategoricalDistribution> one_p{kP}, one_q{kQ};
  EXPECT_DOUBLE_EQ(alpha_seq(one_p, one_q), alpha(kP, kQ));
  const std::vector<CategoricalDistribution> two_p{kP, kP}, two_q{kQ, kQ};
  EXPECT_NEAR(alpha_seq(two_p, two_q), 0.64, 1e-15);
}

TEST(AlphaPhrExact, Cases) {
  const std::vector<CategoricalDistribution> one_p{kP}, one_q{kQ};
  EXPECT_NEAR(alpha_phr_exact(one_p, one_q), alpha(kP, kQ), 1e-15);
  const std::vector<CategoricalDistribution> two_p{kP, kP}, two_q{kQ, kQ};
  EXPECT_NEAR(alpha_phr_exact(two_p, two_q), 0.25 * (1 + 0.84 + 0.84 + 0.36), 1e-15);
  EXPECT_NEAR(alpha_phr_exact(two_p, two_q), 0.76, 1e-15);
  EXPECT_NEAR(alpha_phr_exact(two_p, two_p), 1.0, 1e-15);
}

TEST(AlphaPhrExact, Errors) {
  const std::vector<CategoricalDistribution> big(8, CategoricalDistribution::uniform(8));
  EXPECT_EQ(error_code_of([&] { alpha_phr_exact(big, big); }), ErrorCode::kEnumerationTooLarge);
  const std::vector<CategoricalDistribution> one{kP};
  const std::vector<CategoricalDistribution> two{kP, kP};
  EXPECT_EQ(error_code_of([&] { alpha_phr_exact(one, two); }), ErrorCode::kConfigInvalid);
  const std::vector<CategoricalDistribution> wide{CategoricalDistribution::uniform(3)};
  EXPECT_EQ(error_code_of([&] { alpha_phr_exact(one, wide); }), ErrorCode::kInvalidDistribution);
}

TEST(AlphaPhrMc, ConstantIntegrand) {
  const std::vector<CategoricalDistribution> p{CategoricalDistribution::one_hot(3, 1)};
  Rng rng(1);
  const auto est = alpha_phr_mc(p, p, 1000, rng);
  EXPECT_EQ(est.estimate, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(AlphaPhrMc, AgreesWithEnumeration) {
  const std::vector<CategoricalDistribution> p{kP, kP}, q{kQ, kQ};
  Rng rng(2);
  const auto est = alpha_phr_mc(p, q, 1000000, rng);
  EXPECT_GT(est.std_error, 0.0);
  EXPECT_LE(std::abs(est.estimate - 0.76), 3.0 * est.std_error);
}

TEST(MinInequality, HandCases) {
  const std::vector<double> single{1.96};
  const auto a = min_inequality_check(single);
  EXPECT_EQ(a.lhs, 1.0);
  EXPECT_EQ(a.rhs, 1.0);
  EXPECT_TRUE(a.holds);

  const std::vector<double> mixed{1.4, 0.6};
  const auto b = min_inequality_check(mixed);
  EXPECT_NEAR(b.lhs, 0.84, 1e-15);
  EXPECT_NEAR(b.rhs, 0.6, 1e-15);
  EXPECT_TRUE(b.holds);

  const std::vector<double> below{0.5, 0.5};
  const auto c = min_inequality_check(below);
  EXPECT_EQ(c.lhs, 0.25);
  EXPECT_EQ(c.rhs, 0.25);
  EXPECT_TRUE(c.holds);

  const std::vector<double> bad{1.0, -1.0};
  EXPECT_EQ(error_code_of([&] { min_inequality_check(bad); }), ErrorCode::kInvalidWeight);
}

TEST(PhraseBoundSweep, IdenticalPairsHaveZeroGap) {
  SweepOptions opts;
  opts.trials = 200;
  opts.identical_pairs = true;
  const auto s = proposition1_sweep(opts, 3);
  EXPECT_EQ(s.violations, 0u);
  for (const auto& o : s.outcomes) EXPECT_NEAR(o.gap(), 0.0, 1e-12);
}

TEST(PhraseBoundSweep, SingletonPhrasesCoincide) {
  SweepOptions opts;
  opts.trials = 200;
  opts.fixed_length = 1;
  const auto s = proposition1_sweep(opts, 4);
  for (const auto& o : s.outcomes) EXPECT_NEAR(o.gap(), 0.0, 1e-15);
}

TEST(PhraseBoundSweep, NoViolationsAndDeterministic) {
  SweepOptions opts;
  opts.trials = 300;
  const auto a = proposition1_sweep(opts, 9);
  const auto b = proposition1_sweep(opts, 9);
  EXPECT_EQ(a.violations, 0u);
  EXPECT_EQ(a.trials, 300u);
  EXPECT_GE(a.min_gap, -1e-12);
  EXPECT_EQ(a.gap_histogram.size(), opts.histogram_bins);
  std::uint64_t binned = 0;
  for (auto c : a.gap_histogram) binned += c;
  EXPECT_EQ(binned, a.trials);
  ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    EXPECT_EQ(a.outcomes[i].alpha_phr, b.outcomes[i].alpha_phr);
    EXPECT_LE(a.outcomes[i].vocab_size, opts.max_vocab);
    EXPECT_LE(a.outcomes[i].length, opts.max_length);
  }
}

TEST(AcceptanceReport, ExactForSmallInstances) {
  const std::vector<CategoricalDistribution> p{kP, kP}, q{kQ, kQ};
  const auto r = acceptance_report(p, q);
  EXPECT_EQ(r.method, Method::kExact);
  EXPECT_NEAR(r.alpha_tokenwise, 0.64, 1e-15);
  EXPECT_NEAR(r.alpha_phrase, 0.76, 1e-15);
  EXPECT_EQ(r.per_position_alphas.size(), 2u);
}

TEST(MinInequalitySweep, Holds) {
  const auto s = min_inequality_sweep(20000, 8, 1e-6, 1e6, 5);
  EXPECT_EQ(s.trials, 20000u);
  EXPECT_EQ(s.failures, 0u);
}

}  // namespace
}  // namespace phrasespec
