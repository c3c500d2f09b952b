#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "phrasespec/core.hpp"

namespace phrasespec::theory {

/// Expected acceptance rate E_{x~q}[min(1, p(x)/q(x))]; q(x) = 0 terms
/// contribute nothing.
double alpha(const CategoricalDistribution& p, const CategoricalDistribution& q);

/// Token-wise rate over independent positions: the product of alpha(p_i, q_i).
double alpha_seq(std::span<const CategoricalDistribution> p_list,
                 std::span<const CategoricalDistribution> q_list);

/// Largest joint outcome space alpha_phr_exact will enumerate.
inline constexpr std::uint64_t kMaxEnumeration = 10'000'000;

/// E_{x~prod q_i}[min(1, prod p_i(x_i)/q_i(x_i))] by exhaustive enumeration.
/// Throws kEnumerationTooLarge when the joint space exceeds kMaxEnumeration.
double alpha_phr_exact(std::span<const CategoricalDistribution> p_list,
                       std::span<const CategoricalDistribution> q_list);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

MonteCarloEstimate alpha_phr_mc(std::span<const CategoricalDistribution> p_list,
                                std::span<const CategoricalDistribution> q_list,
                                std::uint64_t samples, Rng& rng);

struct MinInequality {
  double lhs = 0.0;  ///< min(1, prod r_i)
  double rhs = 0.0;  ///< prod min(1, r_i)
  bool holds = false;
};

MinInequality min_inequality_check(std::span<const double> ratios);

enum class Method { kExact, kMonteCarlo };

struct AcceptanceReport {
  double alpha_tokenwise = 0.0;
  double alpha_phrase = 0.0;
  std::vector<double> per_position_alphas;
  Method method = Method::kExact;
  std::uint64_t sample_count = 0;
};

AcceptanceReport acceptance_report(std::span<const CategoricalDistribution> p_list,
                                   std::span<const CategoricalDistribution> q_list);

struct SweepOptions {
  std::uint64_t trials = 1000;
  std::size_t max_vocab = 8;
  std::size_t max_length = 3;
  double min_concentration = 0.1;
  double max_concentration = 10.0;
  /// When set every q_i equals its p_i.
  bool identical_pairs = false;
  /// When non-zero every trial uses exactly this phrase length.
  std::size_t fixed_length = 0;
  double tolerance = 1e-12;
  std::size_t histogram_bins = 20;
};

struct TrialOutcome {
  std::size_t vocab_size = 0;
  std::size_t length = 0;
  double alpha_seq = 0.0;
  double alpha_phr = 0.0;
  double gap() const { return alpha_phr - alpha_seq; }
};

struct SweepSummary {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  double min_gap = 0.0;
  double max_gap = 0.0;
  double mean_gap = 0.0;
  /// Counts of gaps falling in equal-width bins over [0, 1]; negative gaps
  /// land in the first bin.
  std::vector<std::uint64_t> gap_histogram;
  std::vector<TrialOutcome> outcomes;
};

/// One random position-independent instance: per trial V, L and each
/// distribution's Dirichlet concentration (log-uniform) are drawn from `rng`.
struct Instance {
  std::vector<CategoricalDistribution> p;
  std::vector<CategoricalDistribution> q;
};
Instance random_instance(std::size_t vocab_size, std::size_t length, double min_concentration,
                         double max_concentration, Rng& rng);

/// Checks alpha_phr >= alpha_seq on random instances. Trial i draws from a
/// generator seeded with derive_seed(seed, i), so results do not depend on
/// evaluation order.
SweepSummary proposition1_sweep(const SweepOptions& options, std::uint64_t seed);

struct MinInequalitySweep {
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double max_deficit = 0.0;  ///< largest rhs - lhs seen
};

/// Random ratio lists of length 1..max_length with ratios log-uniform in
/// [min_ratio, max_ratio].
MinInequalitySweep min_inequality_sweep(std::uint64_t trials, std::size_t max_length,
                                        double min_ratio, double max_ratio, std::uint64_t seed);

}  // namespace phrasespec::theory
