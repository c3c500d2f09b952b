#include "phrasespec/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace phrasespec::theory {
namespace {

void check_pairs(std::span<const CategoricalDistribution> p_list,
                 std::span<const CategoricalDistribution> q_list) {
  if (p_list.size() != q_list.size() || p_list.empty()) {
    throw Error(ErrorCode::kConfigInvalid, "p and q lists must be non-empty and equally long");
  }
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    if (p_list[i].size() != q_list[i].size()) {
      throw Error(ErrorCode::kInvalidDistribution,
                  "vocabulary mismatch at position " + std::to_string(i));
    }
  }
}

double log_uniform(double lo, double hi, Rng& rng) {
  return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

}  // namespace

double alpha(const CategoricalDistribution& p, const CategoricalDistribution& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::kInvalidDistribution, "vocabulary mismatch");
  double total = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    const double qx = q.probs()[x];
    if (qx == 0.0) continue;
    total += qx * std::min(1.0, p.probs()[x] / qx);
  }
  return total;
}

double alpha_seq(std::span<const CategoricalDistribution> p_list,
                 std::span<const CategoricalDistribution> q_list) {
  check_pairs(p_list, q_list);
  double product = 1.0;
  for (std::size_t i = 0; i < p_list.size(); ++i) product *= alpha(p_list[i], q_list[i]);
  return product;
}

double alpha_phr_exact(std::span<const CategoricalDistribution> p_list,
                       std::span<const CategoricalDistribution> q_list) {
  check_pairs(p_list, q_list);
  std::uint64_t outcomes = 1;
  for (const auto& q : q_list) {
    outcomes *= q.size();
    if (outcomes > kMaxEnumeration) {
      throw Error(ErrorCode::kEnumerationTooLarge,
                  "joint outcome space exceeds " + std::to_string(kMaxEnumeration));
    }
  }

  const std::size_t length = p_list.size();
  std::vector<std::size_t> digits(length, 0);
  double total = 0.0;
  for (std::uint64_t n = 0; n < outcomes; ++n) {
    double q_joint = 1.0;
    double ratio = 1.0;
    for (std::size_t i = 0; i < length && q_joint > 0.0; ++i) {
      const double qx = q_list[i].probs()[digits[i]];
      q_joint *= qx;
      if (qx > 0.0) ratio *= p_list[i].probs()[digits[i]] / qx;
    }
    if (q_joint > 0.0) total += q_joint * std::min(1.0, ratio);

    for (std::size_t i = length; i-- > 0;) {
      if (++digits[i] < q_list[i].size()) break;
      digits[i] = 0;
    }
  }
  return total;
}

MonteCarloEstimate alpha_phr_mc(std::span<const CategoricalDistribution> p_list,
                                std::span<const CategoricalDistribution> q_list,
                                std::uint64_t samples, Rng& rng) {
  check_pairs(p_list, q_list);
  if (samples < 1) throw Error(ErrorCode::kConfigInvalid, "need at least one sample");

  // Welford running mean and variance.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t n = 1; n <= samples; ++n) {
    double ratio = 1.0;
    for (std::size_t i = 0; i < p_list.size(); ++i) {
      const TokenId x = sample(q_list[i], rng);
      ratio *= p_list[i][x] / q_list[i][x];
    }
    const double value = std::min(1.0, ratio);
    const double delta = value - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (value - mean);
  }
  MonteCarloEstimate out;
  out.estimate = mean;
  if (samples > 1) {
    const double variance = m2 / static_cast<double>(samples - 1);
    out.std_error = std::sqrt(variance / static_cast<double>(samples));
  }
  return out;
}

MinInequality min_inequality_check(std::span<const double> ratios) {
  double product = 1.0;
  double clipped = 1.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw Error(ErrorCode::kInvalidWeight, "ratios must be finite and non-negative");
    }
    product *= r;
    clipped *= std::min(1.0, r);
  }
  MinInequality out;
  out.lhs = std::min(1.0, product);
  out.rhs = clipped;
  out.holds = out.lhs >= out.rhs - 1e-12;
  return out;
}

AcceptanceReport acceptance_report(std::span<const CategoricalDistribution> p_list,
                                   std::span<const CategoricalDistribution> q_list) {
  check_pairs(p_list, q_list);
  AcceptanceReport report;
  report.method = Method::kExact;
  report.alpha_tokenwise = 1.0;
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    report.per_position_alphas.push_back(alpha(p_list[i], q_list[i]));
    report.alpha_tokenwise *= report.per_position_alphas.back();
  }
  report.alpha_phrase = alpha_phr_exact(p_list, q_list);
  return report;
}

Instance random_instance(std::size_t vocab_size, std::size_t length, double min_concentration,
                         double max_concentration, Rng& rng) {
  Instance inst;
  for (std::size_t i = 0; i < length; ++i) {
    inst.p.push_back(
        sample_dirichlet(vocab_size, log_uniform(min_concentration, max_concentration, rng), rng));
    inst.q.push_back(
        sample_dirichlet(vocab_size, log_uniform(min_concentration, max_concentration, rng), rng));
  }
  return inst;
}

SweepSummary proposition1_sweep(const SweepOptions& options, std::uint64_t seed) {
  if (options.max_vocab < 2 || options.max_length < 1 || options.histogram_bins < 1) {
    throw Error(ErrorCode::kConfigInvalid, "sweep needs max_vocab >= 2, max_length >= 1");
  }
  SweepSummary summary;
  summary.trials = options.trials;
  summary.gap_histogram.assign(options.histogram_bins, 0);
  summary.outcomes.reserve(options.trials);

  double gap_sum = 0.0;
  for (std::uint64_t trial = 0; trial < options.trials; ++trial) {
    Rng rng(derive_seed(seed, trial));
    TrialOutcome out;
    out.vocab_size = 2 + rng.below(options.max_vocab - 1);
    out.length =
        options.fixed_length != 0 ? options.fixed_length : 1 + rng.below(options.max_length);
    Instance inst = random_instance(out.vocab_size, out.length, options.min_concentration,
                                    options.max_concentration, rng);
    if (options.identical_pairs) inst.q = inst.p;
    out.alpha_seq = alpha_seq(inst.p, inst.q);
    out.alpha_phr = alpha_phr_exact(inst.p, inst.q);

    const double gap = out.gap();
    if (gap < -options.tolerance) ++summary.violations;
    if (trial == 0 || gap < summary.min_gap) summary.min_gap = gap;
    if (trial == 0 || gap > summary.max_gap) summary.max_gap = gap;
    gap_sum += gap;
    const auto bins = static_cast<double>(options.histogram_bins);
    const auto bin = static_cast<std::size_t>(std::clamp(std::floor(gap * bins), 0.0, bins - 1));
    ++summary.gap_histogram[bin];
    summary.outcomes.push_back(out);
  }
  if (options.trials > 0) summary.mean_gap = gap_sum / static_cast<double>(options.trials);
  return summary;
}

MinInequalitySweep min_inequality_sweep(std::uint64_t trials, std::size_t max_length,
                                        double min_ratio, double max_ratio, std::uint64_t seed) {
  if (max_length < 1 || !(min_ratio > 0.0) || !(max_ratio >= min_ratio)) {
    throw Error(ErrorCode::kConfigInvalid, "invalid min-inequality sweep bounds");
  }
  MinInequalitySweep out;
  out.trials = trials;
  Rng rng(seed);
  std::vector<double> ratios;
  for (std::uint64_t t = 0; t < trials; ++t) {
    ratios.resize(1 + rng.below(max_length));
    for (double& r : ratios) r = log_uniform(min_ratio, max_ratio, rng);
    const MinInequality check = min_inequality_check(ratios);
    if (!check.holds) ++out.failures;
    out.max_deficit = std::max(out.max_deficit, check.rhs - check.lhs);
  }
  return out;
}

}  // namespace phrasespec::theory
