#include "phrasespec/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phrasespec {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAllZeroWeights: return "AllZeroWeights";
    case ErrorCode::kInvalidWeight: return "InvalidWeight";
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
    case ErrorCode::kDrafterZeroProb: return "DrafterZeroProb";
    case ErrorCode::kDegenerateResidual: return "DegenerateResidual";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInvalidToken: return "InvalidToken";
    case ErrorCode::kUnknownSymbol: return "UnknownSymbol";
    case ErrorCode::kEnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::kNonTermination: return "NonTermination";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kFormat: return "Format";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kConfigInvalid, "Rng::below(0)");
  // Reject the tail so the modulo is unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = 0;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double LogRatio::linear() const {
  if (is_floor()) return 0.0;
  return std::exp(value);
}

CategoricalDistribution::CategoricalDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw Error(ErrorCode::kInvalidDistribution, "empty probability vector");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kInvalidDistribution, "negative or non-finite entry");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::kInvalidDistribution,
                "entries sum to " + std::to_string(sum));
  }
}

CategoricalDistribution CategoricalDistribution::uniform(std::size_t vocab_size) {
  return CategoricalDistribution(
      std::vector<double>(vocab_size, 1.0 / static_cast<double>(vocab_size)));
}

CategoricalDistribution CategoricalDistribution::one_hot(std::size_t vocab_size,
                                                         TokenId token) {
  std::vector<double> probs(vocab_size, 0.0);
  probs.at(token) = 1.0;
  return CategoricalDistribution(std::move(probs));
}

double CategoricalDistribution::at(TokenId token) const {
  if (token >= probs_.size()) {
    throw Error(ErrorCode::kInvalidToken, "token " + std::to_string(token) +
                                              " outside vocabulary of " +
                                              std::to_string(probs_.size()));
  }
  return probs_[token];
}

TokenId CategoricalDistribution::argmax() const {
  return static_cast<TokenId>(
      std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

CategoricalDistribution normalize(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kInvalidWeight, "negative or non-finite weight");
    }
    sum += w;
  }
  if (sum <= 0.0) throw Error(ErrorCode::kAllZeroWeights, "all weights are zero");

  std::vector<double> probs(weights.begin(), weights.end());
  if (std::abs(sum - 1.0) > 1e-12) {
    for (double& p : probs) p /= sum;
  }
  return CategoricalDistribution(std::move(probs));
}

LogRatio log_prob_ratio(const CategoricalDistribution& p,
                        const CategoricalDistribution& q, TokenId token) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kInvalidDistribution, "vocabulary size mismatch");
  }
  const double qv = q.at(token);
  if (qv == 0.0) {
    throw Error(ErrorCode::kDrafterZeroProb,
                "drafter assigns zero mass to token " + std::to_string(token));
  }
  const double pv = p.at(token);
  if (pv == 0.0) return LogRatio::floor();
  return LogRatio{std::max(std::log(pv) - std::log(qv), LogRatio::kFloor)};
}

TokenId sample(const CategoricalDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  const auto probs = dist.probs();
  double cumulative = 0.0;
  TokenId last_positive = 0;
  for (std::size_t v = 0; v < probs.size(); ++v) {
    if (probs[v] <= 0.0) continue;
    cumulative += probs[v];
    last_positive = static_cast<TokenId>(v);
    if (u < cumulative) return last_positive;
  }
  // Rounding left the cumulative sum a hair below u.
  return last_positive;
}

CategoricalDistribution sample_dirichlet(std::size_t size, double concentration,
                                         Rng& rng) {
  if (size == 0 || !(concentration > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "Dirichlet needs size > 0 and concentration > 0");
  }
  std::vector<double> draws(size);
  for (double& d : draws) d = rng.gamma(concentration);
  if (std::all_of(draws.begin(), draws.end(), [](double d) { return d == 0.0; })) {
    // Every gamma draw underflowed; the limiting Dirichlet is a vertex.
    return CategoricalDistribution::one_hot(size, static_cast<TokenId>(rng.below(size)));
  }
  return normalize(draws);
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidDistribution, "size mismatch in total_variation");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

void check_tokens(std::span<const TokenId> tokens, std::size_t vocab_size) {
  for (TokenId t : tokens) {
    if (t >= vocab_size) {
      throw Error(ErrorCode::kInvalidToken, "token " + std::to_string(t) +
                                                " outside vocabulary of " +
                                                std::to_string(vocab_size));
    }
  }
}

}  // namespace phrasespec
