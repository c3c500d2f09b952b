#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phrasespec {

/// Index into a vocabulary of size V.
using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

enum class ErrorCode {
  kAllZeroWeights,
  kInvalidWeight,
  kInvalidDistribution,
  kDrafterZeroProb,
  kDegenerateResidual,
  kEmptyCorpus,
  kInvalidToken,
  kUnknownSymbol,
  kEnumerationTooLarge,
  kNonTermination,
  kConfigInvalid,
  kCapacityExceeded,
  kIo,
  kFormat,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Seedable random source. Every consumer receives one explicitly; there is
/// no global generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream index (splitmix64) so independent runs
/// get decorrelated generators.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Natural-log value with a hard floor. Values at the floor stand for an
/// impossible event and map to a linear value of exactly 0.
struct LogRatio {
  /// ln of the smallest positive subnormal double, rounded.
  static constexpr double kFloor = -745.0;

  double value = 0.0;

  bool is_floor() const noexcept { return value <= kFloor; }
  double linear() const;
  static LogRatio floor() { return LogRatio{kFloor}; }
};

class CategoricalDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Throws kInvalidDistribution unless entries are finite, non-negative and
  /// sum to 1 within kSumTolerance.
  explicit CategoricalDistribution(std::vector<double> probs);

  static CategoricalDistribution uniform(std::size_t vocab_size);
  static CategoricalDistribution one_hot(std::size_t vocab_size, TokenId token);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](TokenId token) const { return probs_[token]; }
  double at(TokenId token) const;
  std::span<const double> probs() const noexcept { return probs_; }

  /// Most probable token; the smallest id wins ties.
  TokenId argmax() const;

  bool operator==(const CategoricalDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

/// Rescales non-negative weights to sum to one. Inputs already summing to 1
/// within 1e-12 are returned unchanged, which makes the operation idempotent.
CategoricalDistribution normalize(std::span<const double> weights);

/// log p(v) - log q(v). Returns the floor when p(v) is 0; throws
/// kDrafterZeroProb when q(v) is 0.
LogRatio log_prob_ratio(const CategoricalDistribution& p,
                        const CategoricalDistribution& q, TokenId token);

/// Inverse-CDF draw. Consumes exactly one uniform from the generator.
TokenId sample(const CategoricalDistribution& dist, Rng& rng);

/// Symmetric Dirichlet draw over `size` categories.
CategoricalDistribution sample_dirichlet(std::size_t size, double concentration,
                                         Rng& rng);

/// Total-variation distance between two equally sized distributions.
double total_variation(std::span<const double> a, std::span<const double> b);

void check_tokens(std::span<const TokenId> tokens, std::size_t vocab_size);

}  // namespace phrasespec
