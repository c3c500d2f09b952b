#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "phrasespec/core.hpp"

namespace phrasespec {

/// Autoregressive conditional p(x_i | x_<i). Implementations are immutable
/// and deterministic: the same prefix always yields the same distribution.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  virtual std::size_t vocab_size() const = 0;

  /// Number of trailing tokens that influence the conditional. 0 means the
  /// whole prefix may matter.
  virtual std::size_t context_order() const = 0;

  virtual CategoricalDistribution conditional(std::span<const TokenId> prefix) const = 0;
};

/// Order-k Markov chain over V tokens. Prefixes shorter than k are
/// left-padded with a begin symbol that lives outside the vocabulary, so the
/// table holds 1 + V + ... + V^k rows: one per count of real tokens in the
/// context.
class MarkovModel final : public ConditionalModel {
 public:
  static constexpr std::uint16_t kFormatVersion = 1;

  MarkovModel(std::size_t order, std::size_t vocab_size,
              std::vector<CategoricalDistribution> rows);

  static std::size_t context_count(std::size_t order, std::size_t vocab_size);

  std::size_t vocab_size() const override { return vocab_size_; }
  std::size_t context_order() const override { return order_; }
  CategoricalDistribution conditional(std::span<const TokenId> prefix) const override;

  std::size_t order() const { return order_; }
  std::size_t context_index(std::span<const TokenId> prefix) const;
  const CategoricalDistribution& row(std::size_t index) const { return rows_.at(index); }
  const CategoricalDistribution& begin_row() const { return rows_.front(); }
  const std::vector<CategoricalDistribution>& rows() const { return rows_; }

  bool operator==(const MarkovModel& other) const {
    return order_ == other.order_ && vocab_size_ == other.vocab_size_ && rows_ == other.rows_;
  }

 private:
  std::size_t order_;
  std::size_t vocab_size_;
  std::vector<CategoricalDistribution> rows_;
};

/// (1 - mix_weight) * base + mix_weight * uniform. Used as a drafter of
/// controlled quality.
class PerturbedDrafter final : public ConditionalModel {
 public:
  PerturbedDrafter(std::shared_ptr<const ConditionalModel> base, double mix_weight);

  std::size_t vocab_size() const override { return base_->vocab_size(); }
  std::size_t context_order() const override { return base_->context_order(); }
  CategoricalDistribution conditional(std::span<const TokenId> prefix) const override;

  double mix_weight() const { return mix_weight_; }

 private:
  std::shared_ptr<const ConditionalModel> base_;
  double mix_weight_;
};

/// Keeps the k most probable tokens of the base conditional and
/// renormalizes. Ties at the cut are resolved toward smaller token ids.
class TopKModel final : public ConditionalModel {
 public:
  TopKModel(std::shared_ptr<const ConditionalModel> base, std::size_t k);

  std::size_t vocab_size() const override { return base_->vocab_size(); }
  std::size_t context_order() const override { return base_->context_order(); }
  CategoricalDistribution conditional(std::span<const TokenId> prefix) const override;

 private:
  std::shared_ptr<const ConditionalModel> base_;
  std::size_t k_;
};

/// One target forward pass over a window: output[j] is the conditional given
/// prefix ++ drafts[0..j). Increments *nfe by exactly one when provided.
std::vector<CategoricalDistribution> batched_conditionals(
    const ConditionalModel& model, std::span<const TokenId> prefix,
    std::span<const TokenId> drafts, std::uint64_t* nfe = nullptr);

/// Draws a sequence from the joint distribution token by token.
TokenSequence ancestral_sample(const ConditionalModel& model, std::size_t length,
                               Rng& rng);

/// Sequential argmax decoding, the reference for greedy Jacobi iteration.
TokenSequence greedy_sequential(const ConditionalModel& model, std::size_t length);

/// Markov model with every row drawn from a symmetric Dirichlet.
MarkovModel random_markov(std::size_t order, std::size_t vocab_size,
                          double concentration, Rng& rng);

// "PSDM" file format: magic, u16 version, u32 order, u32 V, then every row
// as V little-endian IEEE-754 doubles in context-index order.
void save_markov(const MarkovModel& model, std::ostream& out);
MarkovModel load_markov(std::istream& in);
void save_markov(const MarkovModel& model, const std::filesystem::path& path);
MarkovModel load_markov(const std::filesystem::path& path);

}  // namespace phrasespec
