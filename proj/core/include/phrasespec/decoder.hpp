#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "phrasespec/core.hpp"
#include "phrasespec/models.hpp"
#include "phrasespec/phrase_lib.hpp"

namespace phrasespec {

enum class DecodeMode {
  kJacobi,  ///< exact-match Jacobi iteration, no speculative test
  kSjd,     ///< token-wise accept/resample over the Jacobi window
  kSjdPv,   ///< phrase-level joint verification with token-wise fallback
};

const char* to_string(DecodeMode mode);
DecodeMode parse_mode(std::string_view name);

struct VerifyConfig {
  double tau = 0.01;
  std::size_t window_size = 16;
  std::size_t max_phrase_len = PhraseLibrary::kDefaultMaxPhraseLen;
  DecodeMode mode = DecodeMode::kSjd;
  bool greedy = false;

  void validate() const;
};

/// Draft buffer carried between iterations. drafter_dists[j] is the
/// distribution drafts[j] was drawn from.
struct JacobiWindow {
  TokenSequence drafts;
  std::vector<CategoricalDistribution> drafter_dists;
  std::size_t window_start = 0;

  std::size_t size() const { return drafts.size(); }
  void validate() const;
};

/// Tokens whose verifier probability lies strictly within tau of the
/// drafted token's.
class Neighborhood {
 public:
  explicit Neighborhood(std::vector<bool> mask) : mask_(std::move(mask)) {}

  bool contains(TokenId token) const { return token < mask_.size() && mask_[token]; }
  TokenSequence members() const;
  std::size_t size() const;

 private:
  std::vector<bool> mask_;
};

struct DecodeMetrics {
  std::uint64_t nfe = 0;
  std::uint64_t tokens_emitted = 0;
  std::vector<std::uint32_t> tokens_per_iteration;
  std::uint64_t phrase_attempts = 0;
  std::uint64_t phrase_accepts = 0;
  std::uint64_t phrase_tokens = 0;  ///< tokens committed through accepted phrases
  std::uint64_t token_accepts = 0;
  std::uint64_t token_rejects = 0;

  std::size_t iterations() const { return tokens_per_iteration.size(); }
  double mean_tokens_per_iteration() const;

  DecodeMetrics& operator+=(const DecodeMetrics& other);
};

Neighborhood build_neighborhood(const CategoricalDistribution& p, TokenId drafted, double tau);

/// Sum over the phrase of log p_k(v_k) - log q_k(v_k), floored. All three
/// inputs must have the phrase's length. Throws kDrafterZeroProb when some
/// q_k(v_k) is zero.
LogRatio phrase_acceptance_score(std::span<const CategoricalDistribution> verifier_dists,
                                 std::span<const CategoricalDistribution> drafter_dists,
                                 std::span<const TokenId> phrase);

/// Accepts when exp(score) > u for u drawn uniformly on [0, 1).
bool verify_phrase(LogRatio score, Rng& rng);

struct TokenVerdict {
  bool accepted = false;
  TokenId emitted = 0;

  bool operator==(const TokenVerdict&) const = default;
};

/// Speculative accept/resample: keeps `drafted` with probability
/// min(1, p/q), otherwise draws from normalize(max(0, p - q)).
TokenVerdict verify_token(const CategoricalDistribution& p, const CategoricalDistribution& q,
                          TokenId drafted, Rng& rng);

/// First phrase in the bucket of drafts[t] that fits in the window and
/// whose every token lies in the neighborhood of its slot, or nullptr.
const Phrase* find_phrase_candidate(const PhraseLibrary& lib, std::span<const TokenId> drafts,
                                    std::span<const Neighborhood> neighborhoods, std::size_t t,
                                    std::size_t max_phrase_len);

struct WindowResult {
  TokenSequence committed;
  JacobiWindow next_window;
  DecodeMetrics metrics;
};

/// One Jacobi iteration: a single batched target evaluation, then a
/// left-to-right scan that commits accepted phrases and tokens and stops at
/// the first token rejection. Unconsumed slots are redrafted from the fresh
/// verifier distributions; the window is refilled to full size by copying
/// the last slot's distribution.
///
/// `lib` must be non-null exactly when cfg.mode is kSjdPv.
WindowResult verify_window(std::span<const TokenId> prefix, const JacobiWindow& window,
                           const ConditionalModel& target, const PhraseLibrary* lib,
                           const VerifyConfig& cfg, Rng& rng);

/// Window for the first iteration: every slot is drafted from the begin
/// context of `drafter` (the target itself when null).
JacobiWindow initial_window(const ConditionalModel& target, const VerifyConfig& cfg, Rng& rng,
                            const ConditionalModel* drafter = nullptr);

struct DecodeResult {
  TokenSequence tokens;
  DecodeMetrics metrics;
};

/// Repeats verify_window until `length` tokens are committed. Throws
/// kNonTermination after 10 * length iterations.
DecodeResult decode(const ConditionalModel& target, const PhraseLibrary* lib,
                    const VerifyConfig& cfg, std::size_t length, Rng& rng,
                    const ConditionalModel* initial_drafter = nullptr);

}  // namespace phrasespec
