#include <algorithm>
#include <numeric>
#include <set>
#include <utility>

#include "phrasespec/harness.hpp"

namespace phrasespec::harness {
namespace {

constexpr int kDrawAttempts = 256;

CategoricalDistribution plant(const CategoricalDistribution& background, TokenId next,
                              double rate) {
  std::vector<double> weights(background.probs().begin(), background.probs().end());
  for (double& w : weights) w *= 1.0 - rate;
  weights[next] += rate;
  return normalize(weights);
}

}  // namespace

PlantedCorpus planted_phrase_corpus(const PlantedOptions& o, Rng& rng) {
  if (o.phrase_len < 2) throw Error(ErrorCode::kConfigInvalid, "phrase_len must be >= 2");
  if (!(o.planting_rate > 0.0 && o.planting_rate <= 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "planting_rate must lie in (0, 1]");
  }
  if (o.vocab_size < 2) throw Error(ErrorCode::kConfigInvalid, "vocab_size must be >= 2");
  const std::size_t V = o.vocab_size;
  if (o.phrase_count * o.phrase_len > V * V || o.phrase_count >= V) {
    throw Error(ErrorCode::kCapacityExceeded,
                std::to_string(o.phrase_count) + " phrases of length " +
                    std::to_string(o.phrase_len) + " do not fit a vocabulary of " +
                    std::to_string(V));
  }

  TokenSequence tokens(V);
  std::iota(tokens.begin(), tokens.end(), TokenId{0});
  for (std::size_t i = V - 1; i > 0; --i) std::swap(tokens[i], tokens[rng.below(i + 1)]);
  const TokenSequence starts(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(o.phrase_count));
  const TokenSequence body(tokens.begin() + static_cast<std::ptrdiff_t>(o.phrase_count), tokens.end());

  std::vector<TokenSequence> phrases;
  std::set<std::pair<TokenId, TokenId>> used_pairs;
  for (TokenId start : starts) {
    TokenSequence phrase{start};
    while (phrase.size() < o.phrase_len) {
      bool placed = false;
      for (int attempt = 0; attempt < kDrawAttempts && !placed; ++attempt) {
        const TokenId next = body[rng.below(body.size())];
        const std::pair<TokenId, TokenId> pair{phrase.back(), next};
        if (next == phrase.back() || used_pairs.contains(pair)) continue;
        used_pairs.insert(pair);
        phrase.push_back(next);
        placed = true;
      }
      if (!placed) {
        throw Error(ErrorCode::kCapacityExceeded, "could not place unique phrase transitions");
      }
    }
    phrases.push_back(std::move(phrase));
  }

  const std::size_t order = 2;
  std::vector<CategoricalDistribution> rows;
  const std::size_t count = MarkovModel::context_count(order, V);
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    rows.push_back(sample_dirichlet(V, o.concentration, rng));
  }
  auto single = [&](TokenId a) { return 1 + std::size_t{a}; };
  auto pair = [&](TokenId a, TokenId b) { return 1 + V + std::size_t{a} * V + b; };

  for (const auto& phrase : phrases) {
    const TokenId start = phrase[0];
    rows[single(start)] = plant(rows[single(start)], phrase[1], o.planting_rate);
    for (TokenId x = 0; x < V; ++x) {
      rows[pair(x, start)] = plant(rows[pair(x, start)], phrase[1], o.planting_rate);
    }
    for (std::size_t k = 1; k + 1 < phrase.size(); ++k) {
      const std::size_t idx = pair(phrase[k - 1], phrase[k]);
      rows[idx] = plant(rows[idx], phrase[k + 1], o.planting_rate);
    }
  }
  MarkovModel model(order, V, std::move(rows));

  Corpus corpus;
  corpus.reserve(o.sequences);
  for (std::size_t s = 0; s < o.sequences; ++s) {
    corpus.push_back(ancestral_sample(model, o.seq_len, rng));
  }
  return {std::move(corpus), std::move(model), std::move(phrases)};
}

}  // namespace phrasespec::harness
