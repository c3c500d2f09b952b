#include "phrasespec/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace phrasespec {

const char* to_string(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kJacobi: return "jacobi";
    case DecodeMode::kSjd: return "sjd";
    case DecodeMode::kSjdPv: return "sjd_pv";
  }
  return "unknown";
}

DecodeMode parse_mode(std::string_view name) {
  if (name == "jacobi") return DecodeMode::kJacobi;
  if (name == "sjd") return DecodeMode::kSjd;
  if (name == "sjd_pv") return DecodeMode::kSjdPv;
  throw Error(ErrorCode::kConfigInvalid, "unknown decode mode '" + std::string(name) + "'");
}

void VerifyConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "tau must lie in (0, 1)");
  }
  if (window_size < 1) throw Error(ErrorCode::kConfigInvalid, "window size must be >= 1");
  if (max_phrase_len < 2) throw Error(ErrorCode::kConfigInvalid, "max phrase length must be >= 2");
}

void JacobiWindow::validate() const {
  if (drafts.size() != drafter_dists.size()) {
    throw Error(ErrorCode::kConfigInvalid, "window drafts and drafter distributions differ in length");
  }
  for (std::size_t j = 0; j < drafts.size(); ++j) {
    if (drafter_dists[j].at(drafts[j]) <= 0.0) {
      throw Error(ErrorCode::kDrafterZeroProb,
                  "draft at slot " + std::to_string(j) + " has zero drafter mass");
    }
  }
}

TokenSequence Neighborhood::members() const {
  TokenSequence out;
  for (std::size_t v = 0; v < mask_.size(); ++v) {
    if (mask_[v]) out.push_back(static_cast<TokenId>(v));
  }
  return out;
}

std::size_t Neighborhood::size() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

double DecodeMetrics::mean_tokens_per_iteration() const {
  if (tokens_per_iteration.empty()) return 0.0;
  return static_cast<double>(tokens_emitted) / static_cast<double>(tokens_per_iteration.size());
}

DecodeMetrics& DecodeMetrics::operator+=(const DecodeMetrics& other) {
  nfe += other.nfe;
  tokens_emitted += other.tokens_emitted;
  tokens_per_iteration.insert(tokens_per_iteration.end(), other.tokens_per_iteration.begin(),
                              other.tokens_per_iteration.end());
  phrase_attempts += other.phrase_attempts;
  phrase_accepts += other.phrase_accepts;
  phrase_tokens += other.phrase_tokens;
  token_accepts += other.token_accepts;
  token_rejects += other.token_rejects;
  return *this;
}

Neighborhood build_neighborhood(const CategoricalDistribution& p, TokenId drafted, double tau) {
  const double anchor = p.at(drafted);
  const auto probs = p.probs();
  std::vector<bool> mask(probs.size());
  for (std::size_t v = 0; v < probs.size(); ++v) mask[v] = std::abs(probs[v] - anchor) < tau;
  mask[drafted] = true;
  return Neighborhood(std::move(mask));
}

LogRatio phrase_acceptance_score(std::span<const CategoricalDistribution> verifier_dists,
                                 std::span<const CategoricalDistribution> drafter_dists,
                                 std::span<const TokenId> phrase) {
  if (verifier_dists.size() != phrase.size() || drafter_dists.size() != phrase.size()) {
    throw Error(ErrorCode::kConfigInvalid, "phrase and distribution lists differ in length");
  }
  double sum = 0.0;
  bool impossible = false;
  for (std::size_t k = 0; k < phrase.size(); ++k) {
    // Every term is evaluated so a zero drafter mass anywhere is reported.
    const LogRatio term = log_prob_ratio(verifier_dists[k], drafter_dists[k], phrase[k]);
    if (term.is_floor()) impossible = true;
    sum += term.value;
  }
  if (impossible) return LogRatio::floor();
  return LogRatio{std::max(sum, LogRatio::kFloor)};
}

bool verify_phrase(LogRatio score, Rng& rng) {
  const double u = rng.uniform();
  return score.linear() > u;
}

TokenVerdict verify_token(const CategoricalDistribution& p, const CategoricalDistribution& q,
                          TokenId drafted, Rng& rng) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kInvalidDistribution, "vocabulary size mismatch");
  }
  const double qv = q.at(drafted);
  if (qv <= 0.0) {
    throw Error(ErrorCode::kDrafterZeroProb,
                "drafted token " + std::to_string(drafted) + " has zero drafter mass");
  }
  const double pv = p.at(drafted);
  const double u = rng.uniform();
  if (u < pv / qv) return {true, drafted};

  std::vector<double> residual(p.size());
  for (std::size_t v = 0; v < residual.size(); ++v) {
    residual[v] = std::max(0.0, p[static_cast<TokenId>(v)] - q[static_cast<TokenId>(v)]);
  }
  try {
    return {false, sample(normalize(residual), rng)};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAllZeroWeights) throw;
    throw Error(ErrorCode::kDegenerateResidual, "rejection with an empty residual (p == q)");
  }
}

const Phrase* find_phrase_candidate(const PhraseLibrary& lib, std::span<const TokenId> drafts,
                                    std::span<const Neighborhood> neighborhoods, std::size_t t,
                                    std::size_t max_phrase_len) {
  const std::size_t remaining = drafts.size() - t;
  for (const Phrase& phrase : lib.match(drafts[t])) {
    if (phrase.size() > remaining || phrase.size() > max_phrase_len) continue;
    bool fits = true;
    for (std::size_t k = 0; k < phrase.size() && fits; ++k) {
      fits = neighborhoods[t + k].contains(phrase.tokens[k]);
    }
    if (fits) return &phrase;
  }
  return nullptr;
}

WindowResult verify_window(std::span<const TokenId> prefix, const JacobiWindow& window,
                           const ConditionalModel& target, const PhraseLibrary* lib,
                           const VerifyConfig& cfg, Rng& rng) {
  cfg.validate();
  window.validate();
  const bool phrase_mode = cfg.mode == DecodeMode::kSjdPv;
  if (phrase_mode != (lib != nullptr)) {
    throw Error(ErrorCode::kConfigInvalid, "a phrase library is required by, and only by, sjd_pv");
  }
  const std::size_t width = window.size();
  if (width == 0) throw Error(ErrorCode::kConfigInvalid, "empty Jacobi window");

  WindowResult result;
  DecodeMetrics& m = result.metrics;
  const auto verifier = batched_conditionals(target, prefix, window.drafts, &m.nfe);
  const std::span<const CategoricalDistribution> verifier_span(verifier);
  const std::span<const CategoricalDistribution> drafter_span(window.drafter_dists);

  std::vector<Neighborhood> neighborhoods;
  if (phrase_mode) {
    neighborhoods.reserve(width);
    for (std::size_t j = 0; j < width; ++j) {
      neighborhoods.push_back(build_neighborhood(verifier[j], window.drafts[j], cfg.tau));
    }
  }

  TokenSequence& committed = result.committed;
  std::size_t t = 0;
  while (t < width) {
    if (phrase_mode) {
      if (const Phrase* candidate = find_phrase_candidate(*lib, window.drafts, neighborhoods, t,
                                                          cfg.max_phrase_len)) {
        const std::size_t len = candidate->size();
        ++m.phrase_attempts;
        bool accepted = false;
        try {
          const LogRatio score = phrase_acceptance_score(
              verifier_span.subspan(t, len), drafter_span.subspan(t, len), candidate->tokens);
          accepted = cfg.greedy ? score.value >= 0.0 : verify_phrase(score, rng);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kDrafterZeroProb) throw;
        }
        if (accepted) {
          committed.insert(committed.end(), candidate->tokens.begin(), candidate->tokens.end());
          t += len;
          ++m.phrase_accepts;
          m.phrase_tokens += len;
          continue;
        }
      }
    }

    TokenVerdict verdict;
    if (cfg.greedy) {
      const TokenId best = verifier[t].argmax();
      verdict = {best == window.drafts[t], best};
    } else if (cfg.mode == DecodeMode::kJacobi) {
      const TokenId drawn = sample(verifier[t], rng);
      verdict = {drawn == window.drafts[t], drawn};
    } else {
      verdict = verify_token(verifier[t], window.drafter_dists[t], window.drafts[t], rng);
    }
    committed.push_back(verdict.emitted);
    ++t;
    if (!verdict.accepted) {
      ++m.token_rejects;
      break;
    }
    ++m.token_accepts;
  }

  const std::size_t consumed = committed.size();
  m.tokens_emitted = consumed;
  m.tokens_per_iteration.push_back(static_cast<std::uint32_t>(consumed));

  JacobiWindow& next = result.next_window;
  next.window_start = window.window_start + consumed;
  next.drafts.reserve(width);
  next.drafter_dists.reserve(width);
  auto redraft = [&](const CategoricalDistribution& dist) {
    next.drafts.push_back(cfg.greedy ? dist.argmax() : sample(dist, rng));
    next.drafter_dists.push_back(dist);
  };
  for (std::size_t j = consumed; j < width; ++j) redraft(verifier[j]);
  while (next.drafts.size() < width) redraft(verifier.back());
  return result;
}

JacobiWindow initial_window(const ConditionalModel& target, const VerifyConfig& cfg, Rng& rng,
                            const ConditionalModel* drafter) {
  cfg.validate();
  const ConditionalModel& source = drafter != nullptr ? *drafter : target;
  if (source.vocab_size() != target.vocab_size()) {
    throw Error(ErrorCode::kConfigInvalid, "drafter and target vocabularies differ");
  }
  const CategoricalDistribution begin = source.conditional({});
  JacobiWindow window;
  for (std::size_t j = 0; j < cfg.window_size; ++j) {
    window.drafts.push_back(cfg.greedy ? begin.argmax() : sample(begin, rng));
    window.drafter_dists.push_back(begin);
  }
  return window;
}

DecodeResult decode(const ConditionalModel& target, const PhraseLibrary* lib,
                    const VerifyConfig& cfg, std::size_t length, Rng& rng,
                    const ConditionalModel* initial_drafter) {
  if (length < 1) throw Error(ErrorCode::kConfigInvalid, "decode length must be >= 1");
  DecodeResult result;
  result.tokens.reserve(length);
  JacobiWindow window = initial_window(target, cfg, rng, initial_drafter);

  const std::size_t max_iterations = 10 * length;
  while (result.tokens.size() < length) {
    if (result.metrics.iterations() >= max_iterations) {
      throw Error(ErrorCode::kNonTermination,
                  "no completion after " + std::to_string(max_iterations) + " iterations (" +
                      std::to_string(result.tokens.size()) + "/" + std::to_string(length) +
                      " tokens)");
    }
    WindowResult step = verify_window(result.tokens, window, target, lib, cfg, rng);
    const std::size_t keep = std::min(step.committed.size(), length - result.tokens.size());
    result.tokens.insert(result.tokens.end(), step.committed.begin(),
                         step.committed.begin() + static_cast<std::ptrdiff_t>(keep));
    step.metrics.tokens_emitted = keep;
    step.metrics.tokens_per_iteration.back() = static_cast<std::uint32_t>(keep);
    result.metrics += step.metrics;
    window = std::move(step.next_window);
  }
  return result;
}

}  // namespace phrasespec
