#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "phrasespec/core.hpp"

namespace phrasespec {

/// Raw tokens occupy [0, V); merged symbols are numbered from V upward.
using SymbolId = std::uint32_t;
using Corpus = std::vector<TokenSequence>;

struct MergeRule {
  SymbolId left = 0;
  SymbolId right = 0;
  SymbolId result = 0;
  std::uint32_t rank = 0;  ///< 1-based merge iteration

  bool operator==(const MergeRule&) const = default;
};

struct Phrase {
  TokenSequence tokens;
  std::uint32_t source_rank = 0;
  std::uint64_t corpus_count = 0;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Phrase&) const = default;
};

/// Learned phrases bucketed by their first token. Within a bucket phrases
/// are ordered by length (longest first), then corpus count (highest first),
/// then merge rank.
class PhraseLibrary {
 public:
  static constexpr std::uint16_t kFormatVersion = 1;
  static constexpr std::size_t kDefaultMaxPhraseLen = 8;

  PhraseLibrary() = default;
  PhraseLibrary(std::size_t vocab_size, std::vector<MergeRule> rules,
                std::vector<Phrase> phrases);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t merge_count() const { return rules_.size(); }
  std::size_t size() const { return phrases_.size(); }
  bool empty() const { return phrases_.empty(); }

  const std::vector<MergeRule>& rules() const { return rules_; }
  /// All phrases, grouped by first token in canonical bucket order.
  const std::vector<Phrase>& phrases() const { return phrases_; }

  /// Bucket of phrases starting with `start`; empty for unseen or
  /// out-of-range tokens.
  std::span<const Phrase> match(TokenId start) const;

  std::size_t longest_phrase() const;

  bool operator==(const PhraseLibrary&) const = default;

 private:
  std::size_t vocab_size_ = 0;
  std::vector<MergeRule> rules_;
  std::vector<Phrase> phrases_;
  std::vector<std::size_t> bucket_begin_;
};

/// Outcome of the merge loop before expansion: the rules, the pair count
/// each rule replaced, and the corpus rewritten with every rule.
struct MergeLog {
  std::vector<MergeRule> rules;
  std::vector<std::uint64_t> pair_counts;
  std::vector<std::vector<SymbolId>> rewritten;
};

/// Runs up to `merges` iterations of most-frequent-adjacent-pair merging.
/// Pairs are counted inside sequences only, overlapping runs of a repeated
/// symbol count as floor(run / 2), and ties go to the smaller (left, right).
/// Stops early once no pair occurs at least twice.
MergeLog learn_merges(const Corpus& corpus, std::size_t vocab_size, std::size_t merges);

PhraseLibrary build_library(const Corpus& corpus, std::size_t vocab_size, std::size_t merges,
                            std::size_t max_phrase_len = PhraseLibrary::kDefaultMaxPhraseLen);

/// Recursively expands a symbol into raw tokens.
TokenSequence expand_symbol(std::span<const MergeRule> rules, std::size_t vocab_size,
                            SymbolId symbol);

/// Rewrites a raw corpus with every rule in rank order.
std::vector<std::vector<SymbolId>> apply_merges(const Corpus& corpus,
                                                std::span<const MergeRule> rules);

inline std::span<const Phrase> match_prefix(const PhraseLibrary& lib, TokenId start) {
  return lib.match(start);
}

struct PairCount {
  TokenId left = 0;
  TokenId right = 0;
  std::uint64_t count = 0;

  bool operator==(const PairCount&) const = default;
};

/// Raw adjacent-pair counts (overlapping), most frequent first, ties by
/// smaller pair, truncated to top_n.
std::vector<PairCount> cooccurrence_stats(const Corpus& corpus, std::size_t top_n);

/// Largest token id + 1.
std::size_t infer_vocab_size(const Corpus& corpus);

// "PSDL" file format: magic, u16 version, u32 V, u32 rule count, rules as
// (left, right, result) u32 triples, u32 phrase count, then per phrase
// u16 length, u32 tokens[length], u32 source_rank, u64 corpus_count.
void save_library(const PhraseLibrary& lib, std::ostream& out);
PhraseLibrary load_library(std::istream& in);
void save_library(const PhraseLibrary& lib, const std::filesystem::path& path);
PhraseLibrary load_library(const std::filesystem::path& path);

// Corpus text: one sequence per line, whitespace-separated decimal token ids;
// lines starting with '#' and blank lines are skipped.
Corpus parse_corpus(std::istream& in);
Corpus read_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace phrasespec
