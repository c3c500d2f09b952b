#include "phrasespec/phrase_lib.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "binary_io.hpp"

namespace phrasespec {
namespace {

constexpr std::string_view kLibraryMagic = "PSDL";

std::uint64_t pair_key(SymbolId left, SymbolId right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}

bool canonical_less(const Phrase& a, const Phrase& b) {
  if (a.tokens.front() != b.tokens.front()) return a.tokens.front() < b.tokens.front();
  if (a.size() != b.size()) return a.size() > b.size();
  if (a.corpus_count != b.corpus_count) return a.corpus_count > b.corpus_count;
  return a.source_rank < b.source_rank;
}

using PairTable = std::unordered_map<std::uint64_t, std::int64_t>;

// Counts the pairs a left-to-right merge would actually replace: inside a
// run of one repeated symbol, consecutive (a, a) pairs overlap and only
// every other one is counted.
void accumulate_pairs(const std::vector<SymbolId>& seq, std::int64_t sign, PairTable& table) {
  std::size_t last_same = SIZE_MAX;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    if (seq[i] == seq[i + 1]) {
      if (last_same != SIZE_MAX && last_same + 1 == i) {
        last_same = SIZE_MAX;
        continue;
      }
      last_same = i;
    }
    auto& slot = table[pair_key(seq[i], seq[i + 1])];
    slot += sign;
  }
}

bool contains_pair(const std::vector<SymbolId>& seq, SymbolId left, SymbolId right) {
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    if (seq[i] == left && seq[i + 1] == right) return true;
  }
  return false;
}

void replace_pair(std::vector<SymbolId>& seq, SymbolId left, SymbolId right, SymbolId merged) {
  std::size_t write = 0;
  for (std::size_t read = 0; read < seq.size();) {
    if (read + 1 < seq.size() && seq[read] == left && seq[read + 1] == right) {
      seq[write++] = merged;
      read += 2;
    } else {
      seq[write++] = seq[read++];
    }
  }
  seq.resize(write);
}

void validate_corpus(const Corpus& corpus, std::size_t vocab_size) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no sequences");
  for (const auto& seq : corpus) check_tokens(seq, vocab_size);
}

}  // namespace

PhraseLibrary::PhraseLibrary(std::size_t vocab_size, std::vector<MergeRule> rules,
                             std::vector<Phrase> phrases)
    : vocab_size_(vocab_size), rules_(std::move(rules)), phrases_(std::move(phrases)) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& r = rules_[i];
    if (r.result != vocab_size_ + i || r.left >= r.result || r.right >= r.result ||
        r.rank != i + 1) {
      throw Error(ErrorCode::kFormat, "merge rule " + std::to_string(i) + " is malformed");
    }
  }
  for (const auto& p : phrases_) {
    if (p.size() < 2) throw Error(ErrorCode::kFormat, "phrase shorter than two tokens");
    check_tokens(p.tokens, vocab_size_);
  }
  std::sort(phrases_.begin(), phrases_.end(), canonical_less);

  bucket_begin_.assign(vocab_size_ + 1, 0);
  for (const auto& p : phrases_) ++bucket_begin_[p.tokens.front() + 1];
  for (std::size_t v = 0; v < vocab_size_; ++v) bucket_begin_[v + 1] += bucket_begin_[v];
}

std::span<const Phrase> PhraseLibrary::match(TokenId start) const {
  if (start >= vocab_size_) return {};
  const std::span<const Phrase> all(phrases_);
  return all.subspan(bucket_begin_[start], bucket_begin_[start + 1] - bucket_begin_[start]);
}

std::size_t PhraseLibrary::longest_phrase() const {
  std::size_t longest = 0;
  for (const auto& p : phrases_) longest = std::max(longest, p.size());
  return longest;
}

MergeLog learn_merges(const Corpus& corpus, std::size_t vocab_size, std::size_t merges) {
  validate_corpus(corpus, vocab_size);
  MergeLog log;
  log.rewritten.reserve(corpus.size());
  for (const auto& seq : corpus) log.rewritten.emplace_back(seq.begin(), seq.end());

  PairTable counts;
  for (const auto& seq : log.rewritten) accumulate_pairs(seq, +1, counts);

  for (std::size_t iter = 0; iter < merges; ++iter) {
    std::uint64_t best_key = 0;
    std::int64_t best_count = 0;
    for (const auto& [key, count] : counts) {
      if (count > best_count || (count == best_count && count > 0 && key < best_key)) {
        best_key = key;
        best_count = count;
      }
    }
    if (best_count < 2) break;

    const auto left = static_cast<SymbolId>(best_key >> 32);
    const auto right = static_cast<SymbolId>(best_key & 0xffffffffu);
    const auto merged = static_cast<SymbolId>(vocab_size + log.rules.size());
    for (auto& seq : log.rewritten) {
      if (!contains_pair(seq, left, right)) continue;
      accumulate_pairs(seq, -1, counts);
      replace_pair(seq, left, right, merged);
      accumulate_pairs(seq, +1, counts);
    }
    std::erase_if(counts, [](const auto& kv) { return kv.second == 0; });

    log.rules.push_back({left, right, merged, static_cast<std::uint32_t>(iter + 1)});
    log.pair_counts.push_back(static_cast<std::uint64_t>(best_count));
  }
  return log;
}

PhraseLibrary build_library(const Corpus& corpus, std::size_t vocab_size, std::size_t merges,
                            std::size_t max_phrase_len) {
  if (max_phrase_len < 2) {
    throw Error(ErrorCode::kConfigInvalid, "max phrase length must be at least 2");
  }
  MergeLog log = learn_merges(corpus, vocab_size, merges);

  std::vector<std::uint64_t> symbol_counts(log.rules.size(), 0);
  for (const auto& seq : log.rewritten) {
    for (SymbolId s : seq) {
      if (s >= vocab_size) ++symbol_counts[s - vocab_size];
    }
  }

  // Different merge trees can expand to the same raw tokens; such phrases
  // are stored once, under the earliest rule, with their counts pooled.
  std::map<TokenSequence, std::size_t> seen;
  std::vector<Phrase> phrases;
  for (const auto& rule : log.rules) {
    TokenSequence tokens = expand_symbol(log.rules, vocab_size, rule.result);
    if (tokens.size() > max_phrase_len) continue;
    const std::uint64_t count = symbol_counts[rule.result - vocab_size];
    auto [it, inserted] = seen.try_emplace(tokens, phrases.size());
    if (inserted) {
      phrases.push_back({std::move(tokens), rule.rank, count});
    } else {
      phrases[it->second].corpus_count += count;
    }
  }
  return PhraseLibrary(vocab_size, std::move(log.rules), std::move(phrases));
}

TokenSequence expand_symbol(std::span<const MergeRule> rules, std::size_t vocab_size,
                            SymbolId symbol) {
  TokenSequence out;
  std::vector<SymbolId> stack{symbol};
  while (!stack.empty()) {
    const SymbolId s = stack.back();
    stack.pop_back();
    if (s < vocab_size) {
      out.push_back(s);
      continue;
    }
    const std::size_t index = s - vocab_size;
    if (index >= rules.size() || rules[index].result != s) {
      throw Error(ErrorCode::kUnknownSymbol, "symbol " + std::to_string(s) + " has no rule");
    }
    stack.push_back(rules[index].right);
    stack.push_back(rules[index].left);
  }
  return out;
}

std::vector<std::vector<SymbolId>> apply_merges(const Corpus& corpus,
                                                std::span<const MergeRule> rules) {
  std::vector<std::vector<SymbolId>> out;
  out.reserve(corpus.size());
  for (const auto& seq : corpus) out.emplace_back(seq.begin(), seq.end());
  for (const auto& rule : rules) {
    for (auto& seq : out) replace_pair(seq, rule.left, rule.right, rule.result);
  }
  return out;
}

std::vector<PairCount> cooccurrence_stats(const Corpus& corpus, std::size_t top_n) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no sequences");
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  for (const auto& seq : corpus) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[pair_key(seq[i], seq[i + 1])];
  }
  std::vector<PairCount> out;
  out.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    out.push_back({static_cast<TokenId>(key >> 32), static_cast<TokenId>(key & 0xffffffffu),
                   count});
  }
  std::sort(out.begin(), out.end(), [](const PairCount& a, const PairCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return pair_key(a.left, a.right) < pair_key(b.left, b.right);
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

std::size_t infer_vocab_size(const Corpus& corpus) {
  std::size_t vocab = 0;
  for (const auto& seq : corpus) {
    for (TokenId t : seq) vocab = std::max<std::size_t>(vocab, std::size_t{t} + 1);
  }
  return vocab;
}

void save_library(const PhraseLibrary& lib, std::ostream& out) {
  detail::write_magic(out, kLibraryMagic);
  detail::write_le<std::uint16_t>(out, PhraseLibrary::kFormatVersion);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(lib.vocab_size()));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(lib.rules().size()));
  for (const auto& r : lib.rules()) {
    detail::write_le<std::uint32_t>(out, r.left);
    detail::write_le<std::uint32_t>(out, r.right);
    detail::write_le<std::uint32_t>(out, r.result);
  }
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(lib.phrases().size()));
  for (const auto& p : lib.phrases()) {
    detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(p.size()));
    for (TokenId t : p.tokens) detail::write_le<std::uint32_t>(out, t);
    detail::write_le<std::uint32_t>(out, p.source_rank);
    detail::write_le<std::uint64_t>(out, p.corpus_count);
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing phrase library");
}

PhraseLibrary load_library(std::istream& in) {
  detail::expect_magic(in, kLibraryMagic);
  const auto version = detail::read_le<std::uint16_t>(in, "version");
  if (version != PhraseLibrary::kFormatVersion) {
    throw Error(ErrorCode::kFormat,
                "unsupported phrase library format version " + std::to_string(version));
  }
  const auto vocab = detail::read_le<std::uint32_t>(in, "vocab size");
  const auto rule_count = detail::read_le<std::uint32_t>(in, "rule count");
  std::vector<MergeRule> rules;
  rules.reserve(rule_count);
  for (std::uint32_t i = 0; i < rule_count; ++i) {
    MergeRule r;
    r.left = detail::read_le<std::uint32_t>(in, "rule left");
    r.right = detail::read_le<std::uint32_t>(in, "rule right");
    r.result = detail::read_le<std::uint32_t>(in, "rule result");
    r.rank = i + 1;
    rules.push_back(r);
  }
  const auto phrase_count = detail::read_le<std::uint32_t>(in, "phrase count");
  std::vector<Phrase> phrases;
  phrases.reserve(phrase_count);
  for (std::uint32_t i = 0; i < phrase_count; ++i) {
    Phrase p;
    const auto length = detail::read_le<std::uint16_t>(in, "phrase length");
    p.tokens.resize(length);
    for (auto& t : p.tokens) t = detail::read_le<std::uint32_t>(in, "phrase token");
    p.source_rank = detail::read_le<std::uint32_t>(in, "source rank");
    p.corpus_count = detail::read_le<std::uint64_t>(in, "corpus count");
    phrases.push_back(std::move(p));
  }
  try {
    return PhraseLibrary(vocab, std::move(rules), std::move(phrases));
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, e.what());
  }
}

void save_library(const PhraseLibrary& lib, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  save_library(lib, out);
}

PhraseLibrary load_library(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return load_library(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    TokenSequence seq;
    const char* cur = line.data() + first;
    const char* end = line.data() + line.size();
    while (cur < end) {
      while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
      if (cur == end) break;
      TokenId value = 0;
      auto [ptr, ec] = std::from_chars(cur, end, value);
      if (ec != std::errc() || (ptr < end && *ptr != ' ' && *ptr != '\t')) {
        throw Error(ErrorCode::kFormat,
                    "line " + std::to_string(line_no) + ": expected a decimal token id");
      }
      seq.push_back(value);
      cur = ptr;
    }
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus " + path.string());
  try {
    return parse_corpus(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& seq : corpus) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i != 0) out << ' ';
      out << seq[i];
    }
    out << '\n';
  }
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  write_corpus(corpus, out);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace phrasespec
