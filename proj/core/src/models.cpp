#include "phrasespec/models.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "binary_io.hpp"

namespace phrasespec {
namespace {

constexpr std::string_view kModelMagic = "PSDM";
constexpr std::size_t kMaxTableEntries = std::size_t{1} << 28;

}  // namespace

MarkovModel::MarkovModel(std::size_t order, std::size_t vocab_size,
                         std::vector<CategoricalDistribution> rows)
    : order_(order), vocab_size_(vocab_size), rows_(std::move(rows)) {
  if (order_ < 1 || vocab_size_ < 1) {
    throw Error(ErrorCode::kConfigInvalid, "Markov model needs order >= 1 and V >= 1");
  }
  const std::size_t expected = context_count(order_, vocab_size_);
  if (rows_.size() != expected) {
    throw Error(ErrorCode::kConfigInvalid, "expected " + std::to_string(expected) +
                                               " rows, got " + std::to_string(rows_.size()));
  }
  for (const auto& row : rows_) {
    if (row.size() != vocab_size_) {
      throw Error(ErrorCode::kConfigInvalid, "row size differs from vocabulary size");
    }
  }
}

std::size_t MarkovModel::context_count(std::size_t order, std::size_t vocab_size) {
  std::size_t total = 0;
  std::size_t power = 1;
  for (std::size_t j = 0; j <= order; ++j) {
    total += power;
    if (total * vocab_size > kMaxTableEntries) {
      throw Error(ErrorCode::kCapacityExceeded, "Markov table too large");
    }
    power *= vocab_size;
  }
  return total;
}

std::size_t MarkovModel::context_index(std::span<const TokenId> prefix) const {
  const std::size_t used = std::min(order_, prefix.size());
  std::size_t offset = 0;
  std::size_t power = 1;
  for (std::size_t j = 0; j < used; ++j) {
    offset += power;
    power *= vocab_size_;
  }
  std::size_t code = 0;
  for (TokenId t : prefix.last(used)) {
    if (t >= vocab_size_) {
      throw Error(ErrorCode::kInvalidToken, "token " + std::to_string(t) + " outside vocabulary");
    }
    code = code * vocab_size_ + t;
  }
  return offset + code;
}

CategoricalDistribution MarkovModel::conditional(std::span<const TokenId> prefix) const {
  return rows_[context_index(prefix)];
}

PerturbedDrafter::PerturbedDrafter(std::shared_ptr<const ConditionalModel> base,
                                   double mix_weight)
    : base_(std::move(base)), mix_weight_(mix_weight) {
  if (!base_) throw Error(ErrorCode::kConfigInvalid, "PerturbedDrafter without a base model");
  if (!(mix_weight_ >= 0.0 && mix_weight_ <= 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "mix weight must lie in [0, 1]");
  }
}

CategoricalDistribution PerturbedDrafter::conditional(std::span<const TokenId> prefix) const {
  auto base = base_->conditional(prefix);
  if (mix_weight_ == 0.0) return base;
  const double noise = mix_weight_ / static_cast<double>(base.size());
  std::vector<double> mixed(base.probs().begin(), base.probs().end());
  for (double& p : mixed) p = (1.0 - mix_weight_) * p + noise;
  return normalize(mixed);
}

TopKModel::TopKModel(std::shared_ptr<const ConditionalModel> base, std::size_t k)
    : base_(std::move(base)), k_(k) {
  if (!base_) throw Error(ErrorCode::kConfigInvalid, "TopKModel without a base model");
  if (k_ == 0) throw Error(ErrorCode::kConfigInvalid, "top-k needs k >= 1");
}

CategoricalDistribution TopKModel::conditional(std::span<const TokenId> prefix) const {
  auto base = base_->conditional(prefix);
  if (k_ >= base.size()) return base;
  const auto probs = base.probs();
  std::vector<TokenId> order(probs.size());
  std::iota(order.begin(), order.end(), TokenId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](TokenId a, TokenId b) { return probs[a] > probs[b]; });
  std::vector<double> kept(probs.size(), 0.0);
  for (std::size_t i = 0; i < k_; ++i) kept[order[i]] = probs[order[i]];
  return normalize(kept);
}

std::vector<CategoricalDistribution> batched_conditionals(const ConditionalModel& model,
                                                          std::span<const TokenId> prefix,
                                                          std::span<const TokenId> drafts,
                                                          std::uint64_t* nfe) {
  TokenSequence context;
  context.reserve(prefix.size() + drafts.size());
  context.insert(context.end(), prefix.begin(), prefix.end());
  context.insert(context.end(), drafts.begin(), drafts.end());

  std::vector<CategoricalDistribution> out;
  out.reserve(drafts.size());
  const std::span<const TokenId> all(context);
  for (std::size_t j = 0; j < drafts.size(); ++j) {
    out.push_back(model.conditional(all.first(prefix.size() + j)));
  }
  if (nfe != nullptr) ++*nfe;
  return out;
}

TokenSequence ancestral_sample(const ConditionalModel& model, std::size_t length, Rng& rng) {
  TokenSequence seq;
  seq.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    seq.push_back(sample(model.conditional(seq), rng));
  }
  return seq;
}

TokenSequence greedy_sequential(const ConditionalModel& model, std::size_t length) {
  TokenSequence seq;
  seq.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    seq.push_back(model.conditional(seq).argmax());
  }
  return seq;
}

MarkovModel random_markov(std::size_t order, std::size_t vocab_size, double concentration,
                          Rng& rng) {
  if (vocab_size < 2 || order < 1 || !(concentration > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid,
                "random_markov needs V >= 2, order >= 1, concentration > 0");
  }
  const std::size_t count = MarkovModel::context_count(order, vocab_size);
  std::vector<CategoricalDistribution> rows;
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    rows.push_back(sample_dirichlet(vocab_size, concentration, rng));
  }
  return MarkovModel(order, vocab_size, std::move(rows));
}

void save_markov(const MarkovModel& model, std::ostream& out) {
  detail::write_magic(out, kModelMagic);
  detail::write_le<std::uint16_t>(out, MarkovModel::kFormatVersion);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.order()));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.vocab_size()));
  for (const auto& row : model.rows()) {
    for (double p : row.probs()) detail::write_f64(out, p);
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing Markov model");
}

MarkovModel load_markov(std::istream& in) {
  detail::expect_magic(in, kModelMagic);
  const auto version = detail::read_le<std::uint16_t>(in, "version");
  if (version != MarkovModel::kFormatVersion) {
    throw Error(ErrorCode::kFormat,
                "unsupported Markov model format version " + std::to_string(version));
  }
  const auto order = detail::read_le<std::uint32_t>(in, "order");
  const auto vocab = detail::read_le<std::uint32_t>(in, "vocab size");
  if (order < 1 || vocab < 1) throw Error(ErrorCode::kFormat, "order and V must be positive");
  const std::size_t count = MarkovModel::context_count(order, vocab);
  std::vector<CategoricalDistribution> rows;
  rows.reserve(count);
  std::vector<double> probs(vocab);
  for (std::size_t r = 0; r < count; ++r) {
    for (double& p : probs) p = detail::read_f64(in, "row entry");
    rows.emplace_back(probs);
  }
  return MarkovModel(order, vocab, std::move(rows));
}

void save_markov(const MarkovModel& model, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  save_markov(model, out);
}

MarkovModel load_markov(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return load_markov(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace phrasespec
