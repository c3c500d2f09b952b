#include <atomic>
#include <algorithm>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "phrasespec/harness.hpp"

namespace phrasespec::harness {
namespace {

// Independent random streams derived from the experiment seed.
constexpr std::uint64_t kModelStream = 0x6d6f64656cULL;
constexpr std::uint64_t kDecodeStream = 0x6465636f6465ULL;
constexpr std::uint64_t kAncestralStream = 0x616e63ULL;

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::vector<TokenSequence> sample_corpus(const ConditionalModel& model, std::size_t sequences,
                                         std::size_t length, Rng& rng) {
  std::vector<TokenSequence> out;
  out.reserve(sequences);
  for (std::size_t i = 0; i < sequences; ++i) out.push_back(ancestral_sample(model, length, rng));
  return out;
}

}  // namespace

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

ExperimentSetup prepare_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentSetup setup;
  Rng rng(derive_seed(cfg.seed, kModelStream));
  switch (cfg.model_source) {
    case ModelSource::kPlanted: {
      PlantedOptions opts;
      opts.vocab_size = cfg.vocab_size;
      opts.phrase_count = cfg.phrase_count;
      opts.phrase_len = cfg.phrase_len;
      opts.sequences = cfg.corpus_sequences;
      opts.seq_len = cfg.corpus_seq_len;
      opts.planting_rate = cfg.planting_rate;
      opts.concentration = cfg.concentration;
      PlantedCorpus planted = planted_phrase_corpus(opts, rng);
      setup.target = std::make_shared<const MarkovModel>(std::move(planted.model));
      setup.corpus = std::move(planted.corpus);
      setup.planted_phrases = std::move(planted.phrases);
      break;
    }
    case ModelSource::kRandom:
      setup.target = std::make_shared<const MarkovModel>(
          random_markov(cfg.order, cfg.vocab_size, cfg.concentration, rng));
      setup.corpus = sample_corpus(*setup.target, cfg.corpus_sequences, cfg.corpus_seq_len, rng);
      break;
    case ModelSource::kFile:
      setup.target = std::make_shared<const MarkovModel>(load_markov(cfg.model_path));
      setup.corpus = sample_corpus(*setup.target, cfg.corpus_sequences, cfg.corpus_seq_len, rng);
      break;
  }
  if (!cfg.corpus_path.empty()) setup.corpus = read_corpus(cfg.corpus_path);

  const std::size_t vocab = setup.target->vocab_size();
  if (!cfg.library_path.empty()) {
    setup.library = load_library(cfg.library_path);
    if (setup.library.vocab_size() != vocab) {
      throw Error(ErrorCode::kConfigInvalid, "library vocabulary differs from the target model");
    }
  } else {
    setup.library = build_library(setup.corpus, vocab, cfg.merges, cfg.max_phrase_len);
  }
  return setup;
}

std::uint64_t decode_seed(std::uint64_t seed, std::size_t run) {
  return derive_seed(derive_seed(seed, kDecodeStream), run);
}

const ModeSummary& BenchmarkReport::summary(DecodeMode mode) const {
  for (const auto& s : modes) {
    if (s.mode == mode) return s;
  }
  throw Error(ErrorCode::kConfigInvalid, std::string("mode not in report: ") + to_string(mode));
}

double marginal_divergence(const std::vector<TokenSequence>& a,
                           const std::vector<TokenSequence>& b, std::size_t vocab_size) {
  if (a.empty() || b.empty()) return 0.0;
  const std::size_t length = std::min(a.front().size(), b.front().size());
  if (length == 0) return 0.0;
  std::vector<double> fa(vocab_size), fb(vocab_size);
  double total = 0.0;
  for (std::size_t pos = 0; pos < length; ++pos) {
    std::fill(fa.begin(), fa.end(), 0.0);
    std::fill(fb.begin(), fb.end(), 0.0);
    for (const auto& s : a) fa[s.at(pos)] += 1.0 / static_cast<double>(a.size());
    for (const auto& s : b) fb[s.at(pos)] += 1.0 / static_cast<double>(b.size());
    total += total_variation(fa, fb);
  }
  return total / static_cast<double>(length);
}

BenchmarkReport run_benchmark(const ExperimentConfig& cfg, const ExperimentSetup& setup) {
  cfg.validate();
  if (!setup.target) throw Error(ErrorCode::kConfigInvalid, "experiment has no target model");
  const ConditionalModel& target = *setup.target;
  const std::size_t vocab = target.vocab_size();

  BenchmarkReport report;
  report.config = cfg;
  report.library_size = setup.library.size();

  std::vector<TokenSequence> reference(cfg.decodes);
  parallel_for(cfg.decodes, cfg.threads, [&](std::size_t i) {
    Rng rng(derive_seed(derive_seed(cfg.seed, kAncestralStream), i));
    reference[i] = ancestral_sample(target, cfg.tokens, rng);
  });

  for (DecodeMode mode : cfg.modes) {
    const VerifyConfig vcfg = cfg.verify_config(mode);
    const PhraseLibrary* lib = mode == DecodeMode::kSjdPv ? &setup.library : nullptr;
    std::vector<RunRow> rows(cfg.decodes);
    std::vector<TokenSequence> outputs(cfg.decodes);

    const auto start = std::chrono::steady_clock::now();
    parallel_for(cfg.decodes, cfg.threads, [&](std::size_t i) {
      const std::uint64_t seed = decode_seed(cfg.seed, i);
      Rng rng(seed);
      DecodeResult result = decode(target, lib, vcfg, cfg.tokens, rng);
      rows[i] = {mode, i, seed, std::move(result.metrics)};
      outputs[i] = std::move(result.tokens);
    });
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    ModeSummary s;
    s.mode = mode;
    s.runs = rows.size();
    s.wall_clock_seconds = elapsed.count();
    DecodeMetrics total;
    for (const auto& row : rows) total += row.metrics;
    const auto runs = static_cast<double>(rows.size());
    s.mean_nfe = static_cast<double>(total.nfe) / runs;
    s.mean_tokens_per_iteration = total.mean_tokens_per_iteration();
    s.token_accept_rate = ratio(static_cast<double>(total.token_accepts),
                                static_cast<double>(total.token_accepts + total.token_rejects));
    s.phrase_attempts_per_run = static_cast<double>(total.phrase_attempts) / runs;
    s.phrase_accept_rate = ratio(static_cast<double>(total.phrase_accepts),
                                 static_cast<double>(total.phrase_attempts));
    s.phrase_hit_rate = ratio(static_cast<double>(total.phrase_tokens),
                              static_cast<double>(total.tokens_emitted));
    s.seq_divergence = marginal_divergence(outputs, reference, vocab);
    report.modes.push_back(s);
    report.rows.insert(report.rows.end(), std::make_move_iterator(rows.begin()),
                       std::make_move_iterator(rows.end()));
  }
  const double base = report.modes.front().mean_nfe;
  for (auto& s : report.modes) s.nfe_acceleration = ratio(base, s.mean_nfe);
  return report;
}

BenchmarkReport run_benchmark(const ExperimentConfig& cfg) {
  return run_benchmark(cfg, prepare_experiment(cfg));
}

std::vector<TauRow> run_tau_sweep(const ExperimentConfig& cfg, const ExperimentSetup& setup,
                                  const std::vector<double>& taus) {
  if (taus.empty()) throw Error(ErrorCode::kConfigInvalid, "tau grid is empty");
  if (!std::is_sorted(taus.begin(), taus.end())) {
    throw Error(ErrorCode::kConfigInvalid, "tau grid must be ascending");
  }
  std::vector<TauRow> rows;
  for (double tau : taus) {
    ExperimentConfig point = cfg;
    point.tau = tau;
    point.modes = {DecodeMode::kSjdPv};
    const BenchmarkReport report = run_benchmark(point, setup);
    const ModeSummary& s = report.modes.front();
    rows.push_back({tau, s.mean_nfe, s.phrase_accept_rate, s.phrase_attempts_per_run,
                    s.seq_divergence});
  }
  return rows;
}

std::vector<MergeRow> run_merge_sweep(const ExperimentConfig& cfg, const ExperimentSetup& setup,
                                      const std::vector<std::size_t>& merge_counts) {
  if (merge_counts.empty()) throw Error(ErrorCode::kConfigInvalid, "merge grid is empty");
  std::vector<MergeRow> rows;
  for (std::size_t merges : merge_counts) {
    ExperimentConfig point = cfg;
    point.merges = merges;
    point.modes = {DecodeMode::kSjdPv};
    ExperimentSetup rebuilt;
    rebuilt.target = setup.target;
    rebuilt.planted_phrases = setup.planted_phrases;
    rebuilt.library =
        build_library(setup.corpus, setup.target->vocab_size(), merges, cfg.max_phrase_len);
    const BenchmarkReport report = run_benchmark(point, rebuilt);
    const ModeSummary& s = report.modes.front();
    rows.push_back({merges, rebuilt.library.size(), s.mean_nfe, s.phrase_hit_rate});
  }
  return rows;
}

}  // namespace phrasespec::harness
