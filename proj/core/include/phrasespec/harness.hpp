#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phrasespec/decoder.hpp"
#include "phrasespec/models.hpp"
#include "phrasespec/phrase_lib.hpp"
#include "phrasespec/theory.hpp"

namespace phrasespec::harness {

inline constexpr int kReportVersion = 1;

/// Where the target model comes from.
enum class ModelSource { kPlanted, kRandom, kFile };

/// Flat experiment description. Every field has a key in the key=value
/// config format; the key is the field name.
struct ExperimentConfig {
  std::uint64_t seed = 1;

  ModelSource model_source = ModelSource::kPlanted;
  std::string model_path;
  std::size_t vocab_size = 32;
  std::size_t order = 2;
  double concentration = 0.5;

  // Planted-phrase generator.
  std::size_t phrase_count = 6;
  std::size_t phrase_len = 4;
  double planting_rate = 0.95;

  // Library corpus: read from corpus_path when set, otherwise sampled from
  // the target model.
  std::string corpus_path;
  std::size_t corpus_sequences = 24;
  std::size_t corpus_seq_len = 128;
  std::string library_path;

  std::vector<DecodeMode> modes{DecodeMode::kSjd, DecodeMode::kSjdPv};
  std::size_t tokens = 256;
  std::size_t decodes = 200;
  std::size_t window = 16;
  double tau = 0.01;
  std::size_t merges = 256;
  std::size_t max_phrase_len = PhraseLibrary::kDefaultMaxPhraseLen;
  bool greedy = false;

  std::vector<double> taus{0.005, 0.01, 0.02, 0.05};
  std::vector<std::size_t> merge_grid{128, 256, 512};

  std::size_t threads = 0;  ///< 0 picks the hardware concurrency
  std::string out_dir = ".";

  /// Throws kConfigInvalid on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  void validate() const;
  VerifyConfig verify_config(DecodeMode mode) const;

  nlohmann::json to_json() const;
};

/// Parses '#'-commented key=value lines into `cfg`.
void load_config(const std::filesystem::path& path, ExperimentConfig& cfg);

struct PlantedOptions {
  std::size_t vocab_size = 32;
  std::size_t phrase_count = 6;
  std::size_t phrase_len = 4;
  std::size_t sequences = 24;
  std::size_t seq_len = 128;
  double planting_rate = 0.95;
  double concentration = 0.5;
};

struct PlantedCorpus {
  Corpus corpus;
  MarkovModel model;
  std::vector<TokenSequence> phrases;
};

/// Order-2 Markov model with planted phrases plus a corpus sampled from it.
/// Phrases have distinct first tokens, later tokens never start a phrase,
/// and no adjacent pair repeats across phrases, so each phrase context is
/// unambiguous. Reaching a phrase's first token continues with its next
/// token with probability planting_rate, and likewise at every later step;
/// the remaining mass follows a Dirichlet background row.
PlantedCorpus planted_phrase_corpus(const PlantedOptions& options, Rng& rng);

/// Model, corpus and library resolved from a config.
struct ExperimentSetup {
  std::shared_ptr<const MarkovModel> target;
  Corpus corpus;
  PhraseLibrary library;
  std::vector<TokenSequence> planted_phrases;
};

ExperimentSetup prepare_experiment(const ExperimentConfig& cfg);

/// Seed of decode repetition `run`; identical for every mode.
std::uint64_t decode_seed(std::uint64_t seed, std::size_t run);

struct RunRow {
  DecodeMode mode = DecodeMode::kSjd;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  DecodeMetrics metrics;
};

struct ModeSummary {
  DecodeMode mode = DecodeMode::kSjd;
  std::size_t runs = 0;
  double mean_nfe = 0.0;
  double mean_tokens_per_iteration = 0.0;
  double token_accept_rate = 0.0;
  double phrase_attempts_per_run = 0.0;
  double phrase_accept_rate = 0.0;
  double phrase_hit_rate = 0.0;  ///< share of emitted tokens committed by phrases
  double nfe_acceleration = 1.0;  ///< mean NFE of the first mode / this mode
  double seq_divergence = 0.0;
  double wall_clock_seconds = 0.0;
};

struct BenchmarkReport {
  ExperimentConfig config;
  std::size_t library_size = 0;
  std::vector<ModeSummary> modes;
  std::vector<RunRow> rows;

  const ModeSummary& summary(DecodeMode mode) const;
  nlohmann::json to_json() const;
};

/// Mean per-position total variation between the empirical marginals of two
/// equally long sequence samples.
double marginal_divergence(const std::vector<TokenSequence>& a,
                           const std::vector<TokenSequence>& b, std::size_t vocab_size);

/// Matched-seed decodes of every configured mode against one target.
BenchmarkReport run_benchmark(const ExperimentConfig& cfg, const ExperimentSetup& setup);
BenchmarkReport run_benchmark(const ExperimentConfig& cfg);

struct TauRow {
  double tau = 0.0;
  double mean_nfe = 0.0;
  double phrase_accept_rate = 0.0;
  double phrase_attempts_per_run = 0.0;
  double seq_divergence = 0.0;
};

/// sjd_pv benchmark per tau with the same seeds on every row.
std::vector<TauRow> run_tau_sweep(const ExperimentConfig& cfg, const ExperimentSetup& setup,
                                  const std::vector<double>& taus);

struct MergeRow {
  std::size_t merges = 0;
  std::size_t library_size = 0;
  double mean_nfe = 0.0;
  double phrase_hit_rate = 0.0;
};

/// Rebuilds the library per merge count over the same corpus and runs
/// matched sjd_pv benchmarks.
std::vector<MergeRow> run_merge_sweep(const ExperimentConfig& cfg, const ExperimentSetup& setup,
                                      const std::vector<std::size_t>& merge_counts);

// CSV emitters. Empty inputs raise kConfigInvalid before any file is created.
void write_runs_csv(const BenchmarkReport& report, const std::filesystem::path& path);
void write_modes_csv(const BenchmarkReport& report, const std::filesystem::path& path);
void write_tau_csv(const std::vector<TauRow>& rows, const std::filesystem::path& path);
void write_merge_csv(const std::vector<MergeRow>& rows, const std::filesystem::path& path);
void write_cooccurrence_csv(const std::vector<PairCount>& pairs, const std::filesystem::path& path);

nlohmann::json tau_sweep_json(const ExperimentConfig& cfg, const std::vector<TauRow>& rows);
nlohmann::json merge_sweep_json(const ExperimentConfig& cfg, const std::vector<MergeRow>& rows);
nlohmann::json theory_json(const ExperimentConfig& cfg, const theory::SweepOptions& options,
                           const theory::SweepSummary& sweep,
                           const theory::MinInequalitySweep& min_sweep);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

/// Runs fn(0) .. fn(count - 1) over a pool of worker threads. Callers write
/// results by index, so output never depends on scheduling.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace phrasespec::harness
