// phrasespec: phrase-library construction, speculative Jacobi decoding and
// the experiment runners behind one command-line entry point.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phrasespec/harness.hpp"

namespace fs = std::filesystem;
using namespace phrasespec;
using harness::ExperimentConfig;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
};

ExperimentConfig resolve_config(const GlobalOptions& g) {
  ExperimentConfig cfg;
  if (!g.config_path.empty()) harness::load_config(g.config_path, cfg);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigInvalid, "--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

fs::path out_file(const ExperimentConfig& cfg, const std::string& name) {
  return fs::path(cfg.out_dir) / name;
}

void print_modes(const harness::BenchmarkReport& report) {
  std::cout << "mode      mean_nfe   accel  tok/iter  phrase_acc  phrase_hit  seq_div\n";
  for (const auto& s : report.modes) {
    std::printf("%-8s %9.2f %7.3f %9.3f %11.3f %11.3f %8.4f\n", to_string(s.mode), s.mean_nfe,
                s.nfe_acceleration, s.mean_tokens_per_iteration, s.phrase_accept_rate,
                s.phrase_hit_rate, s.seq_divergence);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speculative Jacobi decoding with phrase-level verification"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Experiment seed");
  app.add_option("--config", g.config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "Output directory for reports");
  app.add_option("--set", g.overrides, "Override a config key (key=value), repeatable");

  // build-library
  auto* build = app.add_subcommand("build-library", "Learn a phrase library from a corpus");
  std::string corpus_path, library_out;
  std::size_t merges = 256, max_len = PhraseLibrary::kDefaultMaxPhraseLen, vocab = 0;
  build->add_option("--corpus", corpus_path, "Corpus file")->required()->check(CLI::ExistingFile);
  build->add_option("--merges", merges, "Merge iterations M");
  build->add_option("--max-len", max_len, "Longest phrase kept in the index");
  build->add_option("--vocab", vocab, "Vocabulary size (default: largest token + 1)");
  build->add_option("--out", library_out, "Library output path")->required();

  // gen-planted
  auto* gen = app.add_subcommand("gen-planted", "Write a planted-phrase corpus and its model");
  std::string gen_corpus, gen_model;
  gen->add_option("--corpus-out", gen_corpus, "Corpus output path")->required();
  gen->add_option("--model-out", gen_model, "Model output path");

  // decode
  auto* dec = app.add_subcommand("decode", "Run a single decode and print its metrics");
  std::string mode_name = "sjd_pv";
  dec->add_option("--mode", mode_name, "jacobi | sjd | sjd_pv");

  auto* bench = app.add_subcommand("bench", "Matched-seed benchmark over the configured modes");
  auto* tau = app.add_subcommand("sweep-tau", "Neighborhood threshold ablation");
  auto* merge = app.add_subcommand("sweep-merges", "Merge-count ablation");

  auto* theory_cmd = app.add_subcommand("theory-check", "Acceptance-rate theory oracles");
  std::uint64_t trials = 1000, min_trials = 100000;
  std::size_t max_vocab = 8, max_length = 3;
  theory_cmd->add_option("--trials", trials, "Random instances for the bound check");
  theory_cmd->add_option("--max-vocab", max_vocab, "Largest vocabulary per instance");
  theory_cmd->add_option("--max-len", max_length, "Longest phrase per instance");
  theory_cmd->add_option("--min-ineq-trials", min_trials, "Random ratio lists");

  auto* cooc = app.add_subcommand("cooc-stats", "Adjacent-pair co-occurrence counts");
  std::string cooc_corpus;
  std::size_t top_n = 500;
  cooc->add_option("--corpus", cooc_corpus, "Corpus file")->required()->check(CLI::ExistingFile);
  cooc->add_option("--top", top_n, "Number of pairs to keep");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = resolve_config(g);

    if (*build) {
      const Corpus corpus = read_corpus(corpus_path);
      if (vocab == 0) vocab = infer_vocab_size(corpus);
      const PhraseLibrary lib = build_library(corpus, vocab, merges, max_len);
      save_library(lib, fs::path(library_out));
      std::cout << "rules " << lib.merge_count() << " phrases " << lib.size() << " longest "
                << lib.longest_phrase() << " -> " << library_out << '\n';
    } else if (*gen) {
      harness::PlantedOptions opts;
      opts.vocab_size = cfg.vocab_size;
      opts.phrase_count = cfg.phrase_count;
      opts.phrase_len = cfg.phrase_len;
      opts.sequences = cfg.corpus_sequences;
      opts.seq_len = cfg.corpus_seq_len;
      opts.planting_rate = cfg.planting_rate;
      opts.concentration = cfg.concentration;
      Rng rng(cfg.seed);
      const auto planted = harness::planted_phrase_corpus(opts, rng);
      write_corpus(planted.corpus, fs::path(gen_corpus));
      if (!gen_model.empty()) save_markov(planted.model, fs::path(gen_model));
      std::cout << "sequences " << planted.corpus.size() << " phrases " << planted.phrases.size()
                << " -> " << gen_corpus << '\n';
    } else if (*dec) {
      const DecodeMode mode = parse_mode(mode_name);
      cfg.modes = {mode};
      const auto setup = harness::prepare_experiment(cfg);
      Rng rng(harness::decode_seed(cfg.seed, 0));
      const PhraseLibrary* lib = mode == DecodeMode::kSjdPv ? &setup.library : nullptr;
      const DecodeResult r = decode(*setup.target, lib, cfg.verify_config(mode), cfg.tokens, rng);
      nlohmann::json doc{{"report_version", harness::kReportVersion},
                         {"config", cfg.to_json()},
                         {"mode", to_string(mode)},
                         {"tokens", r.tokens},
                         {"nfe", r.metrics.nfe},
                         {"tokens_per_iteration", r.metrics.tokens_per_iteration},
                         {"phrase_attempts", r.metrics.phrase_attempts},
                         {"phrase_accepts", r.metrics.phrase_accepts},
                         {"token_accepts", r.metrics.token_accepts},
                         {"token_rejects", r.metrics.token_rejects}};
      harness::write_json(doc, out_file(cfg, "decode.json"));
      std::cout << "nfe " << r.metrics.nfe << " tokens " << r.tokens.size() << " phrases accepted "
                << r.metrics.phrase_accepts << "/" << r.metrics.phrase_attempts << '\n';
    } else if (*bench) {
      const auto report = harness::run_benchmark(cfg);
      harness::write_json(report.to_json(), out_file(cfg, "bench.json"));
      harness::write_runs_csv(report, out_file(cfg, "bench_runs.csv"));
      harness::write_modes_csv(report, out_file(cfg, "bench_modes.csv"));
      print_modes(report);
    } else if (*tau) {
      const auto setup = harness::prepare_experiment(cfg);
      const auto rows = harness::run_tau_sweep(cfg, setup, cfg.taus);
      harness::write_tau_csv(rows, out_file(cfg, "tau_sweep.csv"));
      harness::write_json(harness::tau_sweep_json(cfg, rows), out_file(cfg, "tau_sweep.json"));
      for (const auto& r : rows) {
        std::printf("tau %.4f  mean_nfe %.2f  phrase_accept %.3f  seq_div %.4f\n", r.tau,
                    r.mean_nfe, r.phrase_accept_rate, r.seq_divergence);
      }
    } else if (*merge) {
      const auto setup = harness::prepare_experiment(cfg);
      const auto rows = harness::run_merge_sweep(cfg, setup, cfg.merge_grid);
      harness::write_merge_csv(rows, out_file(cfg, "merge_sweep.csv"));
      harness::write_json(harness::merge_sweep_json(cfg, rows), out_file(cfg, "merge_sweep.json"));
      for (const auto& r : rows) {
        std::printf("M %zu  library %zu  mean_nfe %.2f  phrase_hit %.3f\n", r.merges,
                    r.library_size, r.mean_nfe, r.phrase_hit_rate);
      }
    } else if (*theory_cmd) {
      theory::SweepOptions opts;
      opts.trials = trials;
      opts.max_vocab = max_vocab;
      opts.max_length = max_length;
      const auto sweep = theory::proposition1_sweep(opts, cfg.seed);
      const auto mins = theory::min_inequality_sweep(min_trials, 8, 1e-6, 1e6, cfg.seed);
      const auto doc = harness::theory_json(cfg, opts, sweep, mins);
      harness::write_json(doc, out_file(cfg, "theory.json"));
      std::cout << doc.dump(2) << '\n';
      if (sweep.violations != 0 || mins.failures != 0) return 2;
    } else if (*cooc) {
      const auto pairs = cooccurrence_stats(read_corpus(cooc_corpus), top_n);
      harness::write_cooccurrence_csv(pairs, out_file(cfg, "cooc.csv"));
      for (std::size_t i = 0; i < std::min<std::size_t>(pairs.size(), 10); ++i) {
        std::cout << pairs[i].left << ' ' << pairs[i].right << ' ' << pairs[i].count << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << "phrasespec: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "phrasespec: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
