// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Each criterion also has a wall-clock budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "phrasespec/decoder.hpp"
#include "phrasespec/harness.hpp"
#include "phrasespec/theory.hpp"

namespace {

using namespace phrasespec;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome phrase_bound() {
  theory::SweepOptions opts;
  opts.trials = 1000;
  opts.max_vocab = 8;
  opts.max_length = 3;
  opts.tolerance = 1e-12;
  const auto s = theory::proposition1_sweep(opts, 20240601);
  return {s.violations == 0,
          fmt("trials=%llu violations=%llu min_gap=%.3e mean_gap=%.4f",
              static_cast<unsigned long long>(s.trials),
              static_cast<unsigned long long>(s.violations), s.min_gap, s.mean_gap)};
}

Outcome min_inequality() {
  const auto s = theory::min_inequality_sweep(100000, 8, 1e-6, 1e6, 77);
  return {s.failures == 0 && s.trials == 100000,
          fmt("lists=%llu failures=%llu max(rhs-lhs)=%.3e",
              static_cast<unsigned long long>(s.trials),
              static_cast<unsigned long long>(s.failures), s.max_deficit)};
}

Outcome alpha_definition() {
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 2 + rng.below(15);
    const auto p = sample_dirichlet(n, 0.1 + rng.uniform() * 5.0, rng);
    const auto q = sample_dirichlet(n, 0.1 + rng.uniform() * 5.0, rng);
    double overlap = 0.0;
    for (std::size_t x = 0; x < n; ++x) overlap += std::min(p.probs()[x], q.probs()[x]);
    worst = std::max(worst, std::abs(theory::alpha(p, q) - overlap));
  }
  const double worked =
      theory::alpha(CategoricalDistribution({0.7, 0.3}), CategoricalDistribution({0.5, 0.5}));
  return {worst <= 1e-12 && std::abs(worked - 0.8) <= 1e-15,
          fmt("pairs=10000 max|alpha-overlap|=%.3e worked_case=%.17g", worst, worked)};
}

Outcome token_losslessness() {
  constexpr std::size_t kVocab = 4;
  constexpr std::size_t kLength = 64;
  constexpr std::size_t kRuns = 100000;
  constexpr std::size_t kReportedRuns = 10000;
  Rng model_rng(41);
  const auto target = random_markov(1, kVocab, 1.0, model_rng);
  VerifyConfig cfg;
  cfg.mode = DecodeMode::kSjd;
  cfg.window_size = 16;

  std::vector<TokenSequence> sjd(kRuns), ancestral(kRuns);
  harness::parallel_for(kRuns, 0, [&](std::size_t i) {
    Rng a(derive_seed(1, i));
    sjd[i] = decode(target, nullptr, cfg, kLength, a).tokens;
    Rng b(derive_seed(2, i));
    ancestral[i] = ancestral_sample(target, kLength, b);
  });

  auto max_tv = [&](std::size_t runs, std::size_t& worst_pos) {
    double worst = 0.0;
    for (std::size_t pos = 0; pos < kLength; ++pos) {
      std::vector<double> fa(kVocab, 0.0), fb(kVocab, 0.0);
      for (std::size_t i = 0; i < runs; ++i) {
        fa[sjd[i][pos]] += 1.0 / static_cast<double>(runs);
        fb[ancestral[i][pos]] += 1.0 / static_cast<double>(runs);
      }
      const double tv = total_variation(fa, fb);
      if (tv > worst) {
        worst = tv;
        worst_pos = pos;
      }
    }
    return worst;
  };
  std::size_t worst_pos = 0, small_pos = 0;
  const double worst = max_tv(kRuns, worst_pos);
  const double small = max_tv(kReportedRuns, small_pos);
  return {worst <= 0.02,
          fmt("runs=%zu max per-position TV=%.4f at position %zu (limit 0.02); "
              "first %zu runs: %.4f",
              kRuns, worst, worst_pos, kReportedRuns, small)};
}

Outcome greedy_fixed_point() {
  Rng rng(5);
  int mismatches = 0;
  int slow = 0;
  for (int m = 0; m < 100; ++m) {
    const std::size_t vocab = 2 + rng.below(15);
    const std::size_t order = 1 + rng.below(2);
    const auto target = random_markov(order, vocab, 0.1 + rng.uniform() * 2.0, rng);
    const std::size_t n = 1 + rng.below(128);
    VerifyConfig cfg;
    cfg.mode = DecodeMode::kJacobi;
    cfg.greedy = true;
    cfg.window_size = 1 + rng.below(32);
    Rng decode_rng(static_cast<std::uint64_t>(m));
    const auto result = decode(target, nullptr, cfg, n, decode_rng);
    if (result.tokens != greedy_sequential(target, n)) ++mismatches;
    if (result.metrics.iterations() > n) ++slow;
  }
  return {mismatches == 0 && slow == 0,
          fmt("models=100 mismatches=%d over_N_iterations=%d", mismatches, slow)};
}

harness::ExperimentConfig planted_config() {
  harness::ExperimentConfig cfg;
  cfg.seed = 1;
  cfg.decodes = 200;
  cfg.merges = 256;
  cfg.tau = 0.01;
  cfg.planting_rate = 0.95;
  return cfg;
}

Outcome nfe_reduction() {
  auto cfg = planted_config();
  cfg.modes = {DecodeMode::kSjd, DecodeMode::kSjdPv};
  const auto report = harness::run_benchmark(cfg);
  const double sjd = report.summary(DecodeMode::kSjd).mean_nfe;
  const double pv = report.summary(DecodeMode::kSjdPv).mean_nfe;
  return {pv <= 0.95 * sjd, fmt("decodes=%zu mean NFE sjd=%.2f sjd_pv=%.2f ratio=%.4f (limit 0.95)",
                                cfg.decodes, sjd, pv, pv / sjd)};
}

Outcome tau_trend() {
  const auto cfg = planted_config();
  const auto setup = harness::prepare_experiment(cfg);
  const std::vector<double> taus{0.005, 0.01, 0.02, 0.05};
  const auto rows = harness::run_tau_sweep(cfg, setup, taus);
  int inversions = 0;
  bool within_noise = true;
  std::string series;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    series += fmt("%s%.2f", i ? " -> " : "", rows[i].mean_nfe);
    if (i == 0) continue;
    if (rows[i].mean_nfe > rows[i - 1].mean_nfe) {
      ++inversions;
      within_noise &= rows[i].mean_nfe <= rows[i - 1].mean_nfe * 1.01;
    }
  }
  return {inversions == 0 || (inversions == 1 && within_noise),
          "mean NFE " + series + fmt(" inversions=%d", inversions)};
}

Outcome merge_shape() {
  const auto cfg = planted_config();
  const auto setup = harness::prepare_experiment(cfg);
  const auto rows = harness::run_merge_sweep(cfg, setup, cfg.merge_grid);
  const double small = rows[0].mean_nfe;
  const double medium = rows[1].mean_nfe;
  const double large = rows[2].mean_nfe;
  const double gain = (small - medium) / small;
  const double drift = std::abs(large - medium) / medium;
  return {gain >= 0.03 && drift <= 0.02,
          fmt("M=%zu/%zu/%zu NFE %.2f -> %.2f -> %.2f gain=%.1f%% (>=3%%) drift=%.2f%% (<=2%%)",
              rows[0].merges, rows[1].merges, rows[2].merges, small, medium, large, 100 * gain,
              100 * drift)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome library_determinism() {
  harness::PlantedOptions opts;
  Rng rng(12);
  const auto planted = harness::planted_phrase_corpus(opts, rng);
  const auto dir = fs::temp_directory_path() / "phrasespec_acceptance";
  fs::create_directories(dir);
  const auto a = dir / "a.psdl";
  const auto b = dir / "b.psdl";
  const auto lib = build_library(planted.corpus, opts.vocab_size, 256);
  save_library(lib, a);
  save_library(build_library(planted.corpus, opts.vocab_size, 256), b);
  const std::string bytes = slurp(a);
  const bool identical = !bytes.empty() && bytes == slurp(b);
  const auto loaded = load_library(a);
  bool buckets_equal = loaded == lib;
  for (TokenId v = 0; v < opts.vocab_size && buckets_equal; ++v) {
    const auto x = lib.match(v);
    const auto y = loaded.match(v);
    buckets_equal = std::equal(x.begin(), x.end(), y.begin(), y.end());
  }
  fs::remove_all(dir);
  return {identical && buckets_equal,
          fmt("phrases=%zu bytes=%zu byte_identical=%d round_trip_equal=%d", lib.size(),
              bytes.size(), identical, buckets_equal)};
}

Outcome monte_carlo_agreement() {
  constexpr int kInstances = 50;
  std::vector<int> ok(kInstances, 0);
  harness::parallel_for(kInstances, 0, [&](std::size_t i) {
    Rng rng(derive_seed(99, i));
    const std::size_t vocab = 2 + rng.below(7);
    const std::size_t length = 1 + rng.below(3);
    const auto inst = theory::random_instance(vocab, length, 0.1, 10.0, rng);
    const double exact = theory::alpha_phr_exact(inst.p, inst.q);
    const auto mc = theory::alpha_phr_mc(inst.p, inst.q, 1000000, rng);
    ok[i] = std::abs(mc.estimate - exact) <= 3.0 * mc.std_error + 1e-15 ? 1 : 0;
  });
  int passing = 0;
  for (int v : ok) passing += v;
  return {passing >= 48, fmt("within 3 SE on %d/50 instances (need 48)", passing)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "alpha_phr >= alpha_seq on random instances", 10, phrase_bound},
      {2, "min(1, prod r) >= prod min(1, r)", 5, min_inequality},
      {3, "alpha equals overlap mass", 2, alpha_definition},
      {4, "token-wise losslessness vs ancestral", 60, token_losslessness},
      {5, "greedy Jacobi fixed point", 30, greedy_fixed_point},
      {6, "planted benchmark NFE reduction", 300, nfe_reduction},
      {7, "tau ablation trend", 600, tau_trend},
      {8, "merge-count ablation shape", 600, merge_shape},
      {9, "library determinism and round trip", 5, library_determinism},
      {10, "Monte Carlo vs exact agreement", 60, monte_carlo_agreement},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    const bool in_budget = elapsed.count() <= c.budget_seconds;
    const bool pass = out.pass && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] criterion %2d: %s | %s | %.2fs (budget %.0fs)%s\n", pass ? "PASS" : "FAIL",
                c.id, c.name, out.detail.c_str(), elapsed.count(), c.budget_seconds,
                in_budget ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
