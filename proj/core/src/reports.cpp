#include <fstream>

#include "phrasespec/harness.hpp"

namespace phrasespec::harness {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.precision(17);
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

void require_rows(bool non_empty, const char* what) {
  if (!non_empty) throw Error(ErrorCode::kConfigInvalid, std::string("nothing to write: ") + what);
}

nlohmann::json mode_json(const ModeSummary& s) {
  return {
      {"mode", to_string(s.mode)},
      {"runs", s.runs},
      {"mean_nfe", s.mean_nfe},
      {"mean_tokens_per_iteration", s.mean_tokens_per_iteration},
      {"token_accept_rate", s.token_accept_rate},
      {"phrase_attempts_per_run", s.phrase_attempts_per_run},
      {"phrase_accept_rate", s.phrase_accept_rate},
      {"phrase_hit_rate", s.phrase_hit_rate},
      {"nfe_acceleration", s.nfe_acceleration},
      {"seq_divergence", s.seq_divergence},
      {"wall_clock_seconds", s.wall_clock_seconds},
  };
}

}  // namespace

nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json doc;
  doc["report_version"] = kReportVersion;
  doc["config"] = config.to_json();
  doc["library_size"] = library_size;
  doc["modes"] = nlohmann::json::array();
  for (const auto& s : modes) doc["modes"].push_back(mode_json(s));
  doc["runs"] = nlohmann::json::array();
  for (const auto& r : rows) {
    doc["runs"].push_back({
        {"mode", to_string(r.mode)},
        {"run", r.run},
        {"seed", r.seed},
        {"nfe", r.metrics.nfe},
        {"tokens_emitted", r.metrics.tokens_emitted},
        {"phrase_attempts", r.metrics.phrase_attempts},
        {"phrase_accepts", r.metrics.phrase_accepts},
        {"phrase_tokens", r.metrics.phrase_tokens},
        {"token_accepts", r.metrics.token_accepts},
        {"token_rejects", r.metrics.token_rejects},
    });
  }
  return doc;
}

void write_runs_csv(const BenchmarkReport& report, const std::filesystem::path& path) {
  require_rows(!report.rows.empty(), "benchmark has no runs");
  auto out = open_output(path);
  out << "mode,run,seed,nfe,tokens_emitted,mean_tokens_per_iteration,phrase_attempts,"
         "phrase_accepts,phrase_tokens,token_accepts,token_rejects\n";
  for (const auto& r : report.rows) {
    const auto& m = r.metrics;
    out << to_string(r.mode) << ',' << r.run << ',' << r.seed << ',' << m.nfe << ','
        << m.tokens_emitted << ',' << m.mean_tokens_per_iteration() << ',' << m.phrase_attempts
        << ',' << m.phrase_accepts << ',' << m.phrase_tokens << ',' << m.token_accepts << ','
        << m.token_rejects << '\n';
  }
  finish(out, path);
}

void write_modes_csv(const BenchmarkReport& report, const std::filesystem::path& path) {
  require_rows(!report.modes.empty(), "benchmark has no modes");
  auto out = open_output(path);
  out << "mode,runs,mean_nfe,nfe_acceleration,mean_tokens_per_iteration,token_accept_rate,"
         "phrase_attempts_per_run,phrase_accept_rate,phrase_hit_rate,seq_divergence,"
         "wall_clock_seconds\n";
  for (const auto& s : report.modes) {
    out << to_string(s.mode) << ',' << s.runs << ',' << s.mean_nfe << ',' << s.nfe_acceleration
        << ',' << s.mean_tokens_per_iteration << ',' << s.token_accept_rate << ','
        << s.phrase_attempts_per_run << ',' << s.phrase_accept_rate << ',' << s.phrase_hit_rate
        << ',' << s.seq_divergence << ',' << s.wall_clock_seconds << '\n';
  }
  finish(out, path);
}

void write_tau_csv(const std::vector<TauRow>& rows, const std::filesystem::path& path) {
  require_rows(!rows.empty(), "tau sweep is empty");
  auto out = open_output(path);
  out << "tau,mean_nfe,phrase_accept_rate,seq_divergence\n";
  for (const auto& r : rows) {
    out << r.tau << ',' << r.mean_nfe << ',' << r.phrase_accept_rate << ',' << r.seq_divergence
        << '\n';
  }
  finish(out, path);
}

void write_merge_csv(const std::vector<MergeRow>& rows, const std::filesystem::path& path) {
  require_rows(!rows.empty(), "merge sweep is empty");
  auto out = open_output(path);
  out << "M,library_size,mean_nfe,phrase_hit_rate\n";
  for (const auto& r : rows) {
    out << r.merges << ',' << r.library_size << ',' << r.mean_nfe << ',' << r.phrase_hit_rate
        << '\n';
  }
  finish(out, path);
}

void write_cooccurrence_csv(const std::vector<PairCount>& pairs,
                            const std::filesystem::path& path) {
  require_rows(!pairs.empty(), "no co-occurring pairs");
  auto out = open_output(path);
  out << "rank,left,right,count\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out << i + 1 << ',' << pairs[i].left << ',' << pairs[i].right << ',' << pairs[i].count << '\n';
  }
  finish(out, path);
}

nlohmann::json tau_sweep_json(const ExperimentConfig& cfg, const std::vector<TauRow>& rows) {
  nlohmann::json doc{{"report_version", kReportVersion}, {"config", cfg.to_json()}};
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    doc["rows"].push_back({{"tau", r.tau},
                           {"mean_nfe", r.mean_nfe},
                           {"phrase_accept_rate", r.phrase_accept_rate},
                           {"phrase_attempts_per_run", r.phrase_attempts_per_run},
                           {"seq_divergence", r.seq_divergence}});
  }
  return doc;
}

nlohmann::json merge_sweep_json(const ExperimentConfig& cfg, const std::vector<MergeRow>& rows) {
  nlohmann::json doc{{"report_version", kReportVersion}, {"config", cfg.to_json()}};
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    doc["rows"].push_back({{"M", r.merges},
                           {"library_size", r.library_size},
                           {"mean_nfe", r.mean_nfe},
                           {"phrase_hit_rate", r.phrase_hit_rate}});
  }
  return doc;
}

nlohmann::json theory_json(const ExperimentConfig& cfg, const theory::SweepOptions& options,
                           const theory::SweepSummary& sweep,
                           const theory::MinInequalitySweep& min_sweep) {
  return {
      {"report_version", kReportVersion},
      {"config", cfg.to_json()},
      {"options",
       {{"trials", options.trials},
        {"max_vocab", options.max_vocab},
        {"max_length", options.max_length},
        {"min_concentration", options.min_concentration},
        {"max_concentration", options.max_concentration},
        {"tolerance", options.tolerance},
        {"min_inequality_trials", min_sweep.trials}}},
      {"trials", sweep.trials},
      {"violations", sweep.violations},
      {"gap_histogram", sweep.gap_histogram},
      {"min_gap", sweep.min_gap},
      {"max_gap", sweep.max_gap},
      {"mean_gap", sweep.mean_gap},
      {"min_inequality_trials", min_sweep.trials},
      {"min_inequality_failures", min_sweep.failures},
      {"min_inequality_max_deficit", min_sweep.max_deficit},
  };
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

}  // namespace phrasespec::harness
