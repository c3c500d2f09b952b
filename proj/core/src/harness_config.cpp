#include <charconv>
#include <fstream>
#include <sstream>

#include "phrasespec/harness.hpp"

namespace phrasespec::harness {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::kConfigInvalid, "bad value '" + value + "' for key '" + key + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return out;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const char* to_string(ModelSource source) {
  switch (source) {
    case ModelSource::kPlanted: return "planted";
    case ModelSource::kRandom: return "random";
    case ModelSource::kFile: return "file";
  }
  return "unknown";
}

}  // namespace

void ExperimentConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  auto u64 = [&] { return parse_u64(key, value); };
  auto size = [&] { return static_cast<std::size_t>(parse_u64(key, value)); };
  auto real = [&] { return parse_double(key, value); };

  if (key == "seed") {
    seed = u64();
  } else if (key == "model_source") {
    if (value == "planted") model_source = ModelSource::kPlanted;
    else if (value == "random") model_source = ModelSource::kRandom;
    else if (value == "file") model_source = ModelSource::kFile;
    else bad_value(key, value);
  } else if (key == "model_path") {
    model_path = value;
    if (!value.empty()) model_source = ModelSource::kFile;
  } else if (key == "vocab_size") {
    vocab_size = size();
  } else if (key == "order") {
    order = size();
  } else if (key == "concentration") {
    concentration = real();
  } else if (key == "phrase_count") {
    phrase_count = size();
  } else if (key == "phrase_len") {
    phrase_len = size();
  } else if (key == "planting_rate") {
    planting_rate = real();
  } else if (key == "corpus_path") {
    corpus_path = value;
  } else if (key == "corpus_sequences") {
    corpus_sequences = size();
  } else if (key == "corpus_seq_len") {
    corpus_seq_len = size();
  } else if (key == "library_path") {
    library_path = value;
  } else if (key == "modes") {
    modes.clear();
    for (const auto& m : split_list(value)) modes.push_back(parse_mode(m));
  } else if (key == "tokens") {
    tokens = size();
  } else if (key == "decodes") {
    decodes = size();
  } else if (key == "window") {
    window = size();
  } else if (key == "tau") {
    tau = real();
  } else if (key == "merges") {
    merges = size();
  } else if (key == "max_phrase_len") {
    max_phrase_len = size();
  } else if (key == "greedy") {
    greedy = parse_bool(key, value);
  } else if (key == "taus") {
    taus.clear();
    for (const auto& t : split_list(value)) taus.push_back(parse_double(key, t));
  } else if (key == "merge_grid") {
    merge_grid.clear();
    for (const auto& m : split_list(value)) merge_grid.push_back(parse_u64(key, m));
  } else if (key == "threads") {
    threads = size();
  } else if (key == "out_dir") {
    out_dir = value;
  } else {
    throw Error(ErrorCode::kConfigInvalid, "unknown config key '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kConfigInvalid, what);
  };
  require(!modes.empty(), "at least one decode mode is required");
  require(tokens >= 1, "tokens must be >= 1");
  require(decodes >= 1, "decodes must be >= 1");
  require(window >= 1, "window must be >= 1");
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  require(max_phrase_len >= 2, "max_phrase_len must be >= 2");
  require(vocab_size >= 2, "vocab_size must be >= 2");
  require(order >= 1, "order must be >= 1");
  require(model_source != ModelSource::kPlanted || order == 2,
          "planted models have order 2; order applies to model_source=random");
  require(concentration > 0.0, "concentration must be positive");
  require(planting_rate > 0.0 && planting_rate <= 1.0, "planting_rate must lie in (0, 1]");
  require(phrase_len >= 2, "phrase_len must be >= 2");
  if (model_source == ModelSource::kFile) {
    require(!model_path.empty(), "model_source=file needs model_path");
    require(std::filesystem::exists(model_path), "model_path does not exist");
  }
  if (!corpus_path.empty()) require(std::filesystem::exists(corpus_path), "corpus_path does not exist");
  if (!library_path.empty()) {
    require(std::filesystem::exists(library_path), "library_path does not exist");
  }
}

VerifyConfig ExperimentConfig::verify_config(DecodeMode mode) const {
  VerifyConfig v;
  v.tau = tau;
  v.window_size = window;
  v.max_phrase_len = max_phrase_len;
  v.mode = mode;
  v.greedy = greedy;
  v.validate();
  return v;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json modes_json = nlohmann::json::array();
  for (auto m : modes) modes_json.push_back(phrasespec::to_string(m));
  return {
      {"seed", seed},
      {"model_source", to_string(model_source)},
      {"model_path", model_path},
      {"vocab_size", vocab_size},
      {"order", order},
      {"concentration", concentration},
      {"phrase_count", phrase_count},
      {"phrase_len", phrase_len},
      {"planting_rate", planting_rate},
      {"corpus_path", corpus_path},
      {"corpus_sequences", corpus_sequences},
      {"corpus_seq_len", corpus_seq_len},
      {"library_path", library_path},
      {"modes", modes_json},
      {"tokens", tokens},
      {"decodes", decodes},
      {"window", window},
      {"tau", tau},
      {"merges", merges},
      {"max_phrase_len", max_phrase_len},
      {"greedy", greedy},
      {"taus", taus},
      {"merge_grid", merge_grid},
      {"threads", threads},
      {"out_dir", out_dir},
  };
}

void load_config(const std::filesystem::path& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigInvalid,
                  path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      cfg.set(body.substr(0, eq), body.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace phrasespec::harness
