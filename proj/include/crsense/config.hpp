#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "crsense/signal.hpp"
#include "crsense/types.hpp"

namespace crsense {

enum class AttackMode { PUEA, Jamming };

inline const char* to_string(AttackMode m) {
  return m == AttackMode::PUEA ? "puea" : "jamming";
}

enum class FeatureMode { Concat, ResidualOnly, GradientOnly };

inline const char* to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::Concat: return "concat";
    case FeatureMode::ResidualOnly: return "residual";
    case FeatureMode::GradientOnly: return "gradient";
  }
  return "concat";
}

/// Full experiment description. Defaults reproduce the reference setup:
/// 7-tap Rayleigh channels, rho 0.9, length-100 signals, M=100 compressed
/// samples against a 400-atom dictionary, 4000/1000 train/test samples per
/// class, SNR grid -5..15 dB.
struct ExperimentConfig {
  AttackMode attack_mode = AttackMode::PUEA;
  std::uint64_t master_seed = 1;

  WaveformSpec waveform;
  int tap_count = 7;
  double rho = 0.9;

  int m = 100;  // compressed length; m == n uses a square random projection
  int k = 400;  // dictionary atoms

  int train_per_class = 4000;
  int test_per_class = 1000;  // per SNR grid point
  std::vector<double> snr_grid_db = {-5.0, 0.0, 5.0, 10.0, 15.0};

  int hidden_dim = 64;
  int epochs = 300;
  double learning_rate = 0.01;
  int batch_size = 64;
  double momentum = 0.9;
  double heldout_fraction = 0.1;

  bool ls_refinement = true;
  FeatureMode feature_mode = FeatureMode::Concat;
  bool train_ed = true;
  bool export_signals = true;
  bool export_traces = false;
  int threads = 0;  // 0 = hardware concurrency

  std::filesystem::path output_dir = "runs/default";

  /// Checks every field and reports all violations at once.
  void validate() const {
    std::vector<std::string> errs;
    try {
      waveform.validate();
    } catch (const std::invalid_argument& e) {
      errs.push_back(e.what());
    }
    if (tap_count < 1) errs.push_back("tap_count must be >= 1");
    if (rho < 0.0 || rho > 1.0) errs.push_back("rho must be in [0,1]");
    if (m < 1) errs.push_back("m must be >= 1");
    if (m > waveform.signal_length)
      errs.push_back("m must be <= signal_length (m == n uses a square Phi)");
    if (k <= m) errs.push_back("k must exceed m (overcomplete dictionary)");
    if (train_per_class < 1) errs.push_back("train_per_class must be >= 1");
    if (test_per_class < 1) errs.push_back("test_per_class must be >= 1");
    if (snr_grid_db.empty()) errs.push_back("snr_grid_db must be non-empty");
    if (hidden_dim < 1) errs.push_back("hidden_dim must be >= 1");
    if (epochs < 1) errs.push_back("epochs must be >= 1");
    if (learning_rate < 0.0) errs.push_back("learning_rate must be >= 0");
    if (batch_size < 1) errs.push_back("batch_size must be >= 1");
    if (momentum < 0.0 || momentum >= 1.0)
      errs.push_back("momentum must be in [0,1)");
    if (heldout_fraction < 0.0 || heldout_fraction >= 1.0)
      errs.push_back("heldout_fraction must be in [0,1)");
    if (threads < 0) errs.push_back("threads must be >= 0");
    if (!errs.empty()) {
      std::string msg = "invalid config:";
      for (const auto& e : errs) msg += "\n  - " + e;
      throw std::invalid_argument(msg);
    }
  }

  std::vector<HypothesisLabel> classes() const {
    if (attack_mode == AttackMode::PUEA)
      return {HypothesisLabel::H0_Hole, HypothesisLabel::H1_PU,
              HypothesisLabel::H2_PUE};
    return {HypothesisLabel::H0_Hole, HypothesisLabel::H1_PU,
            HypothesisLabel::H3_Jammer};
  }

  int feature_dim() const {
    return feature_mode == FeatureMode::Concat ? 2 * m : m;
  }
};

namespace config {

/// Canonical text form; also the config-file format. output_dir and threads
/// are execution details and stay out of the hash, so equal hashes mean
/// equal results.
inline std::string canonical_text(const ExperimentConfig& cfg,
                                  bool for_hash = false) {
  std::ostringstream out;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "attack_mode = \"" << to_string(cfg.attack_mode) << "\"\n";
  out << "master_seed = " << cfg.master_seed << "\n";
  out << "modulation = \"" << to_string(cfg.waveform.modulation) << "\"\n";
  out << "order = " << cfg.waveform.order << "\n";
  out << "oversampling = " << cfg.waveform.oversampling << "\n";
  out << "rolloff = " << num(cfg.waveform.rolloff) << "\n";
  out << "span_symbols = " << cfg.waveform.span_symbols << "\n";
  out << "n = " << cfg.waveform.signal_length << "\n";
  out << "carrier_offset = " << num(cfg.waveform.carrier_offset) << "\n";
  out << "tap_count = " << cfg.tap_count << "\n";
  out << "rho = " << num(cfg.rho) << "\n";
  out << "m = " << cfg.m << "\n";
  out << "k = " << cfg.k << "\n";
  out << "train_per_class = " << cfg.train_per_class << "\n";
  out << "test_per_class = " << cfg.test_per_class << "\n";
  out << "snr_grid_db = [";
  for (std::size_t i = 0; i < cfg.snr_grid_db.size(); ++i)
    out << (i ? ", " : "") << num(cfg.snr_grid_db[i]);
  out << "]\n";
  out << "hidden_dim = " << cfg.hidden_dim << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "learning_rate = " << num(cfg.learning_rate) << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "momentum = " << num(cfg.momentum) << "\n";
  out << "heldout_fraction = " << num(cfg.heldout_fraction) << "\n";
  out << "ls_refinement = " << (cfg.ls_refinement ? "true" : "false") << "\n";
  out << "feature_mode = \"" << to_string(cfg.feature_mode) << "\"\n";
  out << "train_ed = " << (cfg.train_ed ? "true" : "false") << "\n";
  out << "export_signals = " << (cfg.export_signals ? "true" : "false")
      << "\n";
  out << "export_traces = " << (cfg.export_traces ? "true" : "false") << "\n";
  if (!for_hash) {
    out << "threads = " << cfg.threads << "\n";
    out << "output_dir = \"" << cfg.output_dir.string() << "\"\n";
  }
  return out.str();
}

inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a(canonical_text(cfg, true));
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config key '" + key + "': expected a boolean");
}

inline std::vector<double> parse_list(const std::string& v,
                                      const std::string& key) {
  std::string body = trim(v);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']')
    throw std::invalid_argument("config key '" + key + "': expected [list]");
  body = body.substr(1, body.size() - 2);
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace detail

/// Applies one key=value assignment; unknown keys and malformed values
/// throw invalid_argument.
inline void apply_assignment(ExperimentConfig& cfg, const std::string& key,
                             const std::string& raw_value) {
  using detail::parse_bool;
  using detail::parse_list;
  using detail::unquote;
  const std::string v = unquote(detail::trim(raw_value));
  try {
    if (key == "attack_mode") {
      if (v == "puea")
        cfg.attack_mode = AttackMode::PUEA;
      else if (v == "jamming")
        cfg.attack_mode = AttackMode::Jamming;
      else
        throw std::invalid_argument("must be puea or jamming");
    } else if (key == "master_seed") {
      cfg.master_seed = std::stoull(v);
    } else if (key == "modulation") {
      cfg.waveform.modulation = modulation_from_string(v);
    } else if (key == "order") {
      cfg.waveform.order = std::stoi(v);
    } else if (key == "oversampling") {
      cfg.waveform.oversampling = std::stoi(v);
    } else if (key == "rolloff") {
      cfg.waveform.rolloff = std::stod(v);
    } else if (key == "span_symbols") {
      cfg.waveform.span_symbols = std::stoi(v);
    } else if (key == "n") {
      cfg.waveform.signal_length = std::stoi(v);
    } else if (key == "carrier_offset") {
      cfg.waveform.carrier_offset = std::stod(v);
    } else if (key == "tap_count") {
      cfg.tap_count = std::stoi(v);
    } else if (key == "rho") {
      cfg.rho = std::stod(v);
    } else if (key == "m") {
      cfg.m = std::stoi(v);
    } else if (key == "k") {
      cfg.k = std::stoi(v);
    } else if (key == "train_per_class") {
      cfg.train_per_class = std::stoi(v);
    } else if (key == "test_per_class") {
      cfg.test_per_class = std::stoi(v);
    } else if (key == "snr_grid_db") {
      cfg.snr_grid_db = parse_list(raw_value, key);
    } else if (key == "hidden_dim") {
      cfg.hidden_dim = std::stoi(v);
    } else if (key == "epochs") {
      cfg.epochs = std::stoi(v);
    } else if (key == "learning_rate") {
      cfg.learning_rate = std::stod(v);
    } else if (key == "batch_size") {
      cfg.batch_size = std::stoi(v);
    } else if (key == "momentum") {
      cfg.momentum = std::stod(v);
    } else if (key == "heldout_fraction") {
      cfg.heldout_fraction = std::stod(v);
    } else if (key == "ls_refinement") {
      cfg.ls_refinement = parse_bool(v, key);
    } else if (key == "feature_mode") {
      if (v == "concat")
        cfg.feature_mode = FeatureMode::Concat;
      else if (v == "residual")
        cfg.feature_mode = FeatureMode::ResidualOnly;
      else if (v == "gradient")
        cfg.feature_mode = FeatureMode::GradientOnly;
      else
        throw std::invalid_argument("must be concat, residual or gradient");
    } else if (key == "train_ed") {
      cfg.train_ed = parse_bool(v, key);
    } else if (key == "export_signals") {
      cfg.export_signals = parse_bool(v, key);
    } else if (key == "export_traces") {
      cfg.export_traces = parse_bool(v, key);
    } else if (key == "threads") {
      cfg.threads = std::stoi(v);
    } else if (key == "output_dir") {
      cfg.output_dir = v;
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "': cannot parse value '" + v + "'");
  }
}

/// Parses the key = value config format; '#' starts a comment. Errors are
/// collected and reported together.
inline ExperimentConfig parse(std::istream& in,
                              ExperimentConfig base = ExperimentConfig{}) {
  std::string line;
  std::vector<std::string> errs;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      apply_assignment(base, key, value);
    } catch (const std::invalid_argument& e) {
      errs.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!errs.empty()) {
    std::string msg = "config parse errors:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
  return base;
}

inline ExperimentConfig parse_file(const std::filesystem::path& path,
                                   ExperimentConfig base = ExperimentConfig{}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  return parse(in, std::move(base));
}

}  // namespace config
}  // namespace crsense
