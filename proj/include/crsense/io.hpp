#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crsense/classifier.hpp"
#include "crsense/energy.hpp"
#include "crsense/features.hpp"
#include "crsense/sensing.hpp"
#include "crsense/signal.hpp"
#include "crsense/types.hpp"

namespace crsense {

inline constexpr const char* kVersion = "crsense-0.1.0";

/// Provenance stamp embedded as the first line of every output file.
struct RunStamp {
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;

  std::string header_line() const {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "# config_hash=%016llx master_seed=%llu version=%s",
                  static_cast<unsigned long long>(config_hash),
                  static_cast<unsigned long long>(master_seed), kVersion);
    return buf;
  }
};

namespace io {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path,
                              bool binary = false) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& path,
                             bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

// Little-endian scalar encoding, independent of host order.
inline void write_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline void write_f64(std::ostream& out, double v) {
  write_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline double read_f64(std::istream& in) {
  return std::bit_cast<double>(read_u64(in));
}

// ---------------------------------------------------------------------------
// Binary matrix container: magic, dtype (0 real, 1 complex), rows, cols,
// little-endian 64-bit floats (re/im interleaved when complex).
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kMatrixMagic = 0x4253524333ULL;  // "3CRSB"

inline void write_matrix(std::ostream& out, const RealMatrix& a) {
  write_u64(out, kMatrixMagic);
  write_u64(out, 0);
  write_u64(out, static_cast<std::uint64_t>(a.rows()));
  write_u64(out, static_cast<std::uint64_t>(a.cols()));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) write_f64(out, a(i, j));
}

inline void write_matrix(std::ostream& out, const ComplexMatrix& a) {
  write_u64(out, kMatrixMagic);
  write_u64(out, 1);
  write_u64(out, static_cast<std::uint64_t>(a.rows()));
  write_u64(out, static_cast<std::uint64_t>(a.cols()));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      write_f64(out, a(i, j).real());
      write_f64(out, a(i, j).imag());
    }
}

inline RealMatrix read_real_matrix(std::istream& in) {
  if (read_u64(in) != kMatrixMagic)
    throw std::runtime_error("bad matrix container magic");
  if (read_u64(in) != 0) throw std::runtime_error("expected a real matrix");
  const auto rows = static_cast<Eigen::Index>(read_u64(in));
  const auto cols = static_cast<Eigen::Index>(read_u64(in));
  RealMatrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = read_f64(in);
  if (!in) throw std::runtime_error("truncated matrix container");
  return a;
}

inline ComplexMatrix read_complex_matrix(std::istream& in) {
  if (read_u64(in) != kMatrixMagic)
    throw std::runtime_error("bad matrix container magic");
  if (read_u64(in) != 1) throw std::runtime_error("expected a complex matrix");
  const auto rows = static_cast<Eigen::Index>(read_u64(in));
  const auto cols = static_cast<Eigen::Index>(read_u64(in));
  ComplexMatrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = read_f64(in);
      const double im = read_f64(in);
      a(i, j) = Complex(re, im);
    }
  if (!in) throw std::runtime_error("truncated matrix container");
  return a;
}

// ---------------------------------------------------------------------------
// Measurement matrix and dictionary
// ---------------------------------------------------------------------------

inline void save_measurement(const std::filesystem::path& path,
                             const MeasurementMatrix& phi) {
  auto out = open_out(path, true);
  write_matrix(out, phi.entries);
  write_u64(out, phi.seed);
}

inline MeasurementMatrix load_measurement(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  MeasurementMatrix phi;
  phi.entries = read_real_matrix(in);
  phi.seed = read_u64(in);
  return phi;
}

inline void save_dictionary(const std::filesystem::path& path,
                            const SampledDictionary& dict) {
  auto out = open_out(path, true);
  write_matrix(out, dict.atoms);
  write_matrix(out, dict.compressed_atoms);
  ComplexMatrix taps(dict.pu_channel.taps.size(), 1);
  taps.col(0) = dict.pu_channel.taps;
  write_matrix(out, taps);
  write_f64(out, dict.pu_channel.rho);
}

inline SampledDictionary load_dictionary(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  SampledDictionary dict;
  dict.atoms = read_complex_matrix(in);
  dict.compressed_atoms = read_complex_matrix(in);
  const ComplexMatrix taps = read_complex_matrix(in);
  dict.pu_channel.taps = taps.col(0);
  dict.pu_channel.rho = read_f64(in);
  return dict;
}

// CSV inspection format for matrices: one data row per matrix row, complex
// entries as interleaved re/im columns. Importable back for test rigs and
// externally prepared matrices.

inline void write_real_matrix_csv(const std::filesystem::path& path,
                                  const RealMatrix& a, const RunStamp& stamp) {
  auto out = open_out(path);
  out << stamp.header_line() << "\n";
  out << "row";
  for (Eigen::Index j = 0; j < a.cols(); ++j) out << ",c" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out << "," << format_double(a(i, j));
    out << "\n";
  }
}

inline void write_complex_matrix_csv(const std::filesystem::path& path,
                                     const ComplexMatrix& a,
                                     const RunStamp& stamp) {
  auto out = open_out(path);
  out << stamp.header_line() << "\n";
  out << "row";
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    out << ",re" << j << ",im" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out << "," << format_double(a(i, j).real()) << ","
          << format_double(a(i, j).imag());
    out << "\n";
  }
}

namespace csv_detail {

inline std::vector<std::vector<double>> read_numeric_rows(
    const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("row,", 0) == 0) continue;
    std::vector<double> row;
    std::size_t pos = line.find(',');  // leading row index is dropped
    while (pos != std::string::npos) {
      const std::size_t next = line.find(',', pos + 1);
      row.push_back(std::stod(line.substr(pos + 1, next - pos - 1)));
      pos = next;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty matrix CSV: " + path.string());
  return rows;
}

}  // namespace csv_detail

inline RealMatrix read_real_matrix_csv(const std::filesystem::path& path) {
  const auto rows = csv_detail::read_numeric_rows(path);
  RealMatrix a(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw std::runtime_error("ragged matrix CSV: " + path.string());
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  }
  return a;
}

inline ComplexMatrix read_complex_matrix_csv(const std::filesystem::path& path) {
  const auto rows = csv_detail::read_numeric_rows(path);
  if (rows[0].size() % 2 != 0)
    throw std::runtime_error("complex matrix CSV needs re/im pairs: " +
                             path.string());
  ComplexMatrix a(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows[0].size() / 2));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw std::runtime_error("ragged matrix CSV: " + path.string());
    for (std::size_t j = 0; j + 1 < rows[i].size(); j += 2)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j / 2)) =
          Complex(rows[i][j], rows[i][j + 1]);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Received-signal record files: raw interleaved re/im doubles plus a
// JSON-lines sidecar carrying label, snr_db and seed per record.
// ---------------------------------------------------------------------------

inline void save_signal_records(const std::filesystem::path& bin_path,
                                const std::filesystem::path& sidecar_path,
                                const std::vector<ReceivedSignal>& signals) {
  auto bin = open_out(bin_path, true);
  auto sidecar = open_out(sidecar_path);
  for (std::size_t idx = 0; idx < signals.size(); ++idx) {
    const auto& s = signals[idx];
    for (Eigen::Index i = 0; i < s.samples.size(); ++i) {
      write_f64(bin, s.samples[i].real());
      write_f64(bin, s.samples[i].imag());
    }
    nlohmann::json line;
    line["index"] = idx;
    line["label"] = to_string(s.label);
    line["snr_db"] = s.snr_db;
    line["seed"] = s.seed;
    line["length"] = s.samples.size();
    sidecar << line.dump() << "\n";
  }
}

inline std::vector<ReceivedSignal> load_signal_records(
    const std::filesystem::path& bin_path,
    const std::filesystem::path& sidecar_path) {
  auto sidecar = open_in(sidecar_path);
  auto bin = open_in(bin_path, true);
  std::vector<ReceivedSignal> signals;
  std::string line;
  while (std::getline(sidecar, line)) {
    if (line.empty()) continue;
    const auto meta = nlohmann::json::parse(line);
    ReceivedSignal s;
    s.label = label_from_string(meta.at("label").get<std::string>());
    s.snr_db = meta.at("snr_db").get<double>();
    s.seed = meta.at("seed").get<std::uint64_t>();
    const auto n = meta.at("length").get<Eigen::Index>();
    s.samples.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = read_f64(bin);
      const double im = read_f64(bin);
      s.samples[i] = Complex(re, im);
    }
    if (!bin) throw std::runtime_error("truncated signal record file");
    signals.push_back(std::move(s));
  }
  return signals;
}

/// Metadata-only CSV export for a signal set.
inline void write_signal_meta_csv(const std::filesystem::path& path,
                                  const std::vector<ReceivedSignal>& signals,
                                  const RunStamp& stamp) {
  auto out = open_out(path);
  out << stamp.header_line() << "\n";
  out << "index,label,snr_db,seed\n";
  for (std::size_t i = 0; i < signals.size(); ++i)
    out << i << "," << to_string(signals[i].label) << ","
        << format_double(signals[i].snr_db) << "," << signals[i].seed << "\n";
}

// ---------------------------------------------------------------------------
// Feature datasets: CSV plus a fast binary form.
// ---------------------------------------------------------------------------

inline void write_features_csv(const std::filesystem::path& path,
                               const std::vector<FeatureVector>& features,
                               const RunStamp& stamp) {
  auto out = open_out(path);
  out << stamp.header_line() << "\n";
  const Eigen::Index dim = features.empty() ? 0 : features[0].values.size();
  out << "label,snr_db";
  for (Eigen::Index j = 0; j < dim; ++j) out << ",f" << j;
  out << "\n";
  for (const auto& f : features) {
    out << to_string(f.label) << "," << format_double(f.snr_db);
    for (Eigen::Index j = 0; j < f.values.size(); ++j)
      out << "," << format_double(f.values[j]);
    out << "\n";
  }
}

inline constexpr std::uint64_t kFeatureMagic = 0x4653524333ULL;  // "3CRSF"

inline void save_features(const std::filesystem::path& path,
                          const std::vector<FeatureVector>& features) {
  auto out = open_out(path, true);
  write_u64(out, kFeatureMagic);
  write_u64(out, features.size());
  write_u64(out, features.empty()
                     ? 0
                     : static_cast<std::uint64_t>(features[0].values.size()));
  for (const auto& f : features) {
    write_u64(out, static_cast<std::uint64_t>(f.label));
    write_f64(out, f.snr_db);
    for (Eigen::Index j = 0; j < f.values.size(); ++j)
      write_f64(out, f.values[j]);
  }
}

inline std::vector<FeatureVector> load_features(
    const std::filesystem::path& path) {
  auto in = open_in(path, true);
  if (read_u64(in) != kFeatureMagic)
    throw std::runtime_error("bad feature file magic");
  const std::uint64_t count = read_u64(in);
  const auto dim = static_cast<Eigen::Index>(read_u64(in));
  std::vector<FeatureVector> features;
  features.reserve(count);
  for (std::uint64_t r = 0; r < count; ++r) {
    FeatureVector f;
    f.label = static_cast<HypothesisLabel>(read_u64(in));
    f.snr_db = read_f64(in);
    f.values.resize(dim);
    for (Eigen::Index j = 0; j < dim; ++j) f.values[j] = read_f64(in);
    if (!in) throw std::runtime_error("truncated feature file");
    features.push_back(std::move(f));
  }
  return features;
}

inline void write_energy_csv(const std::filesystem::path& path,
                             const std::vector<EnergyFeature>& energies,
                             const RunStamp& stamp) {
  auto out = open_out(path);
  out << stamp.header_line() << "\n";
  out << "label,snr_db,energy\n";
  for (const auto& e : energies)
    out << to_string(e.label) << "," << format_double(e.snr_db) << ","
        << format_double(e.energy) << "\n";
}

inline std::vector<EnergyFeature> load_energy_csv(
    const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<EnergyFeature> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("label,", 0) == 0)
      continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    EnergyFeature e;
    e.label = label_from_string(line.substr(0, c1));
    e.snr_db = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    e.energy = std::stod(line.substr(c2 + 1));
    out.push_back(e);
  }
  return out;
}

/// Residual traces as CSV rows: label, snr_db, then the M residual norms.
inline void write_traces_csv(const std::filesystem::path& path,
                             const std::vector<FeatureVector>& features,
                             const RunStamp& stamp) {
  auto out = open_out(path);
  out << stamp.header_line() << "\n";
  const Eigen::Index m =
      features.empty() ? 0 : features[0].values.size() / 2;
  out << "label,snr_db";
  for (Eigen::Index j = 0; j < m; ++j) out << ",r" << (j + 1);
  out << "\n";
  for (const auto& f : features) {
    out << to_string(f.label) << "," << format_double(f.snr_db);
    for (Eigen::Index j = 0; j < m; ++j)
      out << "," << format_double(f.values[j]);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Classifier model: JSON descriptor plus a binary weight blob.
// ---------------------------------------------------------------------------

inline void save_model(const std::filesystem::path& json_path,
                       const std::filesystem::path& weights_path,
                       const ClassifierModel& model, const RunStamp& stamp) {
  nlohmann::json doc;
  doc["version"] = kVersion;
  doc["config_hash"] = stamp.config_hash;
  doc["master_seed"] = stamp.master_seed;
  doc["shape"] = {{"input_dim", model.shape.input_dim},
                  {"hidden_dim", model.shape.hidden_dim},
                  {"output_dim", model.shape.output_dim}};
  std::vector<std::string> classes;
  for (auto l : model.class_map) classes.emplace_back(to_string(l));
  doc["class_map"] = classes;
  doc["feature_stats"]["mean"] =
      std::vector<double>(model.feature_stats.mean.begin(),
                          model.feature_stats.mean.end());
  doc["feature_stats"]["stddev"] =
      std::vector<double>(model.feature_stats.stddev.begin(),
                          model.feature_stats.stddev.end());
  doc["weights_file"] = weights_path.filename().string();
  auto out = open_out(json_path);
  out << doc.dump(2) << "\n";

  auto blob = open_out(weights_path, true);
  write_matrix(blob, model.w1);
  write_matrix(blob, RealMatrix(model.b1));
  write_matrix(blob, model.w2);
  write_matrix(blob, RealMatrix(model.b2));
}

inline ClassifierModel load_model(const std::filesystem::path& json_path) {
  auto in = open_in(json_path);
  nlohmann::json doc;
  in >> doc;
  ClassifierModel model;
  model.shape.input_dim = doc.at("shape").at("input_dim").get<int>();
  model.shape.hidden_dim = doc.at("shape").at("hidden_dim").get<int>();
  model.shape.output_dim = doc.at("shape").at("output_dim").get<int>();
  for (const auto& name : doc.at("class_map"))
    model.class_map.push_back(label_from_string(name.get<std::string>()));
  const auto mean = doc.at("feature_stats").at("mean").get<std::vector<double>>();
  const auto stddev =
      doc.at("feature_stats").at("stddev").get<std::vector<double>>();
  model.feature_stats.mean =
      Eigen::Map<const RealSequence>(mean.data(),
                                     static_cast<Eigen::Index>(mean.size()));
  model.feature_stats.stddev = Eigen::Map<const RealSequence>(
      stddev.data(), static_cast<Eigen::Index>(stddev.size()));

  const auto weights_path =
      json_path.parent_path() / doc.at("weights_file").get<std::string>();
  auto blob = open_in(weights_path, true);
  model.w1 = read_real_matrix(blob);
  model.b1 = read_real_matrix(blob).col(0);
  model.w2 = read_real_matrix(blob);
  model.b2 = read_real_matrix(blob).col(0);
  return model;
}

inline void write_train_report_csv(const std::filesystem::path& path,
                                   const TrainReport& report,
                                   const RunStamp& stamp) {
  auto out = open_out(path);
  out << stamp.header_line() << "\n";
  out << "epoch,train_loss,heldout_loss\n";
  for (int e = 0; e < report.epochs; ++e)
    out << (e + 1) << "," << format_double(report.train_loss[e]) << ","
        << format_double(report.heldout_loss[e]) << "\n";
}

}  // namespace io
}  // namespace crsense
