#pragma once

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "crsense/config.hpp"
#include "crsense/energy.hpp"
#include "crsense/evaluation.hpp"
#include "crsense/io.hpp"
#include "crsense/pursuit.hpp"

namespace crsense {

/// Index-parallel loop with deterministic output: every index writes its own
/// slot, so the result is independent of scheduling.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct GeneratedDataset {
  // Features always hold the full concatenated vector [||r||, |G|]; the
  // configured feature_mode selects the classifier's slice downstream.
  std::vector<FeatureVector> train_features;
  std::vector<FeatureVector> test_features;
  std::vector<EnergyFeature> train_energy;
  std::vector<EnergyFeature> test_energy;
  std::vector<ReceivedSignal> train_signals;
  std::vector<ReceivedSignal> test_signals;
};

struct TrainedModels {
  ClassifierModel proposed;
  TrainReport proposed_report;
  std::optional<ClassifierModel> ed;
  std::optional<TrainReport> ed_report;
};

/// Evaluation artifacts for one method (proposed features or the
/// energy-detection baseline).
struct MethodEval {
  std::string method;
  std::map<double, ConfusionMatrix> confusion_by_snr;
  std::map<double, double> accuracy_by_snr;
  double pooled_accuracy = 0.0;
  std::vector<int> truths;            // pooled class indices
  std::vector<RealSequence> scores;   // pooled per-sample score rows
  std::vector<double> sample_snrs;    // parallel to truths/scores
  std::vector<RocCurve> rocs;         // one-vs-rest per class, pooled SNRs
};

struct EvalResult {
  std::vector<HypothesisLabel> classes;
  MethodEval proposed;
  std::optional<MethodEval> ed;
};

namespace pipeline {

inline RunStamp stamp_for(const ExperimentConfig& cfg) {
  return RunStamp{config::config_hash(cfg), cfg.master_seed};
}

/// Classifier input slice for the configured feature mode.
inline RealSequence classifier_input(const RealSequence& full,
                                     FeatureMode mode) {
  const Eigen::Index m = full.size() / 2;
  switch (mode) {
    case FeatureMode::Concat: return full;
    case FeatureMode::ResidualOnly: return full.head(m);
    case FeatureMode::GradientOnly: return full.tail(m);
  }
  return full;
}

/// Human-readable class name used in report files.
inline const char* class_display_name(HypothesisLabel label) {
  switch (label) {
    case HypothesisLabel::H0_Hole: return "Hole";
    case HypothesisLabel::H1_PU: return "PU";
    case HypothesisLabel::H2_PUE: return "PUE";
    case HypothesisLabel::H3_Jammer: return "Jammer";
  }
  return "?";
}

inline MeasurementMatrix make_measurement(const ExperimentConfig& cfg) {
  const auto seed = derive_seed(cfg.master_seed, SeedStream::Measurement);
  if (cfg.m == cfg.waveform.signal_length)
    return build_square_measurement(cfg.m, seed);
  return build_measurement(cfg.m, cfg.waveform.signal_length, seed);
}

namespace detail {

enum : std::uint64_t { kTrainSplit = 0x10000000ULL, kTestSplit = 0x20000000ULL };

struct SampleJob {
  HypothesisLabel label;
  double snr_db;
  std::uint64_t channel_index;  // quadruplet index: one channel+dictionary
  std::uint64_t sample_seed;
};

/// One channel + dictionary per quadruplet index; each class signal at that
/// index is sensed against the same dictionary, mirroring the per-received-
/// signal channel realizations of the experiment protocol.
struct QuadrupletWorker {
  const ExperimentConfig& cfg;
  const MeasurementMatrix& phi;
  const ComplexMatrix& source;
  std::uint64_t split_tag;

  void run(const SampleJob& job, FeatureVector& feature, EnergyFeature& energy,
           ReceivedSignal& signal) const {
    const auto h_true = draw_channel(
        cfg.tap_count, derive_seed(cfg.master_seed, SeedStream::Channel,
                                   split_tag + job.channel_index));
    const auto dict = build_dictionary_from_source(
        correlate_channel(h_true, cfg.rho), source, phi);

    signal = receive(job.label, h_true, cfg.waveform, job.snr_db,
                     job.sample_seed);
    energy = energy_of(signal);

    // The raw compressed signal goes straight into the pursuit; the trace
    // keeps its absolute energy scale and per-feature standardization in the
    // classifier handles the statistics.
    const ComplexSequence compressed = compress(phi, signal.samples);
    PursuitConfig pcfg;
    pcfg.max_iterations = cfg.m;
    pcfg.ls_refinement = cfg.ls_refinement;
    const auto trace = omp_trace(compressed, dict, pcfg);
    feature = assemble_feature(trace, job.label, job.snr_db);
  }
};

}  // namespace detail

/// Builds the per-split sample jobs. Training spreads the SNR grid
/// round-robin over the per-class sample budget; testing draws
/// test_per_class samples per class at every grid SNR.
inline std::vector<detail::SampleJob> train_plan(const ExperimentConfig& cfg) {
  std::vector<detail::SampleJob> jobs;
  const auto classes = cfg.classes();
  for (int q = 0; q < cfg.train_per_class; ++q) {
    const double snr =
        cfg.snr_grid_db[static_cast<std::size_t>(q) % cfg.snr_grid_db.size()];
    for (auto label : classes)
      jobs.push_back({label, snr, static_cast<std::uint64_t>(q),
                      derive_seed(cfg.master_seed, SeedStream::TrainSample,
                                  static_cast<std::uint64_t>(q) * 4 +
                                      static_cast<std::uint64_t>(label))});
  }
  return jobs;
}

inline std::vector<detail::SampleJob> test_plan(const ExperimentConfig& cfg) {
  std::vector<detail::SampleJob> jobs;
  const auto classes = cfg.classes();
  for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
    for (int q = 0; q < cfg.test_per_class; ++q) {
      const std::uint64_t quad =
          static_cast<std::uint64_t>(si) *
              static_cast<std::uint64_t>(cfg.test_per_class) +
          static_cast<std::uint64_t>(q);
      for (auto label : classes)
        jobs.push_back({label, cfg.snr_grid_db[si], quad,
                        derive_seed(cfg.master_seed, SeedStream::TestSample,
                                    quad * 4 +
                                        static_cast<std::uint64_t>(label))});
    }
  }
  return jobs;
}

inline void generate_split(const ExperimentConfig& cfg,
                           const MeasurementMatrix& phi,
                           const ComplexMatrix& source,
                           const std::vector<detail::SampleJob>& jobs,
                           std::uint64_t split_tag,
                           std::vector<FeatureVector>& features,
                           std::vector<EnergyFeature>& energies,
                           std::vector<ReceivedSignal>& signals) {
  features.resize(jobs.size());
  energies.resize(jobs.size());
  signals.resize(jobs.size());
  detail::QuadrupletWorker worker{cfg, phi, source, split_tag};
  // Consecutive jobs share a dictionary; grouping them per task would save a
  // little work, but the dictionary build is cheap next to the pursuits and
  // the flat index space keeps the fan-out deterministic.
  parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
    worker.run(jobs[static_cast<std::size_t>(i)],
               features[static_cast<std::size_t>(i)],
               energies[static_cast<std::size_t>(i)],
               signals[static_cast<std::size_t>(i)]);
  });
}

inline GeneratedDataset run_generate(const ExperimentConfig& cfg,
                                     bool write_files = true) {
  cfg.validate();
  const auto stamp = stamp_for(cfg);
  const auto phi = make_measurement(cfg);
  const auto source = synthesize_atom_source(
      cfg.waveform, cfg.k, derive_seed(cfg.master_seed, SeedStream::Dictionary));

  GeneratedDataset data;
  generate_split(cfg, phi, source, train_plan(cfg), detail::kTrainSplit,
                 data.train_features, data.train_energy, data.train_signals);
  generate_split(cfg, phi, source, test_plan(cfg), detail::kTestSplit,
                 data.test_features, data.test_energy, data.test_signals);

  if (write_files) {
    const auto& dir = cfg.output_dir;
    {
      auto out = io::open_out(dir / "config.txt");
      out << stamp.header_line() << "\n" << config::canonical_text(cfg);
    }
    io::save_measurement(dir / "phi.bin", phi);
    io::write_features_csv(dir / "features_train.csv", data.train_features,
                           stamp);
    io::write_features_csv(dir / "features_test.csv", data.test_features,
                           stamp);
    io::save_features(dir / "features_train.bin", data.train_features);
    io::save_features(dir / "features_test.bin", data.test_features);
    io::write_energy_csv(dir / "energy_train.csv", data.train_energy, stamp);
    io::write_energy_csv(dir / "energy_test.csv", data.test_energy, stamp);
    io::write_signal_meta_csv(dir / "meta_train.csv", data.train_signals,
                              stamp);
    io::write_signal_meta_csv(dir / "meta_test.csv", data.test_signals, stamp);
    if (cfg.export_signals) {
      io::save_signal_records(dir / "signals_train.bin",
                              dir / "signals_train.jsonl", data.train_signals);
      io::save_signal_records(dir / "signals_test.bin",
                              dir / "signals_test.jsonl", data.test_signals);
    }
    if (cfg.export_traces) {
      io::write_traces_csv(dir / "traces_train.csv", data.train_features,
                           stamp);
      io::write_traces_csv(dir / "traces_test.csv", data.test_features, stamp);
    }
  }
  return data;
}

inline TrainedModels run_train(const ExperimentConfig& cfg,
                               const GeneratedDataset& data,
                               bool write_files = true) {
  cfg.validate();
  if (data.train_features.empty())
    throw std::runtime_error("run_train: dataset is empty; generate first");
  const auto stamp = stamp_for(cfg);

  TrainOptions options;
  options.epochs = cfg.epochs;
  options.learning_rate = cfg.learning_rate;
  options.batch_size = cfg.batch_size;
  options.momentum = cfg.momentum;
  options.heldout_fraction = cfg.heldout_fraction;
  options.seed = cfg.master_seed;

  std::vector<FeatureVector> inputs;
  inputs.reserve(data.train_features.size());
  for (const auto& f : data.train_features) {
    FeatureVector g;
    g.values = classifier_input(f.values, cfg.feature_mode);
    g.label = f.label;
    g.snr_db = f.snr_db;
    inputs.push_back(std::move(g));
  }

  TrainedModels models;
  NetworkShape shape{cfg.feature_dim(), cfg.hidden_dim,
                     static_cast<int>(cfg.classes().size())};
  std::tie(models.proposed, models.proposed_report) =
      train(inputs, shape, options);

  if (cfg.train_ed) {
    auto [ed_model, ed_report] =
        train_ed(data.train_energy, cfg.hidden_dim,
                 static_cast<int>(cfg.classes().size()), options);
    models.ed = std::move(ed_model);
    models.ed_report = std::move(ed_report);
  }

  if (write_files) {
    const auto& dir = cfg.output_dir;
    io::save_model(dir / "model_proposed.json",
                   dir / "model_proposed_weights.bin", models.proposed, stamp);
    io::write_train_report_csv(dir / "train_report_proposed.csv",
                               models.proposed_report, stamp);
    if (models.ed) {
      io::save_model(dir / "model_ed.json", dir / "model_ed_weights.bin",
                     *models.ed, stamp);
      io::write_train_report_csv(dir / "train_report_ed.csv",
                                 *models.ed_report, stamp);
    }
  }
  return models;
}

namespace detail {

inline std::string snr_tag(double snr) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", snr);
  return buf;
}

inline MethodEval evaluate_method(const ExperimentConfig& cfg,
                                  const ClassifierModel& model,
                                  const std::vector<RealSequence>& inputs,
                                  const std::vector<HypothesisLabel>& labels,
                                  const std::vector<double>& snrs,
                                  const std::string& method) {
  const auto classes = cfg.classes();
  auto class_index = [&](HypothesisLabel l) {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] == l) return static_cast<int>(i);
    throw std::invalid_argument("label outside the configured class set");
  };

  MethodEval ev;
  ev.method = method;
  std::map<double, std::vector<int>> truths_by_snr, preds_by_snr;
  std::vector<int> preds(inputs.size());
  ev.truths.resize(inputs.size());
  ev.scores.resize(inputs.size());
  ev.sample_snrs = snrs;
  parallel_for(static_cast<int>(inputs.size()), cfg.threads, [&](int i) {
    const auto p = predict(model, inputs[static_cast<std::size_t>(i)]);
    ev.scores[static_cast<std::size_t>(i)] = p.scores;
    preds[static_cast<std::size_t>(i)] = class_index(p.label);
    ev.truths[static_cast<std::size_t>(i)] =
        class_index(labels[static_cast<std::size_t>(i)]);
  });
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    truths_by_snr[snrs[i]].push_back(ev.truths[i]);
    preds_by_snr[snrs[i]].push_back(preds[i]);
  }

  long pooled_hits = 0;
  for (const auto& [snr, truths] : truths_by_snr) {
    const auto& p = preds_by_snr[snr];
    ev.confusion_by_snr[snr] =
        confusion(truths, p, static_cast<int>(classes.size()));
    long hits = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) hits += truths[i] == p[i];
    ev.accuracy_by_snr[snr] =
        static_cast<double>(hits) / static_cast<double>(truths.size());
    pooled_hits += hits;
  }
  ev.pooled_accuracy =
      static_cast<double>(pooled_hits) / static_cast<double>(inputs.size());

  for (std::size_t c = 0; c < classes.size(); ++c)
    ev.rocs.push_back(roc_ovr(ev.truths, ev.scores, static_cast<int>(c)));
  return ev;
}

inline void write_confusion_csv(const std::filesystem::path& path,
                                const ConfusionMatrix& cm,
                                const std::vector<HypothesisLabel>& classes,
                                const RunStamp& stamp) {
  auto out = io::open_out(path);
  out << stamp.header_line() << "\n";
  out << "true\\pred";
  for (auto l : classes) out << "," << to_string(l) << "_count";
  for (auto l : classes) out << "," << to_string(l) << "_pct";
  out << "\n";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    out << to_string(classes[i]);
    for (std::size_t j = 0; j < classes.size(); ++j)
      out << "," << cm.counts[i][j];
    for (std::size_t j = 0; j < classes.size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", cm.percentages[i][j]);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace detail

inline EvalResult run_eval(const ExperimentConfig& cfg,
                           const TrainedModels& models,
                           const GeneratedDataset& data,
                           bool write_files = true) {
  cfg.validate();
  if (data.test_features.empty())
    throw std::runtime_error("run_eval: empty test set");
  if (models.proposed.shape.input_dim != cfg.feature_dim())
    throw std::runtime_error(
        "run_eval: model input dimension does not match the configured "
        "feature mode");

  std::vector<RealSequence> inputs;
  std::vector<HypothesisLabel> labels;
  std::vector<double> snrs;
  for (const auto& f : data.test_features) {
    inputs.push_back(classifier_input(f.values, cfg.feature_mode));
    labels.push_back(f.label);
    snrs.push_back(f.snr_db);
  }

  EvalResult result;
  result.classes = cfg.classes();
  result.proposed = detail::evaluate_method(cfg, models.proposed, inputs,
                                            labels, snrs, "proposed");
  if (models.ed) {
    std::vector<RealSequence> ed_inputs;
    std::vector<HypothesisLabel> ed_labels;
    std::vector<double> ed_snrs;
    for (const auto& e : data.test_energy) {
      ed_inputs.push_back(RealSequence::Constant(1, e.energy));
      ed_labels.push_back(e.label);
      ed_snrs.push_back(e.snr_db);
    }
    result.ed = detail::evaluate_method(cfg, *models.ed, ed_inputs, ed_labels,
                                        ed_snrs, "ed");
  }

  if (write_files) {
    const auto stamp = stamp_for(cfg);
    const auto& dir = cfg.output_dir;
    auto write_method = [&](const MethodEval& ev) {
      for (const auto& [snr, cm] : ev.confusion_by_snr)
        detail::write_confusion_csv(
            dir / ("confusion_" + ev.method + "_M" + std::to_string(cfg.m) +
                   "_snr" + detail::snr_tag(snr) + ".csv"),
            cm, result.classes, stamp);
      for (std::size_t c = 0; c < result.classes.size(); ++c) {
        auto out = io::open_out(
            dir / ("roc_" + ev.method + "_" +
                   class_display_name(result.classes[c]) + ".csv"));
        out << stamp.header_line() << "\n";
        out << "class,threshold,fpr,tpr\n";
        for (const auto& pt : ev.rocs[c].points)
          out << class_display_name(result.classes[c]) << ","
              << io::format_double(pt.threshold) << ","
              << io::format_double(pt.fpr) << "," << io::format_double(pt.tpr)
              << "\n";
      }
    };
    write_method(result.proposed);
    if (result.ed) write_method(*result.ed);

    {
      auto out = io::open_out(dir / "auroc_summary.csv");
      out << stamp.header_line() << "\n";
      out << "method,class,auroc\n";
      auto rows = [&](const MethodEval& ev) {
        for (std::size_t c = 0; c < result.classes.size(); ++c)
          out << ev.method << "," << class_display_name(result.classes[c])
              << "," << io::format_double(ev.rocs[c].auroc) << "\n";
      };
      rows(result.proposed);
      if (result.ed) rows(*result.ed);
    }
    {
      auto out = io::open_out(dir / "accuracy_summary.csv");
      out << stamp.header_line() << "\n";
      out << "method,snr_db,accuracy\n";
      auto rows = [&](const MethodEval& ev) {
        for (const auto& [snr, acc] : ev.accuracy_by_snr)
          out << ev.method << "," << detail::snr_tag(snr) << ","
              << io::format_double(acc) << "\n";
        out << ev.method << ",pooled," << io::format_double(ev.pooled_accuracy)
            << "\n";
      };
      rows(result.proposed);
      if (result.ed) rows(*result.ed);
    }
    // Loss curves only exist when the models came from a training run in
    // this process (standalone eval loads weights without the history).
    if (models.proposed_report.epochs > 0)
      io::write_train_report_csv(dir / "loss_curve_proposed.csv",
                                 models.proposed_report, stamp);
    if (models.ed_report && models.ed_report->epochs > 0)
      io::write_train_report_csv(dir / "loss_curve_ed.csv", *models.ed_report,
                                 stamp);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Residual-gradient identity suite
// ---------------------------------------------------------------------------

struct IdentityResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass() const { return max_error <= tolerance; }
};

struct AppendixReport {
  std::vector<IdentityResult> identities;
  std::uint64_t seed = 0;
  int fixtures = 0;
  bool all_pass() const {
    for (const auto& r : identities)
      if (!r.pass()) return false;
    return true;
  }
};

/// Checks the one-step projection identities on random fixtures:
/// orthogonality of r1 to the atom, G(1) = -||E r0||^2, the noise-only form
/// G(1)_H0 = -||E n||^2, and the two-term composite expansion with the cross
/// term zeroed by construction. corrupt_atom skips the unit-norm guard and
/// scales the projector's atom, a negative control that must fail.
inline AppendixReport run_appendix_verify(int fixtures = 1000, int dimension = 100,
                                          std::uint64_t seed = 1,
                                          bool corrupt_atom = false) {
  AppendixReport report;
  report.seed = seed;
  report.fixtures = fixtures;
  auto rng = make_engine(derive_seed(seed, SeedStream::Noise));

  double err_orth = 0.0, err_g1 = 0.0, err_noise = 0.0, err_composite = 0.0;
  const double atom_scale = corrupt_atom ? 1.1 : 1.0;
  for (int i = 0; i < fixtures; ++i) {
    ComplexSequence atom =
        draw_complex_gaussian(static_cast<std::size_t>(dimension), 1.0, rng);
    atom *= atom_scale / atom.norm();

    // Plain random vector fixtures.
    const ComplexSequence r0 =
        draw_complex_gaussian(static_cast<std::size_t>(dimension), 1.0, rng);
    const ComplexSequence er0 = atom * atom.dot(r0);
    const ComplexSequence r1 = r0 - er0;
    err_orth = std::max(err_orth, std::abs(atom.dot(r1)) / r0.norm());
    const double g1 = r1.squaredNorm() - r0.squaredNorm();
    err_g1 = std::max(err_g1, std::abs(g1 + er0.squaredNorm()) /
                                  std::max(1.0, er0.squaredNorm()));

    // Noise-only hypothesis.
    const ComplexSequence n =
        draw_complex_gaussian(static_cast<std::size_t>(dimension), 1.0, rng);
    const double en2 = (atom * atom.dot(n)).squaredNorm();
    const ComplexSequence n1 = n - atom * atom.dot(n);
    const double g1_noise = n1.squaredNorm() - n.squaredNorm();
    err_noise = std::max(err_noise,
                         std::abs(g1_noise + en2) / std::max(1.0, en2));

    // Composite signal with the cross term <E hx, E n> made purely
    // imaginary, so the two-term expansion is exact.
    const ComplexSequence hx =
        draw_complex_gaussian(static_cast<std::size_t>(dimension), 1.0, rng);
    const Complex alpha = atom.dot(hx);
    ComplexSequence nc =
        draw_complex_gaussian(static_cast<std::size_t>(dimension), 0.25, rng);
    nc -= atom * atom.dot(nc);
    nc += atom * (Complex(0.0, 1.0) * alpha * 0.7);
    const ComplexSequence y = hx + nc;
    const ComplexSequence y1 = y - atom * atom.dot(y);
    const double g1_comp = y1.squaredNorm() - y.squaredNorm();
    const double expected =
        -std::norm(atom.dot(hx)) - std::norm(atom.dot(nc));
    err_composite =
        std::max(err_composite, std::abs(g1_comp - expected) /
                                    std::max(1.0, std::abs(expected)));
  }

  report.identities.push_back({"projection_orthogonality", err_orth, 1e-9});
  report.identities.push_back({"gradient_equals_removed_energy", err_g1, 1e-9});
  report.identities.push_back({"noise_only_gradient", err_noise, 1e-9});
  report.identities.push_back(
      {"composite_two_term_gradient", err_composite, 1e-9});
  return report;
}

struct AllResult {
  GeneratedDataset data;
  TrainedModels models;
  EvalResult eval;
};

inline AllResult run_all(const ExperimentConfig& cfg, bool write_files = true) {
  AllResult r;
  r.data = run_generate(cfg, write_files);
  r.models = run_train(cfg, r.data, write_files);
  r.eval = run_eval(cfg, r.models, r.data, write_files);
  return r;
}

}  // namespace pipeline
}  // namespace crsense
