// Command-line entry point for the detection experiments: dataset
// generation, classifier training, evaluation and the residual-gradient
// identity suite, composed over file handoffs in the output directory.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crsense/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Every config key doubles as a --flag override; file values are applied
// first, then flags.
const std::vector<std::string> kConfigKeys = {
    "attack_mode", "master_seed", "modulation", "order", "oversampling",
    "rolloff", "span_symbols", "n", "carrier_offset", "tap_count", "rho", "m",
    "k", "train_per_class", "test_per_class", "snr_grid_db", "hidden_dim",
    "epochs", "learning_rate", "batch_size", "momentum", "heldout_fraction",
    "ls_refinement", "feature_mode", "train_ed", "export_signals",
    "export_traces", "threads", "output_dir"};

struct ConfigCli {
  std::string config_file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value config file");
    for (const auto& key : kConfigKeys) {
      std::string flag = "--" + key;
      for (auto& c : flag)
        if (c == '_') c = '-';
      app->add_option_function<std::string>(
          flag,
          [this, key](const std::string& v) { overrides[key] = v; },
          "override config key '" + key + "'");
    }
  }

  crsense::ExperimentConfig resolve() const {
    crsense::ExperimentConfig cfg;
    if (!config_file.empty())
      cfg = crsense::config::parse_file(config_file, cfg);
    for (const auto& [key, value] : overrides) {
      std::string v = value;
      if (key == "snr_grid_db" && !v.empty() && v.front() != '[')
        v = "[" + v + "]";
      crsense::config::apply_assignment(cfg, key, v);
    }
    cfg.validate();
    return cfg;
  }
};

crsense::GeneratedDataset load_dataset(const crsense::ExperimentConfig& cfg,
                                       bool need_train, bool need_test) {
  namespace fs = std::filesystem;
  crsense::GeneratedDataset data;
  const auto& dir = cfg.output_dir;
  if (need_train) {
    if (!fs::exists(dir / "features_train.bin"))
      throw std::runtime_error("missing dataset: " +
                               (dir / "features_train.bin").string() +
                               " (run `generate` first)");
    data.train_features = crsense::io::load_features(dir / "features_train.bin");
    data.train_energy = crsense::io::load_energy_csv(dir / "energy_train.csv");
  }
  if (need_test) {
    if (!fs::exists(dir / "features_test.bin"))
      throw std::runtime_error("missing dataset: " +
                               (dir / "features_test.bin").string() +
                               " (run `generate` first)");
    data.test_features = crsense::io::load_features(dir / "features_test.bin");
    data.test_energy = crsense::io::load_energy_csv(dir / "energy_test.csv");
  }
  return data;
}

crsense::TrainedModels load_models(const crsense::ExperimentConfig& cfg) {
  crsense::TrainedModels models;
  models.proposed = crsense::io::load_model(cfg.output_dir / "model_proposed.json");
  models.proposed_report.epochs = 0;
  if (cfg.train_ed &&
      std::filesystem::exists(cfg.output_dir / "model_ed.json")) {
    models.ed = crsense::io::load_model(cfg.output_dir / "model_ed.json");
    models.ed_report = crsense::TrainReport{};
  }
  return models;
}

void print_generate_summary(const crsense::ExperimentConfig& cfg,
                            const crsense::GeneratedDataset& data) {
  std::printf("generated %zu train and %zu test samples (M=%d, K=%d, %s)\n",
              data.train_features.size(), data.test_features.size(), cfg.m,
              cfg.k, crsense::to_string(cfg.attack_mode));
  std::printf("outputs under %s\n", cfg.output_dir.string().c_str());
}

void print_eval_summary(const crsense::EvalResult& eval) {
  auto print_method = [&](const crsense::MethodEval& ev) {
    std::printf("%s: pooled accuracy %.4f\n", ev.method.c_str(),
                ev.pooled_accuracy);
    for (std::size_t c = 0; c < eval.classes.size(); ++c)
      std::printf("  auroc[%s] = %.4f\n",
                  crsense::pipeline::class_display_name(eval.classes[c]),
                  ev.rocs[c].auroc);
  };
  print_method(eval.proposed);
  if (eval.ed) print_method(*eval.ed);
}

int print_appendix_report(const crsense::pipeline::AppendixReport& report) {
  std::printf("identity suite: %d fixtures, seed %llu\n", report.fixtures,
              static_cast<unsigned long long>(report.seed));
  for (const auto& r : report.identities)
    std::printf("  [%s] %s: max error %.3e (tolerance %.0e)\n",
                r.pass() ? "PASS" : "FAIL", r.name.c_str(), r.max_error,
                r.tolerance);
  return report.all_pass() ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PUEA and jamming detection via sparse-coding residual "
               "convergence"};
  app.require_subcommand(1);

  ConfigCli generate_cfg, train_cfg, eval_cfg, all_cfg;
  auto* generate = app.add_subcommand(
      "generate", "synthesize signals and extract pursuit features");
  generate_cfg.attach(generate);
  auto* train_cmd = app.add_subcommand(
      "train", "train the classifier (and the energy-detection baseline)");
  train_cfg.attach(train_cmd);
  auto* eval_cmd = app.add_subcommand(
      "eval", "evaluate trained models on the test set");
  eval_cfg.attach(eval_cmd);
  auto* all_cmd = app.add_subcommand(
      "all", "generate, train, eval and verify in sequence");
  all_cfg.attach(all_cmd);

  auto* verify = app.add_subcommand(
      "appendix-verify", "check the residual-gradient identities");
  int fixtures = 1000;
  int dimension = 100;
  std::uint64_t verify_seed = 1;
  bool negative_control = false;
  verify->add_option("--fixtures", fixtures, "number of random fixtures");
  verify->add_option("--dim", dimension, "fixture dimension");
  verify->add_option("--seed", verify_seed, "fixture seed");
  verify->add_flag("--negative-control", negative_control,
                   "corrupt the projector's atom; the suite must fail");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      const auto cfg = generate_cfg.resolve();
      const auto data = crsense::pipeline::run_generate(cfg);
      print_generate_summary(cfg, data);
    } else if (train_cmd->parsed()) {
      const auto cfg = train_cfg.resolve();
      const auto data = load_dataset(cfg, true, false);
      const auto models = crsense::pipeline::run_train(cfg, data);
      std::printf("trained proposed model (%d epochs), final train loss %.5f\n",
                  cfg.epochs,
                  models.proposed_report.train_loss[cfg.epochs - 1]);
      if (models.ed)
        std::printf("trained energy-detection baseline\n");
    } else if (eval_cmd->parsed()) {
      const auto cfg = eval_cfg.resolve();
      const auto data = load_dataset(cfg, false, true);
      const auto models = load_models(cfg);
      const auto eval = crsense::pipeline::run_eval(cfg, models, data);
      print_eval_summary(eval);
    } else if (all_cmd->parsed()) {
      const auto cfg = all_cfg.resolve();
      const auto result = crsense::pipeline::run_all(cfg);
      print_generate_summary(cfg, result.data);
      print_eval_summary(result.eval);
      const auto report = crsense::pipeline::run_appendix_verify(
          fixtures, cfg.m, cfg.master_seed);
      return print_appendix_report(report);
    } else if (verify->parsed()) {
      const auto report = crsense::pipeline::run_appendix_verify(
          fixtures, dimension, verify_seed, negative_control);
      return print_appendix_report(report);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
