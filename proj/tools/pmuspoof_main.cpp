// Command line front end. Subcommands mirror the pipeline stages: synth,
// spoof, features, train, eval, plus the end-to-end e2e and gridsearch
// drivers. Exit codes: 0 success, 1 usage error, 2 bad data or config,
// 3 internal error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "pmuspoof/harness.hpp"
#include "pmuspoof/rng.hpp"

#include "CLI11.hpp"

namespace {

using pmuspoof::DataError;

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw DataError("write failed: " + path);
}

struct CommonArgs {
  std::string config;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_given = false;
  int workers = 1;
};

void add_seed_option(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option_function<uint64_t>(
         "--seed",
         [&args](const uint64_t& v) {
           args.seed = v;
           args.seed_given = true;
         },
         "Override the seed from the config");
}

int run_synth(const CommonArgs& args) {
  pmuspoof::GenSpec spec;
  if (!args.config.empty()) {
    spec = pmuspoof::genspec_from_json(load_json_file(args.config));
  }
  if (args.seed_given) spec.seed = args.seed;
  const pmuspoof::Dataset data = pmuspoof::generate(spec);
  std::filesystem::create_directories(args.out_dir);
  pmuspoof::save_csv(data, args.out_dir + "/dataset.csv");
  nlohmann::ordered_json echo;
  pmuspoof::to_json(echo, spec);
  write_text_file(args.out_dir + "/genspec.json", echo.dump(2) + "\n");
  std::printf("wrote %s/dataset.csv (%zu devices, %zu cycles, fingerprint %s)\n",
              args.out_dir.c_str(), data.n_pmus(), data.n_cycles(),
              pmuspoof::fingerprint_hex(data).c_str());
  return 0;
}

int run_spoof(const CommonArgs& args, const std::string& data_path,
              const std::string& spoof_path) {
  const pmuspoof::Dataset data = pmuspoof::load_csv(data_path);
  const nlohmann::json j = load_json_file(spoof_path);
  std::vector<pmuspoof::SpoofSpec> specs;
  if (j.is_array()) {
    specs = pmuspoof::truths_from_json(j);
  } else {
    specs.push_back(pmuspoof::spoof_spec_from_json(j));
  }
  if (specs.empty()) throw DataError("no spoof specs in " + spoof_path);

  pmuspoof::SpoofedDataset spoofed;
  spoofed.data = data;
  for (const auto& s : specs) spoofed = pmuspoof::apply(std::move(spoofed), s);

  std::filesystem::create_directories(args.out_dir);
  pmuspoof::save_csv(spoofed.data, args.out_dir + "/spoofed.csv");
  write_text_file(args.out_dir + "/truth.json",
                  pmuspoof::truths_to_json(spoofed.truths).dump(2) + "\n");
  std::printf("wrote %s/spoofed.csv and truth.json (%zu injections)\n",
              args.out_dir.c_str(), spoofed.truths.size());
  return 0;
}

int run_features(const CommonArgs& args, const std::string& data_path,
                 const std::string& truth_path, int64_t window_len, int64_t step) {
  const pmuspoof::Dataset data = pmuspoof::load_csv(data_path);
  pmuspoof::WindowConfig cfg{window_len, step};
  pmuspoof::FeatureTable table;
  if (truth_path.empty()) {
    table = pmuspoof::extract(data, cfg, args.workers);
  } else {
    pmuspoof::SpoofedDataset spoofed;
    spoofed.data = data;
    spoofed.truths = pmuspoof::truths_from_json(load_json_file(truth_path));
    for (const auto& t : spoofed.truths) {
      spoofed.target_idx.push_back(spoofed.data.index_of(t.target_pmu));
    }
    table = pmuspoof::extract(spoofed, cfg, args.workers);
  }
  std::filesystem::create_directories(args.out_dir);
  pmuspoof::save_features_csv(table, args.out_dir + "/features.csv");
  std::printf("wrote %s/features.csv (%zu pairs x %zu windows)\n",
              args.out_dir.c_str(), table.pairs.size(), table.n_windows);
  return 0;
}

int run_train(const CommonArgs& args, const std::string& features_path,
              const std::string& model_kind) {
  const pmuspoof::FeatureTable table = pmuspoof::load_features_csv(features_path);
  pmuspoof::TrainConfig cfg;
  if (!args.config.empty()) {
    cfg = pmuspoof::train_config_from_json(load_json_file(args.config));
  }
  if (args.seed_given) cfg.seed = args.seed;

  const pmuspoof::Standardizer standardizer = pmuspoof::fit_standardizer(table);
  const auto rows = pmuspoof::seeded_subsample(
      table.size(), cfg.subsample_cap, pmuspoof::derive_seed(cfg.seed, 0xCA9));
  std::vector<std::array<double, 5>> x;
  std::vector<uint8_t> y;
  x.reserve(rows.size());
  y.reserve(rows.size());
  for (size_t idx : rows) {
    x.push_back(standardizer.apply(table.features(idx)));
    y.push_back(table.labels[idx]);
  }

  pmuspoof::AnyModel model;
  if (model_kind == "svm") {
    model = pmuspoof::train_svm(x, y, standardizer, cfg);
  } else if (model_kind == "mlp") {
    model = pmuspoof::train_mlp(x, y, standardizer, cfg);
  } else {
    throw DataError("model kind must be svm or mlp");
  }
  std::filesystem::create_directories(args.out_dir);
  pmuspoof::save_model(model, args.out_dir + "/model.json");
  std::printf("wrote %s/model.json (%s, trained on %zu rows)\n",
              args.out_dir.c_str(), model_kind.c_str(), rows.size());
  return 0;
}

int run_eval(const CommonArgs& args, const std::string& features_path,
             const std::string& model_path) {
  const pmuspoof::FeatureTable table = pmuspoof::load_features_csv(features_path);
  const pmuspoof::AnyModel model = pmuspoof::load_model(model_path);

  std::vector<std::array<double, 5>> x;
  x.reserve(table.size());
  for (size_t idx = 0; idx < table.size(); ++idx) x.push_back(table.features(idx));
  const auto preds = pmuspoof::predict_batch(model, x, args.workers);
  std::vector<uint8_t> flags(preds.size());
  for (size_t r = 0; r < preds.size(); ++r) flags[r] = preds[r].spoofed ? 1 : 0;

  const pmuspoof::Confusion conf = pmuspoof::confusion(flags, table.labels);
  const pmuspoof::Ratios rat = pmuspoof::ratios(conf);

  nlohmann::ordered_json j;
  j["model_kind"] = pmuspoof::model_kind_name(model);
  j["rows"] = table.size();
  j["confusion"] = pmuspoof::confusion_to_json(conf);
  j["metrics"] = pmuspoof::ratios_to_json(rat);

  std::filesystem::create_directories(args.out_dir);
  write_text_file(args.out_dir + "/metrics.json", j.dump(2) + "\n");
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "model            : %s\n"
                "rows             : %zu\n"
                "accuracy_pct     : %.4f\n"
                "sensitivity_pct  : %.4f\n"
                "precision_pct    : %.4f\n"
                "specificity_pct  : %.4f\n"
                "f1               : %.4f\n"
                "fdr_pct          : %.4f\n",
                pmuspoof::model_kind_name(model), table.size(), rat.accuracy,
                rat.sensitivity, rat.precision, rat.specificity, rat.f1, rat.fdr);
  write_text_file(args.out_dir + "/metrics.txt", buf);
  std::fputs(buf, stdout);
  return 0;
}

int run_e2e(const CommonArgs& args, const std::string& spoof_kind) {
  pmuspoof::ExperimentSpec spec;
  if (!args.config.empty()) {
    spec = pmuspoof::experiment_from_json(load_json_file(args.config));
  }
  if (args.seed_given) spec.seed = args.seed;
  if (!spoof_kind.empty()) spec.spoof_kind = pmuspoof::spoof_kind_from_name(spoof_kind);

  const pmuspoof::ExperimentResult result = pmuspoof::run_experiment(spec, args.workers);
  pmuspoof::write_report(result, args.out_dir);
  std::fputs(result.report_text.c_str(), stdout);
  std::printf("\nwrote %s/report.json, report.txt, timings.json\n",
              args.out_dir.c_str());
  return 0;
}

int run_gridsearch(const CommonArgs& args) {
  pmuspoof::GridSearchSpec spec;
  if (!args.config.empty()) {
    spec = pmuspoof::grid_search_spec_from_json(load_json_file(args.config));
  }
  if (args.seed_given) spec.experiment.seed = args.seed;

  const pmuspoof::GridSearchReport result = pmuspoof::run_grid_search(spec, args.workers);
  pmuspoof::write_grid_report(result, args.out_dir);
  std::fputs(result.report_text.c_str(), stdout);
  std::printf("\nwrote %s/gridsearch.json, gridsearch.txt, timings.json\n",
              args.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic synchrophasor spoof detection pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string data_path, spoof_path, truth_path, features_path, model_path;
  std::string model_kind, spoof_kind;
  int64_t window_len = 300, step = 1;

  auto add_common = [&](CLI::App* cmd, bool with_config, bool with_seed) {
    cmd->add_option("--out", args.out_dir, "Output directory")->required();
    cmd->add_option("--workers", args.workers,
                    "Worker threads (0 = all hardware threads)");
    if (with_config) cmd->add_option("--config", args.config, "JSON config file");
    if (with_seed) add_seed_option(cmd, args);
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic recording");
  add_common(synth, true, true);

  CLI::App* spoof = app.add_subcommand("spoof", "Inject spoofs into a recording");
  add_common(spoof, false, false);
  spoof->add_option("--data", data_path, "Input dataset CSV")->required();
  spoof->add_option("--spoof", spoof_path, "Spoof spec JSON (object or array)")
      ->required();

  CLI::App* features =
      app.add_subcommand("features", "Extract pairwise correlation features");
  add_common(features, false, false);
  features->add_option("--data", data_path, "Input dataset CSV")->required();
  features->add_option("--truth", truth_path, "Truth JSON for labeling");
  features->add_option("--window", window_len, "Window length in cycles");
  features->add_option("--step", step, "Window step in cycles");

  CLI::App* train = app.add_subcommand("train", "Train a classifier on features");
  add_common(train, true, true);
  train->add_option("--features", features_path, "Features CSV")->required();
  train->add_option("--model-kind", model_kind, "svm or mlp")->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a model on features");
  add_common(eval, false, false);
  eval->add_option("--features", features_path, "Features CSV")->required();
  eval->add_option("--model", model_path, "Model JSON")->required();

  CLI::App* e2e = app.add_subcommand("e2e", "Run one end-to-end experiment");
  add_common(e2e, true, true);
  e2e->add_option("--spoof-kind", spoof_kind, "rlv, mirror or dilation");

  CLI::App* grid = app.add_subcommand("gridsearch", "Sweep SVM hyperparameters");
  add_common(grid, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return run_synth(args);
    if (spoof->parsed()) return run_spoof(args, data_path, spoof_path);
    if (features->parsed()) {
      return run_features(args, data_path, truth_path, window_len, step);
    }
    if (train->parsed()) return run_train(args, features_path, model_kind);
    if (eval->parsed()) return run_eval(args, features_path, model_path);
    if (e2e->parsed()) return run_e2e(args, spoof_kind);
    if (grid->parsed()) return run_gridsearch(args);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
