#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmuspoof/classifiers.hpp"
#include "pmuspoof/metrics.hpp"
#include "pmuspoof/spoof.hpp"
#include "pmuspoof/synth.hpp"

#include <json.hpp>

namespace pmuspoof {

// One end-to-end run: synthesize `gen.minutes` minutes of traffic, inject
// one spoof per minute (seeded target device, second half of the minute),
// extract the correlation grid, train on the first train_minutes and
// evaluate on the rest. `seed` is the only seed that matters: the
// generator, target choices, subsampling and model training all draw from
// substreams derived from it, so gen.seed and train.seed are overridden.
struct ExperimentSpec {
  uint64_t seed = 1;
  SpoofKind spoof_kind = RepeatedLastValue{};
  GenSpec gen;
  WindowConfig window;
  int train_minutes = 11;
  int test_minutes = 3;
  bool run_svm = true;
  bool run_mlp = true;
  TrainConfig train;
  int latency_run_len = 30;  // consecutive flagged cycles that count as detected
};

nlohmann::ordered_json experiment_to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_from_json(const nlohmann::json& j);

// Deterministic cap-sized subset of {0..n-1}, ascending (partial
// Fisher-Yates). cap of 0, or cap >= n, selects everything.
std::vector<size_t> seeded_subsample(size_t n, size_t cap, uint64_t seed);

struct ModelEval {
  std::string name;
  Confusion conf;
  Ratios rat;
  std::vector<LatencyEntry> latency_entries;
  LatencyAggregate latency;
  size_t n_support_vectors = 0;  // SVM only
};

struct ExperimentResult {
  nlohmann::ordered_json report;   // deterministic: same spec, same bytes
  std::string report_text;         // deterministic rendering of the same
  nlohmann::ordered_json timings;  // wall-clock sidecar, never deterministic
  std::string dataset_fingerprint;
  std::vector<SpoofSpec> spoofs;
  size_t grid_rows = 0;
  size_t train_rows = 0;
  size_t train_rows_used = 0;
  size_t test_rows = 0;
  std::vector<ModelEval> models;
};

// workers only affects wall-clock time; the report is byte-identical for
// any value. workers <= 0 means one thread per hardware thread.
ExperimentResult run_experiment(const ExperimentSpec& spec, int workers = 1);

// Writes report.json, report.txt and timings.json into out_dir.
void write_report(const ExperimentResult& result, const std::string& out_dir);

// Hyperparameter sweep on the same synthetic traffic: the last
// val_minutes of the training span are held out for scoring, the models
// see only the minutes before them. Deterministic like run_experiment.
struct GridSearchSpec {
  ExperimentSpec experiment;
  int val_minutes = 3;
  std::vector<double> c_grid = {0.1, 1.0, 10.0};
  std::vector<double> gamma_grid = {0.05, 0.2, 1.0};
};

GridSearchSpec grid_search_spec_from_json(const nlohmann::json& j);

struct GridSearchReport {
  nlohmann::ordered_json report;
  std::string report_text;
  nlohmann::ordered_json timings;
  GridSearchResult result;
};

GridSearchReport run_grid_search(const GridSearchSpec& spec, int workers = 1);
void write_grid_report(const GridSearchReport& result, const std::string& out_dir);

}  // namespace pmuspoof
