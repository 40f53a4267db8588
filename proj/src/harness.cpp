#include "pmuspoof/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "pmuspoof/rng.hpp"
#include "json_guard.hpp"

namespace pmuspoof {

namespace {

// Seed substream tags for everything the harness derives from spec.seed.
constexpr uint64_t kGenTag = 0xA1;
constexpr uint64_t kTargetTag = 0xA2;
constexpr uint64_t kSubsampleTag = 0xA3;
constexpr uint64_t kTrainTag = 0xA4;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.train_minutes < 1) throw DataError("train_minutes must be positive");
  if (spec.test_minutes < 1) throw DataError("test_minutes must be positive");
  if (spec.train_minutes + spec.test_minutes != spec.gen.minutes) {
    throw DataError("train_minutes + test_minutes must equal gen.minutes");
  }
  if (!spec.run_svm && !spec.run_mlp) {
    throw DataError("at least one model must be enabled");
  }
  const auto cpm = static_cast<int64_t>(spec.gen.rate_hz) * 60;
  if (spec.window.window_len > cpm) {
    throw DataError("window does not fit inside one minute");
  }
  if (spec.latency_run_len < 1) {
    throw DataError("latency_run_len must be positive");
  }
}

// One injection per minute, covering its second half, against a seeded
// target device. The mirror variant reflects over a history as long as the
// spoofed span itself.
std::vector<SpoofSpec> plan_spoofs(const ExperimentSpec& spec,
                                   const std::vector<std::string>& pmu_ids) {
  const auto cpm = static_cast<int64_t>(spec.gen.rate_hz) * 60;
  const int64_t half = cpm / 2;
  Xoshiro256pp rng(derive_seed(spec.seed, kTargetTag));
  std::vector<SpoofSpec> plan;
  plan.reserve(spec.gen.minutes);
  for (int m = 0; m < spec.gen.minutes; ++m) {
    SpoofSpec s;
    s.target_pmu = pmu_ids[rng.bounded(pmu_ids.size())];
    s.kind = spec.spoof_kind;
    if (auto* mir = std::get_if<Mirror>(&s.kind)) {
      if (mir->history_len == 0) mir->history_len = cpm - half;
    }
    s.onset_t = static_cast<int64_t>(m) * cpm + half;
    s.duration = cpm - half;
    plan.push_back(s);
  }
  return plan;
}

std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%9.4f", v);
  return std::string(buf);
}

std::string format_latency(const std::optional<int64_t>& v) {
  if (!v.has_value()) return "    never";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%9lld", static_cast<long long>(*v));
  return std::string(buf);
}

std::string render_report_text(const ExperimentResult& r,
                               const ExperimentSpec& spec) {
  std::string out;
  out += "spoof detection report\n";
  out += "======================\n";
  out += "spoof kind    : ";
  out += spoof_kind_name(spec.spoof_kind);
  out += "\nseed          : " + std::to_string(spec.seed);
  out += "\nfingerprint   : " + r.dataset_fingerprint;
  out += "\ngrid rows     : " + std::to_string(r.grid_rows);
  out += "\ntrain rows    : " + std::to_string(r.train_rows) + " (" +
         std::to_string(r.train_rows_used) + " used)";
  out += "\ntest rows     : " + std::to_string(r.test_rows);
  out += "\n\n";

  out += "metric           ";
  for (const auto& m : r.models) {
    out += " ";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%9s", m.name.c_str());
    out += buf;
  }
  out += "\n";
  const struct {
    const char* label;
    double Ratios::* field;
  } rows[] = {
      {"accuracy_pct    ", &Ratios::accuracy},
      {"sensitivity_pct ", &Ratios::sensitivity},
      {"precision_pct   ", &Ratios::precision},
      {"specificity_pct ", &Ratios::specificity},
      {"f1              ", &Ratios::f1},
      {"fdr_pct         ", &Ratios::fdr},
  };
  for (const auto& row : rows) {
    out += row.label;
    for (const auto& m : r.models) {
      out += " " + format_pct(m.rat.*row.field);
    }
    out += "\n";
  }

  out += "\nlatency (cycles) ";
  for (const auto& m : r.models) {
    out += " ";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%9s", m.name.c_str());
    out += buf;
  }
  out += "\n";
  auto latency_row = [&](const char* label,
                         std::optional<int64_t> LatencyAggregate::* field) {
    out += label;
    for (const auto& m : r.models) {
      out += " " + format_latency(m.latency.*field);
    }
    out += "\n";
  };
  latency_row("min              ", &LatencyAggregate::min);
  latency_row("max              ", &LatencyAggregate::max);
  latency_row("min_of_max       ", &LatencyAggregate::min_of_max);
  return out;
}

}  // namespace

std::vector<size_t> seeded_subsample(size_t n, size_t cap, uint64_t seed) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (cap == 0 || cap >= n) return idx;
  Xoshiro256pp rng(seed);
  for (size_t k = 0; k < cap; ++k) {
    const size_t r = k + rng.bounded(n - k);
    std::swap(idx[k], idx[r]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

nlohmann::ordered_json experiment_to_json(const ExperimentSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["spoof_kind"] = spoof_kind_name(spec.spoof_kind);
  if (const auto* mir = std::get_if<Mirror>(&spec.spoof_kind)) {
    j["mirror_history_len"] = mir->history_len;
  }
  if (const auto* dil = std::get_if<TimeDilation>(&spec.spoof_kind)) {
    j["dilation_factor"] = dil->factor;
  }
  nlohmann::ordered_json gen;
  to_json(gen, spec.gen);
  j["gen"] = gen;
  j["window"] = {{"window_len", spec.window.window_len}, {"step", spec.window.step}};
  j["train_minutes"] = spec.train_minutes;
  j["test_minutes"] = spec.test_minutes;
  nlohmann::ordered_json models = nlohmann::ordered_json::array();
  if (spec.run_svm) models.push_back("svm");
  if (spec.run_mlp) models.push_back("mlp");
  j["models"] = models;
  j["train_config"] = train_config_to_json(spec.train);
  j["latency_run_len"] = spec.latency_run_len;
  return j;
}

ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  return read_json("experiment spec", [&] {
    static const std::set<std::string> known = {
        "seed",          "spoof_kind",   "mirror_history_len",
        "dilation_factor", "gen",        "window",
        "train_minutes", "test_minutes", "models",
        "train_config",  "latency_run_len"};
    for (const auto& item : j.items()) {
      if (!known.count(item.key())) {
        throw DataError("unknown experiment field: " + item.key());
      }
    }
    ExperimentSpec spec;
    if (j.contains("seed")) spec.seed = j["seed"].get<uint64_t>();
    if (j.contains("spoof_kind")) {
      spec.spoof_kind = spoof_kind_from_name(j["spoof_kind"].get<std::string>());
    }
    if (auto* mir = std::get_if<Mirror>(&spec.spoof_kind)) {
      if (j.contains("mirror_history_len")) {
        mir->history_len = j["mirror_history_len"].get<int64_t>();
      }
    }
    if (auto* dil = std::get_if<TimeDilation>(&spec.spoof_kind)) {
      if (j.contains("dilation_factor")) {
        dil->factor = j["dilation_factor"].get<double>();
      }
    }
    if (j.contains("gen")) spec.gen = genspec_from_json(j["gen"]);
    if (j.contains("window")) {
      const auto& w = j["window"];
      for (const auto& item : w.items()) {
        if (item.key() != "window_len" && item.key() != "step") {
          throw DataError("unknown window field: " + item.key());
        }
      }
      if (w.contains("window_len")) {
        spec.window.window_len = w["window_len"].get<int64_t>();
      }
      if (w.contains("step")) spec.window.step = w["step"].get<int64_t>();
    }
    if (j.contains("train_minutes")) {
      spec.train_minutes = j["train_minutes"].get<int>();
    }
    if (j.contains("test_minutes")) spec.test_minutes = j["test_minutes"].get<int>();
    if (j.contains("models")) {
      spec.run_svm = false;
      spec.run_mlp = false;
      for (const auto& name : j["models"]) {
        const std::string s = name.get<std::string>();
        if (s == "svm") {
          spec.run_svm = true;
        } else if (s == "mlp") {
          spec.run_mlp = true;
        } else {
          throw DataError("unknown model name: " + s);
        }
      }
    }
    if (j.contains("train_config")) {
      spec.train = train_config_from_json(j["train_config"]);
    }
    if (j.contains("latency_run_len")) {
      spec.latency_run_len = j["latency_run_len"].get<int>();
      if (spec.latency_run_len < 1) {
        throw DataError("latency_run_len must be positive");
      }
    }
    return spec;
  });
}

ExperimentResult run_experiment(const ExperimentSpec& spec_in, int workers) {
  ExperimentSpec spec = spec_in;
  validate_spec(spec);
  spec.gen.seed = derive_seed(spec.seed, kGenTag);
  spec.train.seed = derive_seed(spec.seed, kTrainTag);

  ExperimentResult result;
  nlohmann::ordered_json timings;
  const auto wall0 = std::chrono::steady_clock::now();

  auto t0 = std::chrono::steady_clock::now();
  const Dataset clean = generate(spec.gen);
  timings["generate_s"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<std::string> pmu_ids;
  for (const auto& s : clean.streams) pmu_ids.push_back(s.pmu_id);
  result.spoofs = plan_spoofs(spec, pmu_ids);
  SpoofedDataset spoofed;
  spoofed.data = clean;
  for (const auto& s : result.spoofs) spoofed = apply(std::move(spoofed), s);
  result.dataset_fingerprint = fingerprint_hex(spoofed.data);
  timings["spoof_s"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const FeatureTable table = extract(spoofed, spec.window, workers);
  timings["extract_s"] = seconds_since(t0);

  // Row masks. A row is usable only if its whole window sits inside one
  // minute, so no window straddles the train/test boundary or a spoof
  // from the previous minute.
  t0 = std::chrono::steady_clock::now();
  const auto cpm = static_cast<int64_t>(spec.gen.rate_hz) * 60;
  const size_t total = table.size();
  std::vector<uint8_t> train_mask(total, 0), test_mask(total, 0);
  size_t train_rows = 0, test_rows = 0;
  size_t train_pos = 0, test_pos_count = 0;
  for (size_t idx = 0; idx < total; ++idx) {
    const int64_t cycle = table.cycle_of(idx);
    if (cycle % cpm < spec.window.window_len - 1) continue;
    const int64_t minute = cycle / cpm;
    if (minute < spec.train_minutes) {
      train_mask[idx] = 1;
      ++train_rows;
      train_pos += table.labels[idx];
    } else {
      test_mask[idx] = 1;
      ++test_rows;
      test_pos_count += table.labels[idx];
    }
  }
  if (train_rows == 0 || test_rows == 0) {
    throw DataError("empty train or test partition");
  }

  const Standardizer standardizer = fit_standardizer(table, train_mask);

  // Seeded subsample of the training rows, kept in chronological order.
  std::vector<size_t> all_train_idx;
  all_train_idx.reserve(train_rows);
  for (size_t idx = 0; idx < total; ++idx) {
    if (train_mask[idx]) all_train_idx.push_back(idx);
  }
  std::vector<size_t> train_idx;
  for (size_t pos : seeded_subsample(all_train_idx.size(), spec.train.subsample_cap,
                                     derive_seed(spec.seed, kSubsampleTag))) {
    train_idx.push_back(all_train_idx[pos]);
  }

  std::vector<std::array<double, 5>> x_train;
  std::vector<uint8_t> y_train;
  x_train.reserve(train_idx.size());
  y_train.reserve(train_idx.size());
  for (size_t idx : train_idx) {
    x_train.push_back(standardizer.apply(table.features(idx)));
    y_train.push_back(table.labels[idx]);
  }

  std::vector<size_t> test_idx;
  test_idx.reserve(test_rows);
  std::vector<int32_t> test_pos(total, -1);
  for (size_t idx = 0; idx < total; ++idx) {
    if (test_mask[idx]) {
      test_pos[idx] = static_cast<int32_t>(test_idx.size());
      test_idx.push_back(idx);
    }
  }
  std::vector<std::array<double, 5>> x_test_raw;
  std::vector<uint8_t> y_test;
  x_test_raw.reserve(test_idx.size());
  y_test.reserve(test_idx.size());
  for (size_t idx : test_idx) {
    x_test_raw.push_back(table.features(idx));
    y_test.push_back(table.labels[idx]);
  }
  timings["prepare_s"] = seconds_since(t0);

  result.grid_rows = total;
  result.train_rows = train_rows;
  result.train_rows_used = train_idx.size();
  result.test_rows = test_rows;

  // Index spoofs per test minute for the latency scan.
  struct MinuteSpoof {
    int minute;
    size_t target_idx;
    const SpoofSpec* spec;
  };
  std::vector<MinuteSpoof> test_spoofs;
  for (int m = spec.train_minutes; m < spec.gen.minutes; ++m) {
    const SpoofSpec& s = result.spoofs[m];
    test_spoofs.push_back({m, spoofed.data.index_of(s.target_pmu), &s});
  }

  auto evaluate = [&](const char* name, auto&& predict_all,
                      size_t n_sv) -> ModelEval {
    ModelEval eval;
    eval.name = name;
    eval.n_support_vectors = n_sv;
    const std::vector<Prediction> preds = predict_all();
    std::vector<uint8_t> flags(preds.size());
    for (size_t r = 0; r < preds.size(); ++r) flags[r] = preds[r].spoofed ? 1 : 0;
    eval.conf = confusion(flags, y_test);
    eval.rat = ratios(eval.conf);

    // Latency needs a prediction for every cycle of the spoofed span, so
    // it is only measured on the dense (step = 1) grid.
    if (table.step != 1) {
      eval.latency = aggregate_latency(eval.latency_entries);
      return eval;
    }
    for (const MinuteSpoof& ms : test_spoofs) {
      for (size_t p = 0; p < table.pairs.size(); ++p) {
        const auto [i, j] = table.pairs[p];
        if (i != ms.target_idx && j != ms.target_idx) continue;
        const int64_t onset = ms.spec->onset_t;
        const int64_t span_end = ms.spec->end();
        std::vector<uint8_t> span_preds;
        span_preds.reserve(span_end - onset);
        for (int64_t cycle = onset; cycle < span_end; ++cycle) {
          const size_t row =
              p * table.n_windows +
              static_cast<size_t>((cycle - table.first_cycle) / table.step);
          const int32_t pos = test_pos[row];
          if (pos < 0) throw DataError("latency span not covered by test rows");
          span_preds.push_back(flags[pos]);
        }
        LatencyEntry entry;
        entry.minute = ms.minute;
        entry.pmu_i = i;
        entry.pmu_j = j;
        entry.latency = detection_latency(span_preds, onset, onset, span_end,
                                          spec.latency_run_len);
        eval.latency_entries.push_back(entry);
      }
    }
    eval.latency = aggregate_latency(eval.latency_entries);
    return eval;
  };

  if (spec.run_svm) {
    t0 = std::chrono::steady_clock::now();
    const SvmModel svm = train_svm(x_train, y_train, standardizer, spec.train);
    timings["train_svm_s"] = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    result.models.push_back(evaluate(
        "svm", [&]() { return predict_batch(svm, x_test_raw, workers); },
        svm.support_vectors.size()));
    timings["eval_svm_s"] = seconds_since(t0);
  }
  if (spec.run_mlp) {
    t0 = std::chrono::steady_clock::now();
    const MlpModel mlp = train_mlp(x_train, y_train, standardizer, spec.train);
    timings["train_mlp_s"] = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    result.models.push_back(evaluate(
        "mlp", [&]() { return predict_batch(mlp, x_test_raw, workers); }, 0));
    timings["eval_mlp_s"] = seconds_since(t0);
  }

  // Deterministic report; timings stay in their own sidecar so the report
  // bytes depend only on the spec.
  nlohmann::ordered_json report;
  report["format_version"] = 1;
  report["experiment"] = experiment_to_json(spec_in);
  report["effective_seeds"] = {{"gen", spec.gen.seed}, {"train", spec.train.seed}};
  report["dataset_fingerprint"] = result.dataset_fingerprint;
  nlohmann::ordered_json spoofs = nlohmann::ordered_json::array();
  for (int m = 0; m < spec.gen.minutes; ++m) {
    nlohmann::ordered_json s = spoof_spec_to_json(result.spoofs[m]);
    s["minute"] = m;
    s["partition"] = m < spec.train_minutes ? "train" : "test";
    spoofs.push_back(s);
  }
  report["spoofs"] = spoofs;
  report["rows"] = {
      {"grid_rows", result.grid_rows},     {"train_rows", result.train_rows},
      {"train_rows_used", result.train_rows_used},
      {"train_positive", train_pos},       {"test_rows", result.test_rows},
      {"test_positive", test_pos_count},
  };
  nlohmann::ordered_json models;
  for (const auto& m : result.models) {
    nlohmann::ordered_json mj;
    if (m.name == "svm") {
      mj["hyperparameters"] = {{"c_param", spec.train.c_param},
                               {"gamma", spec.train.gamma},
                               {"smo_tol", spec.train.smo_tol}};
      mj["n_support_vectors"] = m.n_support_vectors;
    } else {
      mj["hyperparameters"] = {{"epochs", spec.train.epochs},
                               {"batch_size", spec.train.batch_size},
                               {"learning_rate", spec.train.learning_rate}};
    }
    mj["confusion"] = confusion_to_json(m.conf);
    mj["metrics"] = ratios_to_json(m.rat);
    mj["latency"] = latency_to_json(m.latency, m.latency_entries);
    models[m.name] = mj;
  }
  report["models"] = models;
  result.report = report;
  result.report_text = render_report_text(result, spec_in);

  timings["total_s"] = seconds_since(wall0);
  timings["workers"] = workers;
  result.timings = timings;
  return result;
}

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace

void write_report(const ExperimentResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir + "/report.json", result.report.dump(2) + "\n");
  write_text_file(out_dir + "/report.txt", result.report_text);
  write_text_file(out_dir + "/timings.json", result.timings.dump(2) + "\n");
}

GridSearchSpec grid_search_spec_from_json(const nlohmann::json& j) {
  return read_json("grid search spec", [&] {
    for (const auto& item : j.items()) {
      const std::string& k = item.key();
      if (k != "experiment" && k != "val_minutes" && k != "c_grid" &&
          k != "gamma_grid") {
        throw DataError("unknown grid search field: " + k);
      }
    }
    GridSearchSpec spec;
    if (j.contains("experiment")) {
      spec.experiment = experiment_from_json(j["experiment"]);
    }
    if (j.contains("val_minutes")) spec.val_minutes = j["val_minutes"].get<int>();
    if (j.contains("c_grid")) {
      spec.c_grid = j["c_grid"].get<std::vector<double>>();
    }
    if (j.contains("gamma_grid")) {
      spec.gamma_grid = j["gamma_grid"].get<std::vector<double>>();
    }
    return spec;
  });
}

GridSearchReport run_grid_search(const GridSearchSpec& gspec, int workers) {
  ExperimentSpec spec = gspec.experiment;
  validate_spec(spec);
  if (gspec.val_minutes < 1 || gspec.val_minutes >= spec.train_minutes) {
    throw DataError("val_minutes must leave at least one training minute");
  }
  if (gspec.c_grid.empty() || gspec.gamma_grid.empty()) {
    throw DataError("empty hyperparameter grid");
  }
  spec.gen.seed = derive_seed(spec.seed, kGenTag);
  spec.train.seed = derive_seed(spec.seed, kTrainTag);

  GridSearchReport out;
  nlohmann::ordered_json timings;
  const auto wall0 = std::chrono::steady_clock::now();

  const Dataset clean = generate(spec.gen);
  std::vector<std::string> pmu_ids;
  for (const auto& s : clean.streams) pmu_ids.push_back(s.pmu_id);
  const std::vector<SpoofSpec> spoofs = plan_spoofs(spec, pmu_ids);
  SpoofedDataset spoofed;
  spoofed.data = clean;
  for (const auto& s : spoofs) spoofed = apply(std::move(spoofed), s);
  const FeatureTable table = extract(spoofed, spec.window, workers);

  // Inner split: the tail of the training span becomes validation.
  const int fit_minutes = spec.train_minutes - gspec.val_minutes;
  const auto cpm = static_cast<int64_t>(spec.gen.rate_hz) * 60;
  const size_t total = table.size();
  std::vector<uint8_t> fit_mask(total, 0);
  std::vector<size_t> fit_idx, val_idx;
  for (size_t idx = 0; idx < total; ++idx) {
    const int64_t cycle = table.cycle_of(idx);
    if (cycle % cpm < spec.window.window_len - 1) continue;
    const int64_t minute = cycle / cpm;
    if (minute < fit_minutes) {
      fit_mask[idx] = 1;
      fit_idx.push_back(idx);
    } else if (minute < spec.train_minutes) {
      val_idx.push_back(idx);
    }
  }
  if (fit_idx.empty() || val_idx.empty()) {
    throw DataError("empty grid-search partition");
  }

  const Standardizer standardizer = fit_standardizer(table, fit_mask);
  {
    std::vector<size_t> selected;
    for (size_t pos : seeded_subsample(fit_idx.size(), spec.train.subsample_cap,
                                       derive_seed(spec.seed, kSubsampleTag))) {
      selected.push_back(fit_idx[pos]);
    }
    fit_idx = std::move(selected);
  }

  auto gather = [&](const std::vector<size_t>& rows,
                    std::vector<std::array<double, 5>>& x,
                    std::vector<uint8_t>& y) {
    x.reserve(rows.size());
    y.reserve(rows.size());
    for (size_t idx : rows) {
      x.push_back(standardizer.apply(table.features(idx)));
      y.push_back(table.labels[idx]);
    }
  };
  std::vector<std::array<double, 5>> x_fit, x_val;
  std::vector<uint8_t> y_fit, y_val;
  gather(fit_idx, x_fit, y_fit);
  gather(val_idx, x_val, y_val);

  const auto t0 = std::chrono::steady_clock::now();
  out.result = grid_search_svm(x_fit, y_fit, x_val, y_val, gspec.c_grid,
                               gspec.gamma_grid, standardizer, spec.train);
  timings["grid_s"] = seconds_since(t0);

  nlohmann::ordered_json report;
  report["format_version"] = 1;
  report["experiment"] = experiment_to_json(gspec.experiment);
  report["val_minutes"] = gspec.val_minutes;
  report["c_grid"] = gspec.c_grid;
  report["gamma_grid"] = gspec.gamma_grid;
  report["fit_rows"] = fit_idx.size();
  report["val_rows"] = val_idx.size();
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& cell : out.result.table) {
    cells.push_back({{"c_param", cell.c_param},
                     {"gamma", cell.gamma},
                     {"f1", cell.f1}});
  }
  report["cells"] = cells;
  report["best"] = {{"c_param", out.result.best_c},
                    {"gamma", out.result.best_gamma},
                    {"f1", out.result.best_f1}};
  out.report = report;

  std::string text;
  text += "svm hyperparameter sweep (validation F1)\n";
  text += "=========================================\n";
  char buf[96];
  for (const auto& cell : out.result.table) {
    std::snprintf(buf, sizeof(buf), "C=%-8g gamma=%-8g f1=%.6f\n", cell.c_param,
                  cell.gamma, cell.f1);
    text += buf;
  }
  std::snprintf(buf, sizeof(buf), "best: C=%g gamma=%g f1=%.6f\n",
                out.result.best_c, out.result.best_gamma, out.result.best_f1);
  text += buf;
  out.report_text = text;

  timings["total_s"] = seconds_since(wall0);
  timings["workers"] = workers;
  out.timings = timings;
  return out;
}

void write_grid_report(const GridSearchReport& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir + "/gridsearch.json", result.report.dump(2) + "\n");
  write_text_file(out_dir + "/gridsearch.txt", result.report_text);
  write_text_file(out_dir + "/timings.json", result.timings.dump(2) + "\n");
}

}  // namespace pmuspoof
