// Python bindings for the main pipeline operations. The API mirrors the
// C++ one closely; feature matrices cross the boundary as nested lists to
// keep the module dependency-free.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pmuspoof/harness.hpp"
#include "pmuspoof/rng.hpp"

namespace py = pybind11;
using namespace pmuspoof;

namespace {

nlohmann::json json_from_str(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad JSON: ") + e.what());
  }
}

std::vector<std::array<double, 5>> rows_from_py(
    const std::vector<std::vector<double>>& rows) {
  std::vector<std::array<double, 5>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != 5) throw DataError("feature rows must have 5 values");
    out.push_back({r[0], r[1], r[2], r[3], r[4]});
  }
  return out;
}

// pybind11's stl casters already claim std::variant, so the model variant
// crosses the boundary inside a plain wrapper.
struct PyModel {
  AnyModel model;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Synchrophasor spoof detection pipeline";

  py::register_exception<DataError>(m, "DataError");

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("n_pmus", &Dataset::n_pmus)
      .def_property_readonly("n_cycles", &Dataset::n_cycles)
      .def_property_readonly("rate_hz", &Dataset::rate_hz)
      .def("pmu_ids",
           [](const Dataset& d) {
             std::vector<std::string> ids;
             for (const auto& s : d.streams) ids.push_back(s.pmu_id);
             return ids;
           })
      .def("signal",
           [](const Dataset& d, const std::string& pmu_id, const std::string& name) {
             const PmuStream* s = d.find(pmu_id);
             if (s == nullptr) throw DataError("unknown pmu_id: " + pmu_id);
             const auto kind = signal_from_name(name);
             if (!kind) throw DataError("unknown signal: " + name);
             return s->signal(*kind);
           })
      .def("fingerprint", &fingerprint_hex)
      .def("save_csv",
           [](const Dataset& d, const std::string& path) { save_csv(d, path); });

  m.def("load_csv",
        [](const std::string& path) { return load_csv(path); });

  m.def("generate", [](const std::string& genspec_json) {
    return generate(genspec_from_json(json_from_str(genspec_json)));
  });
  m.def("default_genspec_json", []() {
    nlohmann::ordered_json j;
    to_json(j, GenSpec{});
    return j.dump(2);
  });
  m.def("empirical_rho", [](const Dataset& d, const std::string& name) {
    const auto kind = signal_from_name(name);
    if (!kind) throw DataError("unknown signal: " + name);
    return empirical_rho(d, *kind);
  });

  py::class_<SpoofedDataset>(m, "SpoofedDataset")
      .def_property_readonly("data",
                             [](const SpoofedDataset& s) { return s.data; })
      .def("truth_json",
           [](const SpoofedDataset& s) { return truths_to_json(s.truths).dump(2); })
      .def("label", &SpoofedDataset::label);

  m.def("apply_spoof", [](const Dataset& d, const std::string& spec_json) {
    return apply(d, spoof_spec_from_json(json_from_str(spec_json)));
  });
  m.def("apply_spoofs", [](const Dataset& d, const std::string& specs_json) {
    SpoofedDataset out;
    out.data = d;
    for (const auto& spec : truths_from_json(json_from_str(specs_json))) {
      out = apply(std::move(out), spec);
    }
    return out;
  });

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(x, y);
  });
  m.def(
      "sliding_pearson",
      [](const std::vector<double>& x, const std::vector<double>& y,
         int64_t window_len, int64_t step) {
        return sliding_pearson(x, y, WindowConfig{window_len, step});
      },
      py::arg("x"), py::arg("y"), py::arg("window_len") = 300, py::arg("step") = 1);

  py::class_<FeatureTable>(m, "FeatureTable")
      .def_property_readonly("n_rows", &FeatureTable::size)
      .def_property_readonly("n_windows",
                             [](const FeatureTable& t) { return t.n_windows; })
      .def_property_readonly("n_pairs",
                             [](const FeatureTable& t) { return t.pairs.size(); })
      .def("row",
           [](const FeatureTable& t, size_t idx) {
             if (idx >= t.size()) throw DataError("row index out of range");
             const FeatureRow r = t.row(idx);
             return py::make_tuple(t.pmu_ids[r.pmu_i], t.pmu_ids[r.pmu_j], r.cycle,
                                   std::vector<double>(r.r.begin(), r.r.end()),
                                   r.label);
           })
      .def("labels",
           [](const FeatureTable& t) {
             return std::vector<int>(t.labels.begin(), t.labels.end());
           })
      .def("save_csv", [](const FeatureTable& t, const std::string& path) {
        save_features_csv(t, path);
      });

  m.def(
      "extract",
      [](const Dataset& d, int64_t window_len, int64_t step, int workers) {
        return extract(d, WindowConfig{window_len, step}, workers);
      },
      py::arg("data"), py::arg("window_len") = 300, py::arg("step") = 1,
      py::arg("workers") = 1);
  m.def(
      "extract_labeled",
      [](const SpoofedDataset& d, int64_t window_len, int64_t step, int workers) {
        return extract(d, WindowConfig{window_len, step}, workers);
      },
      py::arg("data"), py::arg("window_len") = 300, py::arg("step") = 1,
      py::arg("workers") = 1);
  m.def("load_features_csv",
        [](const std::string& path) { return load_features_csv(path); });

  py::class_<PyModel>(m, "Model")
      .def_property_readonly(
          "kind", [](const PyModel& m_) { return model_kind_name(m_.model); })
      .def("predict",
           [](const PyModel& m_, const std::vector<std::vector<double>>& rows,
              int workers) {
             const auto preds = predict_batch(m_.model, rows_from_py(rows), workers);
             std::vector<std::pair<double, bool>> out;
             out.reserve(preds.size());
             for (const auto& p : preds) out.emplace_back(p.score, p.spoofed);
             return out;
           },
           py::arg("rows"), py::arg("workers") = 1)
      .def("save", [](const PyModel& m_, const std::string& path) {
        save_model(m_.model, path);
      });

  m.def("load_model",
        [](const std::string& path) { return PyModel{load_model(path)}; });
  m.def(
      "train",
      [](const std::string& kind, const FeatureTable& table,
         const std::string& config_json, uint64_t seed) {
        TrainConfig cfg;
        if (!config_json.empty()) {
          cfg = train_config_from_json(json_from_str(config_json));
        }
        cfg.seed = seed;
        const Standardizer st = fit_standardizer(table);
        const auto rows =
            seeded_subsample(table.size(), cfg.subsample_cap,
                             derive_seed(cfg.seed, 0xCA9));
        std::vector<std::array<double, 5>> x;
        std::vector<uint8_t> y;
        x.reserve(rows.size());
        y.reserve(rows.size());
        for (size_t idx : rows) {
          x.push_back(st.apply(table.features(idx)));
          y.push_back(table.labels[idx]);
        }
        PyModel out;
        if (kind == "svm") {
          out.model = train_svm(x, y, st, cfg);
        } else if (kind == "mlp") {
          out.model = train_mlp(x, y, st, cfg);
        } else {
          throw DataError("model kind must be svm or mlp");
        }
        return out;
      },
      py::arg("kind"), py::arg("table"), py::arg("config_json") = std::string(),
      py::arg("seed") = uint64_t{0});

  m.def(
      "run_experiment",
      [](const std::string& spec_json, int workers) {
        ExperimentSpec spec;
        if (!spec_json.empty()) {
          spec = experiment_from_json(json_from_str(spec_json));
        }
        const ExperimentResult result = run_experiment(spec, workers);
        return py::make_tuple(result.report.dump(2), result.report_text,
                              result.timings.dump(2));
      },
      py::arg("spec_json") = std::string(), py::arg("workers") = 1);

  m.def("write_experiment_report",
        [](const std::string& spec_json, const std::string& out_dir, int workers) {
          ExperimentSpec spec;
          if (!spec_json.empty()) {
            spec = experiment_from_json(json_from_str(spec_json));
          }
          const ExperimentResult result = run_experiment(spec, workers);
          write_report(result, out_dir);
          return result.report.dump(2);
        },
        py::arg("spec_json") = std::string(), py::arg("out_dir") = std::string("."),
        py::arg("workers") = 1);
}
