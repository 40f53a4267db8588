#include <fstream>
#include <set>

#include "pmuspoof/classifiers.hpp"

#include "json_guard.hpp"

namespace pmuspoof {

nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["c_param"] = cfg.c_param;
  j["gamma"] = cfg.gamma;
  j["smo_tol"] = cfg.smo_tol;
  j["max_passes"] = cfg.max_passes;
  j["subsample_cap"] = cfg.subsample_cap;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = cfg.seed;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  return read_json("training config", [&] {
    static const std::set<std::string> known = {
        "c_param", "gamma",      "smo_tol",       "max_passes", "subsample_cap",
        "epochs",  "batch_size", "learning_rate", "seed"};
    for (const auto& item : j.items()) {
      if (!known.count(item.key())) {
        throw DataError("unknown training field: " + item.key());
      }
    }
    TrainConfig cfg;
    if (j.contains("c_param")) cfg.c_param = j["c_param"].get<double>();
    if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
    if (j.contains("smo_tol")) cfg.smo_tol = j["smo_tol"].get<double>();
    if (j.contains("max_passes")) cfg.max_passes = j["max_passes"].get<int64_t>();
    if (j.contains("subsample_cap")) {
      cfg.subsample_cap = j["subsample_cap"].get<size_t>();
    }
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("learning_rate")) {
      cfg.learning_rate = j["learning_rate"].get<double>();
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    return cfg;
  });
}

const char* model_kind_name(const AnyModel& m) {
  return std::holds_alternative<SvmModel>(m) ? "svm" : "mlp";
}

namespace {

nlohmann::ordered_json svm_to_json(const SvmModel& m) {
  nlohmann::ordered_json j;
  j["kind"] = "svm";
  j["standardizer"] = standardizer_to_json(m.standardizer);
  j["c_param"] = m.c_param;
  j["gamma"] = m.gamma;
  j["bias"] = m.bias;
  j["converged"] = m.converged;
  nlohmann::ordered_json sv = nlohmann::ordered_json::array();
  for (const auto& v : m.support_vectors) sv.push_back(v);
  j["support_vectors"] = sv;
  j["coef"] = m.coef;
  return j;
}

SvmModel svm_from_json(const nlohmann::json& j) {
  SvmModel m;
  m.standardizer = standardizer_from_json(j.at("standardizer"));
  m.c_param = j.at("c_param").get<double>();
  m.gamma = j.at("gamma").get<double>();
  m.bias = j.at("bias").get<double>();
  if (j.contains("converged")) m.converged = j["converged"].get<bool>();
  const auto& sv = j.at("support_vectors");
  const auto& coef = j.at("coef");
  if (!sv.is_array() || !coef.is_array() || sv.size() != coef.size()) {
    throw DataError("svm model: support_vectors/coef mismatch");
  }
  m.support_vectors.reserve(sv.size());
  m.coef.reserve(coef.size());
  for (size_t t = 0; t < sv.size(); ++t) {
    if (!sv[t].is_array() || sv[t].size() != 5) {
      throw DataError("svm model: support vector must have 5 features");
    }
    std::array<double, 5> row;
    for (int f = 0; f < 5; ++f) row[f] = sv[t][f].get<double>();
    m.support_vectors.push_back(row);
    m.coef.push_back(coef[t].get<double>());
  }
  return m;
}

nlohmann::ordered_json mlp_to_json(const MlpModel& m) {
  nlohmann::ordered_json j;
  j["kind"] = "mlp";
  j["standardizer"] = standardizer_to_json(m.standardizer);
  j["hidden"] = kMlpHidden;
  j["w1"] = m.w1;
  j["b1"] = m.b1;
  j["w2"] = m.w2;
  j["b2"] = m.b2;
  j["w3"] = m.w3;
  j["b3"] = m.b3;
  return j;
}

MlpModel mlp_from_json(const nlohmann::json& j) {
  if (j.contains("hidden") && j["hidden"].get<int>() != kMlpHidden) {
    throw DataError("mlp model: unsupported hidden width");
  }
  MlpModel m;
  m.standardizer = standardizer_from_json(j.at("standardizer"));
  auto read = [&j](const char* key, std::vector<double>& out, size_t expect) {
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != expect) {
      throw DataError(std::string("mlp model: bad array ") + key);
    }
    out.resize(expect);
    for (size_t i = 0; i < expect; ++i) out[i] = arr[i].get<double>();
  };
  const auto h = static_cast<size_t>(kMlpHidden);
  read("w1", m.w1, h * 5);
  read("b1", m.b1, h);
  read("w2", m.w2, h * h);
  read("b2", m.b2, h);
  read("w3", m.w3, h);
  read("b3", m.b3, 1);
  return m;
}

}  // namespace

nlohmann::ordered_json model_to_json(const AnyModel& m) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  if (const auto* svm = std::get_if<SvmModel>(&m)) {
    j.update(svm_to_json(*svm));
  } else {
    j.update(mlp_to_json(std::get<MlpModel>(m)));
  }
  return j;
}

AnyModel model_from_json(const nlohmann::json& j) {
  return read_json("model file", [&]() -> AnyModel {
    if (j.contains("format_version") && j["format_version"].get<int>() != 1) {
      throw DataError("model file: unsupported format_version");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "svm") return svm_from_json(j);
    if (kind == "mlp") return mlp_from_json(j);
    throw DataError("model file: unknown kind '" + kind + "'");
  });
}

void save_model(const AnyModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << model_to_json(m).dump(2) << '\n';
  out.flush();
  if (!out) throw DataError("write failed: " + path);
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file: " + std::string(e.what()));
  }
  return model_from_json(j);
}

Prediction predict(const AnyModel& m, const std::array<double, 5>& raw) {
  if (const auto* svm = std::get_if<SvmModel>(&m)) return predict(*svm, raw);
  return predict(std::get<MlpModel>(m), raw);
}

std::vector<Prediction> predict_batch(const AnyModel& m,
                                      std::span<const std::array<double, 5>> raw,
                                      int workers) {
  if (const auto* svm = std::get_if<SvmModel>(&m)) {
    return predict_batch(*svm, raw, workers);
  }
  return predict_batch(std::get<MlpModel>(m), raw, workers);
}

}  // namespace pmuspoof
