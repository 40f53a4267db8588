#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pmuspoof/features.hpp"

#include <json.hpp>

namespace pmuspoof {

// Shared training knobs. SVM fields first, then MLP fields. seed drives
// every random choice during training (MLP init, epoch shuffles); SMO
// itself is deterministic and ignores it.
struct TrainConfig {
  double c_param = 1.0;
  double gamma = 0.2;
  double smo_tol = 1e-3;         // stop when max KKT violation < this
  int64_t max_passes = 200000;   // hard cap on SMO pair updates
  size_t subsample_cap = 20000;  // rows the harness hands to training
  int epochs = 100;
  int batch_size = 256;
  double learning_rate = 1e-3;
  uint64_t seed = 0;
};

nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct Prediction {
  double score = 0.0;   // SVM: signed decision value; MLP: probability
  bool spoofed = false;
};

// RBF-kernel SVM in the 5-feature space. Support vectors are stored
// standardized; decision() and predict() take raw feature rows and apply
// the stored standardizer. decision > 0 reads "spoofed".
struct SvmModel {
  Standardizer standardizer;
  double c_param = 1.0;
  double gamma = 0.2;
  double bias = 0.0;
  std::vector<std::array<double, 5>> support_vectors;
  std::vector<double> coef;  // alpha_i * y_i, same order as support_vectors
  bool converged = true;

  double decision(const std::array<double, 5>& raw) const;
  double decision_standardized(const std::array<double, 5>& x) const;
};

// Trains by sequential minimal optimization on the dual problem: the
// working pair is always the most violating one (first-order selection over
// the I_up / I_low index sets), updates keep the box and equality
// constraints exact, and the run stops when the worst violation drops below
// smo_tol (or at max_passes, flagged via converged=false). x rows must
// already be standardized; labels nonzero = spoofed = class +1.
SvmModel train_svm(std::span<const std::array<double, 5>> x,
                   std::span<const uint8_t> y, const Standardizer& standardizer,
                   const TrainConfig& cfg);

// Fully connected 5-100-100-1 net: ReLU hidden layers, logistic output,
// trained with mini-batch gradient descent on mean binary cross-entropy.
// Weight layout is row-major [out][in]; the flat parameter order is
// w1, b1, w2, b2, w3, b3.
struct MlpModel {
  Standardizer standardizer;
  std::vector<double> w1, b1, w2, b2, w3, b3;

  double probability(const std::array<double, 5>& raw) const;
  double probability_standardized(const std::array<double, 5>& x) const;
};

inline constexpr int kMlpHidden = 100;

// Glorot-uniform weights, zero biases.
MlpModel init_mlp(const Standardizer& standardizer, uint64_t seed);

MlpModel train_mlp(std::span<const std::array<double, 5>> x,
                   std::span<const uint8_t> y, const Standardizer& standardizer,
                   const TrainConfig& cfg);

// Flat-parameter access and batch loss/gradient, used both by training and
// by finite-difference verification. Gradient order matches get/set.
size_t mlp_param_count();
std::vector<double> mlp_get_params(const MlpModel& m);
void mlp_set_params(MlpModel& m, std::span<const double> params);
double mlp_batch_loss(const MlpModel& m, std::span<const std::array<double, 5>> x,
                      std::span<const uint8_t> y);
std::vector<double> mlp_batch_gradient(const MlpModel& m,
                                       std::span<const std::array<double, 5>> x,
                                       std::span<const uint8_t> y);

// predict applies the model's standardizer to raw rows. SVM flags
// score > 0, MLP flags probability > 0.5; exact ties read "normal".
Prediction predict(const SvmModel& m, const std::array<double, 5>& raw);
Prediction predict(const MlpModel& m, const std::array<double, 5>& raw);

// Row-parallel batch prediction; bit-exact for any worker count.
std::vector<Prediction> predict_batch(const SvmModel& m,
                                      std::span<const std::array<double, 5>> raw,
                                      int workers = 1);
std::vector<Prediction> predict_batch(const MlpModel& m,
                                      std::span<const std::array<double, 5>> raw,
                                      int workers = 1);

struct GridPoint {
  double c_param = 0.0;
  double gamma = 0.0;
  double f1 = 0.0;
};

struct GridSearchResult {
  std::vector<GridPoint> table;  // c-major scan order
  double best_c = 0.0;
  double best_gamma = 0.0;
  double best_f1 = 0.0;
};

// Trains one SVM per (C, gamma) cell on (x, y) and scores F1 on the
// validation rows. Ties keep the earliest cell in scan order.
GridSearchResult grid_search_svm(std::span<const std::array<double, 5>> x,
                                 std::span<const uint8_t> y,
                                 std::span<const std::array<double, 5>> val_x,
                                 std::span<const uint8_t> val_y,
                                 std::span<const double> c_grid,
                                 std::span<const double> gamma_grid,
                                 const Standardizer& standardizer,
                                 const TrainConfig& base_cfg);

// Model files are JSON with a "kind" discriminator; doubles are stored
// with shortest round-trip formatting, so save/load is bit-exact.
using AnyModel = std::variant<SvmModel, MlpModel>;

const char* model_kind_name(const AnyModel& m);
nlohmann::ordered_json model_to_json(const AnyModel& m);
AnyModel model_from_json(const nlohmann::json& j);
void save_model(const AnyModel& m, const std::string& path);
AnyModel load_model(const std::string& path);

Prediction predict(const AnyModel& m, const std::array<double, 5>& raw);
std::vector<Prediction> predict_batch(const AnyModel& m,
                                      std::span<const std::array<double, 5>> raw,
                                      int workers = 1);

}  // namespace pmuspoof
