#include "pmuspoof/classifiers.hpp"

#include <cmath>
#include <cstring>
#include <numeric>

#include "pmuspoof/rng.hpp"

namespace pmuspoof {

namespace {

constexpr int kIn = 5;
constexpr int kH = kMlpHidden;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// BCE on the logit, evaluated without forming the probability:
// max(z,0) - z*t + log(1 + exp(-|z|)).
double bce_from_logit(double z, double t) {
  return std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::fabs(z)));
}

struct Activations {
  std::array<double, kH> z1, h1, z2, h2;
  double z3 = 0.0;
};

void forward(const MlpModel& m, const std::array<double, 5>& x, Activations& a) {
  for (int o = 0; o < kH; ++o) {
    const double* w = m.w1.data() + static_cast<size_t>(o) * kIn;
    double z = m.b1[o];
    for (int i = 0; i < kIn; ++i) z += w[i] * x[i];
    a.z1[o] = z;
    a.h1[o] = z > 0.0 ? z : 0.0;
  }
  for (int o = 0; o < kH; ++o) {
    const double* w = m.w2.data() + static_cast<size_t>(o) * kH;
    double z = m.b2[o];
    for (int i = 0; i < kH; ++i) z += w[i] * a.h1[i];
    a.z2[o] = z;
    a.h2[o] = z > 0.0 ? z : 0.0;
  }
  double z = m.b3[0];
  for (int i = 0; i < kH; ++i) z += m.w3[i] * a.h2[i];
  a.z3 = z;
}

struct Gradients {
  std::vector<double> w1, b1, w2, b2, w3, b3;

  explicit Gradients(const MlpModel& m)
      : w1(m.w1.size(), 0.0),
        b1(m.b1.size(), 0.0),
        w2(m.w2.size(), 0.0),
        b2(m.b2.size(), 0.0),
        w3(m.w3.size(), 0.0),
        b3(m.b3.size(), 0.0) {}

  void zero() {
    auto z = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    z(w1);
    z(b1);
    z(w2);
    z(b2);
    z(w3);
    z(b3);
  }
};

// Adds one sample's loss gradient (w.r.t. summed loss) into g; returns the
// sample's loss. d(BCE)/dz = sigmoid(z) - t.
double backward_accumulate(const MlpModel& m, const std::array<double, 5>& x,
                           double target, Activations& a, Gradients& g) {
  forward(m, x, a);
  const double d3 = sigmoid(a.z3) - target;

  g.b3[0] += d3;
  std::array<double, kH> d2;
  for (int o = 0; o < kH; ++o) {
    g.w3[o] += d3 * a.h2[o];
    d2[o] = a.z2[o] > 0.0 ? d3 * m.w3[o] : 0.0;
  }

  std::array<double, kH> dh1{};
  for (int o = 0; o < kH; ++o) {
    if (d2[o] == 0.0) continue;
    const double d = d2[o];
    g.b2[o] += d;
    double* gw = g.w2.data() + static_cast<size_t>(o) * kH;
    const double* w = m.w2.data() + static_cast<size_t>(o) * kH;
    for (int i = 0; i < kH; ++i) {
      gw[i] += d * a.h1[i];
      dh1[i] += d * w[i];
    }
  }

  for (int o = 0; o < kH; ++o) {
    if (a.z1[o] <= 0.0 || dh1[o] == 0.0) continue;
    const double d = dh1[o];
    g.b1[o] += d;
    double* gw = g.w1.data() + static_cast<size_t>(o) * kIn;
    for (int i = 0; i < kIn; ++i) gw[i] += d * x[i];
  }

  return bce_from_logit(a.z3, target);
}

}  // namespace

MlpModel init_mlp(const Standardizer& standardizer, uint64_t seed) {
  MlpModel m;
  m.standardizer = standardizer;
  m.w1.resize(static_cast<size_t>(kH) * kIn);
  m.b1.assign(kH, 0.0);
  m.w2.resize(static_cast<size_t>(kH) * kH);
  m.b2.assign(kH, 0.0);
  m.w3.resize(kH);
  m.b3.assign(1, 0.0);

  Xoshiro256pp rng(derive_seed(seed, 0x6D6C70));
  auto fill = [&rng](std::vector<double>& w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w) v = (2.0 * rng.uniform01() - 1.0) * limit;
  };
  fill(m.w1, kIn, kH);
  fill(m.w2, kH, kH);
  fill(m.w3, kH, 1);
  return m;
}

size_t mlp_param_count() {
  return static_cast<size_t>(kH) * kIn + kH + static_cast<size_t>(kH) * kH + kH +
         kH + 1;
}

std::vector<double> mlp_get_params(const MlpModel& m) {
  std::vector<double> out;
  out.reserve(mlp_param_count());
  for (const auto* v : {&m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3}) {
    out.insert(out.end(), v->begin(), v->end());
  }
  return out;
}

void mlp_set_params(MlpModel& m, std::span<const double> params) {
  if (params.size() != mlp_param_count()) {
    throw DataError("mlp_set_params: wrong parameter count");
  }
  size_t off = 0;
  for (auto* v : {&m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3}) {
    std::memcpy(v->data(), params.data() + off, v->size() * sizeof(double));
    off += v->size();
  }
}

double mlp_batch_loss(const MlpModel& m, std::span<const std::array<double, 5>> x,
                      std::span<const uint8_t> y) {
  if (x.size() != y.size() || x.empty()) throw DataError("mlp_batch_loss: bad batch");
  Activations a;
  double loss = 0.0;
  for (size_t s = 0; s < x.size(); ++s) {
    forward(m, x[s], a);
    loss += bce_from_logit(a.z3, y[s] != 0 ? 1.0 : 0.0);
  }
  return loss / static_cast<double>(x.size());
}

std::vector<double> mlp_batch_gradient(const MlpModel& m,
                                       std::span<const std::array<double, 5>> x,
                                       std::span<const uint8_t> y) {
  if (x.size() != y.size() || x.empty()) {
    throw DataError("mlp_batch_gradient: bad batch");
  }
  Gradients g(m);
  Activations a;
  for (size_t s = 0; s < x.size(); ++s) {
    backward_accumulate(m, x[s], y[s] != 0 ? 1.0 : 0.0, a, g);
  }
  const double inv = 1.0 / static_cast<double>(x.size());
  std::vector<double> flat;
  flat.reserve(mlp_param_count());
  for (const auto* v : {&g.w1, &g.b1, &g.w2, &g.b2, &g.w3, &g.b3}) {
    for (double gv : *v) flat.push_back(gv * inv);
  }
  return flat;
}

MlpModel train_mlp(std::span<const std::array<double, 5>> x,
                   std::span<const uint8_t> y, const Standardizer& standardizer,
                   const TrainConfig& cfg) {
  const size_t n = x.size();
  if (n != y.size()) throw DataError("train_mlp: length mismatch");
  if (n == 0) throw DataError("train_mlp: no rows");
  if (cfg.epochs < 1) throw DataError("train_mlp: epochs must be positive");
  if (cfg.batch_size < 1) throw DataError("train_mlp: batch_size must be positive");
  if (!(cfg.learning_rate > 0.0)) {
    throw DataError("train_mlp: learning_rate must be positive");
  }
  for (const auto& row : x) {
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("train_mlp: non-finite feature");
    }
  }

  MlpModel m = init_mlp(standardizer, cfg.seed);
  Xoshiro256pp shuffle_rng(derive_seed(cfg.seed, 0x73687566));
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});

  Gradients g(m);
  Activations a;
  const auto batch = static_cast<size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t k = n; k > 1; --k) {
      const size_t r = shuffle_rng.bounded(k);
      std::swap(order[k - 1], order[r]);
    }
    for (size_t start = 0; start < n; start += batch) {
      const size_t end = std::min(n, start + batch);
      g.zero();
      for (size_t s = start; s < end; ++s) {
        const size_t idx = order[s];
        backward_accumulate(m, x[idx], y[idx] != 0 ? 1.0 : 0.0, a, g);
      }
      const double scale = cfg.learning_rate / static_cast<double>(end - start);
      auto step = [scale](std::vector<double>& w, const std::vector<double>& gw) {
        for (size_t i = 0; i < w.size(); ++i) w[i] -= scale * gw[i];
      };
      step(m.w1, g.w1);
      step(m.b1, g.b1);
      step(m.w2, g.w2);
      step(m.b2, g.b2);
      step(m.w3, g.w3);
      step(m.b3, g.b3);
    }
  }
  return m;
}

double MlpModel::probability_standardized(const std::array<double, 5>& x) const {
  Activations a;
  forward(*this, x, a);
  return sigmoid(a.z3);
}

double MlpModel::probability(const std::array<double, 5>& raw) const {
  return probability_standardized(standardizer.apply(raw));
}

Prediction predict(const MlpModel& m, const std::array<double, 5>& raw) {
  const double p = m.probability(raw);
  return {p, p > 0.5};
}

}  // namespace pmuspoof
