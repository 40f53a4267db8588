#include "pmuspoof/classifiers.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <list>
#include <thread>
#include <unordered_map>

namespace pmuspoof {

namespace {

double rbf(double gamma, const std::array<double, 5>& a,
           const std::array<double, 5>& b) {
  double d2 = 0.0;
  for (int f = 0; f < 5; ++f) {
    const double d = a[f] - b[f];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

// On-demand kernel columns with LRU eviction. Eviction only ever forces a
// bit-identical recomputation, so cache size has no effect on results.
class KernelCache {
 public:
  KernelCache(std::span<const std::array<double, 5>> x, double gamma,
              size_t budget_bytes)
      : x_(x), gamma_(gamma) {
    const size_t col_bytes = x.size() * sizeof(double);
    capacity_ = std::max<size_t>(2, budget_bytes / std::max<size_t>(1, col_bytes));
    capacity_ = std::min(capacity_, x.size());
  }

  const std::vector<double>& column(size_t i) {
    auto it = slots_.find(i);
    if (it != slots_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first;
    }
    if (slots_.size() >= capacity_) {
      const size_t victim = lru_.back();
      lru_.pop_back();
      slots_.erase(victim);
    }
    lru_.push_front(i);
    auto [pos, inserted] =
        slots_.emplace(i, std::make_pair(std::vector<double>(), lru_.begin()));
    std::vector<double>& col = pos->second.first;
    col.resize(x_.size());
    const std::array<double, 5>& xi = x_[i];
    for (size_t t = 0; t < x_.size(); ++t) col[t] = rbf(gamma_, xi, x_[t]);
    return col;
  }

 private:
  std::span<const std::array<double, 5>> x_;
  double gamma_;
  size_t capacity_;
  std::unordered_map<size_t, std::pair<std::vector<double>, std::list<size_t>::iterator>>
      slots_;
  std::list<size_t> lru_;
};

}  // namespace

SvmModel train_svm(std::span<const std::array<double, 5>> x,
                   std::span<const uint8_t> y, const Standardizer& standardizer,
                   const TrainConfig& cfg) {
  const size_t n = x.size();
  if (n != y.size()) throw DataError("train_svm: length mismatch");
  if (n < 2) throw DataError("train_svm: need at least 2 rows");
  if (!(cfg.c_param > 0.0)) throw DataError("train_svm: C must be positive");
  if (!(cfg.gamma > 0.0)) throw DataError("train_svm: gamma must be positive");
  bool has_pos = false, has_neg = false;
  for (size_t i = 0; i < n; ++i) {
    (y[i] != 0 ? has_pos : has_neg) = true;
    for (double v : x[i]) {
      if (!std::isfinite(v)) throw DataError("train_svm: non-finite feature");
    }
  }
  if (!has_pos || !has_neg) {
    throw DataError("train_svm: training data contains a single class");
  }

  const double c_bound = cfg.c_param;
  std::vector<double> sign(n);  // y as +/-1
  for (size_t i = 0; i < n; ++i) sign[i] = y[i] != 0 ? 1.0 : -1.0;

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // d/d alpha of the dual at alpha = 0
  KernelCache cache(x, cfg.gamma, size_t{64} << 20);

  // I_up:  alpha can grow along +y (y=+1 & alpha<C, or y=-1 & alpha>0)
  // I_low: alpha can grow along -y
  auto in_up = [&](size_t t) {
    return sign[t] > 0 ? alpha[t] < c_bound : alpha[t] > 0.0;
  };
  auto in_low = [&](size_t t) {
    return sign[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c_bound;
  };

  bool converged = false;
  double up_val = 0.0, low_val = 0.0;
  for (int64_t pass = 0; pass < cfg.max_passes; ++pass) {
    // Most violating pair: i maximizes -y*grad over I_up, j minimizes it
    // over I_low. Optimality is up_val <= low_val (+tol).
    ptrdiff_t i = -1, j = -1;
    up_val = -std::numeric_limits<double>::infinity();
    low_val = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < n; ++t) {
      const double v = -sign[t] * grad[t];
      if (in_up(t) && v > up_val) {
        up_val = v;
        i = static_cast<ptrdiff_t>(t);
      }
      if (in_low(t) && v < low_val) {
        low_val = v;
        j = static_cast<ptrdiff_t>(t);
      }
    }
    if (i < 0 || j < 0 || up_val - low_val < cfg.smo_tol) {
      converged = true;
      break;
    }

    const auto ui = static_cast<size_t>(i);
    const auto uj = static_cast<size_t>(j);
    const std::vector<double>& ki = cache.column(ui);
    const std::vector<double>& kj = cache.column(uj);

    const double old_ai = alpha[ui];
    const double old_aj = alpha[uj];
    double ai = old_ai, aj = old_aj;
    double quad = ki[ui] + kj[uj] - 2.0 * sign[ui] * sign[uj] * ki[uj];
    if (quad <= 0.0) quad = 1e-12;

    if (sign[ui] != sign[uj]) {
      const double delta = (-grad[ui] - grad[uj]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
        if (ai > c_bound) {
          ai = c_bound;
          aj = c_bound - diff;
        }
      } else {
        if (ai < 0.0) {
          ai = 0.0;
          aj = -diff;
        }
        if (aj > c_bound) {
          aj = c_bound;
          ai = c_bound + diff;
        }
      }
    } else {
      const double delta = (grad[ui] - grad[uj]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_bound) {
        if (ai > c_bound) {
          ai = c_bound;
          aj = sum - c_bound;
        }
        if (aj > c_bound) {
          aj = c_bound;
          ai = sum - c_bound;
        }
      } else {
        if (aj < 0.0) {
          aj = 0.0;
          ai = sum;
        }
        if (ai < 0.0) {
          ai = 0.0;
          aj = sum;
        }
      }
    }

    alpha[ui] = ai;
    alpha[uj] = aj;
    const double dai = ai - old_ai;
    const double daj = aj - old_aj;
    const double yi_dai = sign[ui] * dai;
    const double yj_daj = sign[uj] * daj;
    for (size_t t = 0; t < n; ++t) {
      grad[t] += sign[t] * (yi_dai * ki[t] + yj_daj * kj[t]);
    }
  }

  if (!converged) {
    std::fprintf(stderr,
                 "train_svm: stopped at max_passes=%lld with violation %.3e\n",
                 static_cast<long long>(cfg.max_passes), up_val - low_val);
  }

  // At a free vector -y*grad equals the bias exactly; the midpoint of the
  // up/low bounds is the standard estimate and degrades gracefully when no
  // vector is free.
  double bias = 0.0;
  {
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < n; ++t) {
      const double v = -sign[t] * grad[t];
      if (in_up(t) && v > up) up = v;
      if (in_low(t) && v < low) low = v;
    }
    if (std::isfinite(up) && std::isfinite(low)) {
      bias = 0.5 * (up + low);
    } else if (std::isfinite(up)) {
      bias = up;
    } else if (std::isfinite(low)) {
      bias = low;
    }
  }

  SvmModel model;
  model.standardizer = standardizer;
  model.c_param = cfg.c_param;
  model.gamma = cfg.gamma;
  model.bias = bias;
  model.converged = converged;
  for (size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.push_back(x[t]);
      model.coef.push_back(alpha[t] * sign[t]);
    }
  }
  return model;
}

double SvmModel::decision_standardized(const std::array<double, 5>& x) const {
  double sum = bias;
  for (size_t t = 0; t < support_vectors.size(); ++t) {
    sum += coef[t] * rbf(gamma, support_vectors[t], x);
  }
  return sum;
}

double SvmModel::decision(const std::array<double, 5>& raw) const {
  return decision_standardized(standardizer.apply(raw));
}

Prediction predict(const SvmModel& m, const std::array<double, 5>& raw) {
  const double score = m.decision(raw);
  return {score, score > 0.0};
}

namespace {

template <class Model>
std::vector<Prediction> predict_rows(const Model& m,
                                     std::span<const std::array<double, 5>> raw,
                                     int workers) {
  std::vector<Prediction> out(raw.size());
  constexpr size_t kBlock = 2048;
  const size_t n_blocks = (raw.size() + kBlock - 1) / kBlock;
  size_t n_threads = workers <= 0
                         ? std::max(1u, std::thread::hardware_concurrency())
                         : static_cast<size_t>(workers);
  n_threads = std::min(n_threads, std::max<size_t>(1, n_blocks));

  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks) return;
      const size_t lo = b * kBlock;
      const size_t hi = std::min(raw.size(), lo + kBlock);
      for (size_t r = lo; r < hi; ++r) out[r] = predict(m, raw[r]);
    }
  };
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace

std::vector<Prediction> predict_batch(const SvmModel& m,
                                      std::span<const std::array<double, 5>> raw,
                                      int workers) {
  return predict_rows(m, raw, workers);
}

std::vector<Prediction> predict_batch(const MlpModel& m,
                                      std::span<const std::array<double, 5>> raw,
                                      int workers) {
  return predict_rows(m, raw, workers);
}

GridSearchResult grid_search_svm(std::span<const std::array<double, 5>> x,
                                 std::span<const uint8_t> y,
                                 std::span<const std::array<double, 5>> val_x,
                                 std::span<const uint8_t> val_y,
                                 std::span<const double> c_grid,
                                 std::span<const double> gamma_grid,
                                 const Standardizer& standardizer,
                                 const TrainConfig& base_cfg) {
  if (c_grid.empty() || gamma_grid.empty()) {
    throw DataError("grid_search_svm: empty grid");
  }
  if (val_x.size() != val_y.size() || val_x.empty()) {
    throw DataError("grid_search_svm: bad validation set");
  }
  GridSearchResult result;
  bool first = true;
  for (double c : c_grid) {
    for (double g : gamma_grid) {
      TrainConfig cfg = base_cfg;
      cfg.c_param = c;
      cfg.gamma = g;
      const SvmModel model = train_svm(x, y, standardizer, cfg);

      int64_t tp = 0, fp = 0, fn = 0;
      for (size_t r = 0; r < val_x.size(); ++r) {
        const bool pred = model.decision_standardized(val_x[r]) > 0.0;
        const bool truth = val_y[r] != 0;
        if (pred && truth) ++tp;
        if (pred && !truth) ++fp;
        if (!pred && truth) ++fn;
      }
      const double denom = static_cast<double>(2 * tp + fp + fn);
      const double f1 = denom == 0.0 ? 1.0 : 2.0 * static_cast<double>(tp) / denom;

      result.table.push_back({c, g, f1});
      if (first || f1 > result.best_f1) {
        first = false;
        result.best_c = c;
        result.best_gamma = g;
        result.best_f1 = f1;
      }
    }
  }
  return result;
}

}  // namespace pmuspoof
