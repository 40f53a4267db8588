#include "pmuspoof/features.hpp"

#include <atomic>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json_guard.hpp"

namespace pmuspoof {

namespace {

constexpr double kDegenerateVariance = 1e-24;  // population variance floor

constexpr const char* kFeaturesHeader =
    "pmu_i,pmu_j,cycle,r_vp,r_phip,r_f,r_phin,r_phi0,label";

// Accurate summation for the direct (non-rolling) path.
template <class F>
double pairwise_sum(size_t lo, size_t hi, const F& term) {
  const size_t n = hi - lo;
  if (n <= 64) {
    double s = 0.0;
    for (size_t k = lo; k < hi; ++k) s += term(k);
    return s;
  }
  const size_t mid = lo + n / 2;
  return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

// Turns accumulated sums into r. vx/vy/cov are sums of (co)deviations, i.e.
// n times the population quantities.
double finish_r(double vx, double vy, double cov, double n) {
  if (vx / n < kDegenerateVariance || vy / n < kDegenerateVariance) return 0.0;
  if (cov == vx && vx == vy) return 1.0;  // bitwise-identical inputs
  double r = cov / (std::sqrt(vx) * std::sqrt(vy));
  assert(std::fabs(r) <= 1.0 + 1e-12);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  if (x.size() < 2) throw DataError("pearson: need at least 2 samples");
  const size_t n = x.size();
  // An exactly constant series has zero variance no matter how the mean
  // rounds, so settle it before any arithmetic.
  bool x_const = true, y_const = true;
  for (size_t k = 1; k < n && (x_const || y_const); ++k) {
    x_const = x_const && x[k] == x[0];
    y_const = y_const && y[k] == y[0];
  }
  if (x_const || y_const) return 0.0;
  const double dn = static_cast<double>(n);
  const double mx = pairwise_sum(0, n, [&](size_t k) { return x[k]; }) / dn;
  const double my = pairwise_sum(0, n, [&](size_t k) { return y[k]; }) / dn;
  const double vx =
      pairwise_sum(0, n, [&](size_t k) { return (x[k] - mx) * (x[k] - mx); });
  const double vy =
      pairwise_sum(0, n, [&](size_t k) { return (y[k] - my) * (y[k] - my); });
  const double cov =
      pairwise_sum(0, n, [&](size_t k) { return (x[k] - mx) * (y[k] - my); });
  return finish_r(vx, vy, cov, dn);
}

size_t window_count(size_t n_samples, const WindowConfig& cfg) {
  if (cfg.window_len < 2) throw DataError("window_len must be at least 2");
  if (cfg.step < 1) throw DataError("step must be at least 1");
  const auto len = static_cast<size_t>(cfg.window_len);
  if (n_samples < len) throw DataError("series shorter than window");
  return (n_samples - len) / static_cast<size_t>(cfg.step) + 1;
}

namespace {

// Rolling-sum state for one pair of series. Sums are kept over values
// shifted by per-epoch anchors (Kx, Ky) so that signals far from zero do
// not lose precision to cancellation; every full recomputation re-anchors.
struct RollingState {
  double kx = 0, ky = 0;
  double s1x = 0, s2x = 0, s1y = 0, s2y = 0, sxy = 0;

  void recompute(std::span<const double> x, std::span<const double> y,
                 size_t start, size_t len) {
    kx = x[start];
    ky = y[start];
    s1x = s2x = s1y = s2y = sxy = 0.0;
    for (size_t k = start; k < start + len; ++k) {
      const double dx = x[k] - kx;
      const double dy = y[k] - ky;
      s1x += dx;
      s2x += dx * dx;
      s1y += dy;
      s2y += dy * dy;
      sxy += dx * dy;
    }
  }

  void remove(double xv, double yv) {
    const double dx = xv - kx;
    const double dy = yv - ky;
    s1x -= dx;
    s2x -= dx * dx;
    s1y -= dy;
    s2y -= dy * dy;
    sxy -= dx * dy;
  }

  void add(double xv, double yv) {
    const double dx = xv - kx;
    const double dy = yv - ky;
    s1x += dx;
    s2x += dx * dx;
    s1y += dy;
    s2y += dy * dy;
    sxy += dx * dy;
  }

  double pop_var_x(double len) const { return (s2x - s1x * s1x / len) / len; }
  double pop_var_y(double len) const { return (s2y - s1y * s1y / len) / len; }

  double emit(double len) const {
    const double vx = s2x - s1x * s1x / len;
    const double vy = s2y - s1y * s1y / len;
    const double cov = sxy - s1x * s1y / len;
    return finish_r(vx, vy, cov, len);
  }
};

constexpr size_t kRecomputeEvery = 4096;  // advances between full recomputations

// When a rolling variance estimate drops this low it is indistinguishable
// from the drift noise of the rolling sums themselves (a frozen stream
// leaves nothing but rounding residue behind). Recomputing the window from
// the data settles it: an exactly constant window then produces exactly
// zero variance and takes the degenerate fill. Real feature channels sit
// many orders of magnitude above this.
constexpr double kRecheckVariance = 1e-12;

}  // namespace

void sliding_pearson_into(std::span<const double> x, std::span<const double> y,
                          const WindowConfig& cfg, std::span<double> out) {
  if (x.size() != y.size()) throw DataError("sliding_pearson: length mismatch");
  const size_t n_win = window_count(x.size(), cfg);
  assert(out.size() == n_win);
  const auto len = static_cast<size_t>(cfg.window_len);
  const auto step = static_cast<size_t>(cfg.step);
  const double dlen = static_cast<double>(len);

  RollingState st;
  st.recompute(x, y, 0, len);
  out[0] = st.emit(dlen);
  size_t since_recompute = 0;
  for (size_t w = 1; w < n_win; ++w) {
    const size_t start = w * step;
    if (++since_recompute == kRecomputeEvery) {
      st.recompute(x, y, start, len);
      since_recompute = 0;
    } else {
      for (size_t t = start - step; t < start; ++t) st.remove(x[t], y[t]);
      for (size_t t = start + len - step; t < start + len; ++t) st.add(x[t], y[t]);
      if (st.pop_var_x(dlen) < kRecheckVariance ||
          st.pop_var_y(dlen) < kRecheckVariance) {
        st.recompute(x, y, start, len);
        since_recompute = 0;
      }
    }
    out[w] = st.emit(dlen);
  }
}

std::vector<double> sliding_pearson(std::span<const double> x,
                                    std::span<const double> y,
                                    const WindowConfig& cfg) {
  std::vector<double> out(window_count(x.size(), cfg));
  sliding_pearson_into(x, y, cfg, out);
  return out;
}

FeatureRow FeatureTable::row(size_t idx) const {
  assert(idx < size());
  FeatureRow row;
  const size_t p = pair_of(idx);
  row.pmu_i = pairs[p].first;
  row.pmu_j = pairs[p].second;
  row.cycle = cycle_of(idx);
  for (int f = 0; f < kFeatureCount; ++f) row.r[f] = r[f][idx];
  row.label = labels[idx] != 0;
  return row;
}

std::array<double, 5> FeatureTable::features(size_t idx) const {
  return {r[0][idx], r[1][idx], r[2][idx], r[3][idx], r[4][idx]};
}

namespace {

FeatureTable extract_impl(const Dataset& data, const SpoofedDataset* truth,
                          const WindowConfig& cfg, int workers) {
  data.validate();
  const size_t n = data.n_cycles();
  const size_t n_win = window_count(n, cfg);

  FeatureTable table;
  table.pmu_ids.reserve(data.n_pmus());
  for (const auto& s : data.streams) table.pmu_ids.push_back(s.pmu_id);
  table.pairs = pair_indices(data.n_pmus());
  table.first_cycle = cfg.window_len - 1;
  table.step = cfg.step;
  table.n_windows = n_win;
  const size_t total = table.pairs.size() * n_win;
  for (auto& slab : table.r) slab.resize(total);
  table.labels.assign(total, 0);

  const size_t n_tasks = table.pairs.size() * kFeatureCount;
  size_t n_threads = workers <= 0
                         ? std::max(1u, std::thread::hardware_concurrency())
                         : static_cast<size_t>(workers);
  n_threads = std::min(n_threads, n_tasks);

  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run_tasks = [&]() {
    try {
      for (;;) {
        const size_t t = next.fetch_add(1, std::memory_order_relaxed);
        if (t >= n_tasks) return;
        const size_t pair_idx = t / kFeatureCount;
        const int f = static_cast<int>(t % kFeatureCount);
        const auto [i, j] = table.pairs[pair_idx];
        const SignalKind kind = kFeatureSignals[f];
        sliding_pearson_into(
            data.streams[i].signal(kind), data.streams[j].signal(kind), cfg,
            std::span<double>(table.r[f].data() + pair_idx * n_win, n_win));
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (n_threads <= 1) {
    run_tasks();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(run_tasks);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  if (truth != nullptr && !truth->truths.empty()) {
    for (size_t p = 0; p < table.pairs.size(); ++p) {
      const auto [i, j] = table.pairs[p];
      uint8_t* row_labels = table.labels.data() + p * n_win;
      for (size_t w = 0; w < n_win; ++w) {
        const int64_t cycle = table.first_cycle + static_cast<int64_t>(w) * cfg.step;
        row_labels[w] = truth->label(i, j, cycle) ? 1 : 0;
      }
    }
  }
  return table;
}

}  // namespace

FeatureTable extract(const Dataset& data, const WindowConfig& cfg, int workers) {
  return extract_impl(data, nullptr, cfg, workers);
}

FeatureTable extract(const SpoofedDataset& data, const WindowConfig& cfg,
                     int workers) {
  return extract_impl(data.data, &data, cfg, workers);
}

Standardizer fit_standardizer(const FeatureTable& table,
                              std::span<const uint8_t> mask) {
  if (!mask.empty() && mask.size() != table.size()) {
    throw DataError("standardizer: mask size mismatch");
  }
  size_t count = 0;
  if (mask.empty()) {
    count = table.size();
  } else {
    for (uint8_t m : mask) count += m != 0;
  }
  if (count == 0) throw DataError("standardizer: no rows selected");

  Standardizer st;
  const double dn = static_cast<double>(count);
  for (int f = 0; f < kFeatureCount; ++f) {
    const std::vector<double>& col = table.r[f];
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < col.size(); ++i) {
      if (!mask.empty() && mask[i] == 0) continue;
      const double yv = col[i] - comp;
      const double tv = sum + yv;
      comp = (tv - sum) - yv;
      sum = tv;
    }
    const double mean = sum / dn;
    double ss = 0.0;
    comp = 0.0;
    for (size_t i = 0; i < col.size(); ++i) {
      if (!mask.empty() && mask[i] == 0) continue;
      const double d = col[i] - mean;
      const double yv = d * d - comp;
      const double tv = ss + yv;
      comp = (tv - ss) - yv;
      ss = tv;
    }
    st.mean[f] = mean;
    const double sd = std::sqrt(ss / dn);
    st.std[f] = sd < 1e-12 ? 1.0 : sd;
  }
  return st;
}

nlohmann::ordered_json standardizer_to_json(const Standardizer& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["std"] = s.std;
  return j;
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  return read_json("standardizer", [&] {
    Standardizer s;
    const auto& mean = j.at("mean");
    const auto& sd = j.at("std");
    if (!mean.is_array() || mean.size() != 5 || !sd.is_array() || sd.size() != 5) {
      throw DataError("standardizer: mean/std must be arrays of 5");
    }
    for (int f = 0; f < kFeatureCount; ++f) {
      s.mean[f] = mean[f].get<double>();
      s.std[f] = sd[f].get<double>();
      if (!(s.std[f] > 0.0)) throw DataError("standardizer: std must be positive");
    }
    return s;
  });
}

void save_features_csv(const FeatureTable& table, std::ostream& out) {
  out << kFeaturesHeader << '\n';
  char buf[32];
  const size_t total = table.size();
  for (size_t idx = 0; idx < total; ++idx) {
    const size_t p = table.pair_of(idx);
    out << table.pmu_ids[table.pairs[p].first] << ','
        << table.pmu_ids[table.pairs[p].second] << ',' << table.cycle_of(idx);
    for (int f = 0; f < kFeatureCount; ++f) {
      auto res = std::to_chars(buf, buf + sizeof(buf), table.r[f][idx]);
      out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << ',' << (table.labels[idx] != 0 ? '1' : '0') << '\n';
  }
}

void save_features_csv(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  save_features_csv(table, out);
  out.flush();
  if (!out) throw DataError("write failed: " + path);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line, size_t expect,
                                           size_t line_no) {
  std::vector<std::string_view> fields;
  fields.reserve(expect);
  size_t pos = 0;
  for (;;) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  if (fields.size() != expect) {
    throw DataError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(expect) + " fields");
  }
  return fields;
}

}  // namespace

FeatureTable load_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty features file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kFeaturesHeader) {
    throw DataError("unexpected features header: '" + line + "'");
  }

  FeatureTable table;
  std::vector<std::pair<std::string, std::string>> pair_ids;
  std::vector<int64_t> cycles;
  std::array<std::vector<double>, 5> r;
  std::vector<uint8_t> labels;

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, 9, line_no);

    const std::string pi(fields[0]);
    const std::string pj(fields[1]);
    if (pair_ids.empty() || pair_ids.back() != std::make_pair(pi, pj)) {
      pair_ids.emplace_back(pi, pj);
    }

    int64_t cycle = 0;
    {
      auto res = std::from_chars(fields[2].data(),
                                 fields[2].data() + fields[2].size(), cycle);
      if (res.ec != std::errc() || res.ptr != fields[2].data() + fields[2].size()) {
        throw DataError("line " + std::to_string(line_no) + ": bad cycle field");
      }
    }
    cycles.push_back(cycle);

    for (int f = 0; f < kFeatureCount; ++f) {
      double v = 0.0;
      const std::string_view field = fields[3 + f];
      auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw DataError("line " + std::to_string(line_no) + ": bad feature field");
      }
      r[f].push_back(v);
    }
    if (fields[8] == "0") {
      labels.push_back(0);
    } else if (fields[8] == "1") {
      labels.push_back(1);
    } else {
      throw DataError("line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
  }

  if (labels.empty()) throw DataError("empty features file");
  const size_t n_pairs = pair_ids.size();
  if (labels.size() % n_pairs != 0) {
    throw DataError("features file is not a complete pair-major grid");
  }
  const size_t n_win = labels.size() / n_pairs;
  const int64_t first_cycle = cycles[0];
  const int64_t step = n_win > 1 ? cycles[1] - cycles[0] : 1;
  if (step < 1) throw DataError("feature cycles must be strictly increasing");
  for (size_t idx = 0; idx < cycles.size(); ++idx) {
    const auto w = static_cast<int64_t>(idx % n_win);
    if (cycles[idx] != first_cycle + w * step) {
      throw DataError("feature cycles must form the same ladder for every pair");
    }
  }

  // Device ids in first-appearance order; pairs must be exactly the
  // canonical enumeration over those ids.
  for (const auto& [pi, pj] : pair_ids) {
    for (const auto& id : {pi, pj}) {
      bool known = false;
      for (const auto& existing : table.pmu_ids) {
        if (existing == id) {
          known = true;
          break;
        }
      }
      if (!known) table.pmu_ids.push_back(id);
    }
  }
  const auto canonical = pair_indices(table.pmu_ids.size());
  if (canonical.size() != n_pairs) {
    throw DataError("features file is missing device pairs");
  }
  for (size_t p = 0; p < n_pairs; ++p) {
    const auto& [pi, pj] = pair_ids[p];
    if (table.pmu_ids[canonical[p].first] != pi ||
        table.pmu_ids[canonical[p].second] != pj) {
      throw DataError("feature rows out of pair-major order");
    }
  }

  table.pairs = canonical;
  table.first_cycle = first_cycle;
  table.step = step;
  table.n_windows = n_win;
  table.r = std::move(r);
  table.labels = std::move(labels);
  return table;
}

FeatureTable load_features_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  return load_features_csv(in);
}

}  // namespace pmuspoof
