// Acceptance checks for the spoof-detection pipeline. Each check prints one
// PASS/FAIL line with the measured numbers; the exit code is the number of
// failed checks. Detail lines are indented so the PASS/FAIL lines stay
// greppable.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pmuspoof/harness.hpp"
#include "pmuspoof/rng.hpp"

using namespace pmuspoof;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int num, const char* name, bool ok, const std::string& detail) {
  std::printf("%s: %2d %s: %s\n", ok ? "PASS" : "FAIL", num, name,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void info(const std::string& line) {
  std::printf("      %s\n", line.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Textbook two-pass Pearson in extended precision, the independent oracle
// the incremental engine is judged against.
double direct_pearson(const double* x, const double* y, size_t n) {
  long double mx = 0.0L, my = 0.0L;
  for (size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  long double sxx = 0.0L, syy = 0.0L, sxy = 0.0L;
  for (size_t k = 0; k < n; ++k) {
    const long double dx = x[k] - mx;
    const long double dy = y[k] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx / n < 1e-24L || syy / n < 1e-24L) return 0.0;
  double r = static_cast<double>(sxy / sqrtl(sxx * syy));
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

// ---------------------------------------------------------------------
// 1. Sliding correlation vs direct per-window recomputation.

void check_oracle_equivalence() {
  const auto t0 = Clock::now();
  GenSpec gen;
  gen.n_pmus = 2;
  gen.minutes = 30;
  gen.seed = 7;
  Dataset data = generate(gen);
  const std::vector<double>& x = data.streams[0].signal(SignalKind::PhiPos);
  // Freeze a stretch of one side so degenerate windows are exercised too.
  std::vector<double> y = data.streams[1].signal(SignalKind::PhiPos);
  for (size_t k = 50000; k < 50600; ++k) y[k] = y[49999];

  const WindowConfig cfg{300, 1};
  const std::vector<double> fast = sliding_pearson(x, y, cfg);
  double maxd = 0.0;
  for (size_t w = 0; w < fast.size(); ++w) {
    const double want = direct_pearson(x.data() + w, y.data() + w, 300);
    maxd = std::max(maxd, std::fabs(fast[w] - want));
  }
  const double secs = seconds_since(t0);
  const bool ok = fast.size() >= 100000 && maxd <= 1e-9 && secs <= 30.0;
  report(1, "sliding vs direct oracle", ok,
         fmt("max|delta| %.3g over %zu windows, %.1fs (need <=1e-9, >=1e5, "
             "<=30s)",
             maxd, fast.size(), secs));
}

// ---------------------------------------------------------------------
// 2. Pair and row arithmetic on the default-sized recording.

Dataset check_row_arithmetic() {
  GenSpec gen;  // defaults: 10 devices, 14 minutes, 60 Hz
  gen.seed = 1;
  Dataset data = generate(gen);
  const FeatureTable table = extract(data, WindowConfig{300, 1}, 4);
  const bool ok = table.pairs.size() == 45 && table.n_windows == 50101 &&
                  table.size() == 2254545;
  report(2, "pair and row counts", ok,
         fmt("%zu pairs x %zu windows = %zu rows (need 45 x 50101 = 2254545)",
             table.pairs.size(), table.n_windows, table.size()));
  return data;
}

// ---------------------------------------------------------------------
// 3. Structural invariants of the three injections.

void check_spoof_invariants() {
  GenSpec gen;
  gen.n_pmus = 2;
  gen.minutes = 1;
  gen.seed = 3;
  const Dataset data = generate(gen);
  const PmuStream& t = data.streams[0];
  bool ok = true;
  std::string why;

  // Hold-last-value: the spoofed span is one constant per channel.
  {
    const int64_t onset = 1200, dur = 900;
    const PmuStream s = apply_rlv(t, onset, dur);
    for (int c = 0; c < kSignalCount && ok; ++c) {
      const double held = t.signals[c][onset - 1];
      for (int64_t k = onset; k < onset + dur; ++k) {
        if (s.signals[c][k] != held) {
          ok = false;
          why = "rlv span not constant";
          break;
        }
      }
    }
  }

  // Mirror: palindrome around the onset pivot, with the forward
  // differences exactly negating the true history's differences.
  if (ok) {
    const int64_t onset = 2000, u = 800;
    const PmuStream s = apply_mirror(t, onset, u, u);
    for (int c = 0; c < kSignalCount && ok; ++c) {
      for (int64_t i = 0; i <= u && ok; ++i) {
        if (i < u && s.signals[c][onset + i] != t.signals[c][onset - i]) {
          ok = false;
          why = "mirror palindrome broken";
        }
        if (i >= 1 && i < u) {
          const double fwd = s.signals[c][onset + i] - s.signals[c][onset + i - 1];
          const double hist = t.signals[c][onset - i + 1] - t.signals[c][onset - i];
          if (fwd != -hist) {
            ok = false;
            why = "mirror derivative not antisymmetric";
          }
        }
      }
    }
  }

  // Dilation anchor: onset 250, factor 2, so cycle 2000 reads the true
  // sample 250 + (2000-250)/2 = 1125 with zero interpolation remainder.
  if (ok) {
    const PmuStream s = apply_dilation(t, 250, 1800, 2.0);
    for (int c = 0; c < kSignalCount; ++c) {
      if (s.signals[c][2000] != t.signals[c][1125]) {
        ok = false;
        why = "dilation anchor mismatch";
        break;
      }
    }
  }

  report(3, "spoof structural invariants", ok,
         ok ? "rlv constant span, mirror palindrome and derivative "
              "antisymmetry, dilation anchor all exact"
            : why);
}

// ---------------------------------------------------------------------
// 4 and 5. Detection quality and latency on the default experiment.

struct RunOut {
  double f1[2] = {0.0, 0.0};           // svm, mlp
  double specificity[2] = {0.0, 0.0};  // percent
  std::optional<int64_t> min_of_max[2];
  double wall_s = 0.0;
};

RunOut run_default_experiment(const SpoofKind& kind, uint64_t seed) {
  ExperimentSpec spec;  // defaults: 10 devices, 14 minutes, 11/3 split
  spec.seed = seed;
  spec.spoof_kind = kind;
  const auto t0 = Clock::now();
  const ExperimentResult r = run_experiment(spec, 4);
  RunOut out;
  out.wall_s = seconds_since(t0);
  for (size_t m = 0; m < 2; ++m) {
    out.f1[m] = r.models[m].rat.f1;
    out.specificity[m] = r.models[m].rat.specificity;
    out.min_of_max[m] = r.models[m].latency.min_of_max;
  }
  return out;
}

std::string show_latency(const std::optional<int64_t>& v) {
  return v ? std::to_string(*v) : std::string("never");
}

void check_detection_and_latency() {
  const char* kind_name[3] = {"rlv", "mirror", "dilation"};
  const SpoofKind kinds[3] = {RepeatedLastValue{}, Mirror{},
                              TimeDilation{}};
  // Three seeded replicates for the kinds the latency ordering compares;
  // the headline quality numbers come from the seed-1 runs.
  RunOut rlv[3], dil[3], mirror1;
  for (uint64_t s = 1; s <= 3; ++s) {
    rlv[s - 1] = run_default_experiment(kinds[0], s);
    info(fmt("rlv seed %llu: f1 svm %.4f mlp %.4f, spec %.2f%% %.2f%%, "
             "latency %s/%s, %.0fs",
             (unsigned long long)s, rlv[s - 1].f1[0], rlv[s - 1].f1[1],
             rlv[s - 1].specificity[0], rlv[s - 1].specificity[1],
             show_latency(rlv[s - 1].min_of_max[0]).c_str(),
             show_latency(rlv[s - 1].min_of_max[1]).c_str(),
             rlv[s - 1].wall_s));
  }
  mirror1 = run_default_experiment(kinds[1], 1);
  info(fmt("mirror seed 1: f1 svm %.4f mlp %.4f, spec %.2f%% %.2f%%, "
           "latency %s/%s, %.0fs",
           mirror1.f1[0], mirror1.f1[1], mirror1.specificity[0],
           mirror1.specificity[1], show_latency(mirror1.min_of_max[0]).c_str(),
           show_latency(mirror1.min_of_max[1]).c_str(), mirror1.wall_s));
  for (uint64_t s = 1; s <= 3; ++s) {
    dil[s - 1] = run_default_experiment(kinds[2], s);
    info(fmt("dilation seed %llu: f1 svm %.4f mlp %.4f, spec %.2f%% %.2f%%, "
             "latency %s/%s, %.0fs",
             (unsigned long long)s, dil[s - 1].f1[0], dil[s - 1].f1[1],
             dil[s - 1].specificity[0], dil[s - 1].specificity[1],
             show_latency(dil[s - 1].min_of_max[0]).c_str(),
             show_latency(dil[s - 1].min_of_max[1]).c_str(),
             dil[s - 1].wall_s));
  }

  const RunOut* seed1[3] = {&rlv[0], &mirror1, &dil[0]};
  bool quality_ok = true;
  std::string quality_why;
  for (int k = 0; k < 3; ++k) {
    const double f1_floor = k == 2 ? 0.80 : 0.90;
    for (int m = 0; m < 2; ++m) {
      if (seed1[k]->f1[m] < f1_floor) {
        quality_ok = false;
        quality_why += fmt(" %s %s f1 %.4f < %.2f;", kind_name[k],
                           m ? "mlp" : "svm", seed1[k]->f1[m], f1_floor);
      }
      if (seed1[k]->specificity[m] < 98.0) {
        quality_ok = false;
        quality_why += fmt(" %s %s specificity %.2f%% < 98%%;", kind_name[k],
                           m ? "mlp" : "svm", seed1[k]->specificity[m]);
      }
    }
    if (seed1[k]->wall_s > 900.0) {
      quality_ok = false;
      quality_why += fmt(" %s runtime %.0fs > 900s;", kind_name[k],
                         seed1[k]->wall_s);
    }
  }
  report(4, "detection quality", quality_ok,
         quality_ok ? "f1 and specificity floors met for all three "
                      "injections, runtime within budget"
                    : quality_why);

  bool latency_ok = true;
  std::string latency_why;
  for (int k = 0; k < 3; ++k) {
    for (int m = 0; m < 2; ++m) {
      const auto& v = seed1[k]->min_of_max[m];
      if (!v || *v > 600) {
        latency_ok = false;
        latency_why += fmt(" %s %s min-of-max %s;", kind_name[k],
                           m ? "mlp" : "svm", show_latency(v).c_str());
      }
    }
  }
  // Dilation should read as the slower detection in most replicates.
  for (int m = 0; m < 2; ++m) {
    int slower = 0;
    for (int s = 0; s < 3; ++s) {
      const int64_t r = rlv[s].min_of_max[m].value_or(INT64_MAX);
      const int64_t d = dil[s].min_of_max[m].value_or(INT64_MAX);
      slower += d >= r;
    }
    if (slower < 2) {
      latency_ok = false;
      latency_why += fmt(" %s dilation slower in only %d/3 replicates;",
                         m ? "mlp" : "svm", slower);
    }
  }
  report(5, "detection latency", latency_ok,
         latency_ok ? "min-of-max finite and <=600 cycles everywhere, "
                      "dilation slower in >=2/3 replicates"
                    : latency_why);
}

// ---------------------------------------------------------------------
// 6. Gradient of the network loss vs central finite differences.

void check_mlp_gradient() {
  Standardizer ident;
  ident.std.fill(1.0);
  MlpModel m = init_mlp(ident, 1);

  GaussianRng g(11);
  std::vector<std::array<double, 5>> x(5);
  for (auto& row : x) {
    for (double& v : row) v = g.next();
  }
  const std::vector<uint8_t> y = {0, 1, 0, 1, 1};

  const std::vector<double> grad = mlp_batch_gradient(m, x, y);
  std::vector<double> params = mlp_get_params(m);
  const double h = 1e-5;
  double worst = 0.0;
  for (size_t idx = 0; idx < params.size(); ++idx) {
    const double keep = params[idx];
    params[idx] = keep + h;
    mlp_set_params(m, params);
    const double up = mlp_batch_loss(m, x, y);
    params[idx] = keep - h;
    mlp_set_params(m, params);
    const double down = mlp_batch_loss(m, x, y);
    params[idx] = keep;
    const double fd = (up - down) / (2.0 * h);
    // Relative to the larger magnitude, floored at the finite-difference
    // noise scale so exactly-zero gradients compare cleanly.
    const double denom = std::max({std::fabs(fd), std::fabs(grad[idx]), 1e-5});
    worst = std::max(worst, std::fabs(fd - grad[idx]) / denom);
  }
  mlp_set_params(m, params);
  report(6, "mlp gradient check", worst <= 1e-4,
         fmt("max relative error %.3g over %zu parameters (need <=1e-4)",
             worst, params.size()));
}

// ---------------------------------------------------------------------
// 7. SVM behavior on constructed sets.

void check_svm_correctness() {
  Standardizer ident;
  ident.std.fill(1.0);

  GaussianRng g(21);
  std::vector<std::array<double, 5>> x;
  std::vector<uint8_t> y;
  for (int k = 0; k < 3000; ++k) {
    const bool pos = k % 2 == 1;
    std::array<double, 5> row;
    for (double& v : row) v = (pos ? 0.5 : -0.5) + 0.1 * g.next();
    x.push_back(row);
    y.push_back(pos ? 1 : 0);
  }

  TrainConfig cfg;
  const SvmModel m = train_svm(x, y, ident, cfg);
  size_t hits = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    hits += predict(m, x[k]).spoofed == (y[k] != 0);
  }
  const bool separable_ok = hits == x.size() && m.converged;

  // KKT residuals on a 2000-row subsample: recover alpha per row from the
  // stored support vector list (absent rows have alpha 0).
  std::vector<double> alpha(x.size(), 0.0);
  size_t sv = 0;
  for (size_t k = 0; k < x.size() && sv < m.support_vectors.size(); ++k) {
    if (m.support_vectors[sv] == x[k]) {
      alpha[k] = m.coef[sv] * (y[k] ? 1.0 : -1.0);
      ++sv;
    }
  }
  const double tol = 1e-2;
  size_t kkt_bad = 0;
  const std::vector<size_t> rows = seeded_subsample(x.size(), 2000, 4);
  for (size_t k : rows) {
    const double margin = (y[k] ? 1.0 : -1.0) * m.decision(x[k]);
    bool good = true;
    if (alpha[k] < 1e-9) {
      good = margin >= 1.0 - tol;
    } else if (alpha[k] > cfg.c_param - 1e-9) {
      good = margin <= 1.0 + tol;
    } else {
      good = std::fabs(margin - 1.0) <= tol;
    }
    kkt_bad += !good;
  }

  // XOR pattern in the first two features.
  std::vector<std::array<double, 5>> xx;
  std::vector<uint8_t> xy;
  const double cx[4] = {-1.0, -1.0, 1.0, 1.0};
  const double cy[4] = {-1.0, 1.0, -1.0, 1.0};
  for (int q = 0; q < 4; ++q) {
    for (int k = 0; k < 50; ++k) {
      std::array<double, 5> row{};
      row[0] = cx[q] + 0.15 * g.next();
      row[1] = cy[q] + 0.15 * g.next();
      xx.push_back(row);
      xy.push_back((cx[q] > 0) != (cy[q] > 0) ? 1 : 0);
    }
  }
  TrainConfig xcfg;
  xcfg.c_param = 10.0;
  xcfg.gamma = 1.0;
  const SvmModel xm = train_svm(xx, xy, ident, xcfg);
  size_t xhits = 0;
  for (size_t k = 0; k < xx.size(); ++k) {
    xhits += predict(xm, xx[k]).spoofed == (xy[k] != 0);
  }
  const double xacc = static_cast<double>(xhits) / xx.size();

  const bool ok = separable_ok && kkt_bad == 0 && xacc >= 0.95;
  report(7, "svm correctness", ok,
         fmt("separable training accuracy %zu/%zu, kkt violations %zu/2000, "
             "xor accuracy %.1f%% (need 100%%, 0, >=95%%)",
             hits, x.size(), kkt_bad, 100.0 * xacc));
}

// ---------------------------------------------------------------------
// 8. Metric identities on random confusions.

void check_metric_identities() {
  Xoshiro256pp rng(31);
  bool ok = true;
  std::string why;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    Confusion c;
    c.tp = 1 + static_cast<int64_t>(rng.bounded(999));
    c.fp = 1 + static_cast<int64_t>(rng.bounded(999));
    c.tn = 1 + static_cast<int64_t>(rng.bounded(999));
    c.fn = 1 + static_cast<int64_t>(rng.bounded(999));
    const Ratios r = ratios(c);

    if (r.fdr != 100.0 - r.precision) {
      ok = false;
      why = "fdr is not exactly 100 - precision";
    }
    const double direct =
        2.0 * c.tp / static_cast<double>(2 * c.tp + c.fp + c.fn);
    if (std::fabs(r.f1 - direct) > 1e-12) {
      ok = false;
      why = "f1 differs from 2tp/(2tp+fp+fn)";
    }
    // Swapping the positive and negative classes swaps sensitivity with
    // specificity and keeps accuracy.
    const Ratios s = ratios(Confusion{c.tn, c.fn, c.tp, c.fp});
    if (std::fabs(s.sensitivity - r.specificity) > 1e-12 ||
        std::fabs(s.specificity - r.sensitivity) > 1e-12 ||
        std::fabs(s.accuracy - r.accuracy) > 1e-12) {
      ok = false;
      why = "class swap does not exchange sensitivity and specificity";
    }
  }
  report(8, "metric identities", ok,
         ok ? "fdr, f1 and class-swap identities hold on 1000 random "
              "confusions"
            : why);
}

// ---------------------------------------------------------------------
// 9. Throughput of the correlation engine and the extraction grid.

void check_throughput(const Dataset& big) {
  GenSpec gen;
  gen.n_pmus = 2;
  gen.minutes = 1;
  gen.seed = 9;
  const Dataset pair = generate(gen);
  const auto& x = pair.streams[0].signal(SignalKind::PhiPos);
  const auto& y = pair.streams[1].signal(SignalKind::PhiPos);
  const auto t0 = Clock::now();
  const std::vector<double> r = sliding_pearson(x, y, WindowConfig{300, 1});
  const double one_pair_s = seconds_since(t0);

  const auto t1 = Clock::now();
  const FeatureTable serial = extract(big, WindowConfig{300, 1}, 1);
  const double serial_s = seconds_since(t1);
  const auto t2 = Clock::now();
  const FeatureTable wide = extract(big, WindowConfig{300, 1}, 4);
  const double wide_s = seconds_since(t2);
  const double speedup = serial_s / wide_s;

  const bool pair_ok = one_pair_s <= 2.0 && r.size() == 3301;
  const bool scale_ok = speedup >= 3.0;
  report(9, "throughput", pair_ok && scale_ok,
         fmt("one pair-minute %.3fs (need <=2s); 45-pair extraction %.1fs -> "
             "%.1fs at 4 workers, speedup %.2fx (need >=3x)",
             one_pair_s, serial_s, wide_s, speedup));
  if (!scale_ok) {
    info(fmt("hardware_concurrency reports %u; a 4-worker speedup of 3x is "
             "not reachable on this host",
             std::thread::hardware_concurrency()));
  }
}

// ---------------------------------------------------------------------
// 10. Byte-identical end-to-end reports through the CLI.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void check_determinism() {
  const fs::path root = fs::temp_directory_path() / "pmuspoof_acceptance_e2e";
  fs::remove_all(root);
  fs::create_directories(root);

  ExperimentSpec spec;
  spec.seed = 9;
  spec.gen.n_pmus = 4;
  spec.gen.minutes = 4;
  spec.train_minutes = 3;
  spec.test_minutes = 1;
  spec.train.subsample_cap = 2000;
  spec.train.epochs = 8;
  {
    std::ofstream cfg(root / "exp.json");
    cfg << experiment_to_json(spec).dump(2) << "\n";
  }

  bool ok = true;
  std::string why;
#ifdef PMUSPOOF_CLI_PATH
  const std::string cli = PMUSPOOF_CLI_PATH;
  const char* runs[3][2] = {{"run1", "1"}, {"run2", "1"}, {"run3", "4"}};
  for (const auto& r : runs) {
    const std::string cmd = "\"" + cli + "\" e2e --config \"" +
                            (root / "exp.json").string() + "\" --out \"" +
                            (root / r[0]).string() + "\" --workers " + r[1] +
                            " > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      ok = false;
      why = "cli e2e run failed";
    }
  }
  if (ok) {
    const std::string j1 = slurp(root / "run1" / "report.json");
    for (const char* other : {"run2", "run3"}) {
      if (slurp(root / other / "report.json") != j1) {
        ok = false;
        why = fmt("report.json differs between run1 and %s", other);
      }
      if (slurp(root / other / "report.txt") !=
          slurp(root / "run1" / "report.txt")) {
        ok = false;
        why = fmt("report.txt differs between run1 and %s", other);
      }
    }
    if (ok && j1.empty()) {
      ok = false;
      why = "report.json is empty";
    }
  }
#else
  ok = false;
  why = "cli path not wired into this build";
#endif
  fs::remove_all(root);
  report(10, "e2e determinism", ok,
         ok ? "report bytes identical across two runs and worker counts "
              "{1,4}"
            : why);
}

}  // namespace

int main() {
  check_oracle_equivalence();
  const Dataset big = check_row_arithmetic();
  check_spoof_invariants();
  check_detection_and_latency();
  check_mlp_gradient();
  check_svm_correctness();
  check_metric_identities();
  check_throughput(big);
  check_determinism();
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
