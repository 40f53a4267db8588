#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pmuspoof/pmu_core.hpp"
#include "pmuspoof/spoof.hpp"

#include <json.hpp>

namespace pmuspoof {

// Pearson correlation, population convention. Rules shared by every entry
// point in this module:
//  - if either population variance is below 1e-24 the value is 0.0
//    (degenerate window, no linear relationship to speak of);
//  - bitwise-identical inputs give exactly 1.0;
//  - results are clamped to [-1, 1]; rounding may push the raw ratio at
//    most ~1e-12 past the bounds, never more.
double pearson(std::span<const double> x, std::span<const double> y);

struct WindowConfig {
  int64_t window_len = 300;
  int64_t step = 1;
};

// r over every sliding window of x against y; entry w covers samples
// [w*step, w*step + window_len). Incremental rolling sums, with a full
// recomputation every 4096 advances so rounding error cannot accumulate
// without bound; each recomputation re-anchors the sums at the current
// window's first samples, which keeps them accurate even when the values
// sit far from zero (freq hovers near 60). Matches direct evaluation to
// well under 1e-9. Throws DataError if the series is shorter than the
// window or the lengths differ.
std::vector<double> sliding_pearson(std::span<const double> x,
                                    std::span<const double> y,
                                    const WindowConfig& cfg);
void sliding_pearson_into(std::span<const double> x, std::span<const double> y,
                          const WindowConfig& cfg, std::span<double> out);

size_t window_count(size_t n_samples, const WindowConfig& cfg);

// One row of the feature grid: the five correlations of a device pair over
// one window, labeled by the window's LAST cycle.
struct FeatureRow {
  uint32_t pmu_i = 0;
  uint32_t pmu_j = 0;
  int64_t cycle = 0;
  std::array<double, 5> r{};
  bool label = false;  // true when cycle falls in a spoofed span of either device
};

// The full (pair x window) grid in structure-of-arrays form. Rows are
// ordered pair-major: row index = pair_idx * n_windows + window_idx, and
// the row's cycle is first_cycle + window_idx * step.
struct FeatureTable {
  std::vector<std::string> pmu_ids;
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  int64_t first_cycle = 0;
  int64_t step = 1;
  size_t n_windows = 0;
  std::array<std::vector<double>, 5> r;  // one slab per feature, pair-major
  std::vector<uint8_t> labels;

  size_t size() const { return pairs.size() * n_windows; }
  size_t pair_of(size_t row) const { return row / n_windows; }
  int64_t cycle_of(size_t row) const {
    return first_cycle + static_cast<int64_t>(row % n_windows) * step;
  }
  FeatureRow row(size_t idx) const;
  std::array<double, 5> features(size_t idx) const;
};

// Correlates every device pair over every window for the five feature
// channels. The (pair, channel) slabs are computed as independent tasks on
// `workers` threads writing disjoint output ranges, so the result is
// bit-exact for any worker count and scheduling order. workers <= 0 means
// one per hardware thread.
FeatureTable extract(const Dataset& data, const WindowConfig& cfg, int workers = 1);
FeatureTable extract(const SpoofedDataset& data, const WindowConfig& cfg,
                     int workers = 1);

// Feature-wise affine map fitted on training rows: population mean/std per
// feature; a std below 1e-12 is replaced by 1 so constant features pass
// through centered.
struct Standardizer {
  std::array<double, 5> mean{};
  std::array<double, 5> std{};

  std::array<double, 5> apply(const std::array<double, 5>& x) const {
    std::array<double, 5> out;
    for (int f = 0; f < 5; ++f) out[f] = (x[f] - mean[f]) / std[f];
    return out;
  }
};

// Fits on the rows of `table` where mask is nonzero (mask empty = all rows).
Standardizer fit_standardizer(const FeatureTable& table,
                              std::span<const uint8_t> mask = {});

nlohmann::ordered_json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

// CSV layout: header "pmu_i,pmu_j,cycle,r_vp,r_phip,r_f,r_phin,r_phi0,label"
// with device columns holding ids, not indices. Doubles use shortest
// round-trip formatting. load re-derives the grid shape and rejects files
// that are not a complete pair-major grid.
void save_features_csv(const FeatureTable& table, const std::string& path);
void save_features_csv(const FeatureTable& table, std::ostream& out);
FeatureTable load_features_csv(const std::string& path);
FeatureTable load_features_csv(std::istream& in);

}  // namespace pmuspoof
