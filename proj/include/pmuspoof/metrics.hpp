#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pmuspoof/pmu_core.hpp"

#include <json.hpp>

namespace pmuspoof {

// Positive class = spoofed, throughout.
struct Confusion {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;

  int64_t total() const { return tp + fp + tn + fn; }
};

// Element-wise tally of predictions against ground truth (nonzero = spoofed).
Confusion confusion(std::span<const uint8_t> pred, std::span<const uint8_t> truth);

// All ratios are percentages except f1, which stays in [0, 1].
// Degenerate classes are filled with the vacuous value and flagged:
//  - nothing predicted positive: precision 100, fdr 0, no_detections
//  - no positive rows exist:     sensitivity 100, no_positives
//  - no negative rows exist:     specificity 100, no_negatives
//  - f1 is 2tp / (2tp + fp + fn), or 1 when that denominator is 0
struct Ratios {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double precision = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  double fdr = 0.0;
  bool no_detections = false;
  bool no_positives = false;
  bool no_negatives = false;
};

// Throws DataError on an empty confusion (total 0).
Ratios ratios(const Confusion& c);

// Smallest d >= 0 such that the run of `run_len` consecutive positive
// predictions starting at cycle onset + d lies entirely inside
// [onset, span_end). nullopt = the spoof was never pinned down within its
// own span. preds[k] is the prediction for cycle first_cycle + k; the span
// must be covered by preds.
std::optional<int64_t> detection_latency(std::span<const uint8_t> preds,
                                         int64_t first_cycle, int64_t onset,
                                         int64_t span_end, int run_len = 30);

// One detector reading: the latency of one device pair on one injection.
struct LatencyEntry {
  int minute = 0;
  uint32_t pmu_i = 0;
  uint32_t pmu_j = 0;
  std::optional<int64_t> latency;  // nullopt = never
};

// min: best single reading (nullopt when nothing was ever detected).
// max: worst reading; nullopt ("never") when any reading missed.
// min_of_max: per-injection worst reading, best injection. This is the
// guarantee number: some injection was fully flagged by every pair within
// that many cycles. nullopt when every injection had a miss.
struct LatencyAggregate {
  size_t n_entries = 0;
  size_t n_never = 0;
  std::optional<int64_t> min;
  std::optional<int64_t> max;
  std::optional<int64_t> min_of_max;
};

LatencyAggregate aggregate_latency(const std::vector<LatencyEntry>& entries);

nlohmann::ordered_json confusion_to_json(const Confusion& c);
nlohmann::ordered_json ratios_to_json(const Ratios& r);
nlohmann::ordered_json latency_to_json(const LatencyAggregate& agg,
                                       const std::vector<LatencyEntry>& entries);

}  // namespace pmuspoof
