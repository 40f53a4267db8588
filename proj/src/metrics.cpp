#include "pmuspoof/metrics.hpp"

#include <algorithm>
#include <map>

namespace pmuspoof {

Confusion confusion(std::span<const uint8_t> pred, std::span<const uint8_t> truth) {
  if (pred.size() != truth.size()) throw DataError("confusion: length mismatch");
  Confusion c;
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool t = truth[i] != 0;
    if (p && t) {
      ++c.tp;
    } else if (p && !t) {
      ++c.fp;
    } else if (!p && t) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

Ratios ratios(const Confusion& c) {
  const int64_t total = c.total();
  if (total == 0) throw DataError("ratios: empty confusion");
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0) {
    throw DataError("ratios: negative count");
  }
  Ratios r;
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto tn = static_cast<double>(c.tn);
  const auto fn = static_cast<double>(c.fn);

  r.accuracy = 100.0 * (tp + tn) / static_cast<double>(total);

  r.no_positives = c.tp + c.fn == 0;
  r.sensitivity = r.no_positives ? 100.0 : 100.0 * tp / (tp + fn);

  r.no_detections = c.tp + c.fp == 0;
  r.precision = r.no_detections ? 100.0 : 100.0 * tp / (tp + fp);
  // The complement identity is kept exact rather than recomputed from the
  // counts, so fdr + precision == 100 holds bit for bit.
  r.fdr = 100.0 - r.precision;

  r.no_negatives = c.tn + c.fp == 0;
  r.specificity = r.no_negatives ? 100.0 : 100.0 * tn / (tn + fp);

  const double f1_denom = 2.0 * tp + fp + fn;
  r.f1 = f1_denom == 0.0 ? 1.0 : 2.0 * tp / f1_denom;
  return r;
}

std::optional<int64_t> detection_latency(std::span<const uint8_t> preds,
                                         int64_t first_cycle, int64_t onset,
                                         int64_t span_end, int run_len) {
  if (run_len < 1) throw DataError("detection_latency: run_len must be positive");
  if (onset >= span_end) throw DataError("detection_latency: empty span");
  if (onset < first_cycle ||
      span_end > first_cycle + static_cast<int64_t>(preds.size())) {
    throw DataError("detection_latency: span not covered by predictions");
  }
  int64_t run = 0;
  for (int64_t cycle = onset; cycle < span_end; ++cycle) {
    if (preds[cycle - first_cycle] != 0) {
      if (++run == run_len) return cycle - run_len + 1 - onset;
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

LatencyAggregate aggregate_latency(const std::vector<LatencyEntry>& entries) {
  LatencyAggregate agg;
  agg.n_entries = entries.size();

  std::map<int, std::optional<int64_t>> per_minute_max;
  bool any_never = false;
  for (const auto& e : entries) {
    if (e.latency.has_value()) {
      if (!agg.min || *e.latency < *agg.min) agg.min = *e.latency;
      if (!any_never && (!agg.max || *e.latency > *agg.max)) agg.max = *e.latency;
    } else {
      ++agg.n_never;
      any_never = true;
      agg.max.reset();
    }
    auto [it, inserted] = per_minute_max.try_emplace(e.minute, e.latency);
    if (!inserted) {
      std::optional<int64_t>& cur = it->second;
      if (!e.latency.has_value()) {
        cur.reset();
      } else if (cur.has_value() && *e.latency > *cur) {
        cur = e.latency;
      }
    }
  }

  // A minute whose max is "never" cannot be the best guarantee.
  for (const auto& [minute, mx] : per_minute_max) {
    if (!mx.has_value()) continue;
    if (!agg.min_of_max || *mx < *agg.min_of_max) agg.min_of_max = *mx;
  }
  return agg;
}

namespace {

nlohmann::ordered_json opt_latency(const std::optional<int64_t>& v) {
  if (v.has_value()) return *v;
  return nullptr;
}

}  // namespace

nlohmann::ordered_json confusion_to_json(const Confusion& c) {
  nlohmann::ordered_json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["tn"] = c.tn;
  j["fn"] = c.fn;
  return j;
}

nlohmann::ordered_json ratios_to_json(const Ratios& r) {
  nlohmann::ordered_json j;
  j["accuracy_pct"] = r.accuracy;
  j["sensitivity_pct"] = r.sensitivity;
  j["precision_pct"] = r.precision;
  j["specificity_pct"] = r.specificity;
  j["f1"] = r.f1;
  j["fdr_pct"] = r.fdr;
  if (r.no_detections) j["no_detections"] = true;
  if (r.no_positives) j["no_positives"] = true;
  if (r.no_negatives) j["no_negatives"] = true;
  return j;
}

nlohmann::ordered_json latency_to_json(const LatencyAggregate& agg,
                                       const std::vector<LatencyEntry>& entries) {
  nlohmann::ordered_json j;
  j["n_entries"] = agg.n_entries;
  j["n_never"] = agg.n_never;
  j["min"] = opt_latency(agg.min);
  j["max"] = opt_latency(agg.max);
  j["min_of_max"] = opt_latency(agg.min_of_max);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json item;
    item["minute"] = e.minute;
    item["pmu_i"] = e.pmu_i;
    item["pmu_j"] = e.pmu_j;
    item["latency"] = opt_latency(e.latency);
    arr.push_back(item);
  }
  j["entries"] = arr;
  return j;
}

}  // namespace pmuspoof
