#include "pmuspoof/spoof.hpp"

#include <cmath>

#include "json_guard.hpp"

namespace pmuspoof {

namespace {

void check_window(const PmuStream& s, int64_t onset, int64_t duration) {
  if (duration < 0) throw DataError("spoof duration must be nonnegative");
  if (onset < 0) throw DataError("spoof onset before start of recording");
  if (onset + duration > static_cast<int64_t>(s.size())) {
    throw DataError("spoof window exceeds recording");
  }
}

}  // namespace

PmuStream apply_rlv(const PmuStream& s, int64_t onset, int64_t duration) {
  check_window(s, onset, duration);
  if (duration == 0) return s;
  if (onset < 1) throw DataError("repeated-last-value needs one cycle of history");
  PmuStream out = s;
  for (int c = 0; c < kSignalCount; ++c) {
    std::vector<double>& col = out.signals[c];
    const double held = col[onset - 1];
    for (int64_t i = 0; i < duration; ++i) col[onset + i] = held;
  }
  return out;
}

PmuStream apply_mirror(const PmuStream& s, int64_t onset, int64_t duration,
                       int64_t history_len) {
  check_window(s, onset, duration);
  if (duration == 0) return s;
  const int64_t u = history_len == 0 ? duration : history_len;
  if (u < 1) throw DataError("mirror history must be positive");
  if (onset - u < 0) throw DataError("mirror history reaches before the recording");
  PmuStream out = s;
  for (int64_t i = 0; i < duration; ++i) {
    int64_t m = i % (2 * u);
    if (m > u) m = 2 * u - m;
    const int64_t src = onset - m;
    for (int c = 0; c < kSignalCount; ++c) {
      out.signals[c][onset + i] = s.signals[c][src];
    }
  }
  return out;
}

PmuStream apply_dilation(const PmuStream& s, int64_t onset, int64_t duration,
                         double factor) {
  check_window(s, onset, duration);
  if (!(factor > 1.0) || !std::isfinite(factor)) {
    throw DataError("dilation factor must be greater than 1");
  }
  if (duration == 0) return s;
  PmuStream out = s;
  for (int64_t i = 0; i < duration; ++i) {
    const double pos = static_cast<double>(i) / factor;
    const auto i0 = static_cast<int64_t>(pos);  // pos >= 0, truncation = floor
    const double frac = pos - static_cast<double>(i0);
    const int64_t a = onset + i0;
    for (int c = 0; c < kSignalCount; ++c) {
      const std::vector<double>& src = s.signals[c];
      const double v = frac == 0.0
                           ? src[a]
                           : src[a] * (1.0 - frac) + src[a + 1] * frac;
      out.signals[c][onset + i] = v;
    }
  }
  return out;
}

const char* spoof_kind_name(const SpoofKind& kind) {
  if (std::holds_alternative<RepeatedLastValue>(kind)) return "rlv";
  if (std::holds_alternative<Mirror>(kind)) return "mirror";
  return "dilation";
}

SpoofKind spoof_kind_from_name(const std::string& name) {
  if (name == "rlv") return RepeatedLastValue{};
  if (name == "mirror") return Mirror{};
  if (name == "dilation") return TimeDilation{};
  throw DataError("unknown spoof kind: " + name);
}

namespace {

PmuStream apply_kind(const PmuStream& s, const SpoofSpec& spec) {
  if (const auto* rlv = std::get_if<RepeatedLastValue>(&spec.kind)) {
    (void)rlv;
    return apply_rlv(s, spec.onset_t, spec.duration);
  }
  if (const auto* mir = std::get_if<Mirror>(&spec.kind)) {
    return apply_mirror(s, spec.onset_t, spec.duration, mir->history_len);
  }
  const auto& dil = std::get<TimeDilation>(spec.kind);
  return apply_dilation(s, spec.onset_t, spec.duration, dil.factor);
}

}  // namespace

SpoofedDataset apply(const Dataset& data, const SpoofSpec& spec) {
  SpoofedDataset out;
  out.data = data;
  return apply(std::move(out), spec);
}

SpoofedDataset apply(SpoofedDataset data, const SpoofSpec& spec) {
  const size_t idx = data.data.index_of(spec.target_pmu);
  data.data.streams[idx] = apply_kind(data.data.streams[idx], spec);
  data.truths.push_back(spec);
  data.target_idx.push_back(idx);
  return data;
}

nlohmann::ordered_json spoof_spec_to_json(const SpoofSpec& spec) {
  nlohmann::ordered_json j;
  j["target_pmu"] = spec.target_pmu;
  j["kind"] = spoof_kind_name(spec.kind);
  if (const auto* mir = std::get_if<Mirror>(&spec.kind)) {
    j["history_len"] = mir->history_len;
  }
  if (const auto* dil = std::get_if<TimeDilation>(&spec.kind)) {
    j["factor"] = dil->factor;
  }
  j["onset_t"] = spec.onset_t;
  j["duration"] = spec.duration;
  return j;
}

SpoofSpec spoof_spec_from_json(const nlohmann::json& j) {
  return read_json("spoof spec", [&] {
    SpoofSpec spec;
    spec.target_pmu = j.at("target_pmu").get<std::string>();
    spec.kind = spoof_kind_from_name(j.at("kind").get<std::string>());
    if (auto* mir = std::get_if<Mirror>(&spec.kind)) {
      if (j.contains("history_len")) mir->history_len = j["history_len"].get<int64_t>();
    }
    if (auto* dil = std::get_if<TimeDilation>(&spec.kind)) {
      if (j.contains("factor")) dil->factor = j["factor"].get<double>();
    }
    spec.onset_t = j.at("onset_t").get<int64_t>();
    spec.duration = j.at("duration").get<int64_t>();
    return spec;
  });
}

nlohmann::ordered_json truths_to_json(const std::vector<SpoofSpec>& truths) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& t : truths) j.push_back(spoof_spec_to_json(t));
  return j;
}

std::vector<SpoofSpec> truths_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("truth file must be a JSON array");
  std::vector<SpoofSpec> out;
  out.reserve(j.size());
  for (const auto& item : j) out.push_back(spoof_spec_from_json(item));
  return out;
}

}  // namespace pmuspoof
