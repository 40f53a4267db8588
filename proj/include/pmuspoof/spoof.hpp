#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pmuspoof/pmu_core.hpp"

#include <json.hpp>

namespace pmuspoof {

// The three injection strategies. All of them replace the target device's
// reported values on cycles [onset_t, onset_t + duration) with values the
// device really reported earlier, so every spoofed sample stays inside the
// historical range and the takeover point has no discontinuity:
//
//  RepeatedLastValue  s(onset+i) = true(onset-1)            (freeze)
//  Mirror             s(onset+i) = true(onset-m), m folding i into
//                     [0, u] by reflection (period 2u ping-pong)
//  TimeDilation       s(onset+i) = lerp of true at onset + i/factor
//                     (replay slowed down by `factor`)
//
// Each strategy only needs samples the device produced before the cycle
// being forged.
struct RepeatedLastValue {};

struct Mirror {
  int64_t history_len = 0;  // u; 0 means "use the spoof duration"
};

struct TimeDilation {
  double factor = 2.0;  // > 1 slows the replay down
};

using SpoofKind = std::variant<RepeatedLastValue, Mirror, TimeDilation>;

const char* spoof_kind_name(const SpoofKind& kind);
SpoofKind spoof_kind_from_name(const std::string& name);

struct SpoofSpec {
  std::string target_pmu;
  SpoofKind kind;
  int64_t onset_t = 0;
  int64_t duration = 0;

  int64_t end() const { return onset_t + duration; }
  bool covers(int64_t cycle) const { return cycle >= onset_t && cycle < end(); }
};

// Per-stream injections. Each returns a copy of the stream with cycles
// [onset, onset+duration) replaced on every channel. All throw DataError
// when the window falls outside the recording or the strategy would need
// samples from before cycle 0 or from the future.
PmuStream apply_rlv(const PmuStream& s, int64_t onset, int64_t duration);
PmuStream apply_mirror(const PmuStream& s, int64_t onset, int64_t duration,
                       int64_t history_len);
PmuStream apply_dilation(const PmuStream& s, int64_t onset, int64_t duration,
                         double factor);

// A dataset plus the ground truth of which cycles of which devices are
// forged. `truths` accumulates across chained applications.
struct SpoofedDataset {
  Dataset data;
  std::vector<SpoofSpec> truths;
  std::vector<size_t> target_idx;  // stream index per truth entry

  // True when `cycle` is inside a spoofed span of stream i or stream j.
  bool label(uint32_t i, uint32_t j, int64_t cycle) const {
    for (size_t t = 0; t < truths.size(); ++t) {
      if ((target_idx[t] == i || target_idx[t] == j) && truths[t].covers(cycle)) {
        return true;
      }
    }
    return false;
  }
};

SpoofedDataset apply(const Dataset& data, const SpoofSpec& spec);
SpoofedDataset apply(SpoofedDataset data, const SpoofSpec& spec);

nlohmann::ordered_json spoof_spec_to_json(const SpoofSpec& spec);
SpoofSpec spoof_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json truths_to_json(const std::vector<SpoofSpec>& truths);
std::vector<SpoofSpec> truths_from_json(const nlohmann::json& j);

}  // namespace pmuspoof
