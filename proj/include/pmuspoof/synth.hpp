#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "pmuspoof/pmu_core.hpp"

#include <json.hpp>

namespace pmuspoof {

// How one channel is synthesized: every device sees the same slowly
// wandering shared component (sd base_sigma) plus its own idiosyncratic
// component (sd noise_sigma) around base_level. target_rho is the
// asymptotic cross-device correlation this mix produces:
//   target_rho = base_sigma^2 / (base_sigma^2 + noise_sigma^2)
// noise_sigma is always derived from (target_rho, base_sigma); the two are
// never allowed to disagree.
struct ProfileEntry {
  double target_rho = 1.0;   // in (0, 1]
  double base_level = 0.0;
  double base_sigma = 0.0;
  double noise_sigma = 0.0;  // base_sigma * sqrt((1 - rho) / rho)
};

ProfileEntry make_entry(double target_rho, double base_level, double base_sigma);

struct CorrelationProfile {
  std::array<ProfileEntry, 8> entries;

  const ProfileEntry& entry(SignalKind k) const {
    return entries[static_cast<int>(k)];
  }
  ProfileEntry& entry(SignalKind k) { return entries[static_cast<int>(k)]; }

  // Throws DataError if any entry breaks rho in (0,1], sigma >= 0, finite
  // level, or the rho/noise_sigma consistency identity (1e-12 tolerance).
  void validate() const;

  // Tightly correlated bulk-grid behaviour. Positive-sequence quantities
  // nearly identical across devices, sequence components moderately
  // correlated, magnitude floors far above the noise.
  static CorrelationProfile transmission_like();

  // Weaker coupling and relatively larger local noise.
  static CorrelationProfile distribution_like();

  // target_rho = 1 everywhere: devices see identical streams. The
  // degenerate end used by smoke tests.
  static CorrelationProfile zero_noise();
};

struct GenSpec {
  int n_pmus = 10;
  int minutes = 14;
  int rate_hz = 60;
  uint64_t seed = 0;
  CorrelationProfile profile = CorrelationProfile::transmission_like();

  size_t total_cycles() const {
    return static_cast<size_t>(minutes) * static_cast<size_t>(rate_hz) * 60;
  }
};

// Synthesizes one aligned recording. Per channel, the shared component is
// an AR(1) walk with pole 0.999 and stationary sd base_sigma; each device
// adds an independent AR(1) walk with pole 0.92 and stationary sd
// noise_sigma. Both start in their stationary distribution. ROCOF is not
// drawn: it is rate_hz * (freq[k] - freq[k-1]) with rocof[0] = 0, so its
// profile entry only documents the expected empirical outcome. Device i
// consumes its own derived RNG substreams, so a given (seed, device,
// channel) always yields the same samples regardless of n_pmus.
Dataset generate(const GenSpec& spec);

// Mean full-length Pearson correlation of one channel over all device
// pairs. Throws DataError on a zero-variance series (correlation undefined).
double empirical_rho(const Dataset& data, SignalKind kind);

void to_json(nlohmann::ordered_json& j, const GenSpec& spec);
GenSpec genspec_from_json(const nlohmann::json& j);
CorrelationProfile profile_from_json(const nlohmann::json& j);
nlohmann::ordered_json profile_to_json(const CorrelationProfile& profile);

}  // namespace pmuspoof
