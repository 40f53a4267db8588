#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pmuspoof {

// Raised for anything a caller can cause with bad data or configuration:
// malformed CSV, inconsistent streams, series too short for a window, and
// so on. Logic bugs inside the library are asserts, not DataErrors.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Per-cycle channels reported by one device, in canonical column order.
enum class SignalKind : int {
  VposMag = 0,
  VnegMag = 1,
  VzeroMag = 2,
  PhiPos = 3,
  PhiNeg = 4,
  PhiZero = 5,
  Freq = 6,
  Rocof = 7,
};

inline constexpr int kSignalCount = 8;

inline constexpr std::array<SignalKind, 8> kAllSignals = {
    SignalKind::VposMag, SignalKind::VnegMag, SignalKind::VzeroMag,
    SignalKind::PhiPos,  SignalKind::PhiNeg,  SignalKind::PhiZero,
    SignalKind::Freq,    SignalKind::Rocof,
};

// The channels whose pairwise correlations are used as features, in the
// fixed order they appear in every feature vector.
inline constexpr int kFeatureCount = 5;
inline constexpr std::array<SignalKind, 5> kFeatureSignals = {
    SignalKind::VposMag, SignalKind::PhiPos, SignalKind::Freq,
    SignalKind::PhiNeg,  SignalKind::PhiZero,
};

const char* signal_name(SignalKind kind);
std::optional<SignalKind> signal_from_name(std::string_view name);
bool is_magnitude(SignalKind kind);

// One cycle's worth of channel values.
struct SignalVector {
  std::array<double, 8> v{};

  double& operator[](SignalKind k) { return v[static_cast<int>(k)]; }
  double operator[](SignalKind k) const { return v[static_cast<int>(k)]; }
};

// All cycles from one device, one contiguous vector per channel. Cycle
// index is the clock: sample k of every channel belongs to cycle
// first_cycle + k (first_cycle is 0 everywhere in this library; CSV input
// must cover a gap-free cycle range starting anywhere).
struct PmuStream {
  std::string pmu_id;
  int rate_hz = 60;
  std::array<std::vector<double>, 8> signals;

  size_t size() const { return signals[0].size(); }

  const std::vector<double>& signal(SignalKind k) const {
    return signals[static_cast<int>(k)];
  }
  std::vector<double>& signal(SignalKind k) {
    return signals[static_cast<int>(k)];
  }

  SignalVector at(size_t i) const {
    SignalVector s;
    for (int c = 0; c < kSignalCount; ++c) s.v[c] = signals[c][i];
    return s;
  }

  void append(const SignalVector& s) {
    for (int c = 0; c < kSignalCount; ++c) signals[c].push_back(s.v[c]);
  }

  void reserve(size_t n) {
    for (auto& col : signals) col.reserve(n);
  }
};

// A synchronized recording from several devices. All streams share the
// same rate and length and are aligned on the cycle index.
struct Dataset {
  std::vector<PmuStream> streams;

  size_t n_pmus() const { return streams.size(); }
  size_t n_cycles() const { return streams.empty() ? 0 : streams[0].size(); }
  int rate_hz() const { return streams.empty() ? 60 : streams[0].rate_hz; }
  size_t cycles_per_minute() const { return static_cast<size_t>(rate_hz()) * 60; }

  const PmuStream* find(std::string_view pmu_id) const;
  size_t index_of(std::string_view pmu_id) const;  // throws DataError if absent

  // Throws DataError unless: >= 2 streams, unique ids, equal rates and
  // lengths, nonzero length, all values finite, magnitudes nonnegative.
  void validate() const;
};

// All unordered device pairs (i, j) with i < j, ordered lexicographically:
// (0,1), (0,2), ..., (0,p-1), (1,2), ... Throws DataError if p < 2.
std::vector<std::pair<uint32_t, uint32_t>> pair_indices(size_t p);

// CSV layout: header "pmu_id,cycle,vp_mag,vn_mag,v0_mag,phi_p,phi_n,phi_0,
// freq,rocof", one row per (device, cycle). Doubles are written with
// shortest round-trip formatting, so save followed by load is bit-exact.
void save_csv(const Dataset& data, const std::string& path);
void save_csv(const Dataset& data, std::ostream& out);
Dataset load_csv(const std::string& path, int rate_hz = 60);
Dataset load_csv(std::istream& in, int rate_hz = 60);

// FNV-1a over every sample's bit pattern in (stream, channel, cycle) order.
// Stable identity check for "same bytes, same data".
uint64_t fingerprint(const Dataset& data);
std::string fingerprint_hex(const Dataset& data);

// Shortest-round-trip rendering of a double (the CSV number format).
std::string format_double(double value);

}  // namespace pmuspoof
