#include "pmuspoof/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "pmuspoof/features.hpp"
#include "pmuspoof/rng.hpp"

#include "json_guard.hpp"

namespace pmuspoof {

namespace {

constexpr double kCommonPole = 0.999;  // shared component, per channel
constexpr double kIdioPole = 0.80;     // per-device component

// Stream tags for derive_seed: common walks use (kCommonTag + channel),
// idiosyncratic walks use (kIdioTag + channel, device).
constexpr uint64_t kCommonTag = 100;
constexpr uint64_t kIdioTag = 200;

// x(0) = sigma * g; x(k) = pole * x(k-1) + sigma * sqrt(1 - pole^2) * g(k).
// Stationary with sd sigma from the first sample.
void ar1_fill(GaussianRng& rng, double pole, double sigma, size_t n,
              std::vector<double>& out) {
  out.resize(n);
  if (n == 0) return;
  if (sigma == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    // Keep the draw count independent of sigma so profiles with some
    // zeroed channels still reproduce the others exactly.
    for (size_t k = 0; k < n; ++k) rng.next();
    return;
  }
  const double innov = sigma * std::sqrt(1.0 - pole * pole);
  double x = sigma * rng.next();
  out[0] = x;
  for (size_t k = 1; k < n; ++k) {
    x = pole * x + innov * rng.next();
    out[k] = x;
  }
}

std::string pmu_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "pmu%02d", i);
  return std::string(buf);
}

}  // namespace

ProfileEntry make_entry(double target_rho, double base_level, double base_sigma) {
  if (!(target_rho > 0.0 && target_rho <= 1.0)) {
    throw DataError("target_rho must be in (0, 1]");
  }
  if (!(base_sigma >= 0.0) || !std::isfinite(base_sigma)) {
    throw DataError("base_sigma must be finite and nonnegative");
  }
  if (!std::isfinite(base_level)) throw DataError("base_level must be finite");
  ProfileEntry e;
  e.target_rho = target_rho;
  e.base_level = base_level;
  e.base_sigma = base_sigma;
  e.noise_sigma = base_sigma * std::sqrt((1.0 - target_rho) / target_rho);
  return e;
}

void CorrelationProfile::validate() const {
  for (int c = 0; c < kSignalCount; ++c) {
    const ProfileEntry& e = entries[c];
    const char* name = signal_name(static_cast<SignalKind>(c));
    if (!(e.target_rho > 0.0 && e.target_rho <= 1.0)) {
      throw DataError(std::string("profile ") + name +
                      ": target_rho must be in (0, 1]");
    }
    if (!(e.base_sigma >= 0.0) || !std::isfinite(e.base_sigma)) {
      throw DataError(std::string("profile ") + name +
                      ": base_sigma must be finite and nonnegative");
    }
    if (!(e.noise_sigma >= 0.0) || !std::isfinite(e.noise_sigma)) {
      throw DataError(std::string("profile ") + name +
                      ": noise_sigma must be finite and nonnegative");
    }
    if (!std::isfinite(e.base_level)) {
      throw DataError(std::string("profile ") + name +
                      ": base_level must be finite");
    }
    // A zero-variance entry carries no correlation target (constant or
    // derived channel), so the identity below is vacuous for it.
    const double denom = e.base_sigma * e.base_sigma + e.noise_sigma * e.noise_sigma;
    const double implied =
        denom == 0.0 ? e.target_rho : e.base_sigma * e.base_sigma / denom;
    if (std::fabs(implied - e.target_rho) > 1e-12) {
      throw DataError(std::string("profile ") + name +
                      ": noise_sigma inconsistent with target_rho");
    }
  }
}

CorrelationProfile CorrelationProfile::transmission_like() {
  CorrelationProfile p;
  p.entry(SignalKind::VposMag) = make_entry(0.92, 1.0, 0.004);
  p.entry(SignalKind::VnegMag) = make_entry(0.20, 0.020, 0.001);
  p.entry(SignalKind::VzeroMag) = make_entry(0.20, 0.018, 0.001);
  p.entry(SignalKind::PhiPos) = make_entry(0.99, 0.5, 0.05);
  p.entry(SignalKind::PhiNeg) = make_entry(0.55, -2.0, 0.04);
  p.entry(SignalKind::PhiZero) = make_entry(0.55, 1.2, 0.04);
  p.entry(SignalKind::Freq) = make_entry(0.95, 60.0, 0.01);
  p.entry(SignalKind::Rocof) = make_entry(0.05, 0.0, 0.0);
  return p;
}

CorrelationProfile CorrelationProfile::distribution_like() {
  CorrelationProfile p;
  p.entry(SignalKind::VposMag) = make_entry(0.70, 1.0, 0.008);
  p.entry(SignalKind::VnegMag) = make_entry(0.15, 0.030, 0.0012);
  p.entry(SignalKind::VzeroMag) = make_entry(0.15, 0.028, 0.0012);
  p.entry(SignalKind::PhiPos) = make_entry(0.90, 0.5, 0.06);
  p.entry(SignalKind::PhiNeg) = make_entry(0.35, -2.0, 0.05);
  p.entry(SignalKind::PhiZero) = make_entry(0.35, 1.2, 0.05);
  p.entry(SignalKind::Freq) = make_entry(0.85, 60.0, 0.015);
  p.entry(SignalKind::Rocof) = make_entry(0.05, 0.0, 0.0);
  return p;
}

CorrelationProfile CorrelationProfile::zero_noise() {
  CorrelationProfile p = transmission_like();
  for (int c = 0; c < kSignalCount; ++c) {
    ProfileEntry& e = p.entries[c];
    e = make_entry(1.0, e.base_level, e.base_sigma);
  }
  return p;
}

Dataset generate(const GenSpec& spec) {
  if (spec.n_pmus < 2) throw DataError("n_pmus must be at least 2");
  if (spec.minutes < 1) throw DataError("minutes must be at least 1");
  if (spec.rate_hz < 1) throw DataError("rate_hz must be at least 1");
  spec.profile.validate();

  const size_t n = spec.total_cycles();

  // A negative magnitude sample would make the dataset invalid; keep the
  // floor at least 8 total sds above zero so that cannot happen.
  for (SignalKind k : {SignalKind::VposMag, SignalKind::VnegMag, SignalKind::VzeroMag}) {
    const ProfileEntry& e = spec.profile.entry(k);
    const double total =
        std::sqrt(e.base_sigma * e.base_sigma + e.noise_sigma * e.noise_sigma);
    if (e.base_level < 8.0 * total) {
      throw DataError(std::string("profile ") + signal_name(k) +
                      ": base_level too small for its noise floor");
    }
  }

  Dataset data;
  data.streams.resize(spec.n_pmus);
  for (int i = 0; i < spec.n_pmus; ++i) {
    data.streams[i].pmu_id = pmu_name(i);
    data.streams[i].rate_hz = spec.rate_hz;
    for (auto& col : data.streams[i].signals) col.resize(n);
  }

  std::vector<double> shared, idio;
  for (int c = 0; c < kSignalCount; ++c) {
    const auto kind = static_cast<SignalKind>(c);
    if (kind == SignalKind::Rocof) continue;  // derived below
    const ProfileEntry& e = spec.profile.entries[c];

    GaussianRng common_rng(derive_seed(spec.seed, kCommonTag + c));
    ar1_fill(common_rng, kCommonPole, e.base_sigma, n, shared);

    for (int i = 0; i < spec.n_pmus; ++i) {
      GaussianRng idio_rng(derive_seed(spec.seed, kIdioTag + c, i));
      ar1_fill(idio_rng, kIdioPole, e.noise_sigma, n, idio);
      std::vector<double>& out = data.streams[i].signals[c];
      for (size_t k = 0; k < n; ++k) out[k] = e.base_level + shared[k] + idio[k];
    }
  }

  const double rate = static_cast<double>(spec.rate_hz);
  for (int i = 0; i < spec.n_pmus; ++i) {
    const std::vector<double>& f = data.streams[i].signal(SignalKind::Freq);
    std::vector<double>& r = data.streams[i].signal(SignalKind::Rocof);
    r[0] = 0.0;
    for (size_t k = 1; k < n; ++k) r[k] = rate * (f[k] - f[k - 1]);
  }

  return data;
}

double empirical_rho(const Dataset& data, SignalKind kind) {
  data.validate();
  const auto pairs = pair_indices(data.n_pmus());
  const size_t n = data.n_cycles();
  for (const auto& s : data.streams) {
    const std::vector<double>& x = s.signal(kind);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    if (ss / static_cast<double>(n) < 1e-24) {
      throw DataError("empirical_rho: zero variance in " + s.pmu_id + "/" +
                      signal_name(kind));
    }
  }
  double sum = 0.0;
  for (const auto& [i, j] : pairs) {
    sum += pearson(data.streams[i].signal(kind), data.streams[j].signal(kind));
  }
  return sum / static_cast<double>(pairs.size());
}

namespace {

nlohmann::ordered_json entry_to_json(const ProfileEntry& e) {
  nlohmann::ordered_json j;
  j["target_rho"] = e.target_rho;
  j["base_level"] = e.base_level;
  j["base_sigma"] = e.base_sigma;
  j["noise_sigma"] = e.noise_sigma;
  return j;
}

ProfileEntry entry_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_object()) {
    throw DataError(std::string("profile ") + name + ": expected an object");
  }
  const double rho = j.at("target_rho").get<double>();
  const double level = j.at("base_level").get<double>();
  const double sigma = j.at("base_sigma").get<double>();
  ProfileEntry e = make_entry(rho, level, sigma);
  if (j.contains("noise_sigma")) {
    const double given = j["noise_sigma"].get<double>();
    const double denom = sigma * sigma + given * given;
    const double implied = denom == 0.0 ? rho : sigma * sigma / denom;
    if (std::fabs(implied - rho) > 1e-12) {
      throw DataError(std::string("profile ") + name +
                      ": noise_sigma inconsistent with target_rho");
    }
    e.noise_sigma = given;
  }
  return e;
}

}  // namespace

nlohmann::ordered_json profile_to_json(const CorrelationProfile& profile) {
  nlohmann::ordered_json j;
  for (int c = 0; c < kSignalCount; ++c) {
    j[signal_name(static_cast<SignalKind>(c))] = entry_to_json(profile.entries[c]);
  }
  return j;
}

CorrelationProfile profile_from_json(const nlohmann::json& j) {
  return read_json("profile", [&] {
    if (j.is_string()) {
      const std::string name = j.get<std::string>();
      if (name == "transmission-like") return CorrelationProfile::transmission_like();
      if (name == "distribution-like") return CorrelationProfile::distribution_like();
      if (name == "zero-noise") return CorrelationProfile::zero_noise();
      throw DataError("unknown profile preset: " + name);
    }
    if (!j.is_object()) throw DataError("profile must be a preset name or object");
    for (const auto& item : j.items()) {
      if (!signal_from_name(item.key())) {
        throw DataError("profile: unknown signal '" + item.key() + "'");
      }
    }
    CorrelationProfile p = CorrelationProfile::transmission_like();
    for (int c = 0; c < kSignalCount; ++c) {
      const char* name = signal_name(static_cast<SignalKind>(c));
      if (j.contains(name)) p.entries[c] = entry_from_json(j[name], name);
    }
    p.validate();
    return p;
  });
}

void to_json(nlohmann::ordered_json& j, const GenSpec& spec) {
  j["n_pmus"] = spec.n_pmus;
  j["minutes"] = spec.minutes;
  j["rate_hz"] = spec.rate_hz;
  j["seed"] = spec.seed;
  j["profile"] = profile_to_json(spec.profile);
}

GenSpec genspec_from_json(const nlohmann::json& j) {
  return read_json("generator spec", [&] {
    for (const auto& item : j.items()) {
      const std::string& k = item.key();
      if (k != "n_pmus" && k != "minutes" && k != "rate_hz" && k != "seed" &&
          k != "profile") {
        throw DataError("unknown generator field: " + k);
      }
    }
    GenSpec spec;
    if (j.contains("n_pmus")) spec.n_pmus = j["n_pmus"].get<int>();
    if (j.contains("minutes")) spec.minutes = j["minutes"].get<int>();
    if (j.contains("rate_hz")) spec.rate_hz = j["rate_hz"].get<int>();
    if (j.contains("seed")) spec.seed = j["seed"].get<uint64_t>();
    if (j.contains("profile")) spec.profile = profile_from_json(j["profile"]);
    return spec;
  });
}

}  // namespace pmuspoof
