#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "pmuspoof/pmu_core.hpp"
#include "pmuspoof/rng.hpp"

using namespace pmuspoof;

namespace {

// Two streams with hand-picked awkward doubles, enough to exercise the
// round-trip formatting.
Dataset tiny_dataset() {
  Dataset d;
  for (int i = 0; i < 2; ++i) {
    PmuStream s;
    s.pmu_id = i == 0 ? "alpha" : "beta";
    s.rate_hz = 60;
    for (int k = 0; k < 6; ++k) {
      SignalVector v;
      v[SignalKind::VposMag] = 1.0 + 0.1 * k + 0.01 * i;
      v[SignalKind::VnegMag] = 0.02;
      v[SignalKind::VzeroMag] = 1.0 / 3.0;
      v[SignalKind::PhiPos] = -0.5 + k * 1e-17;
      v[SignalKind::PhiNeg] = -2.0;
      v[SignalKind::PhiZero] = 0.1;
      v[SignalKind::Freq] = 60.0 + k * 1e-9;
      v[SignalKind::Rocof] = k == 0 ? 0.0 : 6e-8;
      s.append(v);
    }
    d.streams.push_back(std::move(s));
  }
  return d;
}

bool bitwise_equal(const Dataset& a, const Dataset& b) {
  if (a.n_pmus() != b.n_pmus() || a.n_cycles() != b.n_cycles()) return false;
  for (size_t i = 0; i < a.n_pmus(); ++i) {
    if (a.streams[i].pmu_id != b.streams[i].pmu_id) return false;
    for (int c = 0; c < kSignalCount; ++c) {
      const auto& xa = a.streams[i].signals[c];
      const auto& xb = b.streams[i].signals[c];
      if (std::memcmp(xa.data(), xb.data(), xa.size() * sizeof(double)) != 0) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("pair enumeration is lexicographic over i < j") {
  auto p2 = pair_indices(2);
  REQUIRE(p2.size() == 1);
  CHECK(p2[0] == std::make_pair(0u, 1u));

  auto p7 = pair_indices(7);
  CHECK(p7.size() == 21);  // 7 choose 2

  auto p10 = pair_indices(10);
  REQUIRE(p10.size() == 45);  // 10 choose 2
  CHECK(p10.front() == std::make_pair(0u, 1u));
  CHECK(p10[1] == std::make_pair(0u, 2u));
  CHECK(p10[8] == std::make_pair(0u, 9u));
  CHECK(p10[9] == std::make_pair(1u, 2u));
  CHECK(p10.back() == std::make_pair(8u, 9u));
  for (size_t k = 1; k < p10.size(); ++k) {
    CHECK(p10[k - 1] < p10[k]);  // strictly increasing lexicographic
  }

  CHECK_THROWS_AS(pair_indices(1), DataError);
  CHECK_THROWS_AS(pair_indices(0), DataError);
}

TEST_CASE("signal names round-trip and keep the canonical column order") {
  const char* expected[] = {"vp_mag", "vn_mag", "v0_mag", "phi_p",
                            "phi_n",  "phi_0",  "freq",   "rocof"};
  for (int c = 0; c < kSignalCount; ++c) {
    const auto kind = static_cast<SignalKind>(c);
    CHECK(std::string(signal_name(kind)) == expected[c]);
    auto back = signal_from_name(expected[c]);
    REQUIRE(back.has_value());
    CHECK(*back == kind);
  }
  CHECK(!signal_from_name("volts").has_value());

  // The feature channels and their order are load-bearing: every feature
  // vector is [r_vp, r_phip, r_f, r_phin, r_phi0].
  REQUIRE(kFeatureCount == 5);
  CHECK(kFeatureSignals[0] == SignalKind::VposMag);
  CHECK(kFeatureSignals[1] == SignalKind::PhiPos);
  CHECK(kFeatureSignals[2] == SignalKind::Freq);
  CHECK(kFeatureSignals[3] == SignalKind::PhiNeg);
  CHECK(kFeatureSignals[4] == SignalKind::PhiZero);

  CHECK(is_magnitude(SignalKind::VposMag));
  CHECK(is_magnitude(SignalKind::VzeroMag));
  CHECK(!is_magnitude(SignalKind::PhiPos));
  CHECK(!is_magnitude(SignalKind::Rocof));
}

TEST_CASE("format_double round-trips random bit patterns") {
  Xoshiro256pp rng(derive_seed(99, 1));
  for (int t = 0; t < 2000; ++t) {
    uint64_t bits = rng.next();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    const std::string s = format_double(v);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(60.0) == "60");
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("csv save/load round-trips bit-exactly") {
  const Dataset d = tiny_dataset();
  std::stringstream buf;
  save_csv(d, buf);

  const std::string text = buf.str();
  CHECK(text.substr(0, text.find('\n')) ==
        "pmu_id,cycle,vp_mag,vn_mag,v0_mag,phi_p,phi_n,phi_0,freq,rocof");

  std::stringstream in(text);
  const Dataset back = load_csv(in);
  CHECK(bitwise_equal(d, back));
  CHECK(fingerprint(d) == fingerprint(back));
}

TEST_CASE("csv load accepts shuffled rows and regroups by cycle") {
  const Dataset d = tiny_dataset();
  std::stringstream buf;
  save_csv(d, buf);

  std::vector<std::string> lines;
  std::string line;
  std::getline(buf, line);
  const std::string header = line;
  while (std::getline(buf, line)) lines.push_back(line);
  REQUIRE(lines.size() == 12);

  // Reverse all data rows: grouping and cycle order both scrambled.
  std::stringstream shuffled;
  shuffled << header << '\n';
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    shuffled << *it << '\n';
  }
  const Dataset back = load_csv(shuffled);
  // First-appearance order of ids now flipped, so compare per id.
  REQUIRE(back.n_pmus() == 2);
  CHECK(back.streams[0].pmu_id == "beta");
  for (const auto& s : d.streams) {
    const PmuStream* other = back.find(s.pmu_id);
    REQUIRE(other != nullptr);
    for (int c = 0; c < kSignalCount; ++c) {
      CHECK(std::memcmp(s.signals[c].data(), other->signals[c].data(),
                        s.size() * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("csv load rejects structural damage") {
  const Dataset d = tiny_dataset();
  std::stringstream buf;
  save_csv(d, buf);
  const std::string text = buf.str();

  SUBCASE("gap in the cycle range") {
    // Drop the row "alpha,3,...".
    std::string damaged = text;
    const size_t pos = damaged.find("alpha,3,");
    REQUIRE(pos != std::string::npos);
    damaged.erase(pos, damaged.find('\n', pos) + 1 - pos);
    std::stringstream in(damaged);
    CHECK_THROWS_WITH_AS(load_csv(in),
                         doctest::Contains("non-contiguous cycles"), DataError);
  }
  SUBCASE("duplicate cycle") {
    std::string damaged = text;
    const size_t pos = damaged.find("beta,5,");
    REQUIRE(pos != std::string::npos);
    const size_t line_end = damaged.find('\n', pos);
    damaged += damaged.substr(pos, line_end + 1 - pos);
    std::stringstream in(damaged);
    CHECK_THROWS_AS(load_csv(in), DataError);
  }
  SUBCASE("wrong header") {
    std::string damaged = "id,cycle\n" + text.substr(text.find('\n') + 1);
    std::stringstream in(damaged);
    CHECK_THROWS_AS(load_csv(in), DataError);
  }
  SUBCASE("unequal stream lengths") {
    std::string damaged = text;
    const size_t pos = damaged.find("beta,5,");
    REQUIRE(pos != std::string::npos);
    damaged.erase(pos, damaged.find('\n', pos) + 1 - pos);
    std::stringstream in(damaged);
    CHECK_THROWS_AS(load_csv(in), DataError);
  }
  SUBCASE("single stream is not a dataset") {
    std::string single = text.substr(0, text.find("beta,"));
    std::stringstream in(single);
    CHECK_THROWS_AS(load_csv(in), DataError);
  }
  SUBCASE("negative magnitude") {
    std::string damaged = text;
    const size_t pos = damaged.find("alpha,0,1");
    REQUIRE(pos != std::string::npos);
    damaged.insert(pos + 8, "-");
    std::stringstream in(damaged);
    CHECK_THROWS_AS(load_csv(in), DataError);
  }
  SUBCASE("non-numeric field") {
    std::string damaged = text;
    const size_t pos = damaged.find("alpha,0,");
    damaged.replace(pos + 8, 1, "x");
    std::stringstream in(damaged);
    CHECK_THROWS_AS(load_csv(in), DataError);
  }
}

TEST_CASE("validate catches inconsistent datasets") {
  Dataset d = tiny_dataset();
  CHECK_NOTHROW(d.validate());

  SUBCASE("duplicate ids") {
    d.streams[1].pmu_id = "alpha";
    CHECK_THROWS_AS(d.validate(), DataError);
  }
  SUBCASE("length mismatch") {
    d.streams[1].signals[0].push_back(1.0);
    CHECK_THROWS_AS(d.validate(), DataError);
  }
  SUBCASE("non-finite sample") {
    d.streams[0].signal(SignalKind::Freq)[2] =
        std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(d.validate(), DataError);
  }
  SUBCASE("negative magnitude") {
    d.streams[0].signal(SignalKind::VposMag)[2] = -0.1;
    CHECK_THROWS_AS(d.validate(), DataError);
  }
  SUBCASE("fewer than two streams") {
    d.streams.pop_back();
    CHECK_THROWS_AS(d.validate(), DataError);
  }
}

TEST_CASE("fingerprint tracks content") {
  Dataset d = tiny_dataset();
  const uint64_t fp = fingerprint(d);
  CHECK(fingerprint_hex(d).substr(0, 2) == "0x");
  CHECK(fingerprint_hex(d).size() == 18);

  Dataset e = tiny_dataset();
  CHECK(fingerprint(e) == fp);

  // One flipped mantissa bit anywhere changes the fingerprint.
  double& v = e.streams[1].signal(SignalKind::PhiNeg)[3];
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  bits ^= 1;
  std::memcpy(&v, &bits, sizeof bits);
  CHECK(fingerprint(e) != fp);

  // Renaming a device changes it too.
  Dataset f = tiny_dataset();
  f.streams[0].pmu_id = "gamma";
  CHECK(fingerprint(f) != fp);
}

TEST_CASE("index_of and find agree") {
  const Dataset d = tiny_dataset();
  CHECK(d.index_of("alpha") == 0);
  CHECK(d.index_of("beta") == 1);
  CHECK(d.find("beta") == &d.streams[1]);
  CHECK(d.find("missing") == nullptr);
  CHECK_THROWS_AS(d.index_of("missing"), DataError);
}
