#include "pmuspoof/pmu_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

namespace pmuspoof {

namespace {

constexpr std::array<const char*, 8> kSignalNames = {
    "vp_mag", "vn_mag", "v0_mag", "phi_p", "phi_n", "phi_0", "freq", "rocof",
};

constexpr const char* kCsvHeader =
    "pmu_id,cycle,vp_mag,vn_mag,v0_mag,phi_p,phi_n,phi_0,freq,rocof";

}  // namespace

const char* signal_name(SignalKind kind) {
  return kSignalNames[static_cast<int>(kind)];
}

std::optional<SignalKind> signal_from_name(std::string_view name) {
  for (int i = 0; i < kSignalCount; ++i) {
    if (name == kSignalNames[i]) return static_cast<SignalKind>(i);
  }
  return std::nullopt;
}

bool is_magnitude(SignalKind kind) {
  return kind == SignalKind::VposMag || kind == SignalKind::VnegMag ||
         kind == SignalKind::VzeroMag;
}

const PmuStream* Dataset::find(std::string_view pmu_id) const {
  for (const auto& s : streams) {
    if (s.pmu_id == pmu_id) return &s;
  }
  return nullptr;
}

size_t Dataset::index_of(std::string_view pmu_id) const {
  for (size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].pmu_id == pmu_id) return i;
  }
  throw DataError("unknown pmu_id: " + std::string(pmu_id));
}

void Dataset::validate() const {
  if (streams.size() < 2) throw DataError("dataset needs at least 2 streams");
  const size_t len = streams[0].size();
  const int rate = streams[0].rate_hz;
  if (len == 0) throw DataError("empty dataset");
  for (size_t i = 0; i < streams.size(); ++i) {
    const auto& s = streams[i];
    if (s.pmu_id.empty()) throw DataError("stream with empty pmu_id");
    for (size_t j = 0; j < i; ++j) {
      if (streams[j].pmu_id == s.pmu_id) {
        throw DataError("duplicate pmu_id: " + s.pmu_id);
      }
    }
    if (s.rate_hz != rate) throw DataError("inconsistent rate_hz across streams");
    for (int c = 0; c < kSignalCount; ++c) {
      if (s.signals[c].size() != len) {
        throw DataError("inconsistent stream lengths: " + s.pmu_id);
      }
      const auto kind = static_cast<SignalKind>(c);
      for (double v : s.signals[c]) {
        if (!std::isfinite(v)) {
          throw DataError("non-finite sample in " + s.pmu_id + "/" +
                          signal_name(kind));
        }
        if (is_magnitude(kind) && v < 0.0) {
          throw DataError("negative magnitude in " + s.pmu_id + "/" +
                          signal_name(kind));
        }
      }
    }
  }
}

std::vector<std::pair<uint32_t, uint32_t>> pair_indices(size_t p) {
  if (p < 2) throw DataError("pair_indices: need at least 2 devices");
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  pairs.reserve(p * (p - 1) / 2);
  for (uint32_t i = 0; i + 1 < p; ++i) {
    for (uint32_t j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void save_csv(const Dataset& data, std::ostream& out) {
  out << kCsvHeader << '\n';
  char buf[32];
  for (const auto& s : data.streams) {
    const size_t n = s.size();
    for (size_t k = 0; k < n; ++k) {
      out << s.pmu_id << ',' << k;
      for (int c = 0; c < kSignalCount; ++c) {
        auto res = std::to_chars(buf, buf + sizeof(buf), s.signals[c][k]);
        out << ',';
        out.write(buf, res.ptr - buf);
      }
      out << '\n';
    }
  }
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  save_csv(data, out);
  out.flush();
  if (!out) throw DataError("write failed: " + path);
}

namespace {

double parse_double_field(std::string_view field, size_t line_no) {
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw DataError("line " + std::to_string(line_no) +
                    ": bad numeric field '" + std::string(field) + "'");
  }
  return v;
}

int64_t parse_int_field(std::string_view field, size_t line_no) {
  int64_t v = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw DataError("line " + std::to_string(line_no) +
                    ": bad cycle field '" + std::string(field) + "'");
  }
  return v;
}

struct RawStream {
  std::string pmu_id;
  std::vector<int64_t> cycles;
  std::array<std::vector<double>, 8> cols;
};

}  // namespace

Dataset load_csv(std::istream& in, int rate_hz) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw DataError("unexpected CSV header: '" + line + "'");
  }

  std::vector<RawStream> raw;
  size_t line_no = 1;
  RawStream* cur = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::array<std::string_view, 10> fields;
    std::string_view rest = line;
    for (int f = 0; f < 10; ++f) {
      const size_t comma = rest.find(',');
      if (f < 9) {
        if (comma == std::string_view::npos) {
          throw DataError("line " + std::to_string(line_no) +
                          ": expected 10 fields");
        }
        fields[f] = rest.substr(0, comma);
        rest = rest.substr(comma + 1);
      } else {
        if (comma != std::string_view::npos) {
          throw DataError("line " + std::to_string(line_no) +
                          ": expected 10 fields");
        }
        fields[f] = rest;
      }
    }

    if (cur == nullptr || cur->pmu_id != fields[0]) {
      cur = nullptr;
      for (auto& r : raw) {
        if (r.pmu_id == fields[0]) {
          cur = &r;
          break;
        }
      }
      if (cur == nullptr) {
        raw.emplace_back();
        cur = &raw.back();
        cur->pmu_id = std::string(fields[0]);
      }
    }
    cur->cycles.push_back(parse_int_field(fields[1], line_no));
    for (int c = 0; c < kSignalCount; ++c) {
      cur->cols[c].push_back(parse_double_field(fields[2 + c], line_no));
    }
  }

  if (raw.empty()) throw DataError("empty dataset");

  Dataset data;
  data.streams.reserve(raw.size());
  for (auto& r : raw) {
    // Sort rows of this device by cycle, then demand a gap-free range.
    const size_t n = r.cycles.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return r.cycles[a] < r.cycles[b]; });

    PmuStream s;
    s.pmu_id = r.pmu_id;
    s.rate_hz = rate_hz;
    s.reserve(n);
    int64_t prev_cycle = 0;
    for (size_t k = 0; k < n; ++k) {
      const size_t src = order[k];
      const int64_t cyc = r.cycles[src];
      if (k > 0) {
        if (cyc == prev_cycle) {
          throw DataError("duplicate cycle " + std::to_string(cyc) + " for " +
                          r.pmu_id);
        }
        if (cyc != prev_cycle + 1) {
          throw DataError("non-contiguous cycles for " + r.pmu_id +
                          ": gap after " + std::to_string(prev_cycle));
        }
      }
      prev_cycle = cyc;
      for (int c = 0; c < kSignalCount; ++c) {
        s.signals[c].push_back(r.cols[c][src]);
      }
    }
    data.streams.push_back(std::move(s));
  }

  data.validate();
  return data;
}

Dataset load_csv(const std::string& path, int rate_hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  return load_csv(in, rate_hz);
}

uint64_t fingerprint(const Dataset& data) {
  uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](const void* p, size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001B3ULL;
    }
  };
  for (const auto& s : data.streams) {
    mix(s.pmu_id.data(), s.pmu_id.size());
    for (int c = 0; c < kSignalCount; ++c) {
      for (double v : s.signals[c]) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        mix(&bits, sizeof(bits));
      }
    }
  }
  return h;
}

std::string fingerprint_hex(const Dataset& data) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(fingerprint(data)));
  return std::string(buf);
}

}  // namespace pmuspoof
