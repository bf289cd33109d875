#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace econoframe {

// All recoverable failures surface as this; the CLI catches it at the top
// level and turns it into a structured error line + nonzero exit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic PRNG (splitmix64). We avoid <random> distributions because
// their output is implementation-defined and outputs must be byte-identical
// across runs and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0,n). Rejection sampling keeps the draw unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw Error("Rng::next_below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

struct CivilDate {
  int year = 0;
  int month = 0;  // 1-12
  int day = 0;    // 1-31
};

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// algorithm), and its inverse. UTC only; no leap seconds.
std::int64_t days_from_civil(int y, int m, int d);
CivilDate civil_from_days(std::int64_t z);

// Parses "YYYY-MM-DDTHH:MM:SS" with optional trailing "Z" and optional
// fractional seconds (ignored). Returns UTC epoch seconds.
std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

std::string to_lower(std::string s);
std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Fixed-format double for CSV output; deterministic across runs.
std::string fmt_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace econoframe
