#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace csnet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- hashing ---------------------------------------------------------------

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// One master seed fans out to named streams; (a, b) index parallel tasks
// such as (node, walk) so results do not depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = fnv1a64(tag);
  h = mix64(h ^ (base + 0x9e3779b97f4a7c15ull));
  h = mix64(h ^ (a + 0x9e3779b97f4a7c15ull));
  h = mix64(h ^ (b + 0x9e3779b97f4a7c15ull));
  return h;
}

// splitmix64 stream. Cheap to construct, so every parallel task can own one.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // uniform in [0, 1)
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Fisher-Yates draw of k distinct values from [0, n)
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k);

 private:
  std::uint64_t state_;
};

// ---- time ------------------------------------------------------------------

// Days since 1970-01-01 for a proleptic Gregorian civil date.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// Accepts epoch seconds or ISO-8601 (date, optional time, optional zone).
// Returns nullopt on anything unparseable.
std::optional<std::int64_t> parse_timestamp(std::string_view s);

// "YYYY-MM-DDTHH:MM:SSZ" for an epoch-seconds value (UTC).
std::string format_timestamp(std::int64_t epoch_seconds);

// ---- small string/file helpers ----------------------------------------------

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);
std::uint64_t hash_file(const std::string& path);

// Fixed-format float used by every emitted report so reruns are
// byte-comparable.
std::string fmt_double(double v);

std::vector<std::string> split(std::string_view s, char delim);

}  // namespace csnet
