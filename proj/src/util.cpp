#include "csnet/util.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace csnet {

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n,
                                                         std::size_t k) {
  if (k > n) k = n;
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// Parses a fixed-width unsigned integer, advancing the cursor.
bool take_uint(std::string_view s, std::size_t& pos, int width, long& out) {
  if (pos + width > s.size()) return false;
  long v = 0;
  for (int i = 0; i < width; ++i) {
    char c = s[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
  }
  pos += width;
  out = v;
  return true;
}

bool take_char(std::string_view s, std::size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  // trim
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  if (s.empty()) return std::nullopt;

  // plain epoch seconds, optionally negative
  {
    std::string_view body = s;
    bool neg = false;
    if (body.front() == '-') {
      neg = true;
      body.remove_prefix(1);
    }
    if (all_digits(body) && body.size() <= 12) {
      std::int64_t v = 0;
      for (char c : body) v = v * 10 + (c - '0');
      return neg ? -v : v;
    }
  }

  std::size_t pos = 0;
  long year, month, day;
  if (!take_uint(s, pos, 4, year)) return std::nullopt;
  if (!take_char(s, pos, '-')) return std::nullopt;
  if (!take_uint(s, pos, 2, month)) return std::nullopt;
  if (!take_char(s, pos, '-')) return std::nullopt;
  if (!take_uint(s, pos, 2, day)) return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;

  long hh = 0, mm = 0, ss = 0;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
    ++pos;
    if (!take_uint(s, pos, 2, hh)) return std::nullopt;
    if (!take_char(s, pos, ':')) return std::nullopt;
    if (!take_uint(s, pos, 2, mm)) return std::nullopt;
    if (take_char(s, pos, ':')) {
      if (!take_uint(s, pos, 2, ss)) return std::nullopt;
      if (take_char(s, pos, '.')) {  // drop fractional seconds
        while (pos < s.size() &&
               std::isdigit(static_cast<unsigned char>(s[pos])))
          ++pos;
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  }

  std::int64_t offset = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int sign = s[pos] == '+' ? 1 : -1;
      ++pos;
      long oh, om = 0;
      if (!take_uint(s, pos, 2, oh)) return std::nullopt;
      if (take_char(s, pos, ':')) {
        if (!take_uint(s, pos, 2, om)) return std::nullopt;
      } else if (pos + 2 <= s.size()) {
        if (!take_uint(s, pos, 2, om)) return std::nullopt;
      }
      offset = sign * (oh * 3600 + om * 60);
    }
  }
  if (pos != s.size()) return std::nullopt;

  std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                      static_cast<unsigned>(day));
  return days * 86400 + hh * 3600 + mm * 60 + ss - offset;
}

std::string format_timestamp(std::int64_t t) {
  std::int64_t days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
  std::int64_t secs = t - days * 86400;
  // civil_from_days (inverse of days_from_civil)
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y + (m <= 2)), m, d,
                static_cast<long long>(secs / 3600),
                static_cast<long long>((secs / 60) % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("short write: " + path);
}

std::uint64_t hash_file(const std::string& path) {
  return fnv1a64(read_file(path));
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == delim) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace csnet
