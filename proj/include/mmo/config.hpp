#pragma once

#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmo/error.hpp"
#include "mmo/model.hpp"

namespace mmo {

// Sweep axis "lo:hi:n" (n >= 2 points, endpoints included).
struct Range {
  double lo = 0, hi = 0;
  std::size_t n = 2;

  double at(std::size_t k) const {
    if (k + 1 == n) return hi;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  std::vector<double> values() const {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = at(k);
    return v;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  double x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw Error(ErrorKind::Validation, key + ": not a number: '" + v + "'");
  return x;
}

inline std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw Error(ErrorKind::Validation, key + ": not a count: '" + v + "'");
  return x;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::Validation, key + ": not a boolean: '" + v + "'");
}

}  // namespace detail

inline Range parse_range(const std::string& key, const std::string& s) {
  const auto c1 = s.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : s.find(':', c1 + 1);
  if (c2 == std::string::npos) throw Error(ErrorKind::Validation, key + ": expected lo:hi:n, got '" + s + "'");
  Range r;
  r.lo = detail::to_double(key, detail::trim(s.substr(0, c1)));
  r.hi = detail::to_double(key, detail::trim(s.substr(c1 + 1, c2 - c1 - 1)));
  r.n = detail::to_count(key, detail::trim(s.substr(c2 + 1)));
  if (r.n < 2) throw Error(ErrorKind::Validation, key + ": need at least 2 points");
  if (!(r.lo < r.hi)) throw Error(ErrorKind::Validation, key + ": need lo < hi");
  return r;
}

struct Config {
  ModelParams params;
  std::optional<Range> scanD, scanGamma;
  std::optional<double> w0;
  std::size_t iters = 10000;
  std::size_t samples = 10000;  // lift samples per period for envelopes
  long qMax = 100;
  std::string out;
  std::string format = "csv";
  unsigned workers = 1;
  bool dumpTrajectory = false;
  std::string signatureTarget;

  void validate() const {
    params.validate();
    if (format != "csv" && format != "json") throw Error(ErrorKind::Validation, "format must be csv or json");
    if (iters < 1) throw Error(ErrorKind::Validation, "iters must be >= 1");
    if (samples < 2) throw Error(ErrorKind::Validation, "samples must be >= 2");
    if (workers < 1) throw Error(ErrorKind::Validation, "workers must be >= 1");
    if (qMax < 1) throw Error(ErrorKind::Validation, "qmax must be >= 1");
  }
};

// Applies one key=value pair. `a-half` is the half-coefficient spelling of the
// linear term and is stored as a = 2 * value.
inline void set_key(Config& c, const std::string& key, const std::string& value) {
  using namespace detail;
  auto& p = c.params;
  if (key == "a") p.a = to_double(key, value);
  else if (key == "a-half") p.a = ModelParams::linear_coefficient_from_half(to_double(key, value));
  else if (key == "eps") p.eps = to_double(key, value);
  else if (key == "b") p.b = to_double(key, value);
  else if (key == "I") p.I = to_double(key, value);
  else if (key == "vR") p.vR = to_double(key, value);
  else if (key == "gamma") p.gamma = to_double(key, value);
  else if (key == "d") p.d = to_double(key, value);
  else if (key == "scan-d") c.scanD = parse_range(key, value);
  else if (key == "scan-gamma") c.scanGamma = parse_range(key, value);
  else if (key == "w0") c.w0 = to_double(key, value);
  else if (key == "iters") c.iters = to_count(key, value);
  else if (key == "samples") c.samples = to_count(key, value);
  else if (key == "qmax") c.qMax = static_cast<long>(to_count(key, value));
  else if (key == "out") c.out = value;
  else if (key == "format") c.format = value;
  else if (key == "workers") c.workers = static_cast<unsigned>(to_count(key, value));
  else if (key == "dump-trajectory") c.dumpTrajectory = to_bool(key, value);
  else if (key == "signature-target") c.signatureTarget = value;
  else throw Error(ErrorKind::Validation, "unknown key '" + key + "'");
}

// Flat key=value lines; '#' starts a comment.
inline void load_config(std::istream& is, Config& c) {
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Validation, "config line " + std::to_string(lineNo) + ": expected key=value");
    set_key(c, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
}

}  // namespace mmo
