#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mmo/half_integer.hpp"

namespace mmo {

struct SignatureBlock {
  int spikes = 1;              // L_k >= 1
  HalfInteger oscillations{};  // s_k
  bool operator==(const SignatureBlock&) const = default;
};

struct Signature {
  std::vector<SignatureBlock> blocks;
  // Period of the underlying iterate sequence, when one was detected.
  std::optional<std::size_t> period;

  bool operator==(const Signature&) const = default;

  bool tonic() const {
    return std::all_of(blocks.begin(), blocks.end(), [](const SignatureBlock& b) { return b.oscillations.halves() == 0; });
  }

  int total_spikes() const {
    int n = 0;
    for (const auto& b : blocks) n += b.spikes;
    return n;
  }

  // "2^1 1^1 2^1"; a periodic pattern without oscillations prints as "tonic".
  std::string str() const {
    if (period && tonic()) return "tonic";
    std::string s;
    for (const auto& b : blocks) {
      if (!s.empty()) s += ' ';
      s += std::to_string(b.spikes) + '^' + b.oscillations.str();
    }
    return s;
  }
};

// Each entry is one spike followed by that many small oscillations. Spikes
// followed by none merge forward into the next burst; a trailing run of such
// spikes becomes a final block with zero oscillations.
inline std::vector<SignatureBlock> merge_counts(const std::vector<HalfInteger>& counts) {
  std::vector<SignatureBlock> out;
  int run = 0;
  for (const auto c : counts) {
    ++run;
    if (c.halves() > 0) {
      out.push_back({run, c});
      run = 0;
    }
  }
  if (run > 0) out.push_back({run, HalfInteger{}});
  return out;
}

// Block cycle of a periodic count pattern, in a canonical rotation: the
// lexicographically largest block sequence over all rotations.
inline std::vector<SignatureBlock> periodic_blocks(const std::vector<HalfInteger>& cycle) {
  const std::size_t q = cycle.size();
  std::vector<SignatureBlock> best;
  bool any = false;
  for (std::size_t r = 0; r < q; ++r) {
    std::vector<HalfInteger> rot(cycle.begin() + static_cast<std::ptrdiff_t>(r), cycle.end());
    rot.insert(rot.end(), cycle.begin(), cycle.begin() + static_cast<std::ptrdiff_t>(r));
    if (rot.back().halves() == 0) continue;
    auto blocks = merge_counts(rot);
    auto key = [](const std::vector<SignatureBlock>& v) {
      std::vector<std::pair<int, int>> k;
      for (const auto& b : v) k.emplace_back(b.spikes, b.oscillations.halves());
      return k;
    };
    if (!any || key(blocks) > key(best)) {
      best = std::move(blocks);
      any = true;
    }
  }
  if (!any) return {{1, HalfInteger{}}};  // no oscillation anywhere in the cycle
  return best;
}

// True when b is a cyclic rotation of a.
inline bool cyclically_equal(const std::vector<SignatureBlock>& a, const std::vector<SignatureBlock>& b) {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  for (std::size_t r = 0; r < a.size(); ++r) {
    bool ok = true;
    for (std::size_t k = 0; k < a.size() && ok; ++k) ok = a[k] == b[(k + r) % b.size()];
    if (ok) return true;
  }
  return false;
}

// Minimal period q of the tail of `xs` (first recurrence within a relative
// tolerance, checked over the last min(window, n/2) entries).
inline std::optional<std::size_t> detect_period(const std::vector<double>& xs, double relTol = 1e-8,
                                                std::size_t window = 200) {
  const std::size_t n = xs.size();
  if (n < 2) return std::nullopt;
  const std::size_t w = std::min(window, n / 2);  // keep the early transient out
  for (std::size_t q = 1; 2 * q <= w; ++q) {
    bool ok = true;
    for (std::size_t k = n - w + q; k < n && ok; ++k) {
      const double scale = std::max(1.0, std::abs(xs[k]));
      ok = std::abs(xs[k] - xs[k - q]) <= relTol * scale;
    }
    if (ok) return q;
  }
  return std::nullopt;
}

// Minimal exact period of the tail of a discrete sequence.
template <class T>
std::optional<std::size_t> detect_exact_period(const std::vector<T>& xs, std::size_t window = 200) {
  const std::size_t n = xs.size();
  const std::size_t w = std::min(window, n / 2);
  for (std::size_t q = 1; 2 * q <= w; ++q) {
    bool ok = true;
    for (std::size_t k = n - w + q; k < n && ok; ++k) ok = xs[k] == xs[k - q];
    if (ok) return q;
  }
  return std::nullopt;
}

}  // namespace mmo
