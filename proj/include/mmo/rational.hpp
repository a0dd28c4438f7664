#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <string>

namespace mmo {

struct Rational {
  long p = 0;
  long q = 1;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
  bool operator==(const Rational&) const = default;
  std::string str() const { return std::to_string(p) + "/" + std::to_string(q); }
};

// Simplest fraction (smallest denominator, then smallest numerator) in
// [lo, hi], found by walking the Stern–Brocot tree; nullopt when every such
// fraction has a denominator above qMax.
inline std::optional<Rational> simplest_rational(double lo, double hi, long qMax) {
  if (!(lo <= hi) || qMax < 1) return std::nullopt;
  const double c = std::ceil(lo);
  if (c <= hi) return Rational{static_cast<long>(c), 1};
  const long n = static_cast<long>(std::floor(lo));
  const double a = lo - static_cast<double>(n), b = hi - static_cast<double>(n);  // inside (0, 1)
  long lp = 0, lq = 1, rp = 1, rq = 1;
  for (;;) {
    const long mp = lp + rp, mq = lq + rq;
    if (mq > qMax) return std::nullopt;
    const double m = static_cast<double>(mp) / static_cast<double>(mq);
    if (m < a) {
      lp = mp;
      lq = mq;
    } else if (m > b) {
      rp = mp;
      rq = mq;
    } else {
      return Rational{mp + n * mq, mq};
    }
  }
}

inline bool coprime(long p, long q) { return std::gcd(p, q) == 1; }

}  // namespace mmo
