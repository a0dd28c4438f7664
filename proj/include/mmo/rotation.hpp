#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mmo/adaptation.hpp"
#include "mmo/rational.hpp"
#include "mmo/signature.hpp"

namespace mmo {

// ---------------------------------------------------------------- regimes

enum class Region { A, B, C, D, E, Other };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::A: return "A";
    case Region::B: return "B";
    case Region::C: return "C";
    case Region::D: return "D";
    case Region::E: return "E";
    case Region::Other: return "other";
  }
  return "?";
}

struct ConditionFlags {
  bool C1 = false, C2 = false, C2prime = false, C3 = false, C4 = false, C4prime = false;
};

struct RegimeWitnesses {
  double beta = 0, alpha = 0;
  double w1 = std::numeric_limits<double>::quiet_NaN();
  double w2 = std::numeric_limits<double>::infinity();
  double wStar = 0;
  double phiAlpha = 0, phiBeta = 0;
  std::vector<double> discontinuities;  // all w_i in (beta, alpha)
};

struct RegimeLabel {
  ConditionFlags conditions;
  Region region = Region::Other;
  RegimeWitnesses witnesses;
  bool continuousLift = false;            // Phi(alpha) == Phi(beta)
  bool shiftPrecondition = false;         // C4', C2 and Phi(alpha) < w1
  bool multiDiscontinuityBounds = false;  // envelopes usable as bounds without C1

  bool lift_defined() const { return conditions.C1 && conditions.C3; }
};

inline RegimeLabel classify_regime(const ResetLineGeometry& g, double phiAlpha, double phiBeta) {
  RegimeLabel r;
  auto& w = r.witnesses;
  w.beta = g.beta;
  w.alpha = g.alpha;
  w.wStar = g.wStar;
  w.phiAlpha = phiAlpha;
  w.phiBeta = phiBeta;
  w.discontinuities = g.intersections_in(g.beta, g.alpha);
  auto& c = r.conditions;
  if (w.discontinuities.size() == 1) {
    w.w1 = w.discontinuities.front();
    for (double x : g.wi)
      if (x > g.alpha) {
        w.w2 = x;
        break;
      }
    c.C1 = g.beta < w.w1 && w.w1 < g.alpha && g.alpha < w.w2;
  }
  c.C2 = g.alpha < g.wStar;
  c.C2prime = c.C1 && w.w1 < g.wStar && g.wStar <= g.alpha;
  c.C3 = phiBeta >= g.beta && phiAlpha >= g.beta;
  c.C4 = c.C1 && c.C2 && c.C3 && phiAlpha <= phiBeta;
  c.C4prime = c.C1 && c.C3 && (c.C2 || c.C2prime) && phiAlpha > phiBeta;
  if (c.C4) {
    if (phiBeta < w.w1) r.region = Region::A;
    else if (phiAlpha < w.w1) r.region = Region::B;
    else r.region = Region::C;
    r.continuousLift = phiAlpha == phiBeta;
  } else if (c.C4prime) {
    r.region = c.C2 ? Region::D : Region::E;
    r.shiftPrecondition = c.C2 && phiAlpha < w.w1;
  }
  if (!c.C1 && w.discontinuities.size() >= 2) {
    r.multiDiscontinuityBounds =
        std::all_of(w.discontinuities.begin(), w.discontinuities.end(), [&](double x) { return x < g.wStar; }) &&
        phiBeta > g.beta;
  }
  return r;
}

template <Nonlinearity N>
RegimeLabel classify_regime(const AdaptationMap<N>& map) {
  const auto& g = map.geometry();
  if (g.near_intersection(g.alpha, 1e-12) || g.near_intersection(g.beta, 1e-12)) {
    RegimeLabel r;
    r.witnesses.beta = g.beta;
    r.witnesses.alpha = g.alpha;
    r.witnesses.wStar = g.wStar;
    r.witnesses.phiAlpha = r.witnesses.phiBeta = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  return classify_regime(g, map(g.alpha), map(g.beta));
}

// ---------------------------------------------------------------- lift

// Psi on (beta, alpha]: Phi below w1, alpha at w1, Phi + theta above; extended
// by Psi(x + k theta) = Psi(x) + k theta, left-continuous at alpha + k theta.
class Lift {
 public:
  using Map = std::function<double(double)>;

  Lift(Map phi, double beta, double alpha, double w1, bool nonDecreasing)
      : phi_(std::move(phi)), beta_(beta), alpha_(alpha), w1_(w1), nonDecreasing_(nonDecreasing) {}

  double beta() const { return beta_; }
  double alpha() const { return alpha_; }
  double w1() const { return w1_; }
  double theta() const { return alpha_ - beta_; }
  bool non_decreasing() const { return nonDecreasing_; }
  const Map& phi() const { return phi_; }

  // Moves x into (beta, alpha]; returns the number of periods removed.
  long reduce(double& x) const {
    const double th = theta();
    long k = static_cast<long>(std::floor((x - beta_) / th));
    x -= static_cast<double>(k) * th;
    if (x <= beta_) {
      x += th;
      --k;
    } else if (x > alpha_) {
      x -= th;
      ++k;
    }
    return k;
  }

  // Psi for x already in (beta, alpha].
  double base(double x) const {
    if (x == w1_) return alpha_;
    return x < w1_ ? phi_(x) : phi_(x) + theta();
  }

  double operator()(double x) const {
    const long k = reduce(x);
    return base(x) + static_cast<double>(k) * theta();
  }

  // Sign of Psi(alpha+) - Psi(alpha) = Phi(beta) - Phi(alpha).
  int jump_sign() const {
    const double j = phi_(beta_) - phi_(alpha_);
    return (j > 0) - (j < 0);
  }

 private:
  Map phi_;
  double beta_, alpha_, w1_;
  bool nonDecreasing_;
};

template <Nonlinearity N>
Lift build_lift(const AdaptationMap<N>& map, const RegimeLabel& label) {
  if (!label.conditions.C1) throw Error(ErrorKind::ConditionViolated, "C1 fails: need exactly one w_i in (beta, alpha)");
  if (!label.conditions.C3) throw Error(ErrorKind::ConditionViolated, "C3 fails: Phi(beta) or Phi(alpha) below beta");
  return Lift([map](double w) { return map(w); }, map.beta(), map.alpha(), label.witnesses.w1, label.conditions.C4);
}

template <Nonlinearity N>
Lift build_lift(const AdaptationMap<N>& map) {
  return build_lift(map, classify_regime(map));
}

// Orbit of the circle map on the fundamental domain.
struct LiftOrbit {
  std::vector<double> points;  // points[0] = reduced w0, all in (beta, alpha]
  std::vector<int> wraps;      // periods added by each step
  long totalWraps = 0;
};

inline LiftOrbit lift_orbit(const Lift& lift, double w0, std::size_t n) {
  LiftOrbit o;
  double x = w0;
  const long k0 = lift.reduce(x);
  o.totalWraps = -k0;
  o.points.reserve(n + 1);
  o.points.push_back(x);
  for (std::size_t k = 0; k < n; ++k) {
    double y = lift.base(x);
    const long wr = lift.reduce(y);
    o.wraps.push_back(static_cast<int>(wr));
    o.totalWraps += wr;
    x = y;
    o.points.push_back(x);
  }
  o.totalWraps += k0;
  return o;
}

// Integer small-oscillation convention: one oscillation per wrap.
inline Signature lift_orbit_signature(const LiftOrbit& o, bool trim = true) {
  std::vector<HalfInteger> c;
  c.reserve(o.wraps.size());
  for (int w : o.wraps) c.push_back(HalfInteger::from_whole(w));
  return signature_of(o.points, c, trim);
}

// ---------------------------------------------------------------- rotation numbers

enum class RotationKind { Number, Interval };

struct RotationResult {
  RotationKind kind = RotationKind::Number;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double a = std::numeric_limits<double>::quiet_NaN();
  double b = std::numeric_limits<double>::quiet_NaN();
  std::optional<Rational> rational;   // snap of rho (number) ...
  std::optional<Rational> aRational;  // ... or of each endpoint (interval)
  std::optional<Rational> bRational;
  std::size_t iterations = 0;
  double errorBound = 0;
};

constexpr long kDefaultQMax = 100;

inline std::optional<Rational> snap(double x, double bound, long qMax) {
  return simplest_rational(x - bound, x + bound, qMax);
}

// Displacement estimate (Psi^N(w0) - w0) / (N theta); no monotonicity check.
inline RotationResult rotation_estimate(const Lift& lift, double w0, std::size_t n, long qMax = kDefaultQMax,
                                        LiftOrbit* orbitOut = nullptr) {
  if (n < 1) throw Error(ErrorKind::Validation, "N must be >= 1");
  auto o = lift_orbit(lift, w0, n);
  RotationResult r;
  r.kind = RotationKind::Number;
  r.iterations = n;
  r.errorBound = 1.0 / static_cast<double>(n);
  const double disp = o.points.back() - o.points.front() + static_cast<double>(o.totalWraps) * lift.theta();
  r.rho = r.a = r.b = disp / (static_cast<double>(n) * lift.theta());
  r.rational = snap(r.rho, r.errorBound, qMax);
  if (orbitOut) *orbitOut = std::move(o);
  return r;
}

inline RotationResult rotation_number(const Lift& lift, double w0, std::size_t n, long qMax = kDefaultQMax,
                                      LiftOrbit* orbitOut = nullptr) {
  if (!lift.non_decreasing()) throw Error(ErrorKind::NotMonotone, "lift is not non-decreasing; use rotation_interval");
  return rotation_estimate(lift, w0, n, qMax, orbitOut);
}

// Periodic, non-decreasing piecewise-linear lift given by samples over one
// period (x ascending in (beta, beta + theta]).
class PeriodicPL {
 public:
  PeriodicPL() = default;
  PeriodicPL(std::vector<double> x, std::vector<double> y, double beta, double theta)
      : x_(std::move(x)), y_(std::move(y)), beta_(beta), theta_(theta) {}

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  double theta() const { return theta_; }

  long reduce(double& x) const {
    long k = static_cast<long>(std::floor((x - beta_) / theta_));
    x -= static_cast<double>(k) * theta_;
    if (x <= beta_) {
      x += theta_;
      --k;
    } else if (x > beta_ + theta_) {
      x -= theta_;
      ++k;
    }
    return k;
  }

  double base(double x) const {
    auto it = std::lower_bound(x_.begin(), x_.end(), x);
    if (it == x_.end()) return y_.back();
    const std::size_t k = static_cast<std::size_t>(it - x_.begin());
    if (x_[k] == x) return y_[k];
    const double x0 = k == 0 ? x_.back() - theta_ : x_[k - 1];
    const double y0 = k == 0 ? y_.back() - theta_ : y_[k - 1];
    return y0 + (y_[k] - y0) * (x - x0) / (x_[k] - x0);
  }

  double operator()(double x) const {
    const long k = reduce(x);
    return base(x) + static_cast<double>(k) * theta_;
  }

  double rotation(double x0, std::size_t n) const {
    double x = x0;
    long wraps = reduce(x);
    const double start = x;
    wraps = 0;
    for (std::size_t k = 0; k < n; ++k) {
      double y = base(x);
      wraps += reduce(y);
      x = y;
    }
    return (x - start + static_cast<double>(wraps) * theta_) / (static_cast<double>(n) * theta_);
  }

 private:
  std::vector<double> x_, y_;
  double beta_ = 0, theta_ = 1;
};

// Samples of Psi over one period, x ascending in (beta, alpha].
struct LiftSamples {
  double beta = 0, alpha = 0, w1 = 0;
  std::vector<double> x, y;
};

inline std::vector<double> lift_sample_points(double beta, double alpha, double w1, std::size_t n,
                                              double minOffset = 1e-12) {
  const double th = alpha - beta;
  std::vector<double> xs;
  for (std::size_t k = 1; k <= n; ++k) xs.push_back(beta + th * static_cast<double>(k) / static_cast<double>(n));
  xs.back() = alpha;
  const double h = th / static_cast<double>(n);
  for (double off = 0.5 * h; off >= minOffset; off *= 0.5) {
    xs.push_back(w1 - off);
    xs.push_back(w1 + off);
    xs.push_back(alpha - off);
    xs.push_back(beta + off);
  }
  xs.push_back(w1);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::erase_if(xs, [&](double x) { return x <= beta || x > alpha; });
  return xs;
}

inline LiftSamples sample_lift(const Lift& lift, std::size_t n = 10000) {
  LiftSamples s;
  s.beta = lift.beta();
  s.alpha = lift.alpha();
  s.w1 = lift.w1();
  s.x = lift_sample_points(s.beta, s.alpha, s.w1, n);
  s.y.reserve(s.x.size());
  for (double x : s.x) s.y.push_back(lift.base(x));
  return s;
}

struct Envelopes {
  PeriodicPL lower;  // Psi_l(w) = inf{Psi(z) : z >= w}
  PeriodicPL upper;  // Psi_r(w) = sup{Psi(z) : z <= w}
};

inline Envelopes envelopes(const LiftSamples& s) {
  const double th = s.alpha - s.beta;
  const std::size_t m = s.x.size();
  // Three consecutive periods; the envelope of the middle one only needs its
  // neighbours (Psi(z + theta) = Psi(z) + theta).
  std::vector<double> y3(3 * m);
  for (std::size_t k = 0; k < m; ++k) {
    y3[k] = s.y[k] - th;
    y3[m + k] = s.y[k];
    y3[2 * m + k] = s.y[k] + th;
  }
  std::vector<double> lo(m), hi(m);
  double run = std::numeric_limits<double>::infinity();
  std::vector<double> suffix(3 * m);
  for (std::size_t k = 3 * m; k-- > 0;) suffix[k] = run = std::min(run, y3[k]);
  run = -std::numeric_limits<double>::infinity();
  std::vector<double> prefix(3 * m);
  for (std::size_t k = 0; k < 3 * m; ++k) prefix[k] = run = std::max(run, y3[k]);
  for (std::size_t k = 0; k < m; ++k) {
    lo[k] = suffix[m + k];
    hi[k] = prefix[m + k];
  }
  return {PeriodicPL(s.x, std::move(lo), s.beta, th), PeriodicPL(s.x, std::move(hi), s.beta, th)};
}

inline RotationResult rotation_interval(const Envelopes& env, std::size_t n, long qMax = kDefaultQMax) {
  RotationResult r;
  r.kind = RotationKind::Interval;
  r.iterations = n;
  r.errorBound = 1.0 / static_cast<double>(n);
  const double x0 = env.lower.x().front();
  r.a = env.lower.rotation(x0, n);
  r.b = env.upper.rotation(x0, n);
  r.aRational = snap(r.a, r.errorBound, qMax);
  r.bRational = snap(r.b, r.errorBound, qMax);
  return r;
}

inline RotationResult rotation_interval(const Lift& lift, std::size_t n, std::size_t samplesPerPeriod = 10000,
                                        long qMax = kDefaultQMax) {
  return rotation_interval(envelopes(sample_lift(lift, samplesPerPeriod)), n, qMax);
}

// ---------------------------------------------------------------- signatures

// Burst signature of the periodic orbit with rotation number p/q.
inline Signature signature_from_rho(long p, long q) {
  if (q < 1 || p < 0 || p > q || std::gcd(p, q) != 1)
    throw Error(ErrorKind::InvalidRational, std::to_string(p) + "/" + std::to_string(q));
  Signature s;
  s.period = static_cast<std::size_t>(q);
  if (p == 0) {
    s.blocks = {{1, HalfInteger{}}};
    return s;
  }
  if (p == q) {
    s.blocks = {{1, HalfInteger::from_whole(1)}};
    return s;
  }
  std::vector<long> l;
  for (long i = 1; i <= q - 1; ++i)
    if ((i * p) % q >= q - p) l.push_back(i);
  for (std::size_t i = 0; i < l.size(); ++i) {
    const long next = i + 1 < l.size() ? l[i + 1] : l.front() + q;
    s.blocks.push_back({static_cast<int>(next - l[i]), HalfInteger::from_whole(1)});
  }
  // cyclic reading; printed starting from the first longest block
  const auto first = std::max_element(s.blocks.begin(), s.blocks.end(),
                                      [](const auto& x, const auto& y) { return x.spikes < y.spikes; });
  std::rotate(s.blocks.begin(), first, s.blocks.end());
  return s;
}

// ---------------------------------------------------------------- periodic orbits

namespace detail {

// Bisection for a sign change of g on [a, b]; `same` decides whether a point
// belongs to the continuity branch of the bracket.
template <class G>
double bisect(const G& g, double a, double b, double ga, double tol = 1e-15) {
  for (int it = 0; it < 200 && b - a > tol * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double gm = g(m);
    if (gm == 0.0) return m;
    if ((gm < 0) == (ga < 0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

struct Period2Result {
  bool preconditionHolds = false;
  bool found = false;
  double w = std::numeric_limits<double>::quiet_NaN();
  double partner = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  Signature signature;
};

template <class Map>
Period2Result detect_period2(const Map& phi, const RegimeLabel& label, std::size_t scan = 200) {
  if (!label.conditions.C4) throw Error(ErrorKind::ConditionViolated, "period-2 criterion requires C4");
  const auto& w = label.witnesses;
  Period2Result r;
  r.preconditionHolds = w.phiAlpha < w.w1 && w.w1 < w.phiBeta;
  if (!r.preconditionHolds) return r;
  auto g = [&](double x) { return phi(phi(x)) - x; };
  const double lo = w.beta, hi = w.w1 - 1e-9;
  double xa = lo, ga = g(lo);
  for (std::size_t k = 1; k <= scan; ++k) {
    const double xb = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(scan);
    const double gb = g(xb);
    if ((ga < 0) != (gb < 0) || ga == 0.0) {
      const double x = ga == 0.0 ? xa : detail::bisect(g, xa, xb, ga);
      r.found = true;
      r.w = x;
      r.partner = phi(x);
      r.residual = std::abs(g(x));
      r.signature.blocks = {{2, HalfInteger::from_whole(1)}};
      r.signature.period = 2;
      return r;
    }
    xa = xb;
    ga = gb;
  }
  throw Error(ErrorKind::BisectionFailure, "no sign change of Phi^2(w) - w on (beta, w1): g(beta)=" +
                                               std::to_string(g(lo)) + ", g(w1-)=" + std::to_string(g(hi)));
}

struct PeriodicOrbit {
  double w = 0;
  long p = 0, q = 1;
  double residual = 0;
  std::vector<double> points;
};

// Points of rotation type p/q: roots of Phi^q(w) - w with exactly p iterates
// in (w1, alpha], found by a sign scan over (beta, alpha] and bisection
// inside a fixed itinerary.
template <class Map>
std::vector<PeriodicOrbit> find_periodic_orbits(const Map& phi, const RegimeLabel& label, long p, long q,
                                                std::size_t scan = 2000, double residualTol = 1e-9) {
  if (!label.lift_defined()) throw Error(ErrorKind::ConditionViolated, "periodic-orbit search needs C1 and C3");
  const double beta = label.witnesses.beta, alpha = label.witnesses.alpha, w1 = label.witnesses.w1;
  struct Eval {
    double g;
    unsigned long itinerary;  // bit k: iterate k above w1
    int ups;
  };
  auto eval = [&](double x) {
    Eval e{0, 0, 0};
    double y = x;
    for (long k = 0; k < q; ++k) {
      if (y > w1) {
        e.itinerary |= 1ul << k;
        ++e.ups;
      }
      y = phi(y);
    }
    e.g = y - x;
    return e;
  };
  std::vector<PeriodicOrbit> out;
  auto pts = lift_sample_points(beta, alpha, w1, scan, 1e-9);
  std::erase_if(pts, [&](double x) { return x == w1; });
  Eval ea = eval(pts.front());
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const Eval eb = eval(pts[k]);
    if (ea.itinerary == eb.itinerary && ea.ups == p && (ea.g < 0) != (eb.g < 0)) {
      const unsigned long it = ea.itinerary;
      double a = pts[k - 1], b = pts[k], ga = ea.g;
      for (int n = 0; n < 200 && b - a > 1e-16; ++n) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const Eval em = eval(m);
        if (em.itinerary != it) break;
        if ((em.g < 0) == (ga < 0)) {
          a = m;
          ga = em.g;
        } else {
          b = m;
        }
      }
      const double x = 0.5 * (a + b);
      const Eval ex = eval(x);
      if (std::abs(ex.g) < residualTol && ex.itinerary == it) {
        PeriodicOrbit o{x, p, q, std::abs(ex.g), {}};
        double y = x;
        for (long j = 0; j < q; ++j) {
          o.points.push_back(y);
          y = phi(y);
        }
        out.push_back(std::move(o));
      }
    }
    ea = eb;
  }
  return out;
}

enum class FixedPointRegime { NoFixedPoint, NoMMO, Mixed, TrivialRhoOne, HighPeriod, ArbitraryPeriods };

inline const char* to_string(FixedPointRegime r) {
  switch (r) {
    case FixedPointRegime::NoFixedPoint: return "no-fixed-point";
    case FixedPointRegime::NoMMO: return "no-MMO";
    case FixedPointRegime::Mixed: return "mixed";
    case FixedPointRegime::TrivialRhoOne: return "trivial-rho-1";
    case FixedPointRegime::HighPeriod: return "high-period";
    case FixedPointRegime::ArbitraryPeriods: return "arbitrary-periods";
  }
  return "?";
}

struct FixedPointAnalysis {
  FixedPointRegime regime = FixedPointRegime::NoFixedPoint;
  std::vector<double> left;   // fixed points in [beta, w1)
  std::vector<double> right;  // fixed points in (w1, alpha]
  double maxRight = std::numeric_limits<double>::quiet_NaN();
};

template <class Map>
FixedPointAnalysis fixed_point_regime(const Map& phi, const RegimeLabel& label, std::size_t scan = 400) {
  if (!label.lift_defined()) throw Error(ErrorKind::ConditionViolated, "fixed-point regime needs C1 and C3");
  const auto& wt = label.witnesses;
  FixedPointAnalysis fa;
  auto g = [&](double x) { return phi(x) - x; };
  auto roots_on = [&](double lo, double hi, std::vector<double>& out, std::vector<double>* values) {
    auto pts = refined_grid(lo, hi, scan, {wt.w1}, 1e-9, 0.0);
    std::erase_if(pts, [&](double x) { return x == wt.w1; });
    double xa = pts.front(), ga = g(xa);
    if (values) values->push_back(ga + xa);
    if (ga == 0.0) out.push_back(xa);
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const double xb = pts[k], gb = g(xb);
      if (values) values->push_back(gb + xb);
      if (gb == 0.0) out.push_back(xb);
      else if (ga != 0.0 && (ga < 0) != (gb < 0)) out.push_back(detail::bisect(g, xa, xb, ga));
      xa = xb;
      ga = gb;
    }
  };
  roots_on(wt.beta, wt.w1, fa.left, nullptr);
  std::vector<double> rightValues;
  roots_on(wt.w1, wt.alpha, fa.right, &rightValues);
  fa.maxRight = *std::max_element(rightValues.begin(), rightValues.end());
  if (wt.wStar > wt.w1 && wt.wStar < wt.alpha) fa.maxRight = std::max(fa.maxRight, phi(wt.wStar));
  if (!fa.left.empty() && !fa.right.empty()) {
    fa.regime = FixedPointRegime::ArbitraryPeriods;
  } else if (!fa.left.empty()) {
    fa.regime = fa.maxRight < fa.left.back() ? FixedPointRegime::NoMMO : FixedPointRegime::Mixed;
  } else if (!fa.right.empty()) {
    fa.regime = wt.phiBeta >= fa.right.front() ? FixedPointRegime::TrivialRhoOne : FixedPointRegime::HighPeriod;
  }
  return fa;
}

}  // namespace mmo
