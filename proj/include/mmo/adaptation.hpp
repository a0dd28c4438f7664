#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "mmo/manifolds.hpp"
#include "mmo/signature.hpp"

namespace mmo {

struct PhiValue {
  double value = 0;
  int halfRotations = 0;
};

// Phi(w) = gamma * phi(w) + d, where phi(w) = w(t*-) does not depend on the
// reset parameters.
template <Nonlinearity N = QuarticNonlinearity>
class AdaptationMap {
 public:
  AdaptationMap(VectorField<N> field, ResetLineGeometry geometry, FlowOptions opts = {})
      : geo_(std::move(geometry)), flow_(field, with_known(opts, geo_)) {}
  AdaptationMap(VectorField<N> field, EquilibriumSet eq, ResetLineGeometry geometry, FlowOptions opts = {})
      : geo_(std::move(geometry)), flow_(field, eq, with_known(opts, geo_)) {}

  const ResetLineGeometry& geometry() const { return geo_; }
  const SpikingFlow<N>& flow() const { return flow_; }
  double gamma() const { return geo_.gamma; }
  double d() const { return geo_.d; }
  double alpha() const { return geo_.alpha; }
  double beta() const { return geo_.beta; }

  AdaptationMap with_reset(double gamma, double d) const {
    AdaptationMap m = *this;
    m.geo_ = geo_.with_reset(gamma, d);
    return m;
  }

  PhiValue reset_free(double w) const {
    const auto out = flow_.run(geo_.vR, w);
    if (const auto* ev = std::get_if<SpikeEvent>(&out)) return {ev->wAtSpike, ev->halfRotations};
    const auto& ns = std::get<NonSpiking>(out);
    if (ns.reason == NonSpikingReason::Saddle) throw Error(ErrorKind::OnStableManifold, "orbit captured by the saddle");
    throw Error(ErrorKind::TimeBudgetExceeded, "no spike within tMax");
  }

  PhiValue phi(double w) const {
    auto r = reset_free(w);
    r.value = geo_.gamma * r.value + geo_.d;
    return r;
  }
  double operator()(double w) const { return phi(w).value; }

  double derivative(double w) const {
    FlowOptions o = flow_.options();
    o.sensitivity = true;
    const auto out = flow_.run(geo_.vR, w, o);
    const auto* ev = std::get_if<SpikeEvent>(&out);
    if (!ev) throw Error(ErrorKind::OnStableManifold, "orbit captured by the saddle");
    return geo_.gamma * *ev->dWdw0;
  }

  // Full sensitivity record (the v-phase factor is exposed for testing).
  SpikeEvent spike_with_sensitivity(double w) const {
    FlowOptions o = flow_.options();
    o.sensitivity = true;
    const auto out = flow_.run(geo_.vR, w, o);
    const auto* ev = std::get_if<SpikeEvent>(&out);
    if (!ev) throw Error(ErrorKind::OnStableManifold, "orbit captured by the saddle");
    return *ev;
  }

 private:
  static FlowOptions with_known(FlowOptions o, const ResetLineGeometry& g) {
    o.knownIntersections = g.wi;
    return o;
  }

  ResetLineGeometry geo_;
  SpikingFlow<N> flow_;
};

inline AdaptationMap<> make_adaptation_map(const ModelParams& p, const ManifoldOptions& mo = {}) {
  p.validate();
  ManifoldTracer<> tracer(make_field(p), mo);
  return AdaptationMap<>(make_field(p), tracer.equilibria(), tracer.geometry(p.vR, p.gamma, p.d), mo.flow);
}

struct SampledAdaptationMap {
  ResetLineGeometry geometry;
  double lo = 0, hi = 0;
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<int> halfRotations;
  std::vector<double> discontinuities;
  std::size_t monotonicityViolations = 0;
  std::size_t rangeViolations = 0;

  // Continuity piece label: interval index, split at w*.
  int piece(double w) const { return 2 * geometry.interval_index(w) + (w > geometry.wStar ? 1 : 0); }

  // Piecewise-linear interpolation inside the continuity piece of w.
  double interpolate(double w) const {
    auto it = std::upper_bound(grid.begin(), grid.end(), w);
    if (it == grid.begin()) return values.front();
    if (it == grid.end()) return values.back();
    const std::size_t k = static_cast<std::size_t>(it - grid.begin());
    const std::size_t j = k - 1;
    if (piece(grid[j]) != piece(grid[k])) return piece(w) == piece(grid[j]) ? values[j] : values[k];
    const double s = (w - grid[j]) / (grid[k] - grid[j]);
    return values[j] + s * (values[k] - values[j]);
  }
};

// Uniform grid of n points on [lo, hi] plus geometric refinement towards each
// interior discontinuity (offsets halve down to minOffset).
inline std::vector<double> refined_grid(double lo, double hi, std::size_t n, const std::vector<double>& disc,
                                        double minOffset = 1e-9, double exclusion = 1e-12) {
  std::vector<double> g;
  if (n == 0) return g;
  if (n == 1) {
    g.push_back(0.5 * (lo + hi));
  } else {
    for (std::size_t k = 0; k < n; ++k) g.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1));
    g.back() = hi;
  }
  const double spacing = n > 1 ? (hi - lo) / static_cast<double>(n - 1) : (hi - lo);
  for (double x : disc) {
    for (double off = 0.5 * spacing; off >= minOffset; off *= 0.5) {
      if (x - off >= lo) g.push_back(x - off);
      if (x + off <= hi) g.push_back(x + off);
    }
    if (x - minOffset >= lo) g.push_back(x - minOffset);
    if (x + minOffset <= hi) g.push_back(x + minOffset);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  std::erase_if(g, [&](double w) {
    return std::any_of(disc.begin(), disc.end(), [&](double x) { return std::abs(w - x) <= exclusion; });
  });
  return g;
}

template <Nonlinearity N>
SampledAdaptationMap sample_map(const AdaptationMap<N>& map, double lo, double hi, std::size_t n) {
  SampledAdaptationMap s;
  s.geometry = map.geometry();
  s.lo = lo;
  s.hi = hi;
  s.discontinuities = s.geometry.intersections_in(lo, hi);
  s.grid = refined_grid(lo, hi, n, s.discontinuities);
  s.values.reserve(s.grid.size());
  for (double w : s.grid) {
    const auto r = map.phi(w);
    s.values.push_back(r.value);
    s.halfRotations.push_back(r.halfRotations);
  }
  const double beta = s.geometry.beta, alpha = s.geometry.alpha;
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    if (!(s.values[k] > beta && s.values[k] <= alpha)) ++s.rangeViolations;
    if (k == 0 || s.piece(s.grid[k]) != s.piece(s.grid[k - 1])) continue;
    const bool increasing = s.grid[k] <= s.geometry.wStar;
    if (increasing ? !(s.values[k] > s.values[k - 1]) : !(s.values[k] < s.values[k - 1])) ++s.monotonicityViolations;
  }
  return s;
}

template <Nonlinearity N>
SampledAdaptationMap sample_map(const AdaptationMap<N>& map, std::size_t n) {
  return sample_map(map, map.beta(), map.alpha(), n);
}

struct OrbitRecord {
  double w0 = 0;
  std::vector<double> iterates;   // iterates[0] = w0, iterates[k+1] = Phi(iterates[k])
  std::vector<int> halfRotations;  // per spike: the count of the orbit started at iterates[k]
};

constexpr double kPreimageHitTol = 1e-10;

template <Nonlinearity N>
OrbitRecord iterate_orbit(const AdaptationMap<N>& map, double w0, std::size_t n) {
  OrbitRecord rec;
  rec.w0 = w0;
  rec.iterates.reserve(n + 1);
  rec.iterates.push_back(w0);
  double w = w0;
  for (std::size_t k = 0; k < n; ++k) {
    if (map.geometry().near_intersection(w, kPreimageHitTol))
      throw Error(ErrorKind::HitStableManifold, "iterate " + std::to_string(k) + " on the stable manifold", k);
    const auto r = map.phi(w);
    rec.halfRotations.push_back(r.halfRotations);
    w = r.value;
    rec.iterates.push_back(w);
  }
  return rec;
}

inline std::vector<HalfInteger> to_counts(const std::vector<int>& halfRotations) {
  std::vector<HalfInteger> c;
  c.reserve(halfRotations.size());
  for (int h : halfRotations) c.push_back(HalfInteger::from_halves(h));
  return c;
}

// Signature of a count sequence; with `trim`, an eventually periodic iterate
// sequence is reduced to one canonical period.
inline Signature signature_of(const std::vector<double>& iterates, const std::vector<HalfInteger>& counts, bool trim) {
  Signature s;
  if (trim) {
    // slowly converging orbits still settle on a periodic count pattern
    auto q = detect_period(iterates);
    if (!q) q = detect_exact_period(counts);
    if (q) {
      const std::vector<HalfInteger> cycle(counts.end() - static_cast<std::ptrdiff_t>(*q), counts.end());
      s.blocks = periodic_blocks(cycle);
      s.period = q;
      return s;
    }
  }
  s.blocks = merge_counts(counts);
  return s;
}

inline Signature orbit_signature(const OrbitRecord& orbit, bool trim = true) {
  return signature_of(orbit.iterates, to_counts(orbit.halfRotations), trim);
}

inline void write_map_csv(std::ostream& os, const SampledAdaptationMap& s) {
  char buf[96];
  os << "w,phi,halfRotations\n";
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", s.grid[k], s.values[k], s.halfRotations[k]);
    os << buf;
  }
}

inline void write_orbit_csv(std::ostream& os, const OrbitRecord& o) {
  char buf[96];
  os << "k,w_k,halfRotations_k\n";
  for (std::size_t k = 0; k < o.halfRotations.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%d\n", k, o.iterates[k], o.halfRotations[k]);
    os << buf;
  }
}

}  // namespace mmo
