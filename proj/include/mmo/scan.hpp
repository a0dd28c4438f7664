#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mmo/config.hpp"
#include "mmo/rotation.hpp"

namespace mmo {

// fn(i) for i in [0, n) on a fixed pool; callers write results by index, so
// the output never depends on the worker count or scheduling.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lk(m);
        if (!err) err = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned k = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    for (unsigned t = 0; t < k; ++t) pool.emplace_back(work);
  }
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------- phi cache

// Uniform grid lo + k h. Lift samples of every cell are taken on the same
// global grid, so the reset-free phi can be evaluated once per scan.
struct PhiGrid {
  double lo = 0, h = 1;
  std::size_t n = 0;
  double at(std::size_t k) const { return lo + h * static_cast<double>(k); }
};

inline PhiGrid make_phi_grid(double lo, double hi, double h) {
  if (!(h > 0) || !(hi > lo)) throw Error(ErrorKind::Validation, "degenerate phi grid");
  return {lo, h, static_cast<std::size_t>(std::floor((hi - lo) / h)) + 1};
}

struct PhiTable {
  PhiGrid grid;
  std::vector<double> phi;  // reset-free value, NaN where the flow does not spike
};

template <Nonlinearity N>
PhiTable build_phi_table(const AdaptationMap<N>& map, const PhiGrid& grid, unsigned workers) {
  PhiTable t{grid, std::vector<double>(grid.n)};
  parallel_for(grid.n, workers, [&](std::size_t k) {
    try {
      t.phi[k] = map.reset_free(grid.at(k)).value;
    } catch (const Error&) {
      t.phi[k] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return t;
}

// Lift samples of one period on the global grid plus geometric refinement at
// w1, alpha and beta. With a table, grid values come from the cache; without
// one they are evaluated directly, giving identical bits.
template <Nonlinearity N>
LiftSamples grid_lift_samples(const AdaptationMap<N>& map, const Lift& lift, const PhiGrid& grid,
                              const PhiTable* table, double minOffset = 1e-12) {
  const double beta = lift.beta(), alpha = lift.alpha(), w1 = lift.w1(), th = lift.theta();
  const double gamma = map.gamma(), d = map.d();
  std::vector<std::pair<double, double>> pts;
  auto direct = [&](double x) {
    try {
      pts.emplace_back(x, lift.base(x));
    } catch (const Error&) {
    }
  };
  const double kLo = std::ceil((beta - grid.lo) / grid.h);
  const std::size_t k0 = kLo > 0 ? static_cast<std::size_t>(kLo) : 0;
  for (std::size_t k = k0; k < grid.n; ++k) {
    const double x = grid.at(k);
    if (x > alpha) break;
    if (x <= beta || x == w1) continue;
    if (table) {
      const double v = table->phi[k];
      if (std::isnan(v)) continue;
      const double y = gamma * v + d;
      pts.emplace_back(x, x < w1 ? y : y + th);
    } else {
      direct(x);
    }
  }
  for (double off = 0.5 * grid.h; off >= minOffset; off *= 0.5) {
    direct(w1 - off);
    direct(w1 + off);
    direct(alpha - off);
    direct(beta + off);
  }
  pts.emplace_back(w1, alpha);
  direct(alpha);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
            pts.end());
  LiftSamples s;
  s.beta = beta;
  s.alpha = alpha;
  s.w1 = w1;
  for (const auto& [x, y] : pts) {
    if (x <= beta || x > alpha) continue;
    s.x.push_back(x);
    s.y.push_back(y);
  }
  return s;
}

// ---------------------------------------------------------------- single point

struct PointOptions {
  std::size_t iters = 10000;
  std::size_t samples = 10000;
  long qMax = kDefaultQMax;
  double w0 = 0.0;
  bool intervals = true;  // envelopes in the overlapping case
};

struct PointResult {
  double d = 0, gamma = 0;
  RegimeLabel label;
  std::optional<RotationResult> estimate;  // displacement of the orbit of w0
  std::optional<RotationResult> rotation;  // number (C4) or interval (C4')
  std::optional<Signature> orbitSignature;  // lift-orbit signature (C4)
  std::string signature;
  std::string status;                      // condition diagnostics or the error
  bool failed = false;                     // an error, not just a violated condition
};

inline std::string lift_status(const RegimeLabel& l) {
  if (!l.conditions.C1) return "C1 fails";
  if (!l.conditions.C3) return "C3 fails";
  return {};
}

template <Nonlinearity N>
PointResult analyze_point(const AdaptationMap<N>& base, double gamma, double d, const PointOptions& o,
                          const PhiGrid* grid = nullptr, const PhiTable* table = nullptr) {
  PointResult r;
  r.d = d;
  r.gamma = gamma;
  try {
    const auto map = base.with_reset(gamma, d);
    r.label = classify_regime(map);
    if (!r.label.lift_defined()) {
      r.status = lift_status(r.label);
      return r;
    }
    const Lift lift = build_lift(map, r.label);
    LiftOrbit orbit;
    r.estimate = rotation_estimate(lift, o.w0, o.iters, o.qMax, &orbit);
    if (lift.non_decreasing()) {
      r.rotation = r.estimate;
      r.orbitSignature = lift_orbit_signature(orbit);
      r.signature = r.orbitSignature->str();
    } else if (o.intervals) {
      const PhiGrid local =
          grid ? *grid : make_phi_grid(map.beta(), map.alpha(), lift.theta() / static_cast<double>(o.samples));
      r.rotation = rotation_interval(envelopes(grid_lift_samples(map, lift, local, grid ? table : nullptr)), o.iters,
                                     o.qMax);
    }
  } catch (const Error& e) {
    r.status = e.what();
    r.failed = true;
  }
  return r;
}

// ---------------------------------------------------------------- scans

struct ScanOptions {
  PointOptions point;
  unsigned workers = 1;
  bool cachePhi = true;
};

// Rows ordered by d. The geometry (W^s crossings, w_lim) comes from `map`
// and is shared; only alpha and beta move with d.
template <Nonlinearity N>
std::vector<PointResult> staircase_scan(const AdaptationMap<N>& map, double gamma, const Range& d,
                                        const ScanOptions& o) {
  const auto ds = d.values();
  std::vector<PointResult> rows(ds.size());
  // one global grid for the envelopes of all cells
  const auto& g = map.geometry();
  const double theta = gamma * (g.wLimPlus - g.wLimMinus);
  const double lo = gamma * g.wLimMinus + d.lo, hi = gamma * g.wLimPlus + d.hi;
  const PhiGrid grid = make_phi_grid(lo, hi, theta / static_cast<double>(o.point.samples));

  // Classify first: the cache is only worth building when some cell overlaps.
  std::vector<char> overlapping(ds.size(), 0);
  if (o.point.intervals) {
    parallel_for(ds.size(), o.workers, [&](std::size_t i) {
      try {
        const auto l = classify_regime(map.with_reset(gamma, ds[i]));
        overlapping[i] = l.lift_defined() && !l.conditions.C4;
      } catch (const Error&) {
      }
    });
  }
  std::optional<PhiTable> table;
  if (o.cachePhi && std::any_of(overlapping.begin(), overlapping.end(), [](char c) { return c != 0; }))
    table = build_phi_table(map, grid, o.workers);

  parallel_for(ds.size(), o.workers, [&](std::size_t i) {
    rows[i] = analyze_point(map, gamma, ds[i], o.point, &grid, table ? &*table : nullptr);
  });
  return rows;
}

struct PlaneCell {
  PointResult point;
  // Witness comparisons whose zero sets bound the regions.
  double phiBetaMinusW1 = std::numeric_limits<double>::quiet_NaN();
  double phiAlphaMinusW1 = std::numeric_limits<double>::quiet_NaN();
  double phiAlphaMinusPhiBeta = std::numeric_limits<double>::quiet_NaN();
  double alphaMinusWStar = std::numeric_limits<double>::quiet_NaN();
  double alphaMinusW2 = std::numeric_limits<double>::quiet_NaN();
  double phiBetaMinusBeta = std::numeric_limits<double>::quiet_NaN();
};

struct PlaneScan {
  std::vector<double> ds, gammas;
  std::vector<PlaneCell> cells;  // row-major: cells[j * ds.size() + i] at (ds[i], gammas[j])
};

template <Nonlinearity N>
PlaneScan plane_scan(const AdaptationMap<N>& map, const Range& d, const Range& gamma, const ScanOptions& o) {
  PlaneScan s{d.values(), gamma.values(), {}};
  s.cells.resize(s.ds.size() * s.gammas.size());
  PointOptions po = o.point;
  po.intervals = false;
  parallel_for(s.cells.size(), o.workers, [&](std::size_t k) {
    const std::size_t i = k % s.ds.size(), j = k / s.ds.size();
    auto& c = s.cells[k];
    c.point = analyze_point(map, s.gammas[j], s.ds[i], po);
    const auto& w = c.point.label.witnesses;
    c.phiBetaMinusW1 = w.phiBeta - w.w1;
    c.phiAlphaMinusW1 = w.phiAlpha - w.w1;
    c.phiAlphaMinusPhiBeta = w.phiAlpha - w.phiBeta;
    c.alphaMinusWStar = w.alpha - w.wStar;
    c.alphaMinusW2 = std::isfinite(w.w2) ? w.alpha - w.w2 : std::numeric_limits<double>::quiet_NaN();
    c.phiBetaMinusBeta = w.phiBeta - w.beta;
  });
  return s;
}

struct Segment {
  double x0, y0, x1, y1;
};

// Zero level set of f on a rectangular grid (f[j * nx + i] at (xs[i], ys[j]))
// by marching squares; squares with a NaN corner are skipped.
inline std::vector<Segment> marching_squares(const std::vector<double>& xs, const std::vector<double>& ys,
                                             const std::vector<double>& f) {
  std::vector<Segment> out;
  const std::size_t nx = xs.size(), ny = ys.size();
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double x[4] = {xs[i], xs[i + 1], xs[i + 1], xs[i]};
      const double y[4] = {ys[j], ys[j], ys[j + 1], ys[j + 1]};
      const double v[4] = {f[j * nx + i], f[j * nx + i + 1], f[(j + 1) * nx + i + 1], f[(j + 1) * nx + i]};
      if (std::any_of(v, v + 4, [](double a) { return std::isnan(a); })) continue;
      std::vector<std::pair<double, double>> cross;
      for (int e = 0; e < 4; ++e) {
        const int a = e, b = (e + 1) % 4;
        if ((v[a] > 0) == (v[b] > 0)) continue;
        const double t = v[a] / (v[a] - v[b]);
        cross.emplace_back(x[a] + t * (x[b] - x[a]), y[a] + t * (y[b] - y[a]));
      }
      if (cross.size() == 2) {
        out.push_back({cross[0].first, cross[0].second, cross[1].first, cross[1].second});
      } else if (cross.size() == 4) {
        // saddle square: pair by the sign of the centre value
        const double c = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        const bool joinFirst = (c > 0) == (v[0] > 0);
        if (joinFirst) {
          out.push_back({cross[0].first, cross[0].second, cross[3].first, cross[3].second});
          out.push_back({cross[1].first, cross[1].second, cross[2].first, cross[2].second});
        } else {
          out.push_back({cross[0].first, cross[0].second, cross[1].first, cross[1].second});
          out.push_back({cross[2].first, cross[2].second, cross[3].first, cross[3].second});
        }
      }
    }
  }
  return out;
}

struct Boundary {
  std::string name;
  std::vector<Segment> segments;
};

inline std::vector<Boundary> region_boundaries(const PlaneScan& s) {
  using Field = double PlaneCell::*;
  const std::pair<const char*, Field> fields[] = {
      {"phiBeta=w1", &PlaneCell::phiBetaMinusW1},       {"phiAlpha=w1", &PlaneCell::phiAlphaMinusW1},
      {"phiAlpha=phiBeta", &PlaneCell::phiAlphaMinusPhiBeta}, {"alpha=wStar", &PlaneCell::alphaMinusWStar},
      {"alpha=w2", &PlaneCell::alphaMinusW2},           {"phiBeta=beta", &PlaneCell::phiBetaMinusBeta},
  };
  std::vector<Boundary> out;
  for (const auto& [name, field] : fields) {
    std::vector<double> f;
    f.reserve(s.cells.size());
    for (const auto& c : s.cells) f.push_back(c.*field);
    out.push_back({name, marching_squares(s.ds, s.gammas, f)});
  }
  return out;
}

}  // namespace mmo
