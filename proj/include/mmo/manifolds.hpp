#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mmo/flow.hpp"
#include "mmo/half_integer.hpp"

namespace mmo {

enum class ManifoldBranch { StablePlus, StableMinus, UnstablePlus, UnstableMinus };
enum class TraceTerminal { FocusReached, BlowUp, ArcLengthCap, Escaped };

inline const char* to_string(ManifoldBranch b) {
  switch (b) {
    case ManifoldBranch::StablePlus: return "stablePlus";
    case ManifoldBranch::StableMinus: return "stableMinus";
    case ManifoldBranch::UnstablePlus: return "unstablePlus";
    case ManifoldBranch::UnstableMinus: return "unstableMinus";
  }
  return "?";
}

inline const char* to_string(TraceTerminal t) {
  switch (t) {
    case TraceTerminal::FocusReached: return "focusReached";
    case TraceTerminal::BlowUp: return "blowUp";
    case TraceTerminal::ArcLengthCap: return "arcLengthCap";
    case TraceTerminal::Escaped: return "escaped";
  }
  return "?";
}

struct ManifoldOptions {
  double seed = 1e-7;
  double focusStop = 1e-4;
  double arcLengthCap = 1e4;
  double arcStep = 1e-2;
  double escapeV = 1e2;
  double escapeW = 1e3;
  double tangentialTol = 1e-10;
  // Move each traced w_i onto the switching point of the forward flow
  // (bisection on the change of halfRotations within +-polishBracket).
  bool polish = true;
  double polishBracket = 1e-9;
  FlowOptions flow;
};

struct ManifoldTrace {
  ManifoldBranch branch;
  std::vector<Vec2> polyline;
  std::vector<double> times;  // backward time of each sample (stable branches)
  TraceTerminal terminal = TraceTerminal::ArcLengthCap;
  std::optional<double> wLim;
  double arcLength = 0;
  // Cap reached before the focus on a branch that was expected to spiral in.
  bool noSpiralTermination = false;
};

struct ResetLineGeometry {
  double vR = 0;
  std::vector<double> wi;  // ascending
  int p = 0;
  int p1 = 0;
  double wStar = 0;
  double wStarStar = 0;
  double wLimMinus = 0;
  double wLimPlus = 0;
  double gamma = 1;
  double d = 0;
  double alpha = 0;
  double beta = 0;

  ResetLineGeometry with_reset(double g, double dd) const {
    ResetLineGeometry r = *this;
    r.gamma = g;
    r.d = dd;
    r.alpha = g * wLimPlus + dd;
    r.beta = g * wLimMinus + dd;
    return r;
  }

  // Number of intersections strictly below w: w lies in I_i = (w_i, w_{i+1}).
  int interval_index(double w) const {
    return static_cast<int>(std::lower_bound(wi.begin(), wi.end(), w) - wi.begin());
  }

  std::optional<std::size_t> near_intersection(double w, double tol) const {
    for (std::size_t k = 0; k < wi.size(); ++k)
      if (std::abs(w - wi[k]) <= tol) return k;
    return std::nullopt;
  }

  std::vector<double> intersections_in(double lo, double hi) const {
    std::vector<double> out;
    for (double x : wi)
      if (x > lo && x < hi) out.push_back(x);
    return out;
  }
};

// Small-oscillation count of the orbit started at (vR, w), resolved to halves.
inline HalfInteger oscillation_count(const ResetLineGeometry& g, double w) {
  if (g.near_intersection(w, 1e-12)) throw Error(ErrorKind::OnStableManifold, "w lies on the stable manifold");
  const int i = g.interval_index(w);
  if (i < g.p1) return HalfInteger::from_whole(i);
  if (i > g.p1) return HalfInteger::from_halves(2 * g.p + 1 - 2 * i);
  if (w < g.wStar) return HalfInteger::from_whole(g.p1);
  return HalfInteger::from_halves(2 * g.p1 + (g.p % 2 == 0 ? 1 : -1));
}

template <Nonlinearity N = QuarticNonlinearity>
class ManifoldTracer {
 public:
  ManifoldTracer(VectorField<N> field, ManifoldOptions opts = {})
      : f_(field), eq_(fixed_points(field)), opts_(opts) {}

  const EquilibriumSet& equilibria() const { return eq_; }

  ManifoldTrace trace_stable(ManifoldBranch branch) const {
    const auto& es = eq_.saddleEigen.eStable;
    // eStable has positive v component; the minus branch heads to w < w+.
    const double s = branch == ManifoldBranch::StablePlus ? 1.0 : -1.0;
    ManifoldTrace tr;
    tr.branch = branch;
    detail::State<2> x{eq_.vPlus + s * opts_.seed * es[0], eq_.wPlus + s * opts_.seed * es[1]};
    tr.polyline.push_back({x[0], x[1]});
    tr.times.push_back(0.0);

    const auto rhs = backward_rhs();
    const auto& fo = opts_.flow;
    detail::Stepper<2> st(fo.absTol, fo.relTol, fo.maxStep, fo.minStep);
    double t = 0.0, dt = 1e-2;
    for (;;) {
      const auto x0 = x;
      const double t0 = t;
      st.step(rhs, x, t, dt);
      double len = std::hypot(x[0] - x0[0], x[1] - x0[1]);
      while (len > opts_.arcStep) {
        dt = 0.5 * (t - t0);
        x = x0;
        t = t0;
        st.reset();
        st.step(rhs, x, t, dt);
        len = std::hypot(x[0] - x0[0], x[1] - x0[1]);
      }
      tr.arcLength += len;
      tr.polyline.push_back({x[0], x[1]});
      tr.times.push_back(t);
      if (std::hypot(x[0] - eq_.vMinus, x[1] - eq_.wMinus) < opts_.focusStop) {
        tr.terminal = TraceTerminal::FocusReached;
        break;
      }
      if (std::abs(x[0]) > opts_.escapeV || std::abs(x[1]) > opts_.escapeW) {
        tr.terminal = TraceTerminal::Escaped;
        break;
      }
      if (tr.arcLength > opts_.arcLengthCap) {
        tr.terminal = TraceTerminal::ArcLengthCap;
        tr.noSpiralTermination = branch == ManifoldBranch::StableMinus;
        break;
      }
    }
    return tr;
  }

  // Forward orbit of an unstable branch through its blow-up.
  ManifoldTrace trace_unstable(ManifoldBranch branch, bool keepPolyline = true) const {
    const auto& eu = eq_.saddleEigen.eUnstable;
    const double s = branch == ManifoldBranch::UnstablePlus ? 1.0 : -1.0;
    FlowOptions fo = opts_.flow;
    fo.detectSaddle = false;
    fo.sensitivity = false;
    SpikingFlow<N> flow(f_, eq_, fo);
    Trajectory traj;
    const auto out = flow.run(eq_.vPlus + s * opts_.seed * eu[0], eq_.wPlus + s * opts_.seed * eu[1], &traj);
    ManifoldTrace tr;
    tr.branch = branch;
    if (const auto* ev = std::get_if<SpikeEvent>(&out)) {
      tr.terminal = TraceTerminal::BlowUp;
      tr.wLim = ev->wAtSpike;
    } else {
      throw Error(ErrorKind::TimeBudgetExceeded, "unstable branch did not blow up");
    }
    if (keepPolyline) {
      for (const auto& smp : traj.samples) {
        if (smp.v > opts_.escapeV) break;
        tr.polyline.push_back({smp.v, smp.w});
        tr.times.push_back(smp.t);
      }
    }
    return tr;
  }

  // Transversal crossings of v = vR, refined by Newton steps on the time of flight.
  std::vector<double> reset_intersections(const ManifoldTrace& tr, double vR) const {
    std::vector<double> out;
    const auto& pl = tr.polyline;
    for (std::size_t k = 0; k + 1 < pl.size(); ++k) {
      const double a = pl[k][0] - vR, b = pl[k + 1][0] - vR;
      if (a == 0.0) {
        out.push_back(refine_crossing(pl[k], 0.0, vR));
        continue;
      }
      if ((a < 0) == (b < 0) || b == 0.0) continue;
      const double frac = a / (a - b);
      const double dt0 = frac * (tr.times[k + 1] - tr.times[k]);
      out.push_back(refine_crossing(pl[k], dt0, vR));
    }
    return out;
  }

  std::pair<double, double> unstable_limits() const {
    return {*trace_unstable(ManifoldBranch::UnstableMinus, false).wLim,
            *trace_unstable(ManifoldBranch::UnstablePlus, false).wLim};
  }

  ResetLineGeometry geometry(double vR, double gamma = 1.0, double d = 0.0) const {
    ResetLineGeometry g;
    g.vR = vR;
    for (auto br : {ManifoldBranch::StableMinus, ManifoldBranch::StablePlus}) {
      const auto w = reset_intersections(trace_stable(br), vR);
      g.wi.insert(g.wi.end(), w.begin(), w.end());
    }
    std::sort(g.wi.begin(), g.wi.end());
    if (opts_.polish)
      for (double& w : g.wi) w = polish_intersection(w, vR);
    g.p = static_cast<int>(g.wi.size());
    g.p1 = (g.p + 1) / 2;
    g.wStar = f_.v_nullcline(vR);
    g.wStarStar = f_.w_nullcline(vR);
    std::tie(g.wLimMinus, g.wLimPlus) = unstable_limits();
    return g.with_reset(gamma, d);
  }

 private:
  auto backward_rhs() const {
    return [this](const detail::State<2>& x, detail::State<2>& dx, double) {
      dx[0] = -(f_.F.value(x[0]) - x[1] + f_.I);
      dx[1] = -f_.eps * (f_.b * x[0] - x[1]);
    };
  }

  detail::State<2> flow_back(Vec2 start, double duration) const {
    detail::State<2> x{start[0], start[1]};
    if (duration == 0.0) return x;
    const auto& fo = opts_.flow;
    detail::Stepper<2> st(fo.absTol * 1e-2, fo.relTol * 1e-2, fo.maxStep, 1e-18);
    double t = 0.0, dt = std::copysign(std::min(std::abs(duration), 1e-3), duration);
    const auto rhs = backward_rhs();
    while (!st.step_until(rhs, x, t, dt, duration)) {
    }
    return x;
  }

  double refine_crossing(Vec2 start, double dt0, double vR) const {
    double tau = dt0;
    detail::State<2> x = flow_back(start, tau);
    for (int it = 0; it < 8; ++it) {
      const double vdot = -(f_.F.value(x[0]) - x[1] + f_.I);  // d v / d tau, backward
      if (std::abs(vdot) < opts_.tangentialTol)
        throw Error(ErrorKind::TangentialCrossing, "|dv/dt| below tolerance at reset-line crossing");
      const double step = (x[0] - vR) / vdot;
      tau -= step;
      x = flow_back(start, tau);
      if (std::abs(x[0] - vR) < 1e-15 || std::abs(step) < 1e-16) break;
    }
    return x[1];
  }

  double polish_intersection(double w, double vR) const {
    FlowOptions fo = opts_.flow;
    fo.sensitivity = false;
    fo.detectSaddle = false;
    SpikingFlow<N> flow(f_, eq_, fo);
    auto count = [&](double x) {
      const auto out = flow.run(vR, x);
      const auto* ev = std::get_if<SpikeEvent>(&out);
      return ev ? ev->halfRotations : -1;
    };
    double a = w - opts_.polishBracket, b = w + opts_.polishBracket;
    const int ca = count(a), cb = count(b);
    if (ca < 0 || cb < 0 || ca == cb) return w;  // keep the traced value
    while (b - a > 4 * std::numeric_limits<double>::epsilon() * std::abs(w)) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const int cm = count(m);
      if (cm == ca) a = m;
      else if (cm == cb) b = m;
      else break;
    }
    return 0.5 * (a + b);
  }

  VectorField<N> f_;
  EquilibriumSet eq_;
  ManifoldOptions opts_;
};

inline ResetLineGeometry compute_geometry(const ModelParams& p, const ManifoldOptions& opts = {}) {
  p.validate();
  return ManifoldTracer<>(make_field(p), opts).geometry(p.vR, p.gamma, p.d);
}

inline void write_manifold_csv(std::ostream& os, const std::vector<ManifoldTrace>& traces) {
  char buf[96];
  os << "branch,v,w\n";
  for (const auto& tr : traces)
    for (const auto& pt : tr.polyline) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", to_string(tr.branch), pt[0], pt[1]);
      os << buf;
    }
}

}  // namespace mmo
