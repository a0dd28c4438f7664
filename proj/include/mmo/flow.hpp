#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "mmo/model.hpp"
#include "mmo/stepper.hpp"

namespace mmo {

struct FlowOptions {
  double relTol = 1e-10;
  double absTol = 1e-12;
  double maxStep = 1.0;
  double minStep = 1e-14;
  double vCut = 1e3;      // end of the v-parameterized phase
  double uFar = 1e-12;    // the tail runs in u = 1/v from 1/vCut down to uFar
  double tMax = 1e4;
  double focusExclusion = 1e-7;
  double maxAngleStep = std::numbers::pi / 8;
  double denominatorFloor = 1e-12;
  // Saddle capture: NonSpiking(Saddle) once the orbit has stayed within
  // saddleCaptureRadius of the saddle for saddleCaptureTime (0 means 10 / nu).
  // With a weak contraction rate the closest approach of orbits started near
  // the stable manifold scales like offset^(mu/(mu+nu)), so this rarely fires;
  // starting points within intersectionTol of a knownIntersections entry are
  // reported as captured without integrating.
  bool detectSaddle = true;
  double saddleCaptureRadius = 1e-9;
  double saddleCaptureTime = 0.0;
  std::vector<double> knownIntersections;
  double intersectionTol = 1e-12;
  bool recordTrajectory = false;
  bool sensitivity = false;
};

struct TrajectorySample {
  double t, v, w;
};

struct SpikeEvent {
  double tStar = 0;
  double wAtSpike = 0;
  int halfRotations = 0;    // extrema of v (crossings of the v-nullcline) before the spike
  double windingAngle = 0;  // unwrapped angle swept around the focus, to the blow-up direction
  // Present when sensitivities were requested.
  std::optional<double> dWdw0;
  std::optional<double> variationalFactor;  // exp of the v-phase variational integral, always > 0
};

enum class NonSpikingReason { Saddle, TimeBudget };

struct NonSpiking {
  NonSpikingReason reason;
  double t, v, w;
};

using SpikeOutcome = std::variant<SpikeEvent, NonSpiking>;

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::optional<SpikeEvent> blowUp;
  double windingAngle = 0;
};

namespace detail {

inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  while (a > pi) a -= 2 * pi;
  while (a <= -pi) a += 2 * pi;
  return a;
}

}  // namespace detail

// Continuous flow of the subthreshold system up to (and through) the blow-up.
template <Nonlinearity N = QuarticNonlinearity>
class SpikingFlow {
 public:
  SpikingFlow(VectorField<N> field, FlowOptions opts = {})
      : f_(field), eq_(fixed_points(field)), opts_(opts) {}
  SpikingFlow(VectorField<N> field, EquilibriumSet eq, FlowOptions opts)
      : f_(field), eq_(eq), opts_(opts) {}

  const VectorField<N>& field() const { return f_; }
  const EquilibriumSet& equilibria() const { return eq_; }
  const FlowOptions& options() const { return opts_; }

  SpikeOutcome run(double v0, double w0, Trajectory* traj = nullptr) const {
    return opts_.sensitivity ? run_impl<4>(v0, w0, traj, opts_) : run_impl<2>(v0, w0, traj, opts_);
  }
  SpikeOutcome run(double v0, double w0, const FlowOptions& opts, Trajectory* traj = nullptr) const {
    return opts.sensitivity ? run_impl<4>(v0, w0, traj, opts) : run_impl<2>(v0, w0, traj, opts);
  }

  // w as a function of v along an orbit, valid while F(v) - w + I > 0.
  double w_of_v(double w0, double vStart, double vEnd) const {
    if (vStart == vEnd) return w0;
    detail::State<3> x{w0, 0.0, 0.0};
    double v = vStart;
    double dv = (vEnd > vStart ? 1 : -1) * 1e-3;
    detail::Stepper<3> st(opts_.absTol, opts_.relTol, std::abs(vEnd - vStart), opts_.minStep);
    auto rhs = v_rhs();
    check_denominator(v, x[0]);
    while (!st.step_until(rhs, x, v, dv, vEnd)) check_denominator(v, x[0]);
    check_denominator(v, x[0]);
    return x[0];
  }

 private:
  double g(double v, double w) const { return f_.F.value(v) - w + f_.I; }

  void check_denominator(double v, double w) const {
    if (!(g(v, w) > opts_.denominatorFloor))
      throw Error(ErrorKind::NullclineCrossing, "F(v) - w + I <= floor at v=" + std::to_string(v));
  }

  // State (w, t, ln S) against v.
  auto v_rhs() const {
    return [this](const detail::State<3>& x, detail::State<3>& dx, double v) {
      const double Fv = f_.F.value(v);
      const double den = Fv - x[0] + f_.I;
      dx[0] = f_.eps * (f_.b * v - x[0]) / den;
      dx[1] = 1.0 / den;
      dx[2] = f_.eps * (f_.b * v - Fv - f_.I) / (den * den);
    };
  }

  // Same state against u = 1/v, written so every term stays bounded as u -> 0.
  auto u_rhs() const {
    return [this](const detail::State<3>& x, detail::State<3>& dx, double u) {
      const double v = 1.0 / u;
      const double u2 = u * u, u4 = u2 * u2;
      const double Fv = f_.F.value(v);
      const double G = u4 * (Fv - x[0] + f_.I);
      dx[0] = -f_.eps * (f_.b * u - x[0] * u2) / G;
      dx[1] = -u2 / G;
      dx[2] = -f_.eps * u2 * (u4 * (f_.b * v - Fv - f_.I)) / (G * G);
    };
  }

  template <std::size_t M>
  auto t_rhs() const {
    return [this](const detail::State<M>& x, detail::State<M>& dx, double) {
      dx[0] = f_.F.value(x[0]) - x[1] + f_.I;
      dx[1] = f_.eps * (f_.b * x[0] - x[1]);
      if constexpr (M == 4) {
        dx[2] = f_.F.slope(x[0]) * x[2] - x[3];
        dx[3] = f_.eps * (f_.b * x[2] - x[3]);
      }
    };
  }

  double angle(double v, double w) const { return std::atan2(w - eq_.wMinus, v - eq_.vMinus); }

  template <std::size_t M>
  SpikeOutcome run_impl(double v0, double w0, Trajectory* traj, const FlowOptions& o) const {
    detail::State<M> x{};
    x[0] = v0;
    x[1] = w0;
    if constexpr (M == 4) x[3] = 1.0;  // d(v,w)/dw0 at t = 0

    if (traj) {
      traj->samples.clear();
      traj->blowUp.reset();
      traj->samples.push_back({0.0, v0, w0});
    }

    const double vSwitch = eq_.vPlus + 1.0;
    const double dwellLimit = o.saddleCaptureTime > 0 ? o.saddleCaptureTime : 10.0 / eq_.saddleEigen.nu;
    if (o.detectSaddle)
      for (double wi : o.knownIntersections)
        if (std::abs(w0 - wi) <= o.intersectionTol) return NonSpiking{NonSpikingReason::Saddle, 0.0, v0, w0};
    const auto rhs = t_rhs<M>();
    detail::Stepper<M> st(o.absTol, o.relTol, o.maxStep, o.minStep);

    double t = 0.0, dt = 1e-3;
    double theta = angle(x[0], x[1]);
    double winding = 0.0;
    int crossings = 0;
    bool gPositive = g(x[0], x[1]) > 0;
    double ballEntry = -1.0;  // < 0: outside the capture ball

    auto focus_check = [&](double v, double w) {
      if (std::hypot(v - eq_.vMinus, w - eq_.wMinus) < o.focusExclusion)
        throw Error(ErrorKind::FocusTooClose, "orbit passed within the focus exclusion radius");
    };
    focus_check(x[0], x[1]);

    // Phase 1: time parameterization.
    while (!(x[0] > vSwitch && g(x[0], x[1]) > 1.0)) {
      if (t > o.tMax) return NonSpiking{NonSpikingReason::TimeBudget, t, x[0], x[1]};
      const auto x0 = x;
      const double t0 = t;
      st.step(rhs, x, t, dt);
      double inc = detail::wrap_angle(angle(x[0], x[1]) - theta);
      while (std::abs(inc) > o.maxAngleStep) {
        dt = 0.5 * (t - t0);
        if (dt < o.minStep) throw Error(ErrorKind::StepSizeUnderflow, "angle control stalled");
        x = x0;
        t = t0;
        st.reset();
        st.step(rhs, x, t, dt);
        inc = detail::wrap_angle(angle(x[0], x[1]) - theta);
      }
      winding += inc;
      theta += inc;
      focus_check(x[0], x[1]);
      const bool gp = g(x[0], x[1]) > 0;
      if (gp != gPositive) ++crossings;
      gPositive = gp;

      if (o.detectSaddle) {
        if (std::hypot(x[0] - eq_.vPlus, x[1] - eq_.wPlus) < o.saddleCaptureRadius) {
          if (ballEntry < 0) ballEntry = t;
          else if (t - ballEntry > dwellLimit) return NonSpiking{NonSpikingReason::Saddle, t, x[0], x[1]};
        } else {
          ballEntry = -1.0;
        }
      }
      if (traj) traj->samples.push_back({t, x[0], x[1]});
    }

    SpikeEvent ev;
    double projection = 0.0;
    if constexpr (M == 4) {
      // d w / d w0 restricted to the section v = const through the switch point.
      const double vdot = g(x[0], x[1]);
      const double wdot = f_.eps * (f_.b * x[0] - x[1]);
      projection = x[3] - (wdot / vdot) * x[2];
    }

    // Phase 2: v as independent variable up to vCut.
    detail::State<3> y{x[1], t, 0.0};
    {
      double v = x[0];
      double dv = 1e-2;
      detail::Stepper<3> sv(o.absTol, o.relTol, o.vCut, o.minStep);
      const auto r = v_rhs();
      bool done = v >= o.vCut;
      while (!done) {
        done = sv.step_until(r, y, v, dv, o.vCut);
        const double th = angle(v, y[0]);
        winding += detail::wrap_angle(th - theta);
        theta = th;
        if (traj) traj->samples.push_back({y[1], v, y[0]});
      }
    }
    // Phase 3: tail in u = 1/v.
    {
      double u = 1.0 / o.vCut;
      double du = -0.1 * u;
      detail::Stepper<3> su(o.absTol, o.relTol, u, 1e-30);
      const auto r = u_rhs();
      bool done = false;
      while (!done) {
        done = su.step_until(r, y, u, du, o.uFar);
        if (traj) traj->samples.push_back({y[1], 1.0 / u, y[0]});
      }
    }
    // The blow-up direction is horizontal: angle -> 0.
    winding += detail::wrap_angle(0.0 - theta);

    ev.tStar = y[1];
    ev.wAtSpike = y[0];
    ev.halfRotations = crossings;
    ev.windingAngle = winding;
    if constexpr (M == 4) {
      ev.variationalFactor = std::exp(y[2]);
      ev.dWdw0 = projection * *ev.variationalFactor;
    }
    if (traj) {
      traj->blowUp = ev;
      traj->windingAngle = winding;
    }
    return ev;
  }

  VectorField<N> f_;
  EquilibriumSet eq_;
  FlowOptions opts_;
};

inline SpikeOutcome integrate_to_spike(const ModelParams& p, double w0, const FlowOptions& opts = {},
                                       Trajectory* traj = nullptr) {
  p.validate();
  SpikingFlow<> flow(make_field(p), opts);
  return flow.run(p.vR, w0, traj);
}

inline double integrate_w_of_v(const ModelParams& p, double w0, double vStart, double vEnd,
                               const FlowOptions& opts = {}) {
  p.validate();
  SpikingFlow<> flow(make_field(p), opts);
  return flow.w_of_v(w0, vStart, vEnd);
}

// Unwrapped angle of the samples around `focus`, accumulated sample to sample.
inline double winding_angle(const std::vector<TrajectorySample>& samples, Vec2 focus,
                            double rMin = 1e-7) {
  double total = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double dv = samples[k].v - focus[0], dw = samples[k].w - focus[1];
    if (std::hypot(dv, dw) < rMin) throw Error(ErrorKind::FocusTooClose, "sample within rMin of the focus");
    const double th = std::atan2(dw, dv);
    if (k > 0) total += detail::wrap_angle(th - prev);
    prev = th;
  }
  return total;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  char buf[96];
  os << "t,v,w\n";
  for (const auto& s : traj.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.t, s.v, s.w);
    os << buf;
  }
}

}  // namespace mmo
