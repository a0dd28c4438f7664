#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "mmo/flow.hpp"

using namespace mmo;

namespace {

ModelParams period_two_params() {
  ModelParams p;
  p.vR = 0.1;
  return p;
}

SpikeEvent spike(const SpikeOutcome& o) {
  const auto* ev = std::get_if<SpikeEvent>(&o);
  if (!ev) throw std::runtime_error("no spike");
  return *ev;
}

// Fixed-step RK4 in time, stopped where v first reaches vEnd (linear
// interpolation of w). Independent of the library's integrators.
double rk4_w_at_v(const ModelParams& p, double v, double w, double vEnd, double h) {
  auto f = [&](double x, double y) {
    return std::array<double, 2>{std::pow(x, 4) + p.a * x - y + p.I, p.eps * (p.b * x - y)};
  };
  for (;;) {
    const auto k1 = f(v, w);
    const auto k2 = f(v + 0.5 * h * k1[0], w + 0.5 * h * k1[1]);
    const auto k3 = f(v + 0.5 * h * k2[0], w + 0.5 * h * k2[1]);
    const auto k4 = f(v + h * k3[0], w + h * k3[1]);
    const double vn = v + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    const double wn = w + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    if (vn >= vEnd) return w + (wn - w) * (vEnd - v) / (vn - v);
    v = vn;
    w = wn;
  }
}

}  // namespace

TEST(Flow, WOfVMatchesTimeIntegration) {
  const auto p = period_two_params();
  const double w = integrate_w_of_v(p, 0.5, 1.5, 3.0);
  EXPECT_NEAR(w, rk4_w_at_v(p, 1.5, 0.5, 3.0, 1e-5), 1e-7);
}

TEST(Flow, WOfVRejectsNullclineCrossing) {
  try {
    integrate_w_of_v(period_two_params(), 0.5, 0.1, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NullclineCrossing);
  }
}

TEST(Flow, CutoffIndependence) {
  const auto p = period_two_params();
  for (double w0 : {0.09, 0.12, 0.15, 0.3}) {
    FlowOptions a, b;
    b.vCut = 1e4;
    EXPECT_NEAR(spike(integrate_to_spike(p, w0, a)).wAtSpike, spike(integrate_to_spike(p, w0, b)).wAtSpike, 1e-8)
        << "w0=" << w0;
  }
}

TEST(Flow, HalfRotationsPerInterval) {
  // vR = 0.1: w1 ~ 0.1024, w* = 0.1376, w2 ~ 0.1627
  const auto p = period_two_params();
  EXPECT_EQ(spike(integrate_to_spike(p, 0.09)).halfRotations, 0);
  EXPECT_EQ(spike(integrate_to_spike(p, 0.12)).halfRotations, 2);
  EXPECT_EQ(spike(integrate_to_spike(p, 0.15)).halfRotations, 3);
  EXPECT_EQ(spike(integrate_to_spike(p, 0.20)).halfRotations, 1);
}

TEST(Flow, HalfRotationsCountNullclineCrossingsOfSamples) {
  const auto p = period_two_params();
  for (double w0 : {0.09, 0.12, 0.15, 0.2}) {
    Trajectory tr;
    const auto ev = spike(integrate_to_spike(p, w0, {}, &tr));
    int crossings = 0;
    auto g = [&](const TrajectorySample& s) { return std::pow(s.v, 4) + p.a * s.v - s.w + p.I; };
    for (std::size_t k = 1; k < tr.samples.size(); ++k)
      if ((g(tr.samples[k]) > 0) != (g(tr.samples[k - 1]) > 0)) ++crossings;
    EXPECT_EQ(crossings, ev.halfRotations) << "w0=" << w0;
    ASSERT_TRUE(tr.blowUp);
    EXPECT_DOUBLE_EQ(tr.blowUp->wAtSpike, ev.wAtSpike);
  }
}

TEST(Flow, SensitivityMatchesFiniteDifferences) {
  const auto p = period_two_params();
  FlowOptions o;
  o.sensitivity = true;
  for (double w0 : {0.095, 0.12, 0.15, 0.2, 0.4}) {
    const auto ev = spike(integrate_to_spike(p, w0, o));
    ASSERT_TRUE(ev.dWdw0);
    ASSERT_TRUE(ev.variationalFactor);
    EXPECT_GT(*ev.variationalFactor, 0.0);
    const double h = 1e-6;
    const double fd =
        (spike(integrate_to_spike(p, w0 + h)).wAtSpike - spike(integrate_to_spike(p, w0 - h)).wAtSpike) / (2 * h);
    EXPECT_NEAR(*ev.dWdw0, fd, 1e-5 * std::max(1.0, std::abs(fd))) << "w0=" << w0;
  }
}

TEST(Flow, SpikeTimeIsPositiveAndFinite) {
  const auto ev = spike(integrate_to_spike(period_two_params(), 0.12));
  EXPECT_GT(ev.tStar, 0.0);
  EXPECT_TRUE(std::isfinite(ev.tStar));
  EXPECT_GT(ev.windingAngle, 0.0);
}

TEST(Flow, KnownIntersectionIsCaptured) {
  FlowOptions o;
  o.knownIntersections = {0.1234};
  const auto out = integrate_to_spike(period_two_params(), 0.1234, o);
  const auto* ns = std::get_if<NonSpiking>(&out);
  ASSERT_NE(ns, nullptr);
  EXPECT_EQ(ns->reason, NonSpikingReason::Saddle);
}

TEST(Flow, TimeBudget) {
  FlowOptions o;
  o.tMax = 0.5;
  const auto out = integrate_to_spike(period_two_params(), 0.15, o);
  const auto* ns = std::get_if<NonSpiking>(&out);
  ASSERT_NE(ns, nullptr);
  EXPECT_EQ(ns->reason, NonSpikingReason::TimeBudget);
}

TEST(Flow, WindingAngleOfCircle) {
  std::vector<TrajectorySample> s;
  for (int k = 0; k <= 64; ++k) {
    const double th = 2 * std::numbers::pi * k / 64.0;
    s.push_back({static_cast<double>(k), 1 + std::cos(th), 2 + std::sin(th)});
  }
  EXPECT_NEAR(winding_angle(s, {1, 2}), 2 * std::numbers::pi, 1e-12);
  EXPECT_THROW(winding_angle(s, {2, 2}), Error);
}

TEST(Flow, TrajectoryCsv) {
  Trajectory tr;
  tr.samples = {{0, 0.1, 0.2}, {0.5, 0.25, 0.125}};
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  EXPECT_EQ(os.str(), "t,v,w\n0,0.10000000000000001,0.20000000000000001\n0.5,0.25,0.125\n");
}
