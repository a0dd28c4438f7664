#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numbers>

#include "mmo/rotation.hpp"

using namespace mmo;

namespace {

// C1 and C2 hold: beta < w1 < alpha < w* < w2.
ResetLineGeometry stub_geometry(double alpha = 0.5) {
  ResetLineGeometry g;
  g.wi = {0.3, 0.9};
  g.p = 2;
  g.p1 = 1;
  g.wStar = 0.6;
  g.beta = 0.1;
  g.alpha = alpha;
  return g;
}

// Rigid rotation by r written as a map on (0, 1] with its discontinuity at 1 - r.
Lift rigid_lift(double r) {
  const double w1 = 1.0 - r;
  return Lift([=](double x) { return x < w1 ? x + r : x + r - 1.0; }, 0.0, 1.0, w1, true);
}

ModelParams low_reset(double d) {
  ModelParams p;
  p.vR = 0.1;
  p.gamma = 0.05;
  p.d = d;
  return p;
}

}  // namespace

TEST(Regime, SyntheticRegions) {
  const auto g = stub_geometry();
  EXPECT_EQ(classify_regime(g, 0.15, 0.2).region, Region::A);
  EXPECT_EQ(classify_regime(g, 0.2, 0.4).region, Region::B);
  EXPECT_EQ(classify_regime(g, 0.35, 0.4).region, Region::C);
  EXPECT_EQ(classify_regime(g, 0.45, 0.4).region, Region::D);
  EXPECT_EQ(classify_regime(stub_geometry(0.7), 0.45, 0.4).region, Region::E);
  const auto other = classify_regime(g, 0.2, 0.05);
  EXPECT_EQ(other.region, Region::Other);
  EXPECT_FALSE(other.conditions.C3);
  EXPECT_FALSE(other.lift_defined());
  // alpha above w2: C1 fails
  EXPECT_FALSE(classify_regime(stub_geometry(0.95), 0.2, 0.4).conditions.C1);
}

TEST(Regime, EqualWitnessesAreTheContinuousBoundary) {
  const auto l = classify_regime(stub_geometry(), 0.2, 0.2);
  EXPECT_TRUE(l.conditions.C4);
  EXPECT_TRUE(l.continuousLift);
  EXPECT_EQ(l.region, Region::A);
}

TEST(Regime, ShiftPrecondition) {
  const auto l = classify_regime(stub_geometry(), 0.25, 0.2);
  EXPECT_EQ(l.region, Region::D);
  EXPECT_TRUE(l.shiftPrecondition);
}

TEST(Lift, Periodicity) {
  const auto l = rigid_lift(0.3);
  for (double x : {0.05, 0.5, 0.69, 0.7, 0.95})
    for (int k : {-3, -1, 1, 4}) EXPECT_NEAR(l(x + k), l(x) + k, 1e-12) << x << " " << k;
  EXPECT_DOUBLE_EQ(l(0.7), 1.0);  // value alpha at w1
}

TEST(Lift, RigidRotationNumbers) {
  for (double r : {0.0, 1.0 / 3.0, 0.5, std::numbers::sqrt2 - 1.0}) {
    const auto res = rotation_number(rigid_lift(r == 0.0 ? 1e-300 : r), 0.2, 1000);
    EXPECT_NEAR(res.rho, r, 1e-3) << r;
    EXPECT_DOUBLE_EQ(res.errorBound, 1e-3);
  }
  const auto third = rotation_number(rigid_lift(1.0 / 3.0), 0.2, 1000);
  ASSERT_TRUE(third.rational);
  EXPECT_EQ(*third.rational, (Rational{1, 3}));
  EXPECT_FALSE(rotation_number(rigid_lift(std::numbers::sqrt2 - 1.0), 0.2, 10000, 20).rational);
}

TEST(Lift, NonMonotoneRejected) {
  Lift l([](double x) { return x; }, 0.0, 1.0, 0.5, false);
  EXPECT_THROW(rotation_number(l, 0.1, 10), Error);
}

TEST(Lift, OrbitSignatureOfRigidRotation) {
  LiftOrbit o;
  rotation_number(rigid_lift(2.0 / 5.0), 0.123, 500, kDefaultQMax, &o);
  EXPECT_TRUE(cyclically_equal(lift_orbit_signature(o).blocks, signature_from_rho(2, 5).blocks));
}

TEST(Envelopes, SandwichAndOrdering) {
  // degree-one circle map with negative slopes somewhere
  auto psi = [](double x) { return x + 0.3 + 0.2 * std::sin(2 * std::numbers::pi * x); };
  LiftSamples s;
  s.beta = 0.0;
  s.alpha = 1.0;
  s.w1 = 0.5;
  for (int k = 1; k <= 4000; ++k) {
    s.x.push_back(k / 4000.0);
    s.y.push_back(psi(k / 4000.0));
  }
  const auto env = envelopes(s);
  for (std::size_t k = 0; k < s.x.size(); ++k) {
    EXPECT_LE(env.lower.y()[k], s.y[k]);
    EXPECT_GE(env.upper.y()[k], s.y[k]);
    if (k > 0) {
      EXPECT_LE(env.lower.y()[k - 1], env.lower.y()[k]);
      EXPECT_LE(env.upper.y()[k - 1], env.upper.y()[k]);
    }
  }
  const std::size_t n = 4000;
  const auto r = rotation_interval(env, n);
  EXPECT_LT(r.a, r.b);
  // rotation numbers of actual orbits lie in [a, b]
  for (double x0 : {0.0, 0.17, 0.5, 0.83}) {
    double x = x0;
    for (std::size_t k = 0; k < n; ++k) x = psi(x);
    const double rho = (x - x0) / static_cast<double>(n);
    EXPECT_GE(rho, r.a - 2.0 / n);
    EXPECT_LE(rho, r.b + 2.0 / n);
  }
}

TEST(Envelopes, MonotoneLiftGivesTrivialInterval) {
  const auto l = rigid_lift(0.25);
  const auto r = rotation_interval(l, 2000, 2000);
  EXPECT_NEAR(r.a, 0.25, 1e-3);
  EXPECT_NEAR(r.b, 0.25, 1e-3);
}

TEST(Envelopes, SamplePointsRefineTowardsDiscontinuity) {
  const auto xs = lift_sample_points(0.0, 1.0, 0.4, 100, 1e-6);
  EXPECT_TRUE(std::is_sorted(xs.begin(), xs.end()));
  EXPECT_EQ(xs.back(), 1.0);
  EXPECT_NE(std::find(xs.begin(), xs.end(), 0.4), xs.end());
  const auto above = *std::upper_bound(xs.begin(), xs.end(), 0.4);
  EXPECT_LT(above - 0.4, 2e-6);
}

TEST(FixedPoints, SyntheticRegimes) {
  const auto g = stub_geometry();  // beta 0.1, w1 0.3, alpha 0.5
  // fixed points on both sides of w1
  auto both = [](double x) { return x < 0.3 ? 0.5 * x + 0.1 : 0.5 * x + 0.2; };
  auto l = classify_regime(g, both(0.5), both(0.1));
  EXPECT_EQ(fixed_point_regime(both, l).regime, FixedPointRegime::ArbitraryPeriods);
  // only a left fixed point and the right piece stays below it
  auto left = [](double x) { return x < 0.3 ? 0.5 * x + 0.1 : 0.1 * x + 0.11; };
  l = classify_regime(g, left(0.5), left(0.1));
  const auto fa = fixed_point_regime(left, l);
  EXPECT_EQ(fa.regime, FixedPointRegime::NoMMO);
  ASSERT_EQ(fa.left.size(), 1u);
  EXPECT_NEAR(fa.left[0], 0.2, 1e-12);
}

TEST(Model, PeriodTwoOrbit) {
  const auto m = make_adaptation_map(low_reset(0.087));
  const auto l = classify_regime(m);
  EXPECT_EQ(l.region, Region::B);
  const auto p2 = detect_period2(m, l);
  ASSERT_TRUE(p2.found);
  EXPECT_LT(p2.residual, 1e-9);
  EXPECT_LT(p2.w, l.witnesses.w1);
  EXPECT_GT(p2.partner, l.witnesses.w1);  // alternates across w1
  const auto r = rotation_number(build_lift(m, l), 0.0, 2000);
  ASSERT_TRUE(r.rational);
  EXPECT_EQ(*r.rational, (Rational{1, 2}));
}

TEST(Model, RegularSpiking) {
  const auto m = make_adaptation_map(low_reset(0.08));
  const auto l = classify_regime(m);
  EXPECT_EQ(l.region, Region::A);
  EXPECT_FALSE(detect_period2(m, l).preconditionHolds);
  const auto r = rotation_number(build_lift(m, l), 0.0, 2000);
  EXPECT_EQ(*r.rational, (Rational{0, 1}));
  const auto fa = fixed_point_regime(m, l);
  EXPECT_FALSE(fa.left.empty());
}

TEST(Model, InitialConditionIndependenceAndBound) {
  const auto m = make_adaptation_map(low_reset(0.085));
  const auto lift = build_lift(m);
  const std::size_t n = 1000;
  double lo = 1, hi = 0;
  for (int k = 0; k < 10; ++k) {
    const double w0 = m.beta() + (m.alpha() - m.beta()) * (k + 0.5) / 10.0;
    const double rho = rotation_number(lift, w0, n).rho;
    lo = std::min(lo, rho);
    hi = std::max(hi, rho);
  }
  EXPECT_LT(hi - lo, 2.0 / n + 1e-9);
  const double coarse = rotation_number(lift, 0.0, n).rho, fine = rotation_number(lift, 0.0, 10 * n).rho;
  EXPECT_LE(std::abs(coarse - fine), 1.0 / n + 1.0 / (10 * n));
  LiftOrbit o;
  const auto r = rotation_number(lift, 0.0, n, kDefaultQMax, &o);
  ASSERT_TRUE(r.rational);
  EXPECT_EQ(*r.rational, (Rational{1, 3}));
  EXPECT_TRUE(cyclically_equal(lift_orbit_signature(o).blocks, signature_from_rho(1, 3).blocks));
}

TEST(Model, OverlappingPeriodicOrbit) {
  ModelParams p;  // vR = 0.1158
  p.gamma = 0.07;
  p.d = 0.076;
  const auto m = make_adaptation_map(p);
  const auto l = classify_regime(m);
  EXPECT_EQ(l.region, Region::D);

  // Oracle: continuous sign changes of Phi^q(x) - x on a uniform grid; a
  // sign change is genuine only if the itinerary is the same at both ends.
  const double be = l.witnesses.beta, al = l.witnesses.alpha, w1 = l.witnesses.w1;
  const int n = 2000;
  auto genuine_roots = [&](int q, int ups) {
    int count = 0;
    double g0 = 0;
    unsigned it0 = 0;
    for (int i = 0; i <= n; ++i) {
      double y = be + (al - be) * (i + 0.5) / (n + 1);
      const double x = y;
      unsigned it = 0;
      for (int k = 0; k < q; ++k) {
        if (y > w1) it |= 1u << k;
        y = m(y);
      }
      const double g = y - x;
      if (i > 0 && it == it0 && (g < 0) != (g0 < 0) && std::popcount(it) == ups) ++count;
      g0 = g;
      it0 = it;
    }
    return count;
  };

  const auto fifth = find_periodic_orbits(m, l, 1, 5, 400);
  ASSERT_FALSE(fifth.empty());
  EXPECT_GT(genuine_roots(5, 1), 0);
  for (const auto& o : fifth) {
    EXPECT_LT(o.residual, 1e-9);
    double w = o.w;
    for (int k = 0; k < 5; ++k) w = m(w);
    EXPECT_NEAR(w, o.w, 1e-9);
  }
  // Other rationals inside the rotation interval need iterates within far
  // less than machine spacing of w1: neither the search nor the oracle sees them.
  for (auto [pp, q] : {std::pair{1, 3}, {1, 4}, {2, 5}}) {
    EXPECT_TRUE(find_periodic_orbits(m, l, pp, q, 400).empty()) << pp << "/" << q;
    EXPECT_EQ(genuine_roots(q, pp), 0) << pp << "/" << q;
  }
}
