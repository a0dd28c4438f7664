#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mmo/adaptation.hpp"

using namespace mmo;

namespace {

ModelParams period_two_params(double d = 0.087) {
  ModelParams p;
  p.vR = 0.1;
  p.gamma = 0.05;
  p.d = d;
  return p;
}

const AdaptationMap<>& map6() {
  static const AdaptationMap<> m = make_adaptation_map(period_two_params());
  return m;
}

}  // namespace

TEST(Adaptation, AffineInResetParameters) {
  const auto& m = map6();
  const auto other = m.with_reset(0.3, 0.01);
  for (double w : {0.095, 0.12, 0.15}) {
    const double phi = m.reset_free(w).value;
    EXPECT_DOUBLE_EQ(m(w), 0.05 * phi + 0.087);
    EXPECT_DOUBLE_EQ(other(w), 0.3 * phi + 0.01);
  }
  EXPECT_DOUBLE_EQ(m.alpha(), 0.05 * m.geometry().wLimPlus + 0.087);
  EXPECT_DOUBLE_EQ(m.beta(), 0.05 * m.geometry().wLimMinus + 0.087);
}

TEST(Adaptation, DerivativeMatchesCentralDifferences) {
  const auto& m = map6();
  const double w1 = m.geometry().wi[0];
  for (double w : {m.beta() + 1e-3, 0.5 * (m.beta() + w1), w1 + 2e-3, 0.12, m.alpha() - 1e-3}) {
    const double h = 1e-6;
    const double fd = (m(w + h) - m(w - h)) / (2 * h);
    EXPECT_NEAR(m.derivative(w), fd, 1e-4 * std::abs(fd)) << "w=" << w;
  }
}

TEST(Adaptation, SampledMapIsMonotoneAndConfined) {
  const auto s = sample_map(map6(), 300);
  EXPECT_EQ(s.monotonicityViolations, 0u);
  EXPECT_EQ(s.rangeViolations, 0u);
  ASSERT_EQ(s.discontinuities.size(), 1u);
  // refinement reaches the discontinuity from both sides
  const double w1 = s.discontinuities[0];
  const auto it = std::lower_bound(s.grid.begin(), s.grid.end(), w1);
  EXPECT_NEAR(*it - w1, 1e-9, 1e-12);
  EXPECT_NEAR(w1 - *(it - 1), 1e-9, 1e-12);
}

TEST(Adaptation, LowerBoundBelowTheDiagonal) {
  const auto& m = map6();
  const auto& g = m.geometry();
  const double hi = std::min({0.087 / 0.95, g.wi[0], g.wStarStar});
  for (int k = 0; k < 20; ++k) {
    const double w = m.beta() + (hi - m.beta()) * k / 20.0;
    EXPECT_GE(m(w), 0.05 * w + 0.087) << "w=" << w;
  }
}

TEST(Adaptation, OneSidedLimitsAtW1) {
  const auto& m = map6();
  const double w1 = m.geometry().wi[0];
  // from above the orbit leaves along the lower unstable branch: fast approach
  EXPECT_NEAR(m(w1 + 1e-7), m.beta(), 1e-4);
  // from below it follows the upper branch; the gap shrinks monotonically
  // with the offset, but only like a small power of it
  double prev = std::abs(m(w1 - 1e-4) - m.alpha());
  for (double h : {1e-5, 1e-6, 1e-7, 1e-8}) {
    const double gap = std::abs(m(w1 - h) - m.alpha());
    EXPECT_LT(gap, prev) << "h=" << h;
    prev = gap;
  }
}

TEST(Adaptation, OrbitHitsStableManifold) {
  const auto& m = map6();
  try {
    iterate_orbit(m, m.geometry().wi[0], 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HitStableManifold);
    EXPECT_EQ(e.index(), 0u);
  }
}

TEST(Adaptation, OrbitSignatures) {
  const auto orbit = iterate_orbit(map6(), 0.1, 400);
  const auto s = orbit_signature(orbit);
  EXPECT_EQ(s.str(), "2^1");
  EXPECT_EQ(s.period, 2u);
  const auto tonic = iterate_orbit(make_adaptation_map(period_two_params(0.08)), 0.1, 400);
  EXPECT_EQ(orbit_signature(tonic).str(), "tonic");
  EXPECT_EQ(orbit_signature(tonic, false).blocks.size(), 1u);  // one long burst without oscillations
}

TEST(Adaptation, SignatureOfCounts) {
  const auto c = to_counts({0, 2, 0, 0, 3, 1});
  const auto s = signature_of({1, 2, 3, 4, 5, 6, 7}, c, false);
  EXPECT_EQ(s.str(), "2^1 3^1.5 1^0.5");
}

TEST(Adaptation, CsvOutput) {
  OrbitRecord o{0.1, {0.1, 0.2}, {2}};
  std::ostringstream os;
  write_orbit_csv(os, o);
  EXPECT_EQ(os.str(), "k,w_k,halfRotations_k\n0,0.10000000000000001,2\n");
}

TEST(Adaptation, RefinedGrid) {
  const auto g = refined_grid(0.0, 1.0, 11, {0.55}, 1e-3);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_NE(std::find(g.begin(), g.end(), 0.55 - 1e-3), g.end());
  EXPECT_EQ(std::find(g.begin(), g.end(), 0.55), g.end());
}
