#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mmo/config.hpp"
#include "mmo/half_integer.hpp"
#include "mmo/io.hpp"
#include "mmo/model.hpp"

using namespace mmo;

namespace {

// Independent oracle: bisection of v^4 + (a - b) v + I on a hand-picked bracket.
double quartic_root(double a, double b, double I, double lo, double hi) {
  auto g = [&](double v) { return v * v * v * v + (a - b) * v + I; };
  for (int k = 0; k < 200; ++k) {
    const double m = 0.5 * (lo + hi);
    if ((g(m) < 0) == (g(lo) < 0)) lo = m;
    else hi = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Equilibria, MatchBisectionOracle) {
  ModelParams p;  // a=0.2, eps=0.1, b=1, I=0.1175, vR=0.1158
  const auto eq = fixed_points(p);
  // g = v^4 - 0.8 v + 0.1175 changes sign on [0, 0.5] and [0.5, 1]
  EXPECT_NEAR(eq.vMinus, quartic_root(0.2, 1.0, 0.1175, 0.0, 0.5), 1e-12);
  EXPECT_NEAR(eq.vPlus, quartic_root(0.2, 1.0, 0.1175, 0.5, 1.0), 1e-12);
  EXPECT_LT(eq.vMinus, eq.vPlus);
  const auto f = make_field(p);
  for (double v : {eq.vMinus, eq.vPlus}) {
    const auto r = f(v, f.w_nullcline(v));
    EXPECT_LT(std::abs(r[0]), 1e-12);
    EXPECT_LT(std::abs(r[1]), 1e-12);
  }
}

TEST(Equilibria, Classification) {
  const auto eq = fixed_points(ModelParams{});
  EXPECT_GT(eq.focusEigen.re, 0.0);
  EXPECT_GT(eq.focusEigen.im, 0.0);
  const auto& s = eq.saddleEigen;
  EXPECT_GT(s.mu, 0.0);
  EXPECT_GT(s.nu, 0.0);
  EXPECT_DOUBLE_EQ(s.xi, s.mu / s.nu);
  // eigenvectors satisfy J e = lambda e
  const auto J = make_field(ModelParams{}).jacobian(eq.vPlus);
  auto check = [&](const Vec2& e, double lambda) {
    EXPECT_NEAR(J[0] * e[0] + J[1] * e[1], lambda * e[0], 1e-12);
    EXPECT_NEAR(J[2] * e[0] + J[3] * e[1], lambda * e[1], 1e-12);
  };
  check(s.eUnstable, s.nu);
  check(s.eStable, -s.mu);
}

TEST(Equilibria, NoneForLargeCurrent) {
  ModelParams p;
  p.I = 1.0;
  try {
    fixed_points(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoEquilibria);
  }
}

TEST(Model, JacobianMatchesFiniteDifferences) {
  const auto f = make_field(ModelParams{});
  const double v = 0.37, w = 0.2, h = 1e-6;
  const auto J = f.jacobian(v);
  const auto dv = f(v + h, w), dvm = f(v - h, w);
  const auto dw = f(v, w + h), dwm = f(v, w - h);
  EXPECT_NEAR(J[0], (dv[0] - dvm[0]) / (2 * h), 1e-8);
  EXPECT_NEAR(J[1], (dw[0] - dwm[0]) / (2 * h), 1e-8);
  EXPECT_NEAR(J[2], (dv[1] - dvm[1]) / (2 * h), 1e-8);
  EXPECT_NEAR(J[3], (dw[1] - dwm[1]) / (2 * h), 1e-8);
}

TEST(Model, Nullclines) {
  ModelParams p;
  EXPECT_DOUBLE_EQ(nullcline_point(p, Nullcline::V, 0.5), 0.0625 + 0.1 + 0.1175);
  EXPECT_DOUBLE_EQ(nullcline_point(p, Nullcline::W, 0.5), 0.5);
}

TEST(Model, Validation) {
  auto bad = [](auto mutate) {
    ModelParams p;
    mutate(p);
    try {
      p.validate();
      return false;
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Validation;
    }
  };
  EXPECT_TRUE(bad([](ModelParams& p) { p.eps = 0; }));
  EXPECT_TRUE(bad([](ModelParams& p) { p.b = -1; }));
  EXPECT_TRUE(bad([](ModelParams& p) { p.gamma = 0; }));
  EXPECT_TRUE(bad([](ModelParams& p) { p.gamma = 1.5; }));
  EXPECT_TRUE(bad([](ModelParams& p) { p.d = -0.1; }));
  EXPECT_TRUE(bad([](ModelParams& p) { p.I = NAN; }));
  EXPECT_FALSE(bad([](ModelParams&) {}));
}

TEST(HalfInteger, ParseAndPrint) {
  HalfInteger h;
  ASSERT_TRUE(parse_half_integer("1.5", h));
  EXPECT_EQ(h.halves(), 3);
  EXPECT_EQ(h.str(), "1.5");
  ASSERT_TRUE(parse_half_integer("2", h));
  EXPECT_TRUE(h.is_whole());
  EXPECT_EQ(h.str(), "2");
  EXPECT_FALSE(parse_half_integer("1.25", h));
  EXPECT_FALSE(parse_half_integer("x", h));
  EXPECT_LT(HalfInteger::from_halves(1), HalfInteger::from_whole(1));
}

TEST(Config, FileAndHalfCoefficient) {
  std::istringstream is(
      "# period-two point\n"
      "a-half = 0.1\n"
      "vR=0.1   # reset\n"
      "gamma=0.05\n"
      "d=0.087\n"
      "scan-d = 0.08:0.092:200\n"
      "workers=3\n");
  Config c;
  load_config(is, c);
  EXPECT_DOUBLE_EQ(c.params.a, 0.2);
  EXPECT_DOUBLE_EQ(c.params.vR, 0.1);
  ASSERT_TRUE(c.scanD);
  EXPECT_EQ(c.scanD->n, 200u);
  EXPECT_DOUBLE_EQ(c.scanD->at(0), 0.08);
  EXPECT_DOUBLE_EQ(c.scanD->at(199), 0.092);
  EXPECT_EQ(c.workers, 3u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, Rejections) {
  Config c;
  EXPECT_THROW(set_key(c, "nope", "1"), Error);
  EXPECT_THROW(set_key(c, "eps", "abc"), Error);
  EXPECT_THROW(parse_range("scan-d", "0.1:0.2:1"), Error);
  EXPECT_THROW(parse_range("scan-d", "0.2:0.1:5"), Error);
  EXPECT_THROW(parse_range("scan-d", "0.2:0.1"), Error);
  std::istringstream is("eps\n");
  EXPECT_THROW(load_config(is, c), Error);
}

TEST(Io, SeventeenDigits) {
  EXPECT_EQ(io::num(0.1), "0.10000000000000001");
  EXPECT_EQ(io::num(1.0), "1");
  EXPECT_EQ(io::num(NAN), "");
}
