#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <string>
#include <vector>

#include "mmo/error.hpp"

namespace mmo {

using Vec2 = std::array<double, 2>;

// Superlinear nonlinearity of the membrane equation.
template <class N>
concept Nonlinearity = requires(const N& f, double v) {
  { f.value(v) } -> std::convertible_to<double>;
  { f.slope(v) } -> std::convertible_to<double>;
};

// F(v) = v^4 + c v.
struct QuarticNonlinearity {
  double c = 0.2;
  double value(double v) const {
    const double v2 = v * v;
    return v2 * v2 + c * v;
  }
  double slope(double v) const { return 4.0 * v * v * v + c; }
};

struct ModelParams {
  double a = 0.2;  // linear coefficient of the quartic: F(v) = v^4 + a v
  double eps = 0.1;
  double b = 1.0;
  double I = 0.1175;
  double vR = 0.1158;
  double gamma = 1.0;
  double d = 0.0;

  // The same quartic is sometimes written v^4 + 2 a' v; this normalizes a'.
  static double linear_coefficient_from_half(double aHalf) { return 2.0 * aHalf; }

  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::Validation, msg); };
    for (double x : {a, eps, b, I, vR, gamma, d})
      if (!std::isfinite(x)) fail("parameters must be finite");
    if (!(eps > 0)) fail("eps must be > 0");
    if (!(b > 0)) fail("b must be > 0");
    if (!(gamma > 0 && gamma <= 1)) fail("gamma must lie in (0, 1]");
    if (!(d >= 0)) fail("d must be >= 0");
  }
};

// Vector field dv/dt = F(v) - w + I, dw/dt = eps (b v - w).
template <Nonlinearity N = QuarticNonlinearity>
struct VectorField {
  N F{};
  double eps = 0.1;
  double b = 1.0;
  double I = 0.1175;

  Vec2 operator()(double v, double w) const { return {F.value(v) - w + I, eps * (b * v - w)}; }
  double v_nullcline(double v) const { return F.value(v) + I; }
  double w_nullcline(double v) const { return b * v; }
  // Row-major Jacobian.
  std::array<double, 4> jacobian(double v) const { return {F.slope(v), -1.0, eps * b, -eps}; }
};

using QuarticField = VectorField<QuarticNonlinearity>;

inline QuarticField make_field(const ModelParams& p) {
  return QuarticField{QuarticNonlinearity{p.a}, p.eps, p.b, p.I};
}

enum class Nullcline { V, W };

template <Nonlinearity N>
double nullcline_point(const VectorField<N>& f, Nullcline which, double v) {
  return which == Nullcline::V ? f.v_nullcline(v) : f.w_nullcline(v);
}

inline double nullcline_point(const ModelParams& p, Nullcline which, double v) {
  return nullcline_point(make_field(p), which, v);
}

struct SaddleEigenData {
  double mu = 0;  // stable eigenvalue is -mu
  double nu = 0;
  Vec2 eStable{};
  Vec2 eUnstable{};
  double xi = 0;
};

struct FocusEigenData {
  double re = 0;
  double im = 0;
};

struct EquilibriumSet {
  double vMinus = 0, wMinus = 0;
  double vPlus = 0, wPlus = 0;
  SaddleEigenData saddleEigen;
  FocusEigenData focusEigen;
};

namespace detail {

// Eigenvector of J = [[f1, -1], [eps b, -eps]] for real lambda; normalized,
// oriented with non-negative v component.
inline Vec2 eigenvector(double f1, double lambda) {
  Vec2 e{1.0, f1 - lambda};
  const double n = std::hypot(e[0], e[1]);
  return {e[0] / n, e[1] / n};
}

}  // namespace detail

// Roots of F(v) + I - b v bracketed on [-10, 10] by a sign scan, then bisected.
template <Nonlinearity N>
std::vector<double> equilibrium_voltages(const VectorField<N>& f) {
  auto g = [&](double v) { return f.F.value(v) + f.I - f.b * v; };
  std::vector<double> roots;
  constexpr double lo = -10.0, hi = 10.0, step = 1e-3;
  const long n = std::lround((hi - lo) / step);
  double x0 = lo, g0 = g(x0);
  for (long k = 1; k <= n; ++k) {
    const double x1 = lo + step * static_cast<double>(k);
    const double g1 = g(x1);
    if (g0 == 0.0) {
      roots.push_back(x0);
    } else if ((g0 < 0) != (g1 < 0) && g1 != 0.0) {
      double a = x0, b = x1, ga = g0;
      while (b - a > 1e-14) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double gm = g(m);
        if (gm == 0.0) { a = b = m; break; }
        if ((gm < 0) == (ga < 0)) { a = m; ga = gm; } else { b = m; }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    g0 = g1;
  }
  return roots;
}

template <Nonlinearity N>
EquilibriumSet fixed_points(const VectorField<N>& f) {
  const auto roots = equilibrium_voltages(f);
  if (roots.size() != 2)
    throw Error(ErrorKind::NoEquilibria, "expected 2 equilibria, found " + std::to_string(roots.size()));

  EquilibriumSet eq;
  eq.vMinus = roots[0];
  eq.vPlus = roots[1];
  eq.wMinus = f.w_nullcline(eq.vMinus);
  eq.wPlus = f.w_nullcline(eq.vPlus);

  for (double v : roots) {
    const auto J = f.jacobian(v);
    if (std::abs(J[0] * J[3] - J[1] * J[2]) < 1e-10)
      throw Error(ErrorKind::DegenerateEquilibrium, "|det J| < 1e-10 at v=" + std::to_string(v));
  }

  {  // focus
    const auto J = f.jacobian(eq.vMinus);
    const double tr = J[0] + J[3], det = J[0] * J[3] - J[1] * J[2];
    const double disc = tr * tr - 4.0 * det;
    if (!(det > 0 && tr > 0 && disc < 0))
      throw Error(ErrorKind::ClassificationFailed, "left equilibrium is not an unstable focus");
    eq.focusEigen = {0.5 * tr, 0.5 * std::sqrt(-disc)};
  }
  {  // saddle
    const auto J = f.jacobian(eq.vPlus);
    const double tr = J[0] + J[3], det = J[0] * J[3] - J[1] * J[2];
    if (!(det < 0)) throw Error(ErrorKind::ClassificationFailed, "right equilibrium is not a saddle");
    const double s = std::sqrt(tr * tr - 4.0 * det);
    const double lu = 0.5 * (tr + s), ls = 0.5 * (tr - s);
    auto& se = eq.saddleEigen;
    se.nu = lu;
    se.mu = -ls;
    se.eUnstable = detail::eigenvector(J[0], lu);
    se.eStable = detail::eigenvector(J[0], ls);
    se.xi = se.mu / se.nu;
  }
  return eq;
}

inline EquilibriumSet fixed_points(const ModelParams& p) {
  p.validate();
  return fixed_points(make_field(p));
}

}  // namespace mmo
