#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "mmo/adaptation.hpp"

namespace mmo {

// A continuity piece strictly between two consecutive intersections inside
// [beta, alpha] (split at w*), with its small-oscillation count.
struct CountPiece {
  double lo = 0, hi = 0;
  HalfInteger count;
  bool increasing = true;
};

inline std::vector<CountPiece> count_pieces(const ResetLineGeometry& g) {
  std::vector<double> inside;
  for (double w : g.wi)
    if (w >= g.beta && w <= g.alpha) inside.push_back(w);
  if (inside.size() < 2)
    throw Error(ErrorKind::InsufficientIntersections,
                std::to_string(inside.size()) + " intersection(s) in [beta, alpha], need 2");
  std::vector<CountPiece> out;
  for (std::size_t k = 0; k + 1 < inside.size(); ++k) {
    const double a = inside[k], b = inside[k + 1];
    auto add = [&](double lo, double hi) {
      const double mid = 0.5 * (lo + hi);
      out.push_back({lo, hi, oscillation_count(g, mid), mid < g.wStar});
    };
    if (g.wStar > a && g.wStar < b) {
      add(a, g.wStar);
      add(g.wStar, b);
    } else {
      add(a, b);
    }
  }
  return out;
}

inline std::vector<HalfInteger> accessible_counts(const ResetLineGeometry& g) {
  std::vector<HalfInteger> s;
  for (const auto& p : count_pieces(g)) s.push_back(p.count);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

struct TransientDesign {
  double lo = 0, hi = 0;                            // J_1
  std::vector<std::pair<double, double>> levels;  // J_1 ... J_n
  bool verified = false;
};

namespace detail {

// w in [lo, hi] with Phi(w) = y on a monotone piece; clipped to the ends.
template <class Map>
double piece_inverse(const Map& phi, const CountPiece& pc, double lo, double hi, double y, double tol) {
  double a = lo, b = hi;
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double m = 0.5 * (a + b);
    const bool below = phi(m) < y;
    if (below == pc.increasing) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

template <Nonlinearity N>
std::vector<HalfInteger> simulate_counts(const AdaptationMap<N>& map, double w0, std::size_t n) {
  return to_counts(iterate_orbit(map, w0, n).halfRotations);
}

// Interval of initial conditions whose first n spikes are followed by the
// target counts, built from nested preimages on the monotone pieces.
template <Nonlinearity N>
TransientDesign design_interval(const AdaptationMap<N>& map, const std::vector<HalfInteger>& target,
                                double tol = 1e-13) {
  if (target.empty()) throw Error(ErrorKind::Validation, "empty target");
  if (target.size() > 200) throw Error(ErrorKind::Validation, "target longer than the depth cap (200)");
  const auto pieces = count_pieces(map.geometry());
  auto piece_for = [&](HalfInteger c) -> const CountPiece& {
    for (const auto& p : pieces)
      if (p.count == c) return p;
    throw Error(ErrorKind::Validation, "count " + c.str() + " is not accessible");
  };
  for (auto c : target) piece_for(c);

  const std::size_t n = target.size();
  std::vector<std::pair<double, double>> J(n);
  const auto& last = piece_for(target[n - 1]);
  J[n - 1] = {last.lo, last.hi};
  for (std::size_t k = n - 1; k-- > 0;) {
    const auto& pc = piece_for(target[k]);
    // stay clear of the stable-manifold points bounding the piece
    const double margin = std::max(tol, 1e-12 * std::max(1.0, std::abs(pc.hi)));
    const double lo = pc.lo + margin, hi = pc.hi - margin;
    const double ylo = map(pc.increasing ? lo : hi), yhi = map(pc.increasing ? hi : lo);
    const double c = std::max(J[k + 1].first, ylo), e = std::min(J[k + 1].second, yhi);
    if (!(c < e)) throw Error(ErrorKind::EmptyPreimage, "empty preimage at depth " + std::to_string(k + 1), k + 1);
    double a = detail::piece_inverse(map, pc, lo, hi, c, tol);
    double b = detail::piece_inverse(map, pc, lo, hi, e, tol);
    if (a > b) std::swap(a, b);
    if (c == ylo) (pc.increasing ? a : b) = pc.increasing ? lo : hi;
    if (e == yhi) (pc.increasing ? b : a) = pc.increasing ? hi : lo;
    if (b - a < tol)
      throw Error(ErrorKind::WidthUnderflow, "interval narrower than tolerance; achieved prefix " +
                                                 std::to_string(n - 1 - k), n - 1 - k);
    J[k] = {a, b};
  }

  TransientDesign d;
  d.levels = J;
  d.lo = J[0].first;
  d.hi = J[0].second;
  const double width = d.hi - d.lo;
  d.verified = true;
  for (double w0 : {0.5 * (d.lo + d.hi), d.lo + 0.1 * width, d.hi - 0.1 * width}) {
    try {
      if (simulate_counts(map, w0, n) != target) d.verified = false;
    } catch (const Error&) {
      d.verified = false;
    }
  }
  return d;
}

}  // namespace mmo
