#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "json.hpp"
#include "mmo/scan.hpp"
#include "mmo/transient.hpp"

namespace mmo::io {

using nlohmann::json;

// 17 significant digits; missing values print as an empty CSV field.
inline std::string num(double x) {
  if (std::isnan(x)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const ModelParams& p) {
  return {{"a", p.a}, {"eps", p.eps}, {"b", p.b}, {"I", p.I}, {"vR", p.vR}, {"gamma", p.gamma}, {"d", p.d}};
}

template <Nonlinearity N>
json to_json(const EquilibriumSet& e, const VectorField<N>& f) {
  auto residual = [&](double v, double w) {
    const auto r = f(v, w);
    return std::max(std::abs(r[0]), std::abs(r[1]));
  };
  return {{"focus", {{"v", e.vMinus}, {"w", e.wMinus}, {"residual", residual(e.vMinus, e.wMinus)},
                     {"re", e.focusEigen.re}, {"im", e.focusEigen.im}}},
          {"saddle", {{"v", e.vPlus}, {"w", e.wPlus}, {"residual", residual(e.vPlus, e.wPlus)},
                      {"mu", e.saddleEigen.mu}, {"nu", e.saddleEigen.nu}, {"xi", e.saddleEigen.xi},
                      {"eStable", {e.saddleEigen.eStable[0], e.saddleEigen.eStable[1]}},
                      {"eUnstable", {e.saddleEigen.eUnstable[0], e.saddleEigen.eUnstable[1]}}}}};
}

inline json to_json(const ResetLineGeometry& g) {
  return {{"vR", g.vR},       {"wi", g.wi},           {"p", g.p},
          {"p1", g.p1},       {"wStar", g.wStar},     {"wStarStar", jnum(g.wStarStar)},
          {"wLimMinus", g.wLimMinus}, {"wLimPlus", g.wLimPlus}, {"gamma", g.gamma},
          {"d", g.d},         {"alpha", g.alpha},     {"beta", g.beta}};
}

inline json to_json(const RegimeLabel& l) {
  const auto& c = l.conditions;
  const auto& w = l.witnesses;
  return {{"region", to_string(l.region)},
          {"conditions",
           {{"C1", c.C1}, {"C2", c.C2}, {"C2prime", c.C2prime}, {"C3", c.C3}, {"C4", c.C4}, {"C4prime", c.C4prime}}},
          {"witnesses",
           {{"beta", w.beta}, {"alpha", w.alpha}, {"w1", jnum(w.w1)}, {"w2", jnum(w.w2)}, {"wStar", w.wStar},
            {"phiAlpha", jnum(w.phiAlpha)}, {"phiBeta", jnum(w.phiBeta)}, {"discontinuities", w.discontinuities}}},
          {"continuousLift", l.continuousLift},
          {"shiftPrecondition", l.shiftPrecondition},
          {"multiDiscontinuityBounds", l.multiDiscontinuityBounds}};
}

inline json to_json(const RotationResult& r) {
  json j;
  j["kind"] = r.kind == RotationKind::Number ? "number" : "interval";
  if (r.kind == RotationKind::Number) {
    j["rho"] = jnum(r.rho);
    if (r.rational) {
      j["p"] = r.rational->p;
      j["q"] = r.rational->q;
    }
  } else {
    j["a"] = jnum(r.a);
    j["b"] = jnum(r.b);
    if (r.aRational) j["aRational"] = r.aRational->str();
    if (r.bRational) j["bRational"] = r.bRational->str();
  }
  j["N"] = r.iterations;
  j["errorBound"] = r.errorBound;
  return j;
}

inline json to_json(const Signature& s) {
  json blocks = json::array();
  for (const auto& b : s.blocks) blocks.push_back({{"spikes", b.spikes}, {"oscillations", b.oscillations.value()}});
  json j{{"signature", s.str()}, {"blocks", blocks}};
  if (s.period) j["period"] = *s.period;
  return j;
}

inline json to_json(const PointResult& r) {
  json j = to_json(r.label);
  j["d"] = r.d;
  j["gamma"] = r.gamma;
  if (r.rotation) {
    json rot = to_json(*r.rotation);
    j.update(rot);
  }
  if (r.estimate) j["rhoAtW0"] = jnum(r.estimate->rho);
  if (!r.signature.empty()) j["signature"] = r.signature;
  if (!r.status.empty()) j["status"] = r.status;
  return j;
}

inline json to_json(const TransientDesign& t) {
  json levels = json::array();
  for (const auto& [lo, hi] : t.levels) levels.push_back({lo, hi});
  return {{"J", {t.lo, t.hi}}, {"verified", t.verified}, {"levels", levels}};
}

// ---------------------------------------------------------------- CSV

inline void write_points_csv(std::ostream& os, const std::vector<PointResult>& rows) {
  os << "d,gamma,region,C1,C2,C2prime,C3,C4,C4prime,kind,rho,a,b,p,q,a_p,a_q,b_p,b_q,N,errorBound,signature,status\n";
  for (const auto& r : rows) {
    const auto& c = r.label.conditions;
    os << num(r.d) << ',' << num(r.gamma) << ',' << to_string(r.label.region) << ',' << c.C1 << ',' << c.C2 << ','
       << c.C2prime << ',' << c.C3 << ',' << c.C4 << ',' << c.C4prime << ',';
    if (r.rotation) {
      const auto& x = *r.rotation;
      const bool number = x.kind == RotationKind::Number;
      auto rat = [](const std::optional<Rational>& q) {
        return q ? std::to_string(q->p) + ',' + std::to_string(q->q) : std::string(",");
      };
      os << (number ? "number" : "interval") << ',' << (number ? num(x.rho) : "") << ',' << num(x.a) << ','
         << num(x.b) << ',' << (number ? rat(x.rational) : ",") << ',' << rat(x.aRational) << ','
         << rat(x.bRational) << ',' << x.iterations << ',' << num(x.errorBound) << ',';
    } else {
      os << ",,,,,,,,,,,,";
    }
    os << r.signature << ',' << '"' << r.status << '"' << '\n';
  }
}

inline void write_plane_csv(std::ostream& os, const PlaneScan& s) {
  os << "d,gamma,region,rho,p,q,phiBeta_minus_w1,phiAlpha_minus_w1,phiAlpha_minus_phiBeta,alpha_minus_wStar,"
        "alpha_minus_w2,phiBeta_minus_beta,status\n";
  for (const auto& c : s.cells) {
    const auto& r = c.point;
    os << num(r.d) << ',' << num(r.gamma) << ',' << to_string(r.label.region) << ',';
    if (r.estimate) {
      os << num(r.estimate->rho) << ',';
      if (r.estimate->rational) os << r.estimate->rational->p << ',' << r.estimate->rational->q << ',';
      else os << ",,";
    } else {
      os << ",,,";
    }
    os << num(c.phiBetaMinusW1) << ',' << num(c.phiAlphaMinusW1) << ',' << num(c.phiAlphaMinusPhiBeta) << ','
       << num(c.alphaMinusWStar) << ',' << num(c.alphaMinusW2) << ',' << num(c.phiBetaMinusBeta) << ',' << '"'
       << r.status << '"' << '\n';
  }
}

inline void write_boundaries_csv(std::ostream& os, const std::vector<Boundary>& bs) {
  os << "boundary,d0,gamma0,d1,gamma1\n";
  for (const auto& b : bs)
    for (const auto& s : b.segments)
      os << b.name << ',' << num(s.x0) << ',' << num(s.y0) << ',' << num(s.x1) << ',' << num(s.y1) << '\n';
}

}  // namespace mmo::io
