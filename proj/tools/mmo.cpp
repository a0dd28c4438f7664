// Command-line front end: single-point analyses and parameter scans.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "mmo/io.hpp"

using namespace mmo;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kValidation = 2, kPointFailures = 3, kHard = 4;

// Keys shared by the config file and the flags.
const char* const kKeys[] = {"a",     "a-half", "eps",   "b",      "I",       "vR",
                             "gamma", "d",      "scan-d", "scan-gamma", "w0", "iters",
                             "samples", "qmax", "out",   "format", "workers", "signature-target"};

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw Error(ErrorKind::Validation, "cannot open '" + path + "' for writing");
    os = &file;
  }
};

void emit_json(const Config& c, const json& j) {
  Output out(c.out);
  *out.os << j.dump(2) << '\n';
}

AdaptationMap<> base_map(const Config& c) { return make_adaptation_map(c.params); }

int cmd_equilibria(const Config& c) {
  const auto f = make_field(c.params);
  const auto e = fixed_points(f);
  if (c.format == "json") {
    emit_json(c, io::to_json(e, f));
    return kOk;
  }
  const json j = io::to_json(e, f);
  Output out(c.out);
  *out.os << "kind,v,w,residual\n";
  for (const char* k : {"focus", "saddle"})
    *out.os << k << ',' << io::num(j[k]["v"].get<double>()) << ',' << io::num(j[k]["w"].get<double>()) << ','
            << io::num(j[k]["residual"].get<double>()) << '\n';
  return kOk;
}

int cmd_manifold(const Config& c) {
  c.params.validate();
  ManifoldTracer<> tracer(make_field(c.params));
  std::vector<ManifoldTrace> traces;
  for (auto b : {ManifoldBranch::StablePlus, ManifoldBranch::StableMinus})
    traces.push_back(tracer.trace_stable(b));
  for (auto b : {ManifoldBranch::UnstablePlus, ManifoldBranch::UnstableMinus})
    traces.push_back(tracer.trace_unstable(b));
  if (c.format == "json") {
    json j;
    j["geometry"] = io::to_json(tracer.geometry(c.params.vR, c.params.gamma, c.params.d));
    for (const auto& t : traces) {
      json pts = json::array();
      for (const auto& p : t.polyline) pts.push_back({p[0], p[1]});
      j["branches"][to_string(t.branch)] = {{"terminal", to_string(t.terminal)},
                                           {"wLim", t.wLim ? json(*t.wLim) : json(nullptr)},
                                           {"arcLength", t.arcLength},
                                           {"polyline", pts}};
    }
    emit_json(c, j);
    return kOk;
  }
  Output out(c.out);
  write_manifold_csv(*out.os, traces);
  return kOk;
}

int cmd_phi(const Config& c) {
  const auto map = base_map(c);
  if (c.w0) {
    const double w = *c.w0;
    if (c.dumpTrajectory) {
      Trajectory tr;
      map.flow().run(c.params.vR, w, &tr);
      Output out(c.out);
      write_trajectory_csv(*out.os, tr);
      return kOk;
    }
    const auto r = map.phi(w);
    const double dphi = map.derivative(w);
    if (c.format == "json") {
      emit_json(c, {{"w", w},
                    {"phi", r.value},
                    {"halfRotations", r.halfRotations},
                    {"oscillations", HalfInteger::from_halves(r.halfRotations).value()},
                    {"derivative", dphi}});
    } else {
      Output out(c.out);
      *out.os << "w,phi,halfRotations,derivative\n"
              << io::num(w) << ',' << io::num(r.value) << ',' << r.halfRotations << ',' << io::num(dphi) << '\n';
    }
    return kOk;
  }
  const auto s = sample_map(map, c.samples);
  if (c.format == "json") {
    emit_json(c, {{"geometry", io::to_json(s.geometry)},
                  {"w", s.grid},
                  {"phi", s.values},
                  {"halfRotations", s.halfRotations},
                  {"monotonicityViolations", s.monotonicityViolations},
                  {"rangeViolations", s.rangeViolations}});
  } else {
    Output out(c.out);
    write_map_csv(*out.os, s);
  }
  return kOk;
}

int cmd_orbit(const Config& c) {
  const auto map = base_map(c);
  const double w0 = c.w0.value_or(0.5 * (map.beta() + map.alpha()));
  const auto orbit = iterate_orbit(map, w0, c.iters);
  if (c.dumpTrajectory) {
    Output out(c.out);
    *out.os << "t,v,w\n";
    double t0 = 0;
    char buf[96];
    for (std::size_t k = 0; k < orbit.halfRotations.size(); ++k) {
      Trajectory tr;
      map.flow().run(c.params.vR, orbit.iterates[k], &tr);
      for (const auto& s : tr.samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t0 + s.t, s.v, s.w);
        *out.os << buf;
      }
      if (!tr.samples.empty()) t0 += tr.samples.back().t;
    }
    return kOk;
  }
  if (c.format == "json") {
    json j = io::to_json(orbit_signature(orbit));
    j["w0"] = w0;
    j["iterates"] = orbit.iterates;
    j["halfRotations"] = orbit.halfRotations;
    emit_json(c, j);
  } else {
    Output out(c.out);
    write_orbit_csv(*out.os, orbit);
  }
  return kOk;
}

PointOptions point_options(const Config& c) {
  PointOptions o;
  o.iters = c.iters;
  o.samples = c.samples;
  o.qMax = c.qMax;
  o.w0 = c.w0.value_or(0.0);
  return o;
}

int cmd_rotation(const Config& c) {
  const auto map = base_map(c);
  const auto r = analyze_point(map, c.params.gamma, c.params.d, point_options(c));
  if (c.format == "json") {
    emit_json(c, io::to_json(r));
  } else {
    Output out(c.out);
    io::write_points_csv(*out.os, {r});
  }
  return r.failed ? kPointFailures : kOk;
}

int cmd_staircase(const Config& c) {
  if (!c.scanD) throw Error(ErrorKind::Validation, "staircase needs --scan-d lo:hi:n");
  const auto map = base_map(c);
  ScanOptions o;
  o.point = point_options(c);
  o.workers = c.workers;
  const auto rows = staircase_scan(map, c.params.gamma, *c.scanD, o);
  if (c.format == "json") {
    json j = json::array();
    for (const auto& r : rows) j.push_back(io::to_json(r));
    emit_json(c, j);
  } else {
    Output out(c.out);
    io::write_points_csv(*out.os, rows);
  }
  const bool failures = std::any_of(rows.begin(), rows.end(), [](const PointResult& r) { return r.failed; });
  return failures ? kPointFailures : kOk;
}

int cmd_plane(const Config& c) {
  if (!c.scanD || !c.scanGamma) throw Error(ErrorKind::Validation, "plane needs --scan-d and --scan-gamma");
  const auto map = base_map(c);
  ScanOptions o;
  o.point = point_options(c);
  o.workers = c.workers;
  const auto s = plane_scan(map, *c.scanD, *c.scanGamma, o);
  const auto bounds = region_boundaries(s);
  if (c.format == "json") {
    json cells = json::array();
    for (const auto& cell : s.cells) cells.push_back(io::to_json(cell.point));
    json bj;
    for (const auto& b : bounds) {
      json segs = json::array();
      for (const auto& g : b.segments) segs.push_back({g.x0, g.y0, g.x1, g.y1});
      bj[b.name] = segs;
    }
    emit_json(c, {{"cells", cells}, {"boundaries", bj}});
  } else {
    {
      Output out(c.out);
      io::write_plane_csv(*out.os, s);
    }
    if (c.out.empty()) {
      std::cout << '\n';
      io::write_boundaries_csv(std::cout, bounds);
    } else {
      Output out(c.out + ".boundaries.csv");
      io::write_boundaries_csv(*out.os, bounds);
    }
  }
  const bool failures =
      std::any_of(s.cells.begin(), s.cells.end(), [](const PlaneCell& x) { return x.point.failed; });
  return failures ? kPointFailures : kOk;
}

int cmd_signature_from_rho(const Config& c, const std::string& rho) {
  const auto slash = rho.find('/');
  if (slash == std::string::npos) throw Error(ErrorKind::Validation, "expected p/q, got '" + rho + "'");
  long p = 0, q = 0;
  try {
    p = std::stol(rho.substr(0, slash));
    q = std::stol(rho.substr(slash + 1));
  } catch (const std::exception&) {
    throw Error(ErrorKind::Validation, "expected p/q, got '" + rho + "'");
  }
  const auto s = signature_from_rho(p, q);
  if (c.format == "json") {
    json j = io::to_json(s);
    j["p"] = p;
    j["q"] = q;
    emit_json(c, j);
  } else {
    Output out(c.out);
    *out.os << "p,q,signature\n" << p << ',' << q << ',' << s.str() << '\n';
  }
  return kOk;
}

std::vector<HalfInteger> parse_target(const std::string& list) {
  std::vector<HalfInteger> t;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    HalfInteger h;
    if (!parse_half_integer(detail::trim(item), h))
      throw Error(ErrorKind::Validation, "bad count '" + item + "' in signature target");
    t.push_back(h);
  }
  if (t.empty()) throw Error(ErrorKind::Validation, "empty signature target");
  return t;
}

int cmd_transient(const Config& c) {
  const auto target = parse_target(c.signatureTarget);
  const auto map = base_map(c);
  const auto design = design_interval(map, target);
  json j = io::to_json(design);
  json s = json::array();
  for (auto h : accessible_counts(map.geometry())) s.push_back(h.value());
  j["S"] = s;
  emit_json(c, j);
  return kOk;
}

int cmd_analyze(const Config& c) {
  c.params.validate();
  json j;
  json errors = json::array();
  auto attempt = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      errors.push_back({{"stage", what}, {"kind", std::string(to_string(e.kind()))}, {"message", e.what()}});
    }
  };
  j["params"] = io::to_json(c.params);
  const auto f = make_field(c.params);
  attempt("equilibria", [&] { j["equilibria"] = io::to_json(fixed_points(f), f); });
  std::optional<AdaptationMap<>> map;
  attempt("geometry", [&] {
    map.emplace(base_map(c));
    j["geometry"] = io::to_json(map->geometry());
  });
  if (map) {
    const auto po = point_options(c);
    attempt("rotation", [&] {
      const auto r = analyze_point(*map, c.params.gamma, c.params.d, po);
      j["regime"] = io::to_json(r.label);
      if (r.rotation) j["rotation"] = io::to_json(*r.rotation);
      if (r.failed) throw Error(ErrorKind::ConditionViolated, r.status);
      if (!r.status.empty()) j["regimeStatus"] = r.status;
      if (r.label.conditions.C4) {
        attempt("period2", [&] {
          const auto p2 = detect_period2(*map, r.label);
          j["period2"] = {{"precondition", p2.preconditionHolds}, {"found", p2.found}};
          if (p2.found) j["period2"].update({{"w", p2.w}, {"partner", p2.partner}, {"residual", p2.residual}});
        });
      }
      if (r.label.lift_defined()) {
        attempt("fixedPoints", [&] {
          const auto fa = fixed_point_regime(*map, r.label);
          j["fixedPoints"] = {{"regime", to_string(fa.regime)}, {"left", fa.left}, {"right", fa.right}};
        });
      }
    });
    attempt("signature", [&] {
      const auto orbit = iterate_orbit(*map, po.w0, c.iters);
      j["signature"] = io::to_json(orbit_signature(orbit));
    });
  }
  j["errors"] = errors;
  emit_json(c, j);
  return errors.empty() ? kOk : kPointFailures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive quartic integrate-and-fire: adaptation maps, rotation numbers and MMO signatures"};
  app.require_subcommand(1);
  app.fallthrough();

  std::map<std::string, std::string> flags;
  for (const char* k : kKeys) app.add_option(std::string("--") + k, flags[k]);
  std::string configPath;
  bool dump = false;
  app.add_option("--config", configPath, "key=value file; flags override it");
  app.add_flag("--dump-trajectory", dump, "write t,v,w samples instead of the summary");

  const char* subs[][2] = {
      {"equilibria", "focus and saddle with eigen-data"},
      {"manifold", "stable and unstable manifold polylines"},
      {"phi", "adaptation map at --w0, or sampled over [beta, alpha]"},
      {"orbit", "orbit of the adaptation map from --w0"},
      {"rotation", "regime and rotation number / interval at one (d, gamma)"},
      {"staircase", "rotation numbers over --scan-d"},
      {"plane", "regions and rotation numbers over --scan-d x --scan-gamma"},
      {"signature-from-rho", "periodic signature for rotation number p/q"},
      {"transient-design", "initial conditions for --signature-target"},
      {"analyze", "full report for one parameter set"},
  };
  std::map<std::string, CLI::App*> cmd;
  for (const auto& s : subs) cmd[s[0]] = app.add_subcommand(s[0], s[1]);
  std::string rho;
  cmd["signature-from-rho"]->add_option("rho", rho, "p/q")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  Config c;
  try {
    if (!configPath.empty()) {
      std::ifstream is(configPath);
      if (!is) throw Error(ErrorKind::Validation, "cannot read config '" + configPath + "'");
      load_config(is, c);
    }
    for (const char* k : kKeys)
      if (app.count(std::string("--") + k) > 0) set_key(c, k, flags[k]);
    if (dump) c.dumpTrajectory = true;
    c.validate();

    if (*cmd["equilibria"]) return cmd_equilibria(c);
    if (*cmd["manifold"]) return cmd_manifold(c);
    if (*cmd["phi"]) return cmd_phi(c);
    if (*cmd["orbit"]) return cmd_orbit(c);
    if (*cmd["rotation"]) return cmd_rotation(c);
    if (*cmd["staircase"]) return cmd_staircase(c);
    if (*cmd["plane"]) return cmd_plane(c);
    if (*cmd["signature-from-rho"]) return cmd_signature_from_rho(c, rho);
    if (*cmd["transient-design"]) return cmd_transient(c);
    if (*cmd["analyze"]) return cmd_analyze(c);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::Validation || e.kind() == ErrorKind::InvalidRational ? kValidation : kHard;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kHard;
  }
  return kHard;
}
