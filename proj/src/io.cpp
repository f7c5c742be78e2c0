#include "exptower/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace exptower::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool scalar(const Json& j) { return j.is_number() || j.is_boolean() || j.is_null(); }

void dump_into(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  const std::string inner(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  switch (j.type()) {
    case Json::value_t::null:
      out += "null";
      return;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case Json::value_t::string:
      out += j.dump();
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), scalar);
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        if (!flat) out += inner;
        dump_into(e, out, depth + 1);
        first = false;
      }
      out += flat ? "]" : "\n" + pad + "]";
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        out += inner + Json(key).dump() + ": ";
        dump_into(value, out, depth + 1);
        first = false;
      }
      out += "\n" + pad + "}";
      return;
    }
    default:
      throw std::invalid_argument("canonical_dump: unsupported JSON value");
  }
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double real_from_json(const Json& j) {
  if (j.is_null()) return kInf;
  if (!j.is_number()) throw LoadError("expected a number");
  return j.get<double>();
}

Json reals(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> reals_from_json(const Json& j) {
  if (!j.is_array()) throw LoadError("expected an array of numbers");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(real_from_json(e));
  return v;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw LoadError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string canonical_dump(const Json& j) {
  std::string out;
  dump_into(j, out, 0);
  out += "\n";
  return out;
}

Json to_json(Complex z) { return Json::array({number(z.real()), number(z.imag())}); }

Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw LoadError("complex numbers are stored as [re, im]");
  return {real_from_json(j[0]), real_from_json(j[1])};
}

Json to_json(const std::vector<Complex>& v) {
  Json a = Json::array();
  for (const auto& z : v) a.push_back(to_json(z));
  return a;
}

std::vector<Complex> complex_vector_from_json(const Json& j) {
  if (!j.is_array()) throw LoadError("expected an array of complex numbers");
  std::vector<Complex> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(complex_from_json(e));
  return v;
}

Json to_json(const TargetSetSpec& spec) {
  Json prims = Json::array();
  for (const auto& p : spec.primitives) {
    Json e;
    if (const auto* q = std::get_if<PointPrimitive>(&p)) {
      e = {{"type", "point"}, {"c", to_json(q->c)}};
    } else if (const auto* s = std::get_if<SegmentPrimitive>(&p)) {
      e = {{"type", "segment"}, {"from", to_json(s->from)}, {"to", to_json(s->to)}};
    } else if (const auto* d = std::get_if<DiskPrimitive>(&p)) {
      e = {{"type", "disk"}, {"center", to_json(d->center)}, {"radius", number(d->radius)}};
    } else if (const auto* r = std::get_if<RectanglePrimitive>(&p)) {
      e = {{"type", "rectangle"}, {"corner1", to_json(r->corner1)}, {"corner2", to_json(r->corner2)}};
    }
    prims.push_back(std::move(e));
  }
  return {{"primitives", std::move(prims)}};
}

TargetSetSpec target_from_json(const Json& j) {
  return guarded("target set", [&] {
    TargetSetSpec spec;
    const Json& prims = field(j, "primitives");
    if (!prims.is_array()) throw LoadError("'primitives' must be an array");
    for (const auto& e : prims) {
      const std::string type = field(e, "type").get<std::string>();
      if (type == "point") {
        spec.primitives.push_back(PointPrimitive{complex_from_json(field(e, "c"))});
      } else if (type == "segment") {
        spec.primitives.push_back(
            SegmentPrimitive{complex_from_json(field(e, "from")), complex_from_json(field(e, "to"))});
      } else if (type == "disk") {
        spec.primitives.push_back(
            DiskPrimitive{complex_from_json(field(e, "center")), real_from_json(field(e, "radius"))});
      } else if (type == "rectangle") {
        spec.primitives.push_back(
            RectanglePrimitive{complex_from_json(field(e, "corner1")), complex_from_json(field(e, "corner2"))});
      } else {
        throw LoadError("unknown primitive type '" + type + "'");
      }
    }
    return spec;
  });
}

Json to_json(const LambdaSolution& sol) {
  Json paths = Json::array();
  for (const auto& p : sol.branch_choices) {
    paths.push_back(Json(std::vector<std::int64_t>(p.indices().begin(), p.indices().end())));
  }
  return {{"lambdas", to_json(sol.lambdas)}, {"branch_choices", std::move(paths)}, {"residuals", reals(sol.residuals)}};
}

LambdaSolution solution_from_json(const Json& j) {
  return guarded("lambda solution", [&] {
    LambdaSolution sol;
    sol.lambdas = complex_vector_from_json(field(j, "lambdas"));
    for (const auto& p : field(j, "branch_choices")) {
      sol.branch_choices.emplace_back(p.get<std::vector<std::int64_t>>());
    }
    sol.residuals = reals_from_json(field(j, "residuals"));
    return sol;
  });
}

Json to_json(const TowerModel& model) {
  return {{"lambdas", to_json(model.lambdas)}, {"m", Json(model.m)},        {"b", to_json(model.b)},
          {"radii", reals(model.radii)},       {"eps", reals(model.eps)}};
}

TowerModel model_from_json(const Json& j) {
  return guarded("tower model", [&] {
    TowerModel m;
    m.lambdas = complex_vector_from_json(field(j, "lambdas"));
    m.m = field(j, "m").get<std::vector<std::int64_t>>();
    m.b = complex_vector_from_json(field(j, "b"));
    m.radii = reals_from_json(field(j, "radii"));
    m.eps = reals_from_json(field(j, "eps"));
    const std::size_t n = m.lambdas.size();
    if (m.m.size() != n || m.b.size() != n + 1 || m.radii.size() != n + 1 || m.eps.size() != n + 1) {
      throw LoadError("tower model vectors disagree with its depth");
    }
    return m;
  });
}

Json to_json(const BuildRules& rules) {
  return {{"radius_offset", number(rules.radius_offset)},
          {"eps_scale", number(rules.eps_scale)},
          {"boundary_samples", rules.boundary_samples}};
}

BuildRules rules_from_json(const Json& j) {
  return guarded("build rules", [&] {
    BuildRules r;
    r.radius_offset = real_from_json(field(j, "radius_offset"));
    r.eps_scale = real_from_json(field(j, "eps_scale"));
    r.boundary_samples = field(j, "boundary_samples").get<std::size_t>();
    return r;
  });
}

Json to_json(const TowerBuildDiagnostics& d) {
  return {{"lipschitz_estimates", reals(d.lipschitz_estimates)},
          {"gap_norms", reals(d.gap_norms)},
          {"cn_estimates", reals(d.cn_estimates)},
          {"mn_trials", Json(d.mn_trials)}};
}

TowerBuildDiagnostics diagnostics_from_json(const Json& j) {
  return guarded("build diagnostics", [&] {
    TowerBuildDiagnostics d;
    d.lipschitz_estimates = reals_from_json(field(j, "lipschitz_estimates"));
    d.gap_norms = reals_from_json(field(j, "gap_norms"));
    d.cn_estimates = reals_from_json(field(j, "cn_estimates"));
    d.mn_trials = field(j, "mn_trials").get<std::vector<int>>();
    return d;
  });
}

Json to_json(const SingularSetReport& r) {
  Json probes = Json::array();
  for (const auto& p : r.probes) {
    Json fams = Json::array();
    for (const auto& f : p.families) {
      fams.push_back({{"label", f.label},
                      {"start_level", f.start_level},
                      {"bound_from", f.bound_from},
                      {"gaps", reals(f.gaps)},
                      {"bounds", reals(f.bounds)},
                      {"cn_ratios", reals(f.cn_ratios)},
                      {"max_inverse_residual", number(f.max_inverse_residual)},
                      {"expected_divergent", f.divergent},
                      {"converged", f.converged},
                      {"flagged_divergent", f.flagged_divergent}});
    }
    probes.push_back({{"zeta", to_json(p.zeta)},
                      {"radius", number(p.radius)},
                      {"orbit_distance", number(p.orbit_distance)},
                      {"skipped", p.skipped},
                      {"notice", p.notice},
                      {"families", std::move(fams)},
                      {"roundtrip_residual", number(p.roundtrip_residual)},
                      {"pass", p.pass}});
  }
  return {{"orbit_points", to_json(r.orbit_points)},
          {"orbit_target_residual", number(r.orbit_target_residual)},
          {"invariants_ok", r.invariants_ok},
          {"invariant_problems", r.invariant_problems},
          {"probes", std::move(probes)},
          {"max_roundtrip_residual", number(r.max_roundtrip_residual)},
          {"notes", r.notes},
          {"pass", r.pass}};
}

Json to_json(const OrbitRecord& r) {
  return {{"start", to_json(r.start)},
          {"points", to_json(r.points)},
          {"status", to_string(r.status)},
          {"stop_step", r.stop_step}};
}

Json to_json(const Example2Result& r) {
  return {{"target_multiplier", to_json(r.target_multiplier)},
          {"mu1", to_json(r.mu1)},
          {"t0", to_json(r.t0)},
          {"f_at_1", to_json(r.f_at_1)},
          {"derivative_at_1", to_json(r.derivative_at_1)},
          {"multiplier_error", number(r.multiplier_error)},
          {"certified", r.certified},
          {"newton_attempts", r.attempts.size()},
          {"ok", r.ok},
          {"diagnostic", r.diagnostic}};
}

Json to_json(const Example3Result& r) {
  Json orbits = Json::array();
  for (const auto& o : r.postsingular) orbits.push_back(to_json(o));
  return {{"tolerance", number(r.tolerance)},
          {"lambdas", to_json(r.lambdas)},
          {"tower", to_json(r.tower.model)},
          {"max_deviation_from_exp", number(r.max_deviation_from_exp)},
          {"lambda_star", to_json(r.lambda_star)},
          {"f_at_0", to_json(r.f_at_0)},
          {"f_at_1", to_json(r.f_at_1)},
          {"derivative_at_1", to_json(r.derivative_at_1)},
          {"multiplier_margin", number(r.multiplier_margin)},
          {"postsingular", std::move(orbits)},
          {"ok", r.ok},
          {"diagnostic", r.diagnostic}};
}

Json to_json(const PoincareModel& m) {
  return {{"mu", to_json(m.mu)},
          {"lambda", to_json(m.lambda)},
          {"seed", m.seed.name},
          {"koenigs_radius", number(m.koenigs_radius)},
          {"degree", m.degree},
          {"koenigs_coeffs", to_json(m.koenigs_coeffs)},
          {"koenigs_residual", number(m.koenigs_residual)},
          {"reversion_residual", number(m.reversion_residual)},
          {"residual_met", m.residual_met}};
}

Json to_json(const ContractionReport& r) {
  return {{"sup_gaps", reals(r.sup_gaps)},
          {"distances", reals(r.distances)},
          {"theta_hat", number(r.theta_hat)},
          {"tail_uncertainty", number(r.tail_uncertainty)},
          {"fixed_point_residual", number(r.fixed_point_residual)},
          {"poincare_distance", number(r.poincare_distance)},
          {"contracting", r.contracting},
          {"pass", r.pass}};
}

Json to_json(const TowerArtifact& a) {
  Json j = {{"format", "exptower-artifact"},
            {"version", kArtifactVersion},
            {"target", to_json(a.target)},
            {"seed", a.seed},
            {"sequence", to_json(a.sequence.points)},
            {"solution", to_json(a.solution)},
            {"rules", to_json(a.rules)},
            {"tower", to_json(a.model)},
            {"diagnostics", to_json(a.diagnostics)}};
  if (a.certificate) j["certificate"] = *a.certificate;
  return j;
}

TowerArtifact artifact_from_json(const Json& j) {
  return guarded("artifact", [&] {
    if (!j.is_object() || j.value("format", "") != "exptower-artifact") throw LoadError("not an exptower artifact");
    if (field(j, "version").get<int>() != kArtifactVersion) throw LoadError("unsupported artifact version");
    TowerArtifact a;
    a.target = target_from_json(field(j, "target"));
    a.seed = field(j, "seed").get<std::uint64_t>();
    a.sequence.points = complex_vector_from_json(field(j, "sequence"));
    a.solution = solution_from_json(field(j, "solution"));
    a.rules = rules_from_json(field(j, "rules"));
    a.model = model_from_json(field(j, "tower"));
    a.diagnostics = diagnostics_from_json(field(j, "diagnostics"));
    if (j.contains("certificate")) a.certificate = j.at("certificate");
    if (a.model.depth() > a.solution.lambdas.size()) throw LoadError("tower deeper than its lambda solution");
    return a;
  });
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw LoadError(std::string("malformed JSON: ") + e.what());
  }
}

TowerArtifact load_artifact(const std::string& path) { return artifact_from_json(parse_json(read_file(path))); }

void save_artifact(const std::string& path, const TowerArtifact& a) { write_file(path, canonical_dump(to_json(a))); }

Rgb palette(int value, int max_iter) {
  if (value == kBoundedMarker) return {0, 0, 0};
  if (value == kUncertifiedMarker) return {255, 0, 255};
  const double t = max_iter > 0 ? std::sqrt(static_cast<double>(value) / static_cast<double>(max_iter)) : 1.0;
  const auto c = [t](double phase) {
    return static_cast<unsigned char>(std::lround(127.5 * (1.0 - std::cos(kPi * (3.0 * t + phase)))));
  };
  return {c(0.0), c(0.5), c(1.0)};
}

std::string encode_ppm(std::size_t width, std::size_t height, const std::vector<int>& values, int max_iter) {
  if (values.size() != width * height) throw std::invalid_argument("encode_ppm: size mismatch");
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + 3 * values.size());
  for (int v : values) {
    const Rgb c = palette(v, max_iter);
    out.push_back(static_cast<char>(c.r));
    out.push_back(static_cast<char>(c.g));
    out.push_back(static_cast<char>(c.b));
  }
  return out;
}

std::string report_csv(const SingularSetReport& r) {
  std::string out = "probe,family,n,gap,bound,pass\n";
  for (std::size_t p = 0; p < r.probes.size(); ++p) {
    for (const auto& f : r.probes[p].families) {
      for (std::size_t i = 0; i < f.gaps.size(); ++i) {
        const bool ok = f.divergent ? f.flagged_divergent : f.gaps[i] <= f.bounds[i];
        out += std::to_string(p) + "," + f.label + "," + std::to_string(f.start_level + i) + "," +
               format_double(f.gaps[i]) + "," + format_double(f.bounds[i]) + "," + (ok ? "1" : "0") + "\n";
      }
    }
  }
  return out;
}

std::string grid_csv(const EscapeGrid& g) {
  std::string out = "x,y,status,time\n";
  for (std::size_t j = 0; j < g.height; ++j) {
    for (std::size_t i = 0; i < g.width; ++i) {
      const Complex z = g.window.pixel_center(i, j, g.width, g.height);
      const int v = g.at(i, j);
      const char* status = v == kBoundedMarker ? "bounded" : v == kUncertifiedMarker ? "uncertified" : "escaped";
      out += format_double(z.real()) + "," + format_double(z.imag()) + "," + status + "," +
             std::to_string(v > 0 ? v : 0) + "\n";
    }
  }
  return out;
}

std::string scan_csv(const BoundednessMap& m) {
  std::string out = "re_lambda,im_lambda,escaped,time\n";
  for (std::size_t j = 0; j < m.height; ++j) {
    for (std::size_t i = 0; i < m.width; ++i) {
      const Complex l = m.window.pixel_center(i, j, m.width, m.height);
      const int v = m.at(i, j);
      out += format_double(l.real()) + "," + format_double(l.imag()) + "," + (v >= 0 ? "1" : "0") + "," +
             std::to_string(v >= 0 ? v : 0) + "\n";
    }
  }
  return out;
}

}  // namespace exptower::io
