#include "exptower/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "exptower/dynamics.hpp"
#include "exptower/inverse_branches.hpp"
#include "exptower/io.hpp"
#include "exptower/poincare.hpp"
#include "exptower/target_set.hpp"
#include "exptower/tower.hpp"

namespace exptower::cli {

namespace {

using io::Json;

constexpr std::size_t kMaxResolution = 16384;

class Failure : public std::runtime_error {
 public:
  Failure(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

std::vector<double> split_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Failure(kUsage, std::string("bad ") + what + " '" + text + "'");
    }
  }
  return out;
}

Complex parse_complex(const std::string& text) {
  const auto v = split_numbers(text, "complex number");
  if (v.size() == 1) return {v[0], 0.0};
  if (v.size() == 2) return {v[0], v[1]};
  throw Failure(kUsage, "complex numbers are written re or re,im; got '" + text + "'");
}

Window parse_window(const std::string& text) {
  const auto v = split_numbers(text, "window");
  if (v.size() != 4) throw Failure(kUsage, "--window expects x0,y0,x1,y1");
  if (!(v[0] < v[2] && v[1] < v[3])) throw Failure(kUsage, "--window needs x0 < x1 and y0 < y1");
  return {v[0], v[1], v[2], v[3]};
}

std::pair<std::size_t, std::size_t> parse_resolution(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw Failure(kUsage, "--res expects WxH");
  std::size_t w = 0, h = 0;
  try {
    std::size_t used = 0;
    w = std::stoul(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    h = std::stoul(text.substr(x + 1), &used);
    if (used != text.size() - x - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw Failure(kUsage, "--res expects WxH; got '" + text + "'");
  }
  if (w < 1 || h < 1 || w > kMaxResolution || h > kMaxResolution) {
    throw Failure(kUsage, "--res must lie between 1x1 and 16384x16384");
  }
  return {w, h};
}

io::TowerArtifact load(const std::string& path) {
  try {
    return io::load_artifact(path);
  } catch (const io::LoadError& e) {
    throw Failure(kLoadFailed, e.what());
  }
}

void write_or_fail(const std::string& path, const std::string& contents) {
  try {
    io::write_file(path, contents);
  } catch (const std::exception& e) {
    throw Failure(kLoadFailed, e.what());
  }
}

void emit(std::ostream& out, const Json& j, const std::string& path) {
  const std::string text = io::canonical_dump(j);
  if (!path.empty()) write_or_fail(path, text);
  out << text;
}

// Options shared by the commands that iterate a map.
struct MapSource {
  std::string artifact;
  std::string lambda;

  void attach(CLI::App* cmd) {
    auto* a = cmd->add_option("--artifact", artifact, "Iterate F_0 of this tower artifact");
    auto* l = cmd->add_option("--lambda", lambda, "Iterate lambda e^z instead (re or re,im); default 1");
    a->excludes(l);
  }

  IterableMap resolve() const {
    if (!artifact.empty()) return tower_map(load(artifact).model);
    return exponential_map(lambda.empty() ? Complex{1.0, 0.0} : parse_complex(lambda));
  }
};

struct ConstructArgs {
  std::string spec;
  std::size_t depth = 6;
  std::uint64_t seed = 0;
  std::string out;
  double disk_radius = 0.0;
  double tolerance = 0.0;
  std::size_t samples = 4096;
};

int cmd_construct(const ConstructArgs& a, std::ostream& out) {
  io::TowerArtifact art;
  std::string text;
  try {
    text = io::read_file(a.spec);
  } catch (const io::LoadError& e) {
    throw Failure(kLoadFailed, e.what());
  }
  try {
    art.target = io::target_from_json(io::parse_json(text));
    art.target.validate();
  } catch (const io::LoadError& e) {
    throw Failure(kInvalidSpec, e.what());
  } catch (const ValidationError& e) {
    throw Failure(kInvalidSpec, e.what());
  }
  art.seed = a.seed;
  art.sequence = generate_dense_sequence(art.target, a.depth, a.seed);
  try {
    art.solution = solve_lambda_sequence(art.sequence);
  } catch (const SolveError& e) {
    throw Failure(kSolveFailed, e.what());
  }
  if (a.tolerance > 0.0) {
    art.rules = BuildRules::covering(a.disk_radius, a.tolerance);
  }
  art.rules.boundary_samples = a.samples;
  try {
    auto built = build_tower(art.solution.lambdas, a.depth, art.rules);
    art.model = std::move(built.model);
    art.diagnostics = std::move(built.diagnostics);
  } catch (const BuildError& e) {
    throw Failure(kBuildFailed, e.what());
  } catch (const std::invalid_argument& e) {
    throw Failure(kBuildFailed, e.what());
  }
  try {
    io::save_artifact(a.out, art);
  } catch (const std::exception& e) {
    throw Failure(kLoadFailed, e.what());
  }
  out << io::canonical_dump({{"artifact", a.out},
                             {"depth", art.model.depth()},
                             {"m", Json(art.model.m)},
                             {"gap_norms", io::to_json(art.diagnostics).at("gap_norms")}});
  return kOk;
}

struct CertifyArgs {
  std::string artifact;
  std::size_t probes = 8;
  std::string out;
  std::string csv;
};

int cmd_certify(const CertifyArgs& a, std::ostream& out, std::ostream& err) {
  const auto art = load(a.artifact);
  const auto report = singular_set_certify(art.model, art.sequence, a.probes);
  if (a.probes == 0) err << "warning: no probes requested; the certificate is vacuous\n";
  for (const auto& p : report.invariant_problems) err << "invariant: " << p << "\n";
  if (!a.out.empty()) write_or_fail(a.out, io::canonical_dump(io::to_json(report)));
  if (!a.csv.empty()) write_or_fail(a.csv, io::report_csv(report));
  out << (report.pass ? "PASS" : "FAIL") << " probes=" << report.probes.size()
      << " orbit_residual=" << io::format_double(report.orbit_target_residual)
      << " roundtrip=" << io::format_double(report.max_roundtrip_residual) << "\n";
  return report.pass ? kOk : kCertifyFailed;
}

int cmd_eval(const std::string& artifact, const std::string& z_text, const std::string& path, std::ostream& out) {
  const auto art = load(artifact);
  const Complex z = parse_complex(z_text);
  const auto lim = eval_limit(art.model, z);
  Json j = {{"z", io::to_json(z)},
            {"escaped", lim.value.escaped()},
            {"error_bound", lim.error_bound},
            {"certified", lim.certified}};
  j["value"] = lim.value ? io::to_json(lim.value.value()) : Json(nullptr);
  emit(out, j, path);
  return kOk;
}

struct GridArgs {
  std::string window;
  std::string res;
  int max_iter = 64;
  double escape_radius = kDefaultEscapeRadius;
  std::string out;
  std::string csv;

  void attach(CLI::App* cmd, const char* default_window, const char* default_res) {
    window = default_window;
    res = default_res;
    cmd->add_option("--window", window, "Plane window x0,y0,x1,y1")->capture_default_str();
    cmd->add_option("--res", res, "Resolution WxH, each axis 1..16384")->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "Iterations per pixel")->capture_default_str()->check(
        CLI::NonNegativeNumber);
    cmd->add_option("--escape-radius", escape_radius, "Escape radius")->capture_default_str()->check(
        CLI::PositiveNumber);
    cmd->add_option("--out", out, "PPM image path")->required();
    cmd->add_option("--csv", csv, "Optional CSV table path");
  }
};

int cmd_render(const MapSource& src, const GridArgs& g, std::ostream& out) {
  GridJob job;
  job.window = parse_window(g.window);
  std::tie(job.width, job.height) = parse_resolution(g.res);
  job.max_iter = g.max_iter;
  job.escape_radius = g.escape_radius;
  job.function = src.resolve();
  const auto grid = escape_grid(job);
  write_or_fail(g.out, io::encode_ppm(grid.width, grid.height, grid.values, g.max_iter));
  if (!g.csv.empty()) write_or_fail(g.csv, io::grid_csv(grid));
  const auto bounded = std::count(grid.values.begin(), grid.values.end(), kBoundedMarker);
  const auto uncertified = std::count(grid.values.begin(), grid.values.end(), kUncertifiedMarker);
  out << "wrote " << g.out << " (" << grid.width << "x" << grid.height << ", bounded=" << bounded
      << ", uncertified=" << uncertified << ")\n";
  return kOk;
}

int cmd_scan(const GridArgs& g, std::ostream& out) {
  const Window w = parse_window(g.window);
  const auto [width, height] = parse_resolution(g.res);
  if (!(g.escape_radius > std::exp(1.0))) throw Failure(kUsage, "--escape-radius must exceed e");
  const auto map = lambda_orbit_scan(w, width, height, g.max_iter, g.escape_radius);
  write_or_fail(g.out, io::encode_ppm(width, height, map.escape_time, g.max_iter));
  if (!g.csv.empty()) write_or_fail(g.csv, io::scan_csv(map));
  const auto bounded = std::count(map.escape_time.begin(), map.escape_time.end(), -1);
  out << "wrote " << g.out << " (" << width << "x" << height << ", bounded=" << bounded << ")\n";
  return kOk;
}

struct PoincareArgs {
  std::string mu = "2";
  std::string function = "affine";
  std::size_t samples = 200;
  std::size_t iterations = 40;
  std::string out;
};

int cmd_poincare(const PoincareArgs& a, std::ostream& out) {
  const Complex mu = parse_complex(a.mu);
  AnalyticFunction seed;
  if (a.function == "affine") {
    seed = affine_seed(mu);
  } else if (a.function == "polynomial") {
    seed = polynomial_seed({mu, {1.0, 0.0}, {0.25, 0.0}});
  } else {
    TargetSetSpec spec;
    spec.primitives = {PointPrimitive{{0.0, 0.0}}, PointPrimitive{{1.0, 0.0}}};
    const auto lambdas = solve_lambda_sequence(generate_dense_sequence(spec, 4, 0)).lambdas;
    seed = tower_seed(mu, build_tower(lambdas, 4).model);
  }
  PoincareModel model;
  try {
    model = build_poincare_model(mu, seed);
  } catch (const UnsupportedError& e) {
    throw Failure(kUsage, e.what());
  }
  const double fe = functional_equation_residual(model, a.samples);
  const auto contraction = contraction_check(model, a.iterations);
  const bool pass = model.residual_met && fe <= 1e-6 && contraction.pass;
  emit(out,
       {{"model", io::to_json(model)},
        {"functional_equation_residual", fe},
        {"contraction", io::to_json(contraction)},
        {"pass", pass}},
       a.out);
  return pass ? kOk : kNumericalFailure;
}

TowerModel default_tower() {
  TargetSetSpec spec;
  spec.primitives = {PointPrimitive{{0.0, 0.0}}, PointPrimitive{{1.0, 0.0}}};
  const auto lambdas = solve_lambda_sequence(generate_dense_sequence(spec, 6, 0)).lambdas;
  return build_tower(lambdas, 6).model;
}

int cmd_example2(const std::string& artifact, const std::string& multiplier, const std::string& path,
                 std::ostream& out) {
  const TowerModel model = artifact.empty() ? default_tower() : load(artifact).model;
  const auto res = example2_construct(model, parse_complex(multiplier));
  emit(out, io::to_json(res), path);
  return res.ok ? kOk : kNumericalFailure;
}

int cmd_example3(double tolerance, std::size_t depth, const std::string& path, std::ostream& out) {
  Example3Result res;
  try {
    res = example3_construct(tolerance, depth);
  } catch (const BuildError& e) {
    throw Failure(kBuildFailed, e.what());
  }
  emit(out, io::to_json(res), path);
  return res.ok ? kOk : kNumericalFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Iterated-exponential entire functions with prescribed singular values"};
  app.name("exptower");
  app.require_subcommand(1);

  ConstructArgs construct;
  auto* c = app.add_subcommand("construct", "Build a tower from a target-set spec and save the artifact");
  c->add_option("--spec", construct.spec, "Target-set spec (JSON)")->required();
  c->add_option("--depth", construct.depth, "Tower depth N")->capture_default_str();
  c->add_option("--seed", construct.seed, "Dense-sequence permutation seed")->capture_default_str();
  c->add_option("--out", construct.out, "Artifact path")->required();
  c->add_option("--disk-radius", construct.disk_radius, "Disk where F_0 must stay close to e^z");
  c->add_option("--tolerance", construct.tolerance, "Allowed sup deviation from e^z on that disk")
      ->check(CLI::PositiveNumber);
  c->add_option("--samples", construct.samples, "Boundary samples per gap estimate")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{8}, std::size_t{1} << 20));

  CertifyArgs certify;
  auto* ce = app.add_subcommand("certify", "Certify the singular set of an artifact (exit 5 on FAIL)");
  ce->add_option("--artifact", certify.artifact, "Artifact path")->required();
  ce->add_option("--probes", certify.probes, "Number of probe points")->capture_default_str();
  ce->add_option("--out", certify.out, "JSON report path");
  ce->add_option("--csv", certify.csv, "CSV gap table path");

  std::string eval_artifact, eval_z = "0", eval_out;
  auto* ev = app.add_subcommand("eval", "Evaluate F_0 with its error bound");
  ev->add_option("--artifact", eval_artifact, "Artifact path")->required();
  ev->add_option("--z", eval_z, "Point re or re,im")->capture_default_str();
  ev->add_option("--out", eval_out, "JSON output path");

  MapSource orbit_src;
  std::string orbit_z = "0", orbit_out;
  int orbit_steps = 64;
  double orbit_radius = kDefaultEscapeRadius;
  auto* ob = app.add_subcommand("orbit", "Iterate a single orbit");
  orbit_src.attach(ob);
  ob->add_option("--z", orbit_z, "Starting point re or re,im")->capture_default_str();
  ob->add_option("--max-iter", orbit_steps, "Number of steps")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  ob->add_option("--escape-radius", orbit_radius, "Escape radius")->capture_default_str()->check(
      CLI::PositiveNumber);
  ob->add_option("--out", orbit_out, "JSON output path");

  MapSource render_src;
  GridArgs render;
  auto* re = app.add_subcommand("render", "Escape-time image of a map");
  render_src.attach(re);
  render.attach(re, "-2,-2,2,2", "200x200");

  GridArgs scan;
  auto* sc = app.add_subcommand("scan", "Boundedness of the orbit of 0 over a lambda window");
  scan.max_iter = 100;
  scan.attach(sc, "-1,-1,1,1", "100x100");

  PoincareArgs poincare;
  auto* po = app.add_subcommand("poincare", "Poincare function of a seed and the contraction check");
  po->add_option("--mu", poincare.mu, "Multiplier mu, |mu| > 1")->capture_default_str();
  po->add_option("--function", poincare.function, "Seed F with F(0) = mu")
      ->capture_default_str()
      ->check(CLI::IsMember({"affine", "polynomial", "tower"}));
  po->add_option("--samples", poincare.samples, "Functional-equation samples")->capture_default_str();
  po->add_option("--iterations", poincare.iterations, "Contraction iterations")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
  po->add_option("--out", poincare.out, "JSON output path");

  std::string ex2_artifact, ex2_multiplier = "0.5,0.5", ex2_out;
  auto* e2 = app.add_subcommand("example2", "Function with a prescribed fixed-point multiplier at 1");
  e2->add_option("--artifact", ex2_artifact, "Tower artifact; default is V = {0, 1} at depth 6");
  e2->add_option("--multiplier", ex2_multiplier, "Target multiplier re or re,im")->capture_default_str();
  e2->add_option("--out", ex2_out, "JSON output path");

  double ex3_tolerance = 0.1;
  std::size_t ex3_depth = 4;
  std::string ex3_out;
  auto* e3 = app.add_subcommand("example3", "Function close to e^z with a repelling fixed point at 1");
  e3->add_option("--tolerance", ex3_tolerance, "Deviation from e^z on |z| <= 4 pi")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  e3->add_option("--depth", ex3_depth, "Tower depth")->capture_default_str()->check(
      CLI::Range(std::size_t{1}, std::size_t{12}));
  e3->add_option("--out", ex3_out, "JSON output path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c) return cmd_construct(construct, out);
    if (*ce) return cmd_certify(certify, out, err);
    if (*ev) return cmd_eval(eval_artifact, eval_z, eval_out, out);
    if (*ob) {
      const auto rec = iterate_orbit(orbit_src.resolve(), parse_complex(orbit_z),
                                     static_cast<std::size_t>(orbit_steps), orbit_radius);
      emit(out, io::to_json(rec), orbit_out);
      return kOk;
    }
    if (*re) return cmd_render(render_src, render, out);
    if (*sc) return cmd_scan(scan, out);
    if (*po) return cmd_poincare(poincare, out);
    if (*e2) return cmd_example2(ex2_artifact, ex2_multiplier, ex2_out, out);
    if (*e3) return cmd_example3(ex3_tolerance, ex3_depth, ex3_out, out);
  } catch (const Failure& f) {
    err << "error: " << f.what() << "\n";
    return f.code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kUsage;
}

}  // namespace exptower::cli
