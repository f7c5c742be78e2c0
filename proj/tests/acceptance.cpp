// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <utility>

#include <unistd.h>

#include "exptower/cli.hpp"
#include "exptower/dynamics.hpp"
#include "exptower/inverse_branches.hpp"
#include "exptower/io.hpp"
#include "exptower/poincare.hpp"
#include "support/generators.hpp"

using namespace exptower;
using exptower::testing::Gen;

namespace {

namespace tol {
constexpr double kBackbone = 1e-12;
constexpr double kNormalization = 1e-10;
constexpr double kExpCover = 1e-3;
constexpr double kOrbitHit = 1e-9;
constexpr double kRoundtrip = 1e-7;
constexpr double kFunctionalEquation = 1e-6;
constexpr double kKoenigs = 1e-8;
constexpr double kLimitResidual = 1e-6;
constexpr double kExample2Value = 1e-10;
constexpr double kExample2Multiplier = 1e-8;
constexpr double kExample3Value = 1e-7;
constexpr double kExample3Distance = 0.5;
}  // namespace tol

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

TowerModel tower_over(const TargetSetSpec& spec, std::size_t depth, const BuildRules& rules = {},
                      DenseSequence* seq_out = nullptr) {
  const auto seq = generate_dense_sequence(spec, depth, 0);
  if (seq_out) *seq_out = seq;
  return build_tower(solve_lambda_sequence(seq).lambdas, depth, rules).model;
}

TargetSetSpec points(std::initializer_list<Complex> pts) {
  TargetSetSpec s;
  for (const auto& p : pts) s.primitives.push_back(PointPrimitive{p});
  return s;
}

std::vector<BuiltTower> random_towers(std::size_t count, std::size_t depth) {
  Gen g(1001);
  std::vector<BuiltTower> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(build_tower(g.lambdas(depth, 0.2, 5.0), depth));
  return out;
}

Outcome backbone() {
  double worst = 0.0;
  for (const auto& t : random_towers(5, 8)) {
    const auto& m = t.model;
    for (std::size_t n = 1; n <= m.depth(); ++n) {
      const Complex e = m.lambda(n) * std::exp(m.b[n]);
      worst = std::max(worst, std::abs(e - m.b[n - 1]) / std::abs(m.b[n - 1]));
    }
  }
  return {worst <= tol::kBackbone, "max relative residual " + sci(worst) + " over 5 towers of depth 8"};
}

Outcome normalization() {
  double worst = 0.0;
  for (const auto& t : random_towers(5, 8)) {
    for (std::size_t n = 0; n <= t.model.depth(); ++n) {
      worst = std::max(worst, std::abs(eval_truncation(t.model, 0, n, 0.0).value() - 1.0));
      worst = std::max(worst, std::abs(eval_derivative(t.model, n, 0.0).value() - 1.0));
    }
  }
  return {worst <= tol::kNormalization, "max |f(0) - 1|, |f'(0) - 1| = " + sci(worst)};
}

Outcome cauchy_bound() {
  Gen g(1003);
  std::vector<TowerModel> models{tower_over(points({0.0, 1.0}), 6), tower_over(g.point_target(12), 6)};
  for (const auto& t : random_towers(2, 6)) models.push_back(t.model);
  double worst_ratio = 0.0;
  const std::size_t samples = 4 * BuildRules{}.boundary_samples;
  for (const auto& m : models) {
    for (std::size_t n = 1; n < m.depth(); ++n) {
      for (std::size_t k = 0; k <= n; ++k) {
        const auto gap = sup_norm_gap(m, k, n, samples);
        const double ratio = gap.unbounded ? INFINITY : gap.value / std::ldexp(1.0, -static_cast<int>(n));
        worst_ratio = std::max(worst_ratio, ratio);
      }
    }
  }
  return {worst_ratio <= 1.0, "max gap / 2^-n = " + sci(worst_ratio) + " on 4 builds, " +
                                  std::to_string(samples) + " samples"};
}

Outcome exp_cover() {
  const auto model = tower_over(points({0.0, 1.0}), 6, BuildRules::covering(2.0, tol::kExpCover));
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      const Complex z(-2.0 + 4.0 * (i + 0.5) / 64.0, -2.0 + 4.0 * (j + 0.5) / 64.0);
      if (std::abs(z) > 2.0) continue;
      const auto v = eval_limit(model, z);
      worst = std::max(worst, v.value ? std::abs(v.value.value() - std::exp(z)) : INFINITY);
    }
  }
  const double total = worst + model.tail_bound();
  return {total <= tol::kExpCover,
          "sampled " + sci(worst) + " + tail " + sci(model.tail_bound()) + " = " + sci(total)};
}

Outcome orbit_prescription() {
  Gen g(1005);
  double worst = 0.0;
  // V = {0, 1} forces lambda_k = 2 pi i, so rounding lambda_k alone moves a_k by
  // about (2 pi)^(k-2) ulp(2 pi); that floor passes 1e-9 at k = 11.
  const std::pair<TargetSetSpec, std::size_t> cases[] = {{points({0.0, 1.0}), 8}, {g.point_target(12), 12}};
  for (const auto& [spec, depth] : cases) {
    const auto seq = generate_dense_sequence(spec, depth, 0);
    const auto sol = solve_lambda_sequence(seq);
    for (std::size_t k = 1; k < seq.size(); ++k) {
      Complex w = 0.0;
      for (std::size_t j = k; j >= 1; --j) w = sol.lambdas[j - 1] * std::exp(w);
      worst = std::max(worst, std::abs(w - seq.points[k]) / std::max(1.0, std::abs(seq.points[k])));
    }
  }
  return {worst <= tol::kOrbitHit, "max relative orbit residual " + sci(worst)};
}

Outcome inverse_branches() {
  DenseSequence seq;
  const auto model = tower_over(points({0.0, 1.0}), 6, {}, &seq);
  const auto rep = singular_set_certify(model, seq, 8);
  bool gaps_ok = true, flagged = true;
  std::size_t probes = 0;
  double worst_ratio = 0.0;
  for (const auto& p : rep.probes) {
    if (p.skipped) continue;
    ++probes;
    for (const auto& f : p.families) {
      if (f.label == "canonical") {
        for (std::size_t i = 0; i < f.gaps.size(); ++i) {
          if (f.start_level + i < f.bound_from) continue;
          worst_ratio = std::max(worst_ratio, f.gaps[i] / f.bounds[i]);
          gaps_ok = gaps_ok && f.gaps[i] <= f.bounds[i];
        }
      }
      if (f.divergent) flagged = flagged && f.flagged_divergent;
    }
  }
  const bool pass = rep.pass && probes >= 8 && gaps_ok && flagged &&
                    rep.max_roundtrip_residual <= tol::kRoundtrip;
  return {pass, std::to_string(probes) + " probes, max gap / 2^-n " + sci(worst_ratio) + ", round trip " +
                    sci(rep.max_roundtrip_residual) + ", divergent path " + (flagged ? "flagged" : "missed")};
}

Outcome poincare() {
  const auto model = build_poincare_model(2.0, affine_seed(2.0));
  const double fe = functional_equation_residual(model, 200);
  const auto c = contraction_check(model);
  const bool pass = fe <= tol::kFunctionalEquation && model.koenigs_residual <= tol::kKoenigs &&
                    c.theta_hat < 1.0 && c.fixed_point_residual <= tol::kLimitResidual &&
                    c.poincare_distance <= tol::kLimitResidual;
  return {pass, "functional eq " + sci(fe) + ", Koenigs " + sci(model.koenigs_residual) + ", theta " +
                    sci(c.theta_hat) + ", limit " + sci(c.fixed_point_residual) + " / " +
                    sci(c.poincare_distance)};
}

Outcome example1() {
  const auto F = tower_over(points({0.0, 1.0}), 6);
  const auto G = tower_over(points({0.0, 2.0}), 6);
  if (F.lambda(1) == G.lambda(1)) return {false, "first parameters coincide"};
  const auto cfg = MetricConfig::linear(0.5, 6);
  const double y = std::abs(F.b[1] - G.b[1]);
  const double delta0 = cfg.eps * y / (1.0 + y);
  double min_d = INFINITY;
  std::vector<double> sups;
  for (int j = 1; j <= 20; ++j) {
    const double s = 1.0 / j;
    min_d = std::min(min_d, metric_d(tower_levels(F, s), tower_levels(G, s), cfg).value);
    double sup = 0.0;
    for (int k = 0; k <= 256; ++k) {
      const Complex z = k == 256 ? Complex{} : std::polar(1.0, kTwoPi * k / 256.0);
      sup = std::max(sup, std::abs(eval_limit(F, s * z).value.value() - eval_limit(G, s * z).value.value()));
    }
    sups.push_back(sup);
  }
  // Monotone decrease from the first j after which it never increases.
  std::size_t from = sups.size() - 1;
  while (from > 0 && sups[from] < sups[from - 1]) --from;
  const bool pass = min_d >= delta0 && delta0 > 0.0 && from < sups.size() - 1;
  return {pass, "min d " + sci(min_d) + " >= delta0 " + sci(delta0) + ", sup gap " + sci(sups.front()) + " -> " +
                    sci(sups.back()) + " decreasing from j = " + std::to_string(from + 1)};
}

Outcome example2() {
  DenseSequence seq;
  const auto model = tower_over(points({0.0, 1.0}), 6);
  Gen g(1009);
  double worst_f = 0.0, worst_m = 0.0;
  int ok = 0;
  for (int i = 0; i < 10; ++i) {
    const Complex target = g.with_modulus(0.1, 10.0);
    const auto r = example2_construct(model, target);
    if (r.ok) ++ok;
    worst_f = std::max(worst_f, std::abs(r.f_at_1 - 1.0));
    worst_m = std::max(worst_m, std::abs(r.derivative_at_1 - target));
  }
  const bool pass = ok == 10 && worst_f <= tol::kExample2Value && worst_m <= tol::kExample2Multiplier;
  return {pass, std::to_string(ok) + "/10 solved, |f(1) - 1| " + sci(worst_f) + ", |f'(1) - lambda*| " +
                    sci(worst_m)};
}

Outcome example3() {
  const auto r = example3_construct();
  const double dist = std::abs(r.lambda_star - Complex(0.0, kTwoPi));
  const double f0 = std::abs(r.f_at_0 - 1.0), f1 = std::abs(r.f_at_1 - 1.0);
  const bool pass = dist <= tol::kExample3Distance && f0 <= tol::kExample3Value && f1 <= tol::kExample3Value &&
                    std::abs(r.derivative_at_1) > 1.0;
  return {pass, "|lambda* - 2 pi i| " + sci(dist) + ", |f(0) - 1| " + sci(f0) + ", |f(1) - 1| " + sci(f1) +
                    ", |f'(1)| - 1 = " + sci(r.multiplier_margin)};
}

Outcome lambda_scan() {
  // Pixel width h puts -1 and 1/e on pixel centres and the real axis on row 99.
  const double h = (1.0 + std::exp(-1.0)) / 100.0;
  const Window w{-1.0 - 50.5 * h, -100.5 * h, -1.0 + 149.5 * h, 99.5 * h};
  const int max_iter = 500;
  const auto map = lambda_orbit_scan(w, 200, 200, max_iter, kDefaultEscapeRadius);
  std::string detail;
  bool pass = true;
  for (const double lambda : {1.0, -1.0, std::exp(-1.0)}) {
    const auto i = static_cast<std::size_t>(std::floor((lambda - w.x0) / h));
    const std::size_t j = 99;
    const bool pixel_escaped = map.at(i, j) >= 0;
    Complex z = 0.0;
    bool oracle_escaped = false;
    for (int t = 0; t < max_iter && !oracle_escaped; ++t) {
      z = lambda * std::exp(z);
      oracle_escaped = std::abs(z) > kDefaultEscapeRadius || !std::isfinite(z.real());
    }
    pass = pass && pixel_escaped == oracle_escaped;
    detail += (detail.empty() ? "" : ", ") + sci(lambda) + (pixel_escaped ? " escaped" : " bounded");
  }
  const bool expected = map.at(static_cast<std::size_t>(std::floor((1.0 - w.x0) / h)), 99) >= 0 &&
                        map.at(50, 99) < 0 && map.at(150, 99) < 0;
  return {pass && expected, detail + " at 200x200"};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("exptower_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto file = [&](const char* n) { return (dir / n).string(); };
  io::write_file(file("v.json"), R"({"primitives":[{"type":"point","c":[0,0]},{"type":"disk","center":[1,1],"radius":0.5}]})");
  std::ostringstream sink;
  int codes = 0;
  for (const char* out : {"a1.json", "a2.json"}) {
    codes += cli::run({"construct", "--spec", file("v.json"), "--depth", "6", "--seed", "7", "--out", file(out)}, sink,
                      sink);
  }
  for (const char* out : {"r1.ppm", "r2.ppm"}) {
    codes += cli::run({"render", "--artifact", file("a1.json"), "--res", "64x64", "--max-iter", "30", "--out", file(out)},
                      sink, sink);
  }
  const std::string a1 = io::read_file(file("a1.json"));
  io::save_artifact(file("a3.json"), io::load_artifact(file("a1.json")));
  const bool same_artifacts = a1 == io::read_file(file("a2.json"));
  const bool same_images = io::read_file(file("r1.ppm")) == io::read_file(file("r2.ppm"));
  const bool round_trip = a1 == io::read_file(file("a3.json"));
  fs::remove_all(dir);
  return {codes == 0 && same_artifacts && same_images && round_trip,
          std::string("artifacts ") + (same_artifacts ? "identical" : "differ") + ", images " +
              (same_images ? "identical" : "differ") + ", round trip " + (round_trip ? "identical" : "differs")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "backbone identity", 1.0, backbone},
      {2, "normalization", 1.0, normalization},
      {3, "Cauchy gap bound", 30.0, cauchy_bound},
      {4, "closeness to e^z", 10.0, exp_cover},
      {5, "orbit prescription", 5.0, orbit_prescription},
      {6, "inverse-branch certificate", 60.0, inverse_branches},
      {7, "Poincare function", 30.0, poincare},
      {8, "metric separation", 30.0, example1},
      {9, "prescribed multiplier", 60.0, example2},
      {10, "repelling fixed point scenario", 60.0, example3},
      {11, "lambda-scan oracle points", 5.0, lambda_scan},
      {12, "determinism and persistence", 5.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %2d %s: %s (%.2f s of %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_seconds);
  }
  return failures == 0 ? 0 : 1;
}
