#include "exptower/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exptower/parallel.hpp"
#include "exptower/target_set.hpp"

namespace exptower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ValueSlope {
  Complex value;
  Complex slope;
  bool ok = true;
};

// Damped Newton for fn(z) = 0, halving the step until the residual drops.
NewtonResult damped_newton(const std::function<ValueSlope(Complex)>& fn, Complex start, double tol,
                           int max_iter = 80) {
  NewtonResult r;
  r.start = start;
  r.root = start;
  ValueSlope cur = fn(start);
  if (!cur.ok) {
    r.residual = kInf;
    return r;
  }
  r.residual = std::abs(cur.value);
  for (int it = 1; it <= max_iter && r.residual > tol; ++it) {
    r.iterations = it;
    if (cur.slope == Complex{}) break;
    const Complex step = cur.value / cur.slope;
    double damping = 1.0;
    bool moved = false;
    for (int h = 0; h < 30; ++h, damping *= 0.5) {
      const Complex trial = r.root - damping * step;
      const ValueSlope next = fn(trial);
      if (next.ok && std::abs(next.value) < r.residual) {
        r.root = trial;
        cur = next;
        r.residual = std::abs(next.value);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  r.converged = r.residual <= tol;
  return r;
}

}  // namespace

IterableMap exponential_map(Complex lambda) {
  return [lambda](Complex z) { return MapStep{exp_affine(lambda, z), true}; };
}

IterableMap constant_map(Complex c) {
  return [c](Complex) { return MapStep{Evaluation::finite(c), true}; };
}

IterableMap tower_map(const TowerModel& model, Complex scale) {
  return [model, scale](Complex z) {
    const auto lim = eval_limit(model, scale * z);
    return MapStep{lim.value, lim.certified};
  };
}

std::string to_string(OrbitStatus s) {
  switch (s) {
    case OrbitStatus::bounded:
      return "bounded";
    case OrbitStatus::escaped:
      return "escaped";
    case OrbitStatus::puncture:
      return "puncture";
    case OrbitStatus::uncertified:
      return "uncertified";
  }
  return "unknown";
}

OrbitRecord iterate_orbit(const IterableMap& f, Complex z0, std::size_t steps, double escape_radius) {
  OrbitRecord rec;
  rec.start = z0;
  rec.points.push_back(z0);
  Complex z = z0;
  for (std::size_t t = 1; t <= steps; ++t) {
    MapStep s{Evaluation::finite({}), true};
    try {
      s = f(z);
    } catch (const DomainError&) {
      rec.status = OrbitStatus::puncture;
      rec.stop_step = t;
      return rec;
    }
    if (!s.certified) {
      rec.status = OrbitStatus::uncertified;
      rec.stop_step = t;
      return rec;
    }
    if (s.value.escaped()) {
      rec.status = OrbitStatus::escaped;
      rec.stop_step = t;
      return rec;
    }
    z = s.value.value();
    rec.points.push_back(z);
    if (std::abs(z) > escape_radius) {
      rec.status = OrbitStatus::escaped;
      rec.stop_step = t;
      return rec;
    }
  }
  return rec;
}

std::vector<OrbitRecord> postsingular_orbit(const IterableMap& f, const std::vector<Complex>& singular_points,
                                            std::size_t steps) {
  std::vector<OrbitRecord> out;
  out.reserve(singular_points.size());
  for (const auto& p : singular_points) out.push_back(iterate_orbit(f, p, steps));
  return out;
}

std::vector<OrbitRecord> postsingular_orbit(const TowerModel& model, std::size_t steps) {
  return postsingular_orbit(tower_map(model), orbit_of_zero(model.lambdas, model.depth()).points, steps);
}

Example2Result example2_construct(const TowerModel& model, Complex target_multiplier) {
  Example2Result res;
  res.target_multiplier = target_multiplier;
  if (target_multiplier == Complex{}) {
    res.diagnostic = "multiplier must be nonzero";
    return res;
  }
  const std::size_t n = model.depth();
  const Complex root = std::sqrt(target_multiplier);

  for (const Complex mu1 : {root, -root}) {
    // h(t) = t F_0'(t) / F_0(t) - mu1, with h' from the second-order jet.
    auto h = [&](Complex t) {
      const auto jet = eval_jet(model, n, t);
      if (!jet || jet->value == Complex{}) return ValueSlope{{}, {}, false};
      const Complex q = jet->d1 / jet->value;
      const Complex dq = jet->d2 / jet->value - q * q;
      return ValueSlope{t * q - mu1, q + t * dq, true};
    };
    const double tol = 1e-14 * std::max(1.0, std::abs(mu1));
    for (const Complex start : {mu1, Complex(1.0, 0.0), 0.5 * mu1, 2.0 * mu1, Complex(0.0, 1.0),
                                Complex(0.0, -1.0)}) {
      NewtonResult nr = damped_newton(h, start, tol);
      res.attempts.push_back(nr);
      if (!nr.converged) continue;
      const Complex t0 = nr.root;
      const auto f0 = eval_truncation(model, 0, n, t0);
      const auto d0 = eval_derivative(model, n, t0);
      if (!f0 || !d0) continue;
      const Complex g1 = t0 * d0.value() / f0.value();
      const auto g = [&](Complex z) { return eval_truncation(model, 0, n, t0 * z).value() / f0.value(); };
      res.mu1 = mu1;
      res.t0 = t0;
      res.f_at_1 = g(g(1.0));
      res.derivative_at_1 = g1 * g1;
      res.multiplier_error = std::abs(res.derivative_at_1 - target_multiplier);
      res.certified = std::abs(t0) <= model.radii.at(n);
      res.ok = res.multiplier_error <= kExample2Tolerance && std::abs(res.f_at_1 - 1.0) <= 1e-10;
      if (res.ok) return res;
    }
  }
  res.diagnostic = "Newton failed from every start for both square roots; F_0 may omit the required value";
  return res;
}

IterableMap example2_map(const TowerModel& model, Complex t0) {
  const std::size_t n = model.depth();
  const auto f0 = eval_truncation(model, 0, n, t0);
  if (!f0) throw std::invalid_argument("example2_map: F_0(t0) escaped");
  const Complex norm = f0.value();
  return [model, t0, norm, n](Complex z) {
    const auto inner = eval_limit(model, t0 * z);
    if (!inner.value) return MapStep{inner.value, inner.certified};
    const Complex g = inner.value.value() / norm;
    const auto outer = eval_limit(model, t0 * g);
    if (!outer.value) return MapStep{outer.value, outer.certified};
    return MapStep{Evaluation::finite(outer.value.value() / norm), inner.certified && outer.certified};
  };
}

Example3Result example3_construct(double tolerance, std::size_t depth) {
  Example3Result res;
  res.tolerance = tolerance;
  TargetSetSpec spec;
  spec.primitives = {PointPrimitive{{0.0, 0.0}}, PointPrimitive{{1.0, 0.0}}};
  const auto seq = generate_dense_sequence(spec, depth, 0);
  res.lambdas = solve_lambda_sequence(seq).lambdas;
  res.tower = build_tower(res.lambdas, depth, BuildRules::covering(kExample3Radius, tolerance));
  const TowerModel& model = res.tower.model;
  const std::size_t n = model.depth();

  for (std::size_t s = 0; s < 256; ++s) {
    for (const double frac : {0.25, 0.5, 0.75, 1.0}) {
      const Complex z = std::polar(frac * kExample3Radius, kTwoPi * static_cast<double>(s) / 256.0);
      const auto v = eval_truncation(model, 0, n, z);
      res.max_deviation_from_exp =
          std::max(res.max_deviation_from_exp, v ? std::abs(v.value() - std::exp(z)) : kInf);
    }
  }

  auto fn = [&](Complex l) {
    const auto v = eval_truncation(model, 0, n, l);
    const auto d = eval_derivative(model, n, l);
    if (!v || !d) return ValueSlope{{}, {}, false};
    return ValueSlope{v.value() - 1.0, d.value(), true};
  };
  const Complex centre(0.0, kTwoPi);
  NewtonResult best;
  best.residual = kInf;
  for (int j = 0; j < 5; ++j) {
    const Complex start = centre + std::polar(0.25, kTwoPi * j / 5.0);
    NewtonResult nr = damped_newton(fn, start, 1e-15);
    res.attempts.push_back(nr);
    if (std::abs(nr.root - centre) <= 0.5 && nr.residual < best.residual) best = nr;
  }
  if (!(best.residual <= 1e-12)) {
    res.diagnostic = "Newton did not converge inside |lambda - 2 pi i| <= 1/2";
    return res;
  }
  res.lambda_star = best.root;
  res.f_at_0 = eval_truncation(model, 0, n, 0.0).value();
  res.f_at_1 = eval_truncation(model, 0, n, res.lambda_star).value();
  res.derivative_at_1 = res.lambda_star * eval_derivative(model, n, res.lambda_star).value();
  res.multiplier_margin = std::abs(res.derivative_at_1) - 1.0;
  res.postsingular = postsingular_orbit(example3_map(model, res.lambda_star), {0.0, 1.0}, 8);
  res.ok = std::abs(res.lambda_star - centre) <= 0.5 && std::abs(res.f_at_0 - 1.0) <= 1e-7 &&
           std::abs(res.f_at_1 - 1.0) <= 1e-7 && res.multiplier_margin > 0.0;
  if (!res.ok) res.diagnostic = "scenario assertions failed";
  return res;
}

IterableMap example3_map(const TowerModel& model, Complex lambda_star) { return tower_map(model, lambda_star); }

void GridJob::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("grid resolution must be at least 1x1");
  if (!(escape_radius > 0.0)) throw std::invalid_argument("escape radius must be positive");
  if (max_iter < 0) throw std::invalid_argument("max_iter must be non-negative");
  if (!function) throw std::invalid_argument("grid job has no function");
}

int grid_value(const OrbitRecord& r) {
  switch (r.status) {
    case OrbitStatus::escaped:
      return static_cast<int>(r.stop_step);
    case OrbitStatus::uncertified:
    case OrbitStatus::puncture:
      return kUncertifiedMarker;
    case OrbitStatus::bounded:
      break;
  }
  return kBoundedMarker;
}

EscapeGrid escape_grid(const GridJob& job) {
  job.validate();
  EscapeGrid grid;
  grid.width = job.width;
  grid.height = job.height;
  grid.window = job.window;
  grid.values.assign(job.width * job.height, kBoundedMarker);
  parallel_for(job.height, [&](std::size_t j) {
    for (std::size_t i = 0; i < job.width; ++i) {
      const Complex z = job.window.pixel_center(i, j, job.width, job.height);
      grid.values[j * job.width + i] =
          grid_value(iterate_orbit(job.function, z, static_cast<std::size_t>(job.max_iter), job.escape_radius));
    }
  });
  return grid;
}

}  // namespace exptower
