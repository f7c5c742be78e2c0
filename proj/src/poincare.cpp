#include "exptower/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exptower/parallel.hpp"

namespace exptower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOverflow = NumericContract::overflow_log_magnitude;
const Complex kNaN(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());

std::vector<Complex> circle(double radius, std::size_t samples, bool with_centre) {
  std::vector<Complex> pts;
  pts.reserve(samples + 1);
  if (with_centre) pts.emplace_back(0.0, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    pts.push_back(std::polar(radius, kTwoPi * static_cast<double>(s) / static_cast<double>(samples)));
  }
  return pts;
}

// delta <- mu (e^delta - 1), i.e. E_lambda(mu + delta) - mu, `steps` times.
Evaluation push_forward(Complex mu, Complex delta, std::size_t steps) {
  const double log_mu = std::log(std::abs(mu));
  for (std::size_t s = 0; s < steps; ++s) {
    if (delta.real() > kOverflow || log_mu + delta.real() > kOverflow) {
      return Evaluation::escape(s + 1, log_mu + delta.real());
    }
    delta = mu * exptower::expm1(delta);
  }
  return Evaluation::finite(mu + delta);
}

Complex push_deviation(Complex mu, Complex delta, std::size_t steps, bool& escaped) {
  const double log_mu = std::log(std::abs(mu));
  escaped = false;
  for (std::size_t s = 0; s < steps; ++s) {
    if (delta.real() > kOverflow || log_mu + delta.real() > kOverflow) {
      escaped = true;
      return kNaN;
    }
    delta = mu * exptower::expm1(delta);
  }
  return delta;
}

Complex mu_power(Complex mu, std::size_t n) {
  Complex p(1.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) p *= mu;
  return p;
}

// Solves F(x) - F(0) = target near `guess`.
Complex invert_seed(const AnalyticFunction& seed, Complex target, Complex guess) {
  Complex x = guess;
  for (int it = 0; it < 60; ++it) {
    const Complex step = (seed.deviation(x) - target) / seed.derivative(x);
    x -= step;
    if (std::abs(step) <= 4.0 * NumericContract::precision * std::max(1e-300, std::abs(x))) break;
  }
  return x;
}

double root_test_radius(const series::Series& psi) {
  const std::size_t d = psi.size() - 1;
  double worst = 0.0;
  for (std::size_t k = std::max<std::size_t>(2, d / 2); k <= d; ++k) {
    const double a = std::abs(psi[k]);
    if (a > 0.0) worst = std::max(worst, std::pow(a, 1.0 / static_cast<double>(k)));
  }
  return worst > 0.0 ? 1.0 / worst : kInf;
}

}  // namespace

Complex lambda_of(Complex mu) { return mu * std::exp(-mu); }

series::Series AnalyticFunction::coefficients(std::size_t degree, double radius) const {
  if (!taylor.empty()) return series::truncate(taylor, degree);
  const std::size_t m = std::max<std::size_t>(64, 4 * (degree + 1));
  std::vector<Complex> samples(m);
  for (std::size_t j = 0; j < m; ++j) {
    samples[j] = deviation(std::polar(radius, kTwoPi * static_cast<double>(j) / static_cast<double>(m)));
  }
  double scale = 0.0;
  for (const auto& v : samples) scale = std::max(scale, std::abs(v));
  // Coefficients below the rounding floor of the samples would be amplified by radius^-k.
  const double floor = 64.0 * NumericContract::precision * scale;
  series::Series c(degree + 1, Complex{});
  c[0] = value({0.0, 0.0});
  for (std::size_t k = 1; k <= degree; ++k) {
    Complex s{};
    for (std::size_t j = 0; j < m; ++j) {
      const double t = -kTwoPi * static_cast<double>((j * k) % m) / static_cast<double>(m);
      s += samples[j] * std::polar(1.0, t);
    }
    s /= static_cast<double>(m);
    if (std::abs(s) > floor) c[k] = s / std::pow(radius, static_cast<double>(k));
  }
  return c;
}

AnalyticFunction affine_seed(Complex mu, Complex a) {
  AnalyticFunction f;
  f.name = "affine";
  f.value = [mu, a](Complex z) { return mu + a * z; };
  f.deviation = [a](Complex z) { return a * z; };
  f.derivative = [a](Complex) { return a; };
  f.taylor = {mu, a};
  return f;
}

AnalyticFunction polynomial_seed(series::Series coefficients) {
  if (coefficients.empty()) throw std::invalid_argument("polynomial seed needs coefficients");
  AnalyticFunction f;
  f.name = "polynomial";
  f.value = [c = coefficients](Complex z) { return series::evaluate(c, z); };
  series::Series tail = coefficients;
  tail[0] = 0.0;
  f.deviation = [tail](Complex z) { return series::evaluate(tail, z); };
  f.derivative = [c = coefficients](Complex z) { return series::evaluate_derivative(c, z); };
  f.taylor = std::move(coefficients);
  return f;
}

AnalyticFunction tower_seed(Complex mu, const TowerModel& model) {
  AnalyticFunction f;
  f.name = "tower";
  const std::size_t n = model.depth();
  f.value = [mu, model, n](Complex z) {
    const auto e = eval_truncation(model, 0, n, z);
    return e ? mu * e.value() : kNaN;
  };
  f.deviation = [mu, model, n](Complex z) {
    const auto e = eval_deviation(model, 0, n, z);
    return e ? mu * e.value() : kNaN;
  };
  f.derivative = [mu, model, n](Complex z) {
    const auto e = eval_derivative(model, n, z);
    return e ? mu * e.value() : kNaN;
  };
  return f;
}

KoenigsFit koenigs_map(Complex mu, const Dynamics& phi, double radius, std::size_t degree) {
  if (!(std::abs(mu) > 1.0)) throw UnsupportedError("Koenigs map needs |mu| > 1");
  if (degree < 1) throw std::invalid_argument("Koenigs degree must be at least 1");
  const series::Series p = series::truncate(phi.taylor, degree);
  if (p[0] != Complex{}) throw std::invalid_argument("phi(0) must be 0");

  KoenigsFit fit;
  fit.coeffs.assign(degree + 1, Complex{});
  fit.coeffs[1] = 1.0;
  std::vector<series::Series> powers{series::Series(degree + 1, Complex{}), p};
  powers[0][0] = 1.0;
  for (std::size_t j = 2; j < degree; ++j) powers.push_back(series::multiply(powers.back(), p, degree));
  Complex mu_k = mu;
  for (std::size_t k = 2; k <= degree; ++k) {
    mu_k *= mu;
    Complex s{};
    for (std::size_t j = 1; j < k; ++j) s += fit.coeffs[j] * powers[j][k];
    fit.coeffs[k] = s / (mu - mu_k);
  }
  for (const auto& z : circle(0.5 * radius, 64, false)) {
    const Complex lhs = series::evaluate(fit.coeffs, phi.value(z));
    const double r = std::abs(lhs - mu * series::evaluate(fit.coeffs, z));
    fit.residual = std::isnan(r) ? kInf : std::max(fit.residual, r);
  }
  return fit;
}

Complex PoincareModel::local_eval(Complex w) const {
  return mu + seed.deviation(series::evaluate(inverse_coeffs, w));
}

PoincareModel build_poincare_model(Complex mu, const AnalyticFunction& seed, const PoincareOptions& options) {
  if (!(std::abs(mu) > 1.0)) throw UnsupportedError("Poincare functions need |mu| > 1");
  const Complex f0 = seed.value({0.0, 0.0});
  if (!(std::abs(f0 - mu) <= 1e-12 * std::max(1.0, std::abs(mu)))) {
    throw UnsupportedError("seed must satisfy F(0) = mu");
  }
  if (std::abs(seed.derivative({0.0, 0.0})) == 0.0) throw UnsupportedError("seed must satisfy F'(0) != 0");

  PoincareModel model;
  model.mu = mu;
  model.lambda = lambda_of(mu);
  model.seed = seed;

  auto phi_at = [&](std::size_t degree) {
    series::Series g = seed.coefficients(degree);
    g[0] = 0.0;
    series::Series h = series::exp(g, degree);
    h[0] = 0.0;
    for (auto& c : h) c *= mu;
    Dynamics d;
    d.taylor = series::compose(series::revert(g, degree), h, degree);
    d.value = [&seed, mu, taylor = d.taylor](Complex z) {
      const Complex target = mu * exptower::expm1(seed.deviation(z));
      return invert_seed(seed, target, series::evaluate(taylor, z));
    };
    return d;
  };

  const Dynamics probe = phi_at(32);
  double radius = std::min(1.0, 0.5 * root_test_radius(koenigs_map(mu, probe, 1.0, 32).coeffs));

  KoenigsFit best;
  Dynamics best_phi;
  std::size_t best_degree = 0;
  double best_radius = radius;
  for (int halving = 0; halving <= options.max_radius_halvings && !model.residual_met; ++halving) {
    for (std::size_t d = options.initial_degree; d <= options.max_degree; d *= 2) {
      Dynamics phi = phi_at(d);
      KoenigsFit fit = koenigs_map(mu, phi, radius, d);
      const bool met = fit.residual <= options.target_residual;
      if (best_degree == 0 || met || fit.residual < best.residual) {
        best = std::move(fit);
        best_phi = std::move(phi);
        best_degree = d;
        best_radius = radius;
      }
      if (met) {
        model.residual_met = true;
        break;
      }
    }
    if (!model.residual_met) radius *= 0.5;
  }

  model.koenigs_radius = best_radius;
  model.degree = best_degree;
  model.koenigs_coeffs = std::move(best.coeffs);
  model.koenigs_residual = best.residual;
  model.phi_coeffs = std::move(best_phi.taylor);
  model.inverse_coeffs = series::revert(model.koenigs_coeffs, model.degree);
  for (const auto& w : circle(0.5 * model.koenigs_radius, 64, false)) {
    const Complex back = series::evaluate(model.koenigs_coeffs, series::evaluate(model.inverse_coeffs, w));
    const double r = std::abs(back - w);
    model.reversion_residual = std::isnan(r) ? kInf : std::max(model.reversion_residual, r);
  }
  return model;
}

Evaluation phi_operator(Complex mu, const ComplexMap& f, Complex z) {
  return exp_affine(lambda_of(mu), f(z / mu));
}

Evaluation poincare_eval(const PoincareModel& model, Complex w) {
  const double local = 0.5 * model.koenigs_radius;
  std::size_t n = 0;
  Complex x = w;
  while (std::abs(x) > local) {
    x /= model.mu;
    ++n;
  }
  const Complex delta = model.seed.deviation(series::evaluate(model.inverse_coeffs, x));
  return push_forward(model.mu, delta, n);
}

double functional_equation_residual(const PoincareModel& model, std::size_t samples) {
  const double r = model.koenigs_radius;
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double rho = 0.5 * r * (1.0 + (static_cast<double>(s % 10) + 0.5) / 10.0);
    const Complex w = std::polar(rho, kTwoPi * (static_cast<double>(s) + 0.5) / static_cast<double>(samples));
    const auto lhs = poincare_eval(model, model.mu * w);
    if (!lhs) return kInf;
    const Complex rhs_dev = model.mu * exptower::expm1(model.local_eval(w) - model.mu);
    const double res = std::abs(lhs.value() - model.mu - rhs_dev) / std::max(1.0, std::abs(lhs.value()));
    worst = std::isnan(res) ? kInf : std::max(worst, res);
  }
  return worst;
}

Evaluation phi_iterate(Complex mu, const AnalyticFunction& seed, std::size_t n, Complex z) {
  return push_forward(mu, seed.deviation(z / mu_power(mu, n)), n);
}

LeveledFunction tower_levels(const TowerModel& model, double scale) {
  LeveledFunction f;
  f.levels = model.depth();
  f.level = [model, scale](std::size_t k, Complex z) {
    return eval_truncation(model, k, model.depth(), scale * z);
  };
  return f;
}

LeveledFunction phi_iterate_levels(Complex mu, const AnalyticFunction& seed, std::size_t n) {
  LeveledFunction f;
  f.levels = n;
  f.level = [mu, seed, n](std::size_t k, Complex z) {
    return phi_iterate(mu, seed, n - k, z / mu_power(mu, k));
  };
  return f;
}

MetricConfig MetricConfig::linear(double eps, std::size_t truncation) {
  MetricConfig c;
  c.radius = [](std::size_t k) { return static_cast<double>(k + 1); };
  c.eps = eps;
  c.truncation = truncation;
  return c;
}

MetricConfig MetricConfig::geometric(double r, Complex mu, double eps, std::size_t truncation) {
  MetricConfig c;
  const double m = std::abs(mu);
  c.radius = [r, m](std::size_t k) { return r * std::pow(m, static_cast<double>(k)); };
  c.eps = eps;
  c.truncation = truncation;
  return c;
}

void MetricConfig::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("metric eps must lie in (0, 1)");
  if (!radius) throw std::invalid_argument("metric exhaustion missing");
  for (std::size_t k = 0; k < truncation; ++k) {
    if (!(radius(k) >= 0.0) || radius(k + 1) < radius(k)) {
      throw std::invalid_argument("metric exhaustion must be nested");
    }
  }
}

MetricValue metric_d(const LeveledFunction& f, const LeveledFunction& g, const MetricConfig& cfg) {
  cfg.validate();
  if (f.constant || g.constant) {
    throw UnsupportedError("the metric is not defined for constant functions");
  }
  MetricValue out;
  const std::size_t j_max = std::min({cfg.truncation, f.levels, g.levels});
  double weight = 1.0;
  for (std::size_t k = 0; k <= j_max; ++k) {
    double sup = 0.0;
    for (const auto& z : circle(cfg.radius(k), cfg.samples, true)) {
      const auto a = f.level(k, z);
      const auto b = g.level(k, z);
      if (!a || !b) {
        sup = kInf;
        break;
      }
      sup = std::max(sup, std::abs(a.value() - b.value()));
    }
    const double x = std::isinf(sup) ? 1.0 : sup / (1.0 + sup);
    out.terms.push_back(weight * x);
    out.value += weight * x;
    weight *= cfg.eps;
  }
  out.tail_bound = weight / (1.0 - cfg.eps);
  return out;
}

ContractionReport contraction_check(const PoincareModel& model, std::size_t iterations, double eps,
                                    std::size_t samples) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("contraction eps must lie in (0, 1)");
  if (iterations < 2) throw std::invalid_argument("contraction_check needs at least two iterations");
  if (std::abs(model.seed.derivative({0.0, 0.0})) == 0.0) {
    throw UnsupportedError("seed must satisfy F'(0) != 0");
  }
  const Complex mu = model.mu;
  const auto pts = circle(model.koenigs_radius, samples, true);

  // values[n][s] = g_n(pts[s]) - mu, n = 0..T+1.
  std::vector<std::vector<Complex>> values(iterations + 2, std::vector<Complex>(pts.size()));
  parallel_for(iterations + 2, [&](std::size_t n) {
    const Complex scale = mu_power(mu, n);
    for (std::size_t s = 0; s < pts.size(); ++s) {
      bool escaped = false;
      values[n][s] = push_deviation(mu, model.seed.deviation(pts[s] / scale), n, escaped);
    }
  });

  ContractionReport rep;
  double d_prev = 0.0;
  for (std::size_t n = 0; n < iterations; ++n) {
    double sup = 0.0;
    for (std::size_t s = 0; s < pts.size(); ++s) sup = std::max(sup, std::abs(values[n + 1][s] - values[n][s]));
    if (std::isnan(sup)) sup = kInf;
    rep.sup_gaps.push_back(sup);
    const double y = std::isinf(sup) ? 1.0 : sup / (1.0 + sup);
    const double d = y + (n == 0 ? 0.0 : eps * d_prev);
    rep.distances.push_back(d);
    if (n > 0 && d_prev > 0.0) rep.ratios.push_back(d / d_prev);
    d_prev = d;
  }
  if (!rep.ratios.empty()) {
    std::vector<double> late(rep.ratios.begin() + static_cast<std::ptrdiff_t>(rep.ratios.size() / 2),
                             rep.ratios.end());
    std::nth_element(late.begin(), late.begin() + static_cast<std::ptrdiff_t>(late.size() / 2), late.end());
    rep.theta_hat = late[late.size() / 2];
  }
  rep.contracting = rep.theta_hat < 1.0;
  rep.tail_uncertainty = std::pow(eps, static_cast<double>(iterations)) / (1.0 - eps);

  const auto& last = values[iterations];
  const auto& next = values[iterations + 1];
  for (std::size_t s = 0; s < pts.size(); ++s) {
    const Complex g = mu + last[s];
    rep.fixed_point_residual =
        std::max(rep.fixed_point_residual, std::abs(next[s] - last[s]) / std::max(1.0, std::abs(g)));
    const auto f = poincare_eval(model, pts[s]);
    rep.poincare_distance = std::max(rep.poincare_distance, f ? std::abs(f.value() - g) : kInf);
  }
  if (std::isnan(rep.fixed_point_residual)) rep.fixed_point_residual = kInf;
  if (std::isnan(rep.poincare_distance)) rep.poincare_distance = kInf;
  rep.pass = rep.contracting && rep.fixed_point_residual <= kFixedPointTolerance &&
             rep.poincare_distance <= kPoincareAgreement;
  return rep;
}

Complex Window::pixel_center(std::size_t i, std::size_t j, std::size_t width, std::size_t height) const {
  const double x = x0 + (static_cast<double>(i) + 0.5) * (x1 - x0) / static_cast<double>(width);
  const double y = y1 - (static_cast<double>(j) + 0.5) * (y1 - y0) / static_cast<double>(height);
  return {x, y};
}

int orbit_escape_time(Complex lambda, int max_iter, double escape_radius) {
  Complex z(0.0, 0.0);
  for (int t = 1; t <= max_iter; ++t) {
    const auto next = exp_affine(lambda, z);
    if (next.escaped()) return t;
    z = next.value();
    if (std::abs(z) > escape_radius) return t;
  }
  return -1;
}

BoundednessMap lambda_orbit_scan(const Window& window, std::size_t width, std::size_t height, int max_iter,
                                 double escape_radius) {
  if (width < 1 || height < 1) throw std::invalid_argument("scan resolution must be at least 1x1");
  if (!(escape_radius > std::exp(1.0))) throw std::invalid_argument("escape radius must exceed e");
  BoundednessMap map;
  map.width = width;
  map.height = height;
  map.window = window;
  map.escape_time.assign(width * height, -1);
  parallel_for(height, [&](std::size_t j) {
    for (std::size_t i = 0; i < width; ++i) {
      map.escape_time[j * width + i] =
          orbit_escape_time(window.pixel_center(i, j, width, height), max_iter, escape_radius);
    }
  });
  return map;
}

}  // namespace exptower
