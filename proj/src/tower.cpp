#include "exptower/tower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace exptower {

namespace {

constexpr double kOverflow = NumericContract::overflow_log_magnitude;

Complex product_of(std::span<const Complex> b, std::size_t n) {
  Complex p(1.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) p *= b[j];
  return p;
}

// Deviations u_j with f_{j,n}(z) = b_j + u_j, for j = lowest..n.
struct Sweep {
  std::vector<Complex> u;  // u[j - lowest]
  bool escaped = false;
  std::size_t stage = 0;
  double log_magnitude = 0.0;
};

Sweep deviation_sweep(std::span<const Complex> b, std::size_t n, std::size_t lowest, Complex z) {
  Sweep s;
  s.u.assign(n - lowest + 1, Complex{});
  Complex u = z / product_of(b, n);
  s.u[n - lowest] = u;
  for (std::size_t j = n; j > lowest; --j) {
    const double lm = std::log(std::abs(b[j - 1])) + u.real();
    if (u.real() > kOverflow || lm > kOverflow) {
      s.escaped = true;
      s.stage = j;
      s.log_magnitude = lm;
      return s;
    }
    u = b[j - 1] * exptower::expm1(u);
    if (!std::isfinite(u.real()) || !std::isfinite(u.imag())) {
      s.escaped = true;
      s.stage = j;
      s.log_magnitude = lm;
      return s;
    }
    s.u[j - 1 - lowest] = u;
  }
  return s;
}

std::vector<Complex> circle_samples(double radius, std::size_t samples) {
  std::vector<Complex> pts;
  pts.reserve(samples + 1);
  pts.emplace_back(0.0, 0.0);
  if (radius <= 0.0) return pts;
  for (std::size_t s = 0; s < samples; ++s) {
    const double t = kTwoPi * static_cast<double>(s) / static_cast<double>(samples);
    pts.push_back(std::polar(radius, t));
  }
  return pts;
}

// Max over k <= n of |f_{k,n+1} - f_{k,n}| on the sample set; uses b_0..b_n only.
GapEstimate gap_over(std::span<const Complex> b, std::size_t k_lo, std::size_t n,
                     const std::vector<Complex>& pts) {
  GapEstimate g;
  for (const auto& z : pts) {
    const Sweep next = deviation_sweep(b, n + 1, k_lo, z);
    const Sweep cur = deviation_sweep(b, n, k_lo, z);
    if (next.escaped || cur.escaped) {
      g.unbounded = true;
      g.value = std::numeric_limits<double>::infinity();
      return g;
    }
    for (std::size_t k = k_lo; k <= n; ++k) {
      g.value = std::max(g.value, std::abs(next.u[k - k_lo] - cur.u[k - k_lo]));
    }
  }
  return g;
}

// max over k <= n of |f'_{k,n}| on the sample set: f'_{k,n} = exp(u_{k+1} + ... + u_n) / P_k.
double lipschitz_over(std::span<const Complex> b, std::size_t n, const std::vector<Complex>& pts) {
  double best = 0.0;
  for (const auto& z : pts) {
    const Sweep s = deviation_sweep(b, n, 0, z);
    if (s.escaped) return std::numeric_limits<double>::infinity();
    Complex tail(0.0, 0.0);
    Complex pk = product_of(b, n);
    for (std::size_t k = n + 1; k-- > 0;) {
      if (k < n) {
        tail += s.u[k + 1];
        pk /= b[k];
      }
      best = std::max(best, std::exp(tail.real()) / std::abs(pk));
    }
  }
  return best;
}

}  // namespace

Complex TowerModel::product(std::size_t n) const { return product_of(b, n); }

double TowerModel::log_product_modulus(std::size_t n) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += std::log(std::abs(b.at(j)));
  return s;
}

double TowerModel::tail_bound() const { return eps.empty() ? 2.0 : 2.0 * eps.back(); }

double BuildRules::eps(std::size_t n) const {
  return std::ldexp(eps_scale, -static_cast<int>(n));
}

BuildRules BuildRules::covering(double disk_radius, double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("covering: tolerance must be positive");
  BuildRules r;
  r.radius_offset = std::max(0.0, std::ceil(disk_radius) - 1.0);
  r.eps_scale = std::min(1.0, 0.5 * tolerance);
  return r;
}

BuiltTower build_tower(std::span<const Complex> lambdas, std::size_t depth, const BuildRules& rules) {
  if (depth > lambdas.size()) throw std::invalid_argument("build_tower: depth exceeds lambdas");
  if (!(rules.eps_scale > 0.0 && rules.eps_scale <= 1.0)) {
    throw std::invalid_argument("build_tower: eps_scale must lie in (0, 1]");
  }
  if (!(rules.radius_offset >= 0.0) || rules.radius_offset != std::floor(rules.radius_offset)) {
    throw std::invalid_argument("build_tower: radius_offset must be a non-negative integer");
  }
  for (std::size_t n = 0; n < depth; ++n) {
    if (lambdas[n] == Complex(0.0, 0.0)) throw BuildError(n + 1, "lambda_" + std::to_string(n + 1) + " = 0");
  }

  BuiltTower out;
  TowerModel& model = out.model;
  TowerBuildDiagnostics& diag = out.diagnostics;
  model.lambdas.assign(lambdas.begin(), lambdas.begin() + static_cast<std::ptrdiff_t>(depth));
  model.b.push_back({1.0, 0.0});
  model.radii.push_back(rules.radius(0));
  model.eps.push_back(rules.eps(0));

  // Level 0 compares f_{0,1} = e^z with f_{0,0} = 1 + z; no m_n influences it.
  {
    const auto pts = circle_samples(model.radii[0], rules.boundary_samples);
    diag.gap_norms.push_back(gap_over(model.b, 0, 0, pts).value);
    diag.lipschitz_estimates.push_back(lipschitz_over(model.b, 0, pts));
    diag.cn_estimates.push_back(diag.gap_norms[0]);
    diag.mn_trials.push_back(0);
  }

  double log_product = 0.0;  // log|b_0 ... b_{n-1}|
  std::int64_t prev_m = 0;
  for (std::size_t n = 1; n <= depth; ++n) {
    const Complex base = principal_log(model.b[n - 1]) - principal_log(model.lambdas[n - 1]);
    const double rn = rules.radius(n);
    const double en = rules.eps(n);
    const auto pts = circle_samples(rn, rules.boundary_samples);
    model.radii.push_back(rn);
    model.eps.push_back(en);

    std::int64_t mn = std::max<std::int64_t>(prev_m + 1, 2);
    int trials = 0;
    GapEstimate gap;
    for (;;) {
      const Complex bn = base + Complex(0.0, kTwoPi * static_cast<double>(mn));
      if (log_product + std::log(std::abs(bn)) > kMaxLogProduct) {
        throw BuildError(n, "product b_0...b_n overflows at level " + std::to_string(n));
      }
      model.b.push_back(bn);
      gap = gap_over(model.b, 0, n, pts);
      if (!gap.unbounded && gap.value <= en) break;
      model.b.pop_back();
      ++trials;
      if (mn > kMaxIndex / 2) {
        throw BuildError(n, "m_" + std::to_string(n) + " exceeds 2^40 without meeting the gap bound " +
                                "(last gap " + std::to_string(gap.value) + ")");
      }
      mn *= 2;
    }
    model.m.push_back(mn);
    prev_m = mn;
    log_product += std::log(std::abs(model.b[n]));

    diag.gap_norms.push_back(gap.value);
    diag.lipschitz_estimates.push_back(lipschitz_over(model.b, n, pts));
    diag.cn_estimates.push_back(gap.value * std::abs(model.b[n]));
    diag.mn_trials.push_back(trials);
  }
  return out;
}

Evaluation eval_truncation(const TowerModel& model, std::size_t k, std::size_t n, Complex z) {
  if (k > n || n > model.depth()) throw std::out_of_range("eval_truncation: need k <= n <= depth");
  const Sweep s = deviation_sweep(model.b, n, k, z);
  if (s.escaped) return Evaluation::escape(s.stage, s.log_magnitude);
  return Evaluation::finite(model.b[k] + s.u[0]);
}

Evaluation eval_deviation(const TowerModel& model, std::size_t k, std::size_t n, Complex z) {
  if (k > n || n > model.depth()) throw std::out_of_range("eval_deviation: need k <= n <= depth");
  const Sweep s = deviation_sweep(model.b, n, k, z);
  if (s.escaped) return Evaluation::escape(s.stage, s.log_magnitude);
  return Evaluation::finite(s.u[0]);
}

Evaluation eval_derivative(const TowerModel& model, std::size_t n, Complex z) {
  if (n > model.depth()) throw std::out_of_range("eval_derivative: n beyond depth");
  const Sweep s = deviation_sweep(model.b, n, 0, z);
  if (s.escaped) return Evaluation::escape(s.stage, s.log_magnitude);
  // Each factor f_{k,n}(z) / b_k equals e^{u_{k+1}}.
  Complex result(1.0, 0.0);
  double lm = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    lm += s.u[k + 1].real();
    if (lm > kOverflow) return Evaluation::escape(k + 1, lm);
    result *= std::exp(s.u[k + 1]);
  }
  return Evaluation::finite(result);
}

std::optional<Jet> eval_jet(const TowerModel& model, std::size_t n, Complex z) {
  if (n > model.depth()) throw std::out_of_range("eval_jet: n beyond depth");
  if (n == 0) return Jet{model.b[0] + z, {1.0, 0.0}, {0.0, 0.0}};
  const Complex p = model.product(n);
  Complex u = z / p;
  Complex du = 1.0 / p;
  Complex d2u(0.0, 0.0);
  for (std::size_t j = n; j > 1; --j) {
    const Complex bj = model.b[j - 1];
    if (u.real() > kOverflow || std::log(std::abs(bj)) + u.real() > kOverflow) return std::nullopt;
    const Complex e = std::exp(u);
    d2u = bj * e * (du * du + d2u);
    du = bj * e * du;
    u = bj * exptower::expm1(u);
  }
  if (std::log(std::abs(model.b[0])) + u.real() > kOverflow) return std::nullopt;
  const Complex f = model.b[0] * std::exp(u);
  return Jet{f, f * du, f * (du * du + d2u)};
}

GapEstimate sup_norm_gap(const TowerModel& model, std::size_t k, std::size_t n, std::size_t samples) {
  if (k > n || n > model.depth()) throw std::out_of_range("sup_norm_gap: need k <= n <= depth");
  const auto pts = circle_samples(model.radii.at(n), samples);
  return gap_over(std::span<const Complex>(model.b).first(n + 1), k, n, pts);
}

LimitValue eval_limit(const TowerModel& model, Complex z) {
  const std::size_t n = model.depth();
  return {eval_truncation(model, 0, n, z), model.tail_bound(), std::abs(z) <= model.radii.at(n)};
}

std::optional<double> semiconjugacy_residual(const TowerModel& model, std::size_t k, std::size_t n,
                                             Complex z) {
  if (k >= n) throw std::out_of_range("semiconjugacy_residual: need k < n");
  const auto lhs = eval_truncation(model, k, n, z);
  const auto inner = eval_truncation(model, k + 1, n, z);
  if (!lhs || !inner) return std::nullopt;
  const auto rhs = exp_affine(model.lambda(k + 1), inner.value());
  if (!rhs) return std::nullopt;
  return std::abs(lhs.value() - rhs.value()) / std::max(1.0, std::abs(lhs.value()));
}

double backbone_tolerance(Complex bn) {
  return 1e-12 + 8.0 * NumericContract::precision * std::abs(bn);
}

InvariantReport check_invariants(const TowerModel& model) {
  InvariantReport r;
  const std::size_t n = model.depth();
  auto fail = [&r](std::string msg) {
    r.pass = false;
    r.problems.push_back(std::move(msg));
  };
  if (model.m.size() != n || model.b.size() != n + 1 || model.radii.size() != n + 1 ||
      model.eps.size() != n + 1) {
    r.shape_ok = false;
    fail("vector lengths do not match depth " + std::to_string(n));
    return r;
  }
  if (model.b[0] != Complex(1.0, 0.0)) fail("b_0 != 1");
  for (std::size_t j = 1; j <= n; ++j) {
    const Complex lam = model.lambda(j);
    if (lam == Complex(0.0, 0.0) || model.b[j - 1] == Complex(0.0, 0.0)) {
      fail("zero lambda or backbone entry at level " + std::to_string(j));
      continue;
    }
    const Complex expected = Complex(0.0, kTwoPi * static_cast<double>(model.index(j))) +
                             principal_log(model.b[j - 1]) - principal_log(lam);
    const double rec = std::abs(model.b[j] - expected);
    r.max_recurrence_residual = std::max(r.max_recurrence_residual, rec);
    if (rec > 10.0 * NumericContract::precision * std::max(1.0, std::abs(model.b[j]))) {
      fail("b_" + std::to_string(j) + " does not follow its recurrence");
    }
    const auto e = exp_affine(lam, model.b[j]);
    const double bb = e ? std::abs(e.value() - model.b[j - 1]) / std::abs(model.b[j - 1])
                        : std::numeric_limits<double>::infinity();
    r.max_backbone_residual = std::max(r.max_backbone_residual, bb);
    if (!(bb <= backbone_tolerance(model.b[j]))) {
      fail("backbone E_lambda(b_" + std::to_string(j) + ") != b_" + std::to_string(j - 1));
    }
    if (model.index(j) < 1 || (j > 1 && model.index(j) <= model.index(j - 1))) {
      r.ordering_ok = false;
      fail("m is not strictly increasing at level " + std::to_string(j));
    }
  }
  for (std::size_t j = 0; j <= n; ++j) {
    if (j > 0 && !(model.radii[j] > model.radii[j - 1])) {
      r.ordering_ok = false;
      fail("radii not increasing at level " + std::to_string(j));
    }
    if (!(model.eps[j] > 0.0 && model.eps[j] <= std::ldexp(1.0, -static_cast<int>(j)))) {
      r.ordering_ok = false;
      fail("eps_" + std::to_string(j) + " outside (0, 2^-n]");
    }
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const auto f = eval_truncation(model, 0, j, {0.0, 0.0});
    const auto d = eval_derivative(model, j, {0.0, 0.0});
    const double err = (f && d) ? std::max(std::abs(f.value() - 1.0), std::abs(d.value() - 1.0))
                                : std::numeric_limits<double>::infinity();
    r.max_normalization_error = std::max(r.max_normalization_error, err);
    if (!(err <= 1e-10)) fail("normalization f_{0,n}(0) = f'_{0,n}(0) = 1 fails at n = " + std::to_string(j));
  }
  return r;
}

}  // namespace exptower
