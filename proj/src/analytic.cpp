#include "exptower/analytic.hpp"

#include <cmath>

namespace exptower {

BranchPath BranchPath::prefix(std::size_t len) const {
  if (len > indices_.size()) throw std::out_of_range("BranchPath::prefix beyond length");
  return BranchPath(std::vector<std::int64_t>(indices_.begin(), indices_.begin() + len));
}

BranchPath BranchPath::appended(std::int64_t k) const {
  auto copy = indices_;
  copy.push_back(k);
  return BranchPath(std::move(copy));
}

Complex principal_log(Complex z) {
  if (std::abs(z) <= NumericContract::puncture_modulus) throw DomainError("log of zero");
  double arg = std::atan2(z.imag(), z.real());
  // atan2 returns -pi for a negative real with imag == -0.0; the cut belongs to +pi.
  if (arg <= -kPi) arg = kPi;
  return {std::log(std::abs(z)), arg};
}

Complex expm1(Complex w) {
  const double x = w.real();
  const double y = w.imag();
  const double s = std::sin(0.5 * y);
  const double re = std::expm1(x) * std::cos(y) - 2.0 * s * s;
  const double im = std::exp(x) * std::sin(y);
  return {re, im};
}

Complex log1p(Complex w) {
  const double x = w.real();
  const double y = w.imag();
  if (std::abs(Complex(1.0 + x, y)) <= NumericContract::puncture_modulus) {
    throw DomainError("log of zero");
  }
  const double re = 0.5 * std::log1p(x * (2.0 + x) + y * y);
  double im = std::atan2(y, 1.0 + x);
  if (im <= -kPi) im = kPi;
  return {re, im};
}

Evaluation exp_affine(Complex lambda, Complex z) {
  const double lm = std::log(std::abs(lambda)) + z.real();
  if (lm > NumericContract::overflow_log_magnitude) return Evaluation::escape(1, lm);
  return Evaluation::finite(lambda * std::exp(z));
}

Complex inverse_branch_step(Complex lambda, std::int64_t k, Complex z) {
  if (std::abs(lambda) == 0.0) throw DomainError("inverse branch of E_0");
  return principal_log(z) - principal_log(lambda) + Complex(0.0, kTwoPi * static_cast<double>(k));
}

Evaluation forward_tower(std::span<const Complex> lambdas, Complex z) {
  for (const auto& l : lambdas) {
    if (l == Complex(0.0, 0.0)) throw std::invalid_argument("invalid tower: lambda = 0");
  }
  Complex w = z;
  for (std::size_t i = lambdas.size(); i-- > 0;) {
    auto step = exp_affine(lambdas[i], w);
    if (step.escaped()) return Evaluation::escape(i + 1, step.log_magnitude());
    w = step.value();
  }
  return Evaluation::finite(w);
}

Complex inverse_tower(std::span<const Complex> lambdas, const BranchPath& path, Complex z) {
  if (path.length() != lambdas.size()) {
    throw std::invalid_argument("inverse_tower: path length differs from tower depth");
  }
  Complex w = z;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (std::abs(w) <= NumericContract::puncture_modulus) {
      throw PunctureError(i + 1, "branch hits puncture at stage " + std::to_string(i + 1));
    }
    w = inverse_branch_step(lambdas[i], path.at(i + 1), w);
  }
  return w;
}

OrbitPrefix orbit_of_zero(std::span<const Complex> lambdas, std::size_t count) {
  if (count > lambdas.size()) throw std::invalid_argument("orbit_of_zero: count exceeds lambdas");
  OrbitPrefix out;
  out.points.reserve(count + 1);
  out.points.push_back({0.0, 0.0});
  for (std::size_t k = 1; k <= count; ++k) {
    auto e = forward_tower(lambdas.first(k), Complex(0.0, 0.0));
    if (e.escaped()) {
      out.escaped_at = k;
      break;
    }
    out.points.push_back(e.value());
  }
  return out;
}

}  // namespace exptower
