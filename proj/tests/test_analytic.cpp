#include "doctest.h"

#include <cmath>
#include <complex>

#include "exptower/analytic.hpp"
#include "support/generators.hpp"

using namespace exptower;
using exptower::testing::for_all;
using exptower::testing::Gen;
using exptower::testing::rel_err;

namespace {

using LComplex = std::complex<long double>;

// Power series of e^w - 1 in long double.
Complex expm1_series(Complex w) {
  const LComplex x(w.real(), w.imag());
  LComplex term = x, sum = 0;
  for (int k = 1; k < 40; ++k) {
    sum += term;
    term *= x / static_cast<long double>(k + 1);
  }
  return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

// Mercator series of log(1 + w) in long double.
Complex log1p_series(Complex w) {
  const LComplex x(w.real(), w.imag());
  LComplex power = x, sum = 0;
  for (int k = 1; k < 80; ++k) {
    sum += (k % 2 == 1 ? 1.0L : -1.0L) * power / static_cast<long double>(k);
    power *= x;
  }
  return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

}  // namespace

TEST_CASE("principal_log on the documented points") {
  CHECK(std::abs(principal_log(1.0)) == 0.0);
  CHECK(rel_err(principal_log(-1.0), {0.0, kPi}) <= 1e-15);
  CHECK(rel_err(principal_log(-std::exp(1.0)), {1.0, kPi}) <= 1e-15);
  CHECK_THROWS_AS(principal_log(0.0), DomainError);
}

TEST_CASE("principal_log inverts exp with argument in (-pi, pi]") {
  for_all(11, 500, [](Gen& g, int) {
    const Complex z = g.with_modulus(1e-6, 1e6);
    const Complex l = principal_log(z);
    CHECK(l.imag() > -kPi);
    CHECK(l.imag() <= kPi);
    CHECK(rel_err(std::exp(l), z) <= 1e-14 * std::max(1.0, std::abs(z)));
    CHECK(std::abs(l.real() - std::log(std::abs(z))) <= 1e-14 * std::max(1.0, std::abs(l)));
  });
}

TEST_CASE("expm1 and log1p agree with long double series for small arguments") {
  for_all(12, 400, [](Gen& g, int) {
    const Complex w = g.in_disk(0.3);
    CHECK(std::abs(exptower::expm1(w) - expm1_series(w)) <= 4e-16 * std::abs(w) + 1e-300);
    CHECK(std::abs(exptower::log1p(w) - log1p_series(w)) <= 4e-16 * std::abs(w) + 1e-300);
  });
  const Complex tiny(1e-20, -3e-21);
  CHECK(std::abs(exptower::expm1(tiny) - tiny) <= 1e-35);
  CHECK(std::abs(exptower::log1p(tiny) - tiny) <= 1e-35);
}

TEST_CASE("expm1 and log1p are mutually inverse away from the cut") {
  for_all(13, 400, [](Gen& g, int) {
    const Complex w = g.in_disk(2.0);
    CHECK(std::abs(exptower::log1p(exptower::expm1(w)) - w) <= 1e-14 * std::max(1.0, std::abs(w)));
    CHECK(std::abs(exptower::expm1(w) - (std::exp(w) - 1.0)) <= 1e-14 * std::max(1.0, std::abs(std::exp(w))));
  });
}

TEST_CASE("exp_affine") {
  CHECK(exp_affine(2.0, 0.0).value() == Complex(2.0, 0.0));
  CHECK(rel_err(exp_affine(1.0, {0.0, kPi}).value(), -1.0) <= 1e-15);
  CHECK(rel_err(exp_affine(1.0, {0.0, 6.0 * kPi}).value(), 1.0) <= 1e-14);
  const auto big = exp_affine(1.0, {800.0, 0.0});
  CHECK(big.escaped());
  CHECK(big.log_magnitude() == doctest::Approx(800.0));
  CHECK_THROWS_AS((void)big.value(), std::logic_error);
}

TEST_CASE("inverse_branch_step") {
  CHECK(rel_err(inverse_branch_step(1.0, 0, std::exp(1.0)), 1.0) <= 1e-15);
  CHECK(rel_err(inverse_branch_step(1.0, 1, 1.0), {0.0, kTwoPi}) <= 1e-15);
  CHECK(std::abs(inverse_branch_step(2.0, 0, 2.0)) <= 1e-15);
  CHECK_THROWS_AS(inverse_branch_step(1.0, 0, 0.0), DomainError);

  for_all(14, 300, [](Gen& g, int) {
    const Complex lambda = g.with_modulus(0.1, 10.0);
    const Complex z = g.with_modulus(1e-3, 1e3);
    const auto k = static_cast<std::int64_t>(g.integer(-50, 50));
    const Complex w = inverse_branch_step(lambda, k, z);
    CHECK(rel_err(exp_affine(lambda, w).value(), z) <= 1e-12 * std::max(1.0, std::abs(z)));
    CHECK(std::abs(w.imag() - (principal_log(z) - principal_log(lambda)).imag() - kTwoPi * static_cast<double>(k)) <=
          1e-12 * std::max(1.0, std::abs(w)));
  });
}

TEST_CASE("forward_tower") {
  CHECK(forward_tower({}, {7.0, 2.0}).value() == Complex(7.0, 2.0));
  const std::vector<Complex> ones{1.0, 1.0};
  CHECK(rel_err(forward_tower(ones, 0.0).value(), std::exp(1.0)) <= 1e-15);
  const std::vector<Complex> mixed{1.0, {0.0, kTwoPi}};
  CHECK(rel_err(forward_tower(mixed, 0.0).value(), 1.0) <= 1e-14);

  const std::vector<Complex> tall{1.0, 1.0, 1.0, 1.0, 1.0};
  const auto e = forward_tower(tall, 0.0);
  REQUIRE(e.escaped());
  CHECK(e.stage() == 1);
}

TEST_CASE("inverse_tower") {
  const std::vector<Complex> one{1.0};
  CHECK(rel_err(inverse_tower(one, BranchPath({0}), std::exp(1.0)), 1.0) <= 1e-15);
  CHECK(rel_err(inverse_tower(one, BranchPath({1}), 1.0), {0.0, kTwoPi}) <= 1e-15);
  const std::vector<Complex> two{1.0, 1.0};
  CHECK(std::abs(inverse_tower(two, BranchPath({0, 0}), std::exp(1.0))) <= 1e-15);

  try {
    (void)inverse_tower(std::vector<Complex>{1.0, 1.0, 1.0}, BranchPath({0, 0, 0}), std::exp(1.0));
    FAIL("expected a puncture");
  } catch (const PunctureError& e) {
    CHECK(e.stage() == 3);
  }
}

TEST_CASE("inverse_tower undoes forward_tower") {
  for_all(15, 200, [](Gen& g, int) {
    const std::size_t n = static_cast<std::size_t>(g.integer(1, 4));
    const auto lambdas = g.lambdas(n, 0.5, 2.0);
    std::vector<std::int64_t> idx;
    for (std::size_t i = 0; i < n; ++i) idx.push_back(g.integer(-3, 3));
    const Complex z = g.in_disk(1.0, {1.0, 0.5});
    const Complex w = inverse_tower(lambdas, BranchPath(idx), z);
    const auto back = forward_tower(lambdas, w);
    REQUIRE(back);
    CHECK(rel_err(back.value(), z) <= 1e-10);
  });
}

TEST_CASE("orbit_of_zero") {
  const std::vector<Complex> ones{1.0, 1.0, 1.0};
  const auto orbit = orbit_of_zero(ones, 3);
  REQUIRE(orbit.points.size() == 4);
  CHECK(orbit.points[0] == Complex{});
  CHECK(orbit.points[1] == Complex(1.0, 0.0));
  CHECK(rel_err(orbit.points[2], std::exp(1.0)) <= 1e-15);
  CHECK(orbit.points[3].real() == doctest::Approx(15.15426224).epsilon(1e-9));
  CHECK_FALSE(orbit.escaped_at);

  const std::vector<Complex> two{2.0};
  CHECK(orbit_of_zero(two, 1).points == std::vector<Complex>{0.0, 2.0});
  CHECK(orbit_of_zero(two, 0).points == std::vector<Complex>{0.0});

  const std::vector<Complex> tall{1.0, 1.0, 1.0, 1.0, 1.0};
  const auto esc = orbit_of_zero(tall, 5);
  REQUIRE(esc.escaped_at);
  CHECK(*esc.escaped_at == 5);
  CHECK(esc.points.size() == 5);
}

TEST_CASE("orbit_of_zero matches direct iteration") {
  for_all(16, 100, [](Gen& g, int) {
    const auto lambdas = g.lambdas(6, 0.1, 1.0);
    const auto orbit = orbit_of_zero(lambdas, lambdas.size());
    Complex z = 0.0;
    for (std::size_t k = 1; k < orbit.points.size(); ++k) {
      // E_{(0,k)}(0) = E_{lambda_1} o ... o E_{lambda_k}(0): innermost is lambda_k.
      Complex w = 0.0;
      for (std::size_t j = k; j >= 1; --j) w = lambdas[j - 1] * std::exp(w);
      z = w;
      CHECK(rel_err(orbit.points[k], z) <= 1e-12);
    }
  });
}

TEST_CASE("BranchPath") {
  const BranchPath p({3, -1, 4});
  CHECK(p.length() == 3);
  CHECK(p.at(1) == 3);
  CHECK(p.at(3) == 4);
  CHECK(p.prefix(2) == BranchPath({3, -1}));
  CHECK(p.prefix(0).empty());
  CHECK(p.appended(7) == BranchPath({3, -1, 4, 7}));
  CHECK_THROWS(p.prefix(4));
  CHECK_THROWS(p.at(0));
}
