#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "exptower/series.hpp"
#include "support/generators.hpp"

using namespace exptower;
using exptower::testing::for_all;
using exptower::testing::Gen;
namespace sr = exptower::series;

namespace {

double catalan(int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * 2.0 * (2.0 * i + 1.0) / (i + 2.0);
  return c;
}

sr::Series random_series(Gen& g, std::size_t degree, bool zero_constant) {
  sr::Series s(degree + 1);
  for (std::size_t k = 0; k <= degree; ++k) s[k] = g.in_disk(1.0 / static_cast<double>(k + 1));
  if (zero_constant) s[0] = 0.0;
  return s;
}

}  // namespace

TEST_CASE("exp of z has factorial coefficients") {
  const auto e = sr::exp({0.0, 1.0}, 12);
  double fact = 1.0;
  for (int k = 0; k <= 12; ++k) {
    if (k > 0) fact *= k;
    CHECK(std::abs(e[k] - 1.0 / fact) <= 1e-16);
  }
  const auto shifted = sr::exp({2.0, 1.0}, 4);
  CHECK(std::abs(shifted[0] - std::exp(2.0)) <= 1e-14);
  CHECK(std::abs(shifted[3] - std::exp(2.0) / 6.0) <= 1e-14);
}

TEST_CASE("reciprocal of 1 - z is the geometric series") {
  const auto r = sr::reciprocal({1.0, -1.0}, 10);
  for (int k = 0; k <= 10; ++k) CHECK(std::abs(r[k] - 1.0) <= 1e-15);
  CHECK_THROWS(sr::reciprocal({0.0, 1.0}, 3));
}

TEST_CASE("reversion of z + z^2 gives signed Catalan numbers") {
  const auto inv = sr::revert({0.0, 1.0, 1.0}, 12);
  for (int k = 1; k <= 12; ++k) {
    const double expected = (k % 2 == 1 ? 1.0 : -1.0) * catalan(k - 1);
    CHECK(std::abs(inv[k] - expected) <= 1e-12 * std::abs(expected));
  }
}

TEST_CASE("composition with the reversion is the identity") {
  for_all(51, 40, [](Gen& g, int) {
    auto a = random_series(g, 16, true);
    a[1] = g.with_modulus(0.5, 2.0);
    const auto inv = sr::revert(a, 16);
    const auto id = sr::compose(a, inv, 16);
    CHECK(std::abs(id[1] - 1.0) <= 1e-12);
    const double scale = 1.0 / std::min(1.0, std::abs(a[1]));
    for (std::size_t k = 2; k <= 16; ++k) CHECK(std::abs(id[k]) <= 1e-12 * std::pow(scale, k));
  });
}

TEST_CASE("multiply and evaluate agree with pointwise products") {
  for_all(52, 60, [](Gen& g, int) {
    const auto a = random_series(g, 8, false);
    const auto b = random_series(g, 8, false);
    const auto ab = sr::multiply(a, b, 16);
    const Complex z = g.in_disk(0.7);
    CHECK(std::abs(sr::evaluate(ab, z) - sr::evaluate(a, z) * sr::evaluate(b, z)) <= 1e-13);

    Complex direct = 0.0, power = 1.0;
    for (const auto& c : a) {
      direct += c * power;
      power *= z;
    }
    CHECK(std::abs(sr::evaluate(a, z) - direct) <= 1e-14);
    const double h = 1e-6;
    const Complex fd = (sr::evaluate(a, z + h) - sr::evaluate(a, z - h)) / (2.0 * h);
    CHECK(std::abs(sr::evaluate_derivative(a, z) - fd) <= 1e-8);
  });
}

TEST_CASE("compose requires a vanishing inner constant term") {
  CHECK_THROWS(sr::compose({1.0, 1.0}, {1.0, 1.0}, 4));
  CHECK(sr::truncate({1.0, 2.0, 3.0}, 1) == sr::Series{1.0, 2.0});
}
