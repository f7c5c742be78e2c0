#include "exptower/series.hpp"

#include <stdexcept>

namespace exptower::series {

Series truncate(Series a, std::size_t degree) {
  a.resize(degree + 1, Complex{});
  return a;
}

Series multiply(const Series& a, const Series& b, std::size_t degree) {
  Series c(degree + 1, Complex{});
  for (std::size_t i = 0; i < a.size() && i <= degree; ++i) {
    if (a[i] == Complex{}) continue;
    for (std::size_t j = 0; j < b.size() && i + j <= degree; ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

Series reciprocal(const Series& a, std::size_t degree) {
  if (a.empty() || a[0] == Complex{}) throw std::domain_error("series reciprocal of a zero constant term");
  Series r(degree + 1, Complex{});
  r[0] = 1.0 / a[0];
  for (std::size_t k = 1; k <= degree; ++k) {
    Complex s{};
    for (std::size_t j = 1; j <= k && j < a.size(); ++j) s += a[j] * r[k - j];
    r[k] = -s * r[0];
  }
  return r;
}

Series exp(const Series& a, std::size_t degree) {
  // e' = a' e, solved term by term.
  Series e(degree + 1, Complex{});
  e[0] = a.empty() ? Complex(1.0, 0.0) : std::exp(a[0]);
  for (std::size_t k = 1; k <= degree; ++k) {
    Complex s{};
    for (std::size_t j = 1; j <= k && j < a.size(); ++j) s += static_cast<double>(j) * a[j] * e[k - j];
    e[k] = s / static_cast<double>(k);
  }
  return e;
}

Series compose(const Series& f, const Series& g, std::size_t degree) {
  if (!g.empty() && g[0] != Complex{}) throw std::domain_error("series composition needs g(0) = 0");
  Series out(degree + 1, Complex{});
  Series power(degree + 1, Complex{});
  power[0] = 1.0;
  for (std::size_t j = 0; j < f.size() && j <= degree; ++j) {
    for (std::size_t k = 0; k <= degree; ++k) out[k] += f[j] * power[k];
    power = multiply(power, g, degree);
  }
  return out;
}

Series revert(const Series& a, std::size_t degree) {
  if (a.size() < 2 || a[0] != Complex{} || a[1] == Complex{}) {
    throw std::domain_error("series reversion needs a(0) = 0 and a'(0) != 0");
  }
  // [z^k] h = (1/k) [z^{k-1}] (z / a(z))^k.
  const Series q = reciprocal(Series(a.begin() + 1, a.end()), degree);
  Series h(degree + 1, Complex{});
  Series qk(degree + 1, Complex{});
  qk[0] = 1.0;
  for (std::size_t k = 1; k <= degree; ++k) {
    qk = multiply(qk, q, degree);
    h[k] = qk[k - 1] / static_cast<double>(k);
  }
  return h;
}

Complex evaluate(const Series& a, Complex z) {
  Complex s{};
  for (std::size_t k = a.size(); k-- > 0;) s = s * z + a[k];
  return s;
}

Complex evaluate_derivative(const Series& a, Complex z) {
  Complex s{};
  for (std::size_t k = a.size(); k-- > 1;) s = s * z + static_cast<double>(k) * a[k];
  return s;
}

}  // namespace exptower::series
