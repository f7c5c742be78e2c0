#pragma once

// Truncated complex power series. A series of degree D holds D + 1 coefficients.

#include <vector>

#include "exptower/analytic.hpp"

namespace exptower::series {

using Series = std::vector<Complex>;

Series truncate(Series a, std::size_t degree);
Series multiply(const Series& a, const Series& b, std::size_t degree);
/// 1 / a; requires a[0] != 0.
Series reciprocal(const Series& a, std::size_t degree);
/// exp(a) for any constant term.
Series exp(const Series& a, std::size_t degree);
/// f(g(z)); requires g[0] == 0.
Series compose(const Series& f, const Series& g, std::size_t degree);
/// Compositional inverse by Lagrange inversion; requires a[0] == 0, a[1] != 0.
Series revert(const Series& a, std::size_t degree);
Complex evaluate(const Series& a, Complex z);
Complex evaluate_derivative(const Series& a, Complex z);

}  // namespace exptower::series
