#pragma once

// Poincare functions f(mu w) = lambda e^{f(w)} of E_lambda, lambda = mu e^{-mu},
// through the Koenigs map of phi = F^{-1} o E_lambda o F, the operator
// Phi_mu(F)(z) = E_lambda(F(z / mu)), the metric on class-E functions, and a
// scan of the parameter plane for bounded orbits of 0.

#include <functional>
#include <string>
#include <vector>

#include "exptower/analytic.hpp"
#include "exptower/series.hpp"
#include "exptower/tower.hpp"

namespace exptower {

using ComplexMap = std::function<Complex(Complex)>;

class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// mu e^{-mu}.
Complex lambda_of(Complex mu);

/// An entire function with derivative and Taylor data at 0.
struct AnalyticFunction {
  std::string name;
  ComplexMap value;
  ComplexMap deviation;  // F(z) - F(0), accurate near 0
  ComplexMap derivative;
  series::Series taylor;  // exact coefficients when known; empty means "sample them"

  /// Taylor coefficients to `degree`: exact ones when stored, else a Cauchy
  /// transform on the circle of radius `radius`.
  series::Series coefficients(std::size_t degree, double radius = 0.5) const;
};

/// mu + a z.
AnalyticFunction affine_seed(Complex mu, Complex a = {1.0, 0.0});
/// c_0 + c_1 z + ... with c_0 playing the role of mu.
AnalyticFunction polynomial_seed(series::Series coefficients);
/// mu F_0(z) for the limit F_0 of a built tower (F_0(0) = 1, F_0'(0) = 1).
AnalyticFunction tower_seed(Complex mu, const TowerModel& model);

/// A germ phi with phi(0) = 0 given by its Taylor data and an evaluator.
struct Dynamics {
  series::Series taylor;
  ComplexMap value;
};

struct KoenigsFit {
  series::Series coeffs;  // psi, psi_1 = 1
  double residual = 0.0;  // sup |psi(phi(z)) - mu psi(z)| on |z| = r/2
};

/// psi_k = sum_{j<k} psi_j [z^k] phi^j / (mu - mu^k), k = 2..degree.
KoenigsFit koenigs_map(Complex mu, const Dynamics& phi, double radius, std::size_t degree);

struct PoincareOptions {
  std::size_t initial_degree = 8;
  std::size_t max_degree = 128;
  double target_residual = 1e-10;
  int max_radius_halvings = 6;
};

struct PoincareModel {
  Complex mu;
  Complex lambda;
  double koenigs_radius = 0.0;
  std::size_t degree = 0;
  series::Series koenigs_coeffs;   // psi
  series::Series inverse_coeffs;   // psi^{-1}
  series::Series phi_coeffs;
  double koenigs_residual = 0.0;
  double reversion_residual = 0.0;  // sup |psi(psi^{-1}(w)) - w| on |w| = r/2
  bool residual_met = false;
  AnalyticFunction seed;

  /// F(psi^{-1}(w)) without any push-forward.
  Complex local_eval(Complex w) const;
};

/// Fits the Koenigs map of F^{-1} o E_lambda o F with adaptive degree and radius.
/// Throws UnsupportedError when |mu| <= 1, F(0) != mu or F'(0) = 0.
PoincareModel build_poincare_model(Complex mu, const AnalyticFunction& seed,
                                   const PoincareOptions& options = {});

/// lambda e^{F(z / mu)}.
Evaluation phi_operator(Complex mu, const ComplexMap& f, Complex z);

/// f(w) = Phi_mu^n(F o psi^{-1})(w) for the smallest n with |w / mu^n| <= r/2.
Evaluation poincare_eval(const PoincareModel& model, Complex w);

/// max |f(mu w) - lambda e^{f(w)}| / max(1, |f(mu w)|) over `samples` points of the
/// annulus r/2 < |w| <= r, with f(w) taken from the local expansion.
double functional_equation_residual(const PoincareModel& model, std::size_t samples = 200);

/// g_n = Phi_mu^n(F) evaluated as E_lambda^n(F(z / mu^n)) in deviation form.
Evaluation phi_iterate(Complex mu, const AnalyticFunction& seed, std::size_t n, Complex z);

/// A function together with its level functions F_k from the tower identity.
struct LeveledFunction {
  std::function<Evaluation(std::size_t, Complex)> level;
  std::size_t levels = 0;  // highest accessible k
  bool constant = false;
};

/// Levels f_{k,N}(scale z) of a built tower; scale 1 gives F_0 itself.
LeveledFunction tower_levels(const TowerModel& model, double scale = 1.0);
/// Levels of Phi_mu^n(F): g_{n-k}(z / mu^k) for k <= n.
LeveledFunction phi_iterate_levels(Complex mu, const AnalyticFunction& seed, std::size_t n);

struct MetricConfig {
  std::function<double(std::size_t)> radius;  // K_k = closed disk of this radius
  double eps = 0.5;
  std::size_t truncation = 8;
  std::size_t samples = 256;

  /// K_k = Delta_{k+1}.
  static MetricConfig linear(double eps = 0.5, std::size_t truncation = 8);
  /// K_k = Delta_{r mu^k}.
  static MetricConfig geometric(double r, Complex mu, double eps, std::size_t truncation);
  void validate() const;
};

struct MetricValue {
  double value = 0.0;
  std::vector<double> terms;  // eps^k x / (1 + x)
  double tail_bound = 0.0;    // eps^{J+1} / (1 - eps)
};

/// Truncated sum of eps^k ||F_k - G_k|| / (1 + ||F_k - G_k||) over k <= J.
/// Throws UnsupportedError for constant inputs.
MetricValue metric_d(const LeveledFunction& f, const LeveledFunction& g, const MetricConfig& cfg);

struct ContractionReport {
  std::vector<double> sup_gaps;   // ||g_{n+1} - g_n|| on Delta_r
  std::vector<double> distances;  // d(g_{n+1}, g_n)
  std::vector<double> ratios;
  double theta_hat = 0.0;
  double tail_uncertainty = 0.0;  // seed-level terms left out of each distance
  double fixed_point_residual = 0.0;
  double poincare_distance = 0.0;
  bool contracting = false;
  bool pass = false;
};

inline constexpr double kFixedPointTolerance = 1e-6;
inline constexpr double kPoincareAgreement = 1e-5;

/// Iterates g_{n+1} = Phi_mu(g_n) from the model's seed and compares with poincare_eval.
ContractionReport contraction_check(const PoincareModel& model, std::size_t iterations = 40,
                                    double eps = 0.25, std::size_t samples = 128);

struct Window {
  double x0 = -1.0;
  double y0 = -1.0;
  double x1 = 1.0;
  double y1 = 1.0;

  /// Centre of pixel (i, j); row 0 is the top edge y1.
  Complex pixel_center(std::size_t i, std::size_t j, std::size_t width, std::size_t height) const;
};

struct BoundednessMap {
  std::size_t width = 0;
  std::size_t height = 0;
  Window window;
  std::vector<int> escape_time;  // row-major, -1 when bounded for max_iter steps

  int at(std::size_t i, std::size_t j) const { return escape_time[j * width + i]; }
};

inline constexpr double kDefaultEscapeRadius = 1e6;

/// Escape step of 0 -> lambda e^0 -> ... past escape_radius, or -1.
int orbit_escape_time(Complex lambda, int max_iter, double escape_radius);

BoundednessMap lambda_orbit_scan(const Window& window, std::size_t width, std::size_t height,
                                 int max_iter, double escape_radius = kDefaultEscapeRadius);

}  // namespace exptower
