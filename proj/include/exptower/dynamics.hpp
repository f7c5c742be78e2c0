#pragma once

// Orbits of constructed functions, postsingular orbits, the prescribed
// multiplier and empty-Fatou-set scenarios, and escape-time grids.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "exptower/analytic.hpp"
#include "exptower/poincare.hpp"
#include "exptower/tower.hpp"

namespace exptower {

struct MapStep {
  Evaluation value;
  bool certified = true;  // argument inside the disk where the approximation is bounded
};

using IterableMap = std::function<MapStep(Complex)>;

IterableMap exponential_map(Complex lambda);
IterableMap constant_map(Complex c);
/// z -> F_0(scale z) through eval_limit; certified while |scale z| <= r_N.
IterableMap tower_map(const TowerModel& model, Complex scale = {1.0, 0.0});

enum class OrbitStatus { bounded, escaped, puncture, uncertified };

std::string to_string(OrbitStatus s);

struct OrbitRecord {
  Complex start;
  std::vector<Complex> points;  // points[0] = start
  OrbitStatus status = OrbitStatus::bounded;
  std::size_t stop_step = 0;    // step at which the status was decided (0 when bounded)
};

/// T steps from z0, stopping at escape past escape_radius, a puncture, or the
/// first uncertified evaluation.
OrbitRecord iterate_orbit(const IterableMap& f, Complex z0, std::size_t steps,
                          double escape_radius = kDefaultEscapeRadius);

/// One record per singular point, K steps each.
std::vector<OrbitRecord> postsingular_orbit(const IterableMap& f, const std::vector<Complex>& singular_points,
                                            std::size_t steps);
/// Singular points E_{(0,k)}(0), k = 0..N, under F_0.
std::vector<OrbitRecord> postsingular_orbit(const TowerModel& model, std::size_t steps);

struct NewtonResult {
  Complex root;
  Complex start;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct Example2Result {
  Complex target_multiplier;  // lambda*
  Complex mu1;                // square root of lambda* actually used
  Complex t0;
  Complex f_at_1;
  Complex derivative_at_1;    // g'(1)^2
  double multiplier_error = 0.0;
  bool certified = false;     // |t0| <= r_N
  std::vector<NewtonResult> attempts;
  bool ok = false;
  std::string diagnostic;
};

inline constexpr double kExample2Tolerance = 1e-8;

/// f = g o g with g(z) = F_0(t0 z) / F_0(t0) and t0 F_0'(t0) / F_0(t0) = sqrt(lambda*).
Example2Result example2_construct(const TowerModel& model, Complex target_multiplier);
/// f itself for a solved scenario.
IterableMap example2_map(const TowerModel& model, Complex t0);

struct Example3Result {
  BuiltTower tower;
  std::vector<Complex> lambdas;
  double tolerance = 0.0;
  double max_deviation_from_exp = 0.0;  // sampled sup |F_0 - e^z| on |z| <= 4 pi
  Complex lambda_star;
  Complex f_at_0;
  Complex f_at_1;
  Complex derivative_at_1;  // lambda* F_0'(lambda*)
  double multiplier_margin = 0.0;  // |f'(1)| - 1
  std::vector<NewtonResult> attempts;
  std::vector<OrbitRecord> postsingular;
  bool ok = false;
  std::string diagnostic;
};

inline constexpr double kExample3Radius = 4.0 * kPi;

/// Tower over V = {0, 1} within `tolerance` of e^z on the disk of radius 4 pi,
/// then F_0(lambda*) = 1 near 2 pi i and f(z) = F_0(lambda* z).
Example3Result example3_construct(double tolerance = 0.1, std::size_t depth = 4);
IterableMap example3_map(const TowerModel& model, Complex lambda_star);

struct GridJob {
  Window window{-2.0, -2.0, 2.0, 2.0};
  std::size_t width = 64;
  std::size_t height = 64;
  int max_iter = 64;
  double escape_radius = kDefaultEscapeRadius;
  IterableMap function;

  void validate() const;
};

inline constexpr int kBoundedMarker = -1;
inline constexpr int kUncertifiedMarker = -2;

struct EscapeGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  Window window;
  std::vector<int> values;  // escape step, kBoundedMarker or kUncertifiedMarker; row-major

  int at(std::size_t i, std::size_t j) const { return values[j * width + i]; }
};

/// Pixel value of an orbit record under the grid's marker convention.
int grid_value(const OrbitRecord& r);

EscapeGrid escape_grid(const GridJob& job);

}  // namespace exptower
