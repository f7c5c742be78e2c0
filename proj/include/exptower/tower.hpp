#pragma once

// Truncations f_{k,n}(z) = E_{(k,n)}(b_n + z / (b_0 ... b_{n-1})) of an
// infinite exponential tower, and the adaptive choice of the integers m_n
// that makes them converge.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "exptower/analytic.hpp"

namespace exptower {

/// The constructed object. Level-indexed vectors hold entry n at index n;
/// lambdas and m are 1-based in the math and stored at index n - 1.
struct TowerModel {
  std::vector<Complex> lambdas;   // lambda_1 .. lambda_N
  std::vector<std::int64_t> m;    // m_1 .. m_N, strictly increasing
  std::vector<Complex> b;         // b_0 .. b_N, b_0 = 1
  std::vector<double> radii;      // r_0 .. r_N
  std::vector<double> eps;        // eps_0 .. eps_N, eps_n <= 2^-n

  std::size_t depth() const noexcept { return lambdas.size(); }
  Complex lambda(std::size_t n) const { return lambdas.at(n - 1); }
  std::int64_t index(std::size_t n) const { return m.at(n - 1); }

  /// b_0 b_1 ... b_{n-1} (empty product 1 for n = 0).
  Complex product(std::size_t n) const;
  /// log|b_0 ... b_{n-1}|.
  double log_product_modulus(std::size_t n) const;
  /// Sum of the remaining gaps beyond the last level, assuming eps keeps halving.
  double tail_bound() const;
};

/// Radius and tolerance schedules: r_n = n + radius_offset and eps_n = eps_scale * 2^-n.
struct BuildRules {
  double radius_offset = 0.0;
  double eps_scale = 1.0;
  std::size_t boundary_samples = 4096;

  double radius(std::size_t n) const { return static_cast<double>(n) + radius_offset; }
  double eps(std::size_t n) const;

  /// Rules under which the limit stays within `tolerance` of e^z on the closed
  /// disk of radius `disk_radius` (r_1 >= disk_radius, sum of eps_n < tolerance).
  static BuildRules covering(double disk_radius, double tolerance);
};

struct TowerBuildDiagnostics {
  std::vector<double> lipschitz_estimates;  // M_n, n = 0..N
  std::vector<double> gap_norms;            // max_k ||f_{k,n+1} - f_{k,n}|| on the r_n disk
  std::vector<double> cn_estimates;         // gap_norms[n] * |b_n|
  std::vector<int> mn_trials;               // doublings used per level
};

class BuildError : public std::runtime_error {
 public:
  BuildError(std::size_t level, const std::string& what) : std::runtime_error(what), level_(level) {}
  std::size_t level() const noexcept { return level_; }

 private:
  std::size_t level_;
};

struct BuiltTower {
  TowerModel model;
  TowerBuildDiagnostics diagnostics;
};

inline constexpr std::int64_t kMaxIndex = std::int64_t{1} << 40;
/// Deepest allowed log|b_0 ... b_n|.
inline constexpr double kMaxLogProduct = 600.0;

/// Chooses m_1..m_N by doubling from max(m_{n-1} + 1, 2) until the gap between
/// consecutive truncations is at most eps_n on the r_n disk for every k <= n.
BuiltTower build_tower(std::span<const Complex> lambdas, std::size_t depth,
                       const BuildRules& rules = {});

/// f_{k,n}(z) via the deviation recursion u_n = z / (b_0...b_{n-1}),
/// u_{j-1} = b_{j-1} (e^{u_j} - 1), which never forms b_j + small.
Evaluation eval_truncation(const TowerModel& model, std::size_t k, std::size_t n, Complex z);

/// f_{k,n}(z) - b_k without forming the sum.
Evaluation eval_deviation(const TowerModel& model, std::size_t k, std::size_t n, Complex z);

/// f'_{0,n}(z) = (1 / (b_0...b_{n-1})) prod_{k<n} f_{k,n}(z).
Evaluation eval_derivative(const TowerModel& model, std::size_t n, Complex z);

/// f_{0,n} together with its first two derivatives.
struct Jet {
  Complex value;
  Complex d1;
  Complex d2;
};
std::optional<Jet> eval_jet(const TowerModel& model, std::size_t n, Complex z);

struct GapEstimate {
  double value = 0.0;
  bool unbounded = false;  // an evaluation escaped on the sample circle
};

/// max |f_{k,n+1} - f_{k,n}| over `samples` points of |z| = r_n and the centre.
GapEstimate sup_norm_gap(const TowerModel& model, std::size_t k, std::size_t n,
                         std::size_t samples = 4096);

struct LimitValue {
  Evaluation value;
  double error_bound;
  bool certified;  // |z| <= r_N
};

/// F_0(z) approximated by f_{0,N}(z) with the tail bound of the remaining gaps.
LimitValue eval_limit(const TowerModel& model, Complex z);

/// |f_{k,n}(z) - E_{lambda_{k+1}}(f_{k+1,n}(z))| / max(1, |f_{k,n}(z)|); nullopt when escaped.
std::optional<double> semiconjugacy_residual(const TowerModel& model, std::size_t k, std::size_t n,
                                             Complex z);

struct InvariantReport {
  double max_backbone_residual = 0.0;   // relative |E_{lambda_n}(b_n) - b_{n-1}|
  double max_recurrence_residual = 0.0; // |b_n - (2 pi m_n i + log b_{n-1} - log lambda_n)|
  double max_normalization_error = 0.0; // |f_{0,n}(0) - 1|, |f'_{0,n}(0) - 1|
  bool shape_ok = true;
  bool ordering_ok = true;
  bool pass = true;
  std::vector<std::string> problems;
};

/// Backbone residual tolerance for level n: 1e-12 plus the rounding of b_n itself.
double backbone_tolerance(Complex bn);

InvariantReport check_invariants(const TowerModel& model);

}  // namespace exptower
