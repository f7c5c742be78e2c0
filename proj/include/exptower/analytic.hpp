#pragma once

// Elementary building blocks: the principal logarithm, the maps
// E_lambda(z) = lambda * exp(z), their inverse branches and finite towers.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace exptower {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Precision and overflow limits shared by every evaluator in the library.
struct NumericContract {
  /// One unit of precision (binary64 machine epsilon).
  static constexpr double precision = std::numeric_limits<double>::epsilon();
  /// Results whose natural log-magnitude exceeds this are reported as escaped.
  static constexpr double overflow_log_magnitude = 700.0;
  /// Arguments of logarithms at or below this modulus are punctures.
  static constexpr double puncture_modulus = precision;
};

/// Argument outside the domain of a logarithm or inverse branch.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An inverse branch ran into the omitted value 0 of E_lambda.
class PunctureError : public DomainError {
 public:
  PunctureError(std::size_t stage, const std::string& what)
      : DomainError(what), stage_(stage) {}
  std::size_t stage() const noexcept { return stage_; }

 private:
  std::size_t stage_;
};

/// Result of an evaluation that may legitimately overflow.
///
/// Escape is not an error: in dynamics it is the expected outcome for most
/// starting points, so it is carried as a value together with the stage at
/// which it happened and an estimate of log|result|.
class Evaluation {
 public:
  static Evaluation finite(Complex v) { return Evaluation(v, false, 0, 0.0); }
  static Evaluation escape(std::size_t stage, double log_magnitude) {
    return Evaluation({}, true, stage, log_magnitude);
  }

  bool escaped() const noexcept { return escaped_; }
  explicit operator bool() const noexcept { return !escaped_; }

  /// Finite value; throws std::logic_error when escaped.
  Complex value() const {
    if (escaped_) throw std::logic_error("value() on escaped evaluation");
    return value_;
  }
  std::size_t stage() const noexcept { return stage_; }
  double log_magnitude() const noexcept { return log_magnitude_; }

 private:
  Evaluation(Complex v, bool e, std::size_t s, double lm)
      : value_(v), escaped_(e), stage_(s), log_magnitude_(lm) {}

  Complex value_;
  bool escaped_;
  std::size_t stage_;
  double log_magnitude_;
};

/// Index vector (k_1, ..., k_n) selecting one logarithm branch per level.
class BranchPath {
 public:
  BranchPath() = default;
  explicit BranchPath(std::vector<std::int64_t> indices) : indices_(std::move(indices)) {}

  std::size_t length() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  /// 1-based access matching k_1..k_n.
  std::int64_t at(std::size_t level) const { return indices_.at(level - 1); }
  std::span<const std::int64_t> indices() const noexcept { return indices_; }

  /// (k_1, ..., k_len); len must not exceed length().
  BranchPath prefix(std::size_t len) const;
  BranchPath appended(std::int64_t k) const;

  friend bool operator==(const BranchPath&, const BranchPath&) = default;

 private:
  std::vector<std::int64_t> indices_;
};

/// log|z| + i arg z with arg z in (-pi, pi]. Throws DomainError at 0.
Complex principal_log(Complex z);

/// exp(w) - 1 without cancellation for small w.
Complex expm1(Complex w);

/// log(1 + w) on the principal branch, without cancellation for small w.
Complex log1p(Complex w);

/// E_lambda(z) = lambda * e^z, or escaped when the result would overflow.
Evaluation exp_affine(Complex lambda, Complex z);

/// L_lambda^k(z) = log z - log lambda + 2 k pi i.
Complex inverse_branch_step(Complex lambda, std::int64_t k, Complex z);

/// E_{lambda_{k+1}} o ... o E_{lambda_n}(z) for lambdas = (lambda_{k+1}, ..., lambda_n).
/// The innermost map is the last element. An escape reports the 1-based
/// position in `lambdas` of the map that overflowed.
Evaluation forward_tower(std::span<const Complex> lambdas, Complex z);

/// L_{lambda_n}^{k_n} o ... o L_{lambda_1}^{k_1}(z); L_{lambda_1}^{k_1} is applied first.
/// Throws PunctureError naming the 1-based stage whose input is 0.
Complex inverse_tower(std::span<const Complex> lambdas, const BranchPath& path, Complex z);

/// Orbit points E_{(0,0)}(0), ..., E_{(0,N)}(0) of a lambda sequence.
struct OrbitPrefix {
  std::vector<Complex> points;
  /// Set when E_{(0,k)}(0) overflowed; points then holds entries 0..k-1.
  std::optional<std::size_t> escaped_at;
};

OrbitPrefix orbit_of_zero(std::span<const Complex> lambdas, std::size_t count);

}  // namespace exptower
