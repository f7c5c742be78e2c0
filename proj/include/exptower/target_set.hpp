#pragma once

// Closed target sets V (finite unions of simple primitives), dense sequences
// in V, and the lambda sequence whose orbit of 0 visits that sequence.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "exptower/analytic.hpp"

namespace exptower {

struct PointPrimitive {
  Complex c;
};
struct SegmentPrimitive {
  Complex from;
  Complex to;
};
struct DiskPrimitive {
  Complex center;
  double radius = 0.0;
};
struct RectanglePrimitive {
  Complex corner1;
  Complex corner2;
};

using Primitive = std::variant<PointPrimitive, SegmentPrimitive, DiskPrimitive, RectanglePrimitive>;

/// Euclidean distance from z to the (closed) primitive.
double distance(const Primitive& p, Complex z);

/// Target set rejected: missing the origin, or nothing besides it.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Finite union of primitives. Must contain 0 and at least one other point.
struct TargetSetSpec {
  std::vector<Primitive> primitives;

  static constexpr double membership_tolerance = 1e-12;

  double distance(Complex z) const;
  bool contains(Complex z, double tol = membership_tolerance) const;
  /// Throws ValidationError when the set lacks 0 or a second point.
  void validate() const;
};

/// (a_0, a_1, ..., a_N) with a_0 = 0 and a_n != 0 otherwise; repeats allowed.
struct DenseSequence {
  std::vector<Complex> points;

  std::size_t size() const noexcept { return points.size(); }
  /// Throws ValidationError if a point leaves the set or the zero pattern breaks.
  void validate(const TargetSetSpec& spec) const;
};

/// a_0 = 0 followed by `count` points, visiting the primitives round-robin
/// and refining each one dyadically (spacing diam / 2^level). Points within
/// a level are permuted by `seed`.
DenseSequence generate_dense_sequence(const TargetSetSpec& spec, std::size_t count,
                                      std::uint64_t seed);

/// Branch selection failed: every candidate index landed on the puncture.
class SolveError : public std::runtime_error {
 public:
  SolveError(std::size_t k, const std::string& what) : std::runtime_error(what), k_(k) {}
  std::size_t index() const noexcept { return k_; }

 private:
  std::size_t k_;
};

struct LambdaSolution {
  std::vector<Complex> lambdas;             // lambda_1 .. lambda_N
  std::vector<BranchPath> branch_choices;   // path of length k-1 used for lambda_k
  std::vector<double> residuals;            // |E_{(0,k)}(0) - a_k|, k = 1..N
};

/// Modulus below which an inverse image counts as the puncture 0.
inline constexpr double kPunctureThreshold = 1e-12;
/// Candidate indices tried per stage: 0 and then this many escalations.
inline constexpr int kMaxEscalations = 9;

/// Escalation order 0, 1, -1, 2, -2, ...
std::int64_t escalation_index(int attempt);

/// lambda_k = L_{I_{k-1}}(a_k), choosing at each stage the first index in
/// escalation order whose image is not the puncture.
LambdaSolution solve_lambda_sequence(const DenseSequence& seq);

struct OrbitHitReport {
  std::vector<double> relative_residuals;  // k = 1..N
  double max_relative_residual = 0.0;
  bool pass = true;
};

inline constexpr double kOrbitHitTolerance = 1e-9;

/// Recomputes the orbit of 0 and compares it with the sequence.
OrbitHitReport verify_orbit_hits(const LambdaSolution& sol, const DenseSequence& seq);

}  // namespace exptower
