#pragma once

// Inverse branches g_I of the truncations f_{0,n}, their convergence along
// admissible index sequences, and the numerical singular-set certificate.

#include <algorithm>
#include <string>
#include <vector>

#include "exptower/analytic.hpp"
#include "exptower/target_set.hpp"
#include "exptower/tower.hpp"

namespace exptower {

struct BranchValue {
  Complex value;
  bool divergent_family = false;  // final index differs from m_n
};

/// g_I for a fixed path I = (k_1, ..., k_n) over a tower model.
class InverseBranch {
 public:
  /// Throws invalid_argument when the path is longer than the tower.
  InverseBranch(const TowerModel& model, BranchPath path);

  const BranchPath& path() const noexcept { return path_; }
  std::size_t level() const noexcept { return path_.length(); }

  /// Smallest j with k_i = m_i for every i > j.
  std::size_t admissible_from() const noexcept { return admissible_from_; }
  /// Membership in the finite set of paths (l_1, ..., l_{n-1}, m_n) with |l_j| <= m_{n-1}.
  bool in_admissible_set() const;

  /// Literal head up to the last non-tail index before n, then the stable
  /// recursion. Throws DomainError within 1e-9 of E_{(0,k)}(0), k < n.
  BranchValue evaluate(Complex z) const;

 private:
  const TowerModel* model_;
  BranchPath path_;
  std::size_t admissible_from_ = 0;
  std::vector<Complex> orbit_;  // E_{(0,k)}(0), k < n
};

/// Minimum distance allowed between an argument and the orbit points.
inline constexpr double kOrbitStandOff = 1e-9;

/// One level of the recursion: P_n (log(1 + g / P_n) + 2 pi i (k_n - m_n)),
/// P_n = b_0 ... b_{n-1}.
Complex branch_recursion_step(const TowerModel& model, std::size_t n, Complex g_previous,
                              std::int64_t k_n);

/// (L_I(z) - b_n) P_n composed directly from principal logarithms.
Complex literal_inverse_branch(const TowerModel& model, const BranchPath& path, Complex z);

/// I_n = (head, m_{h+1}, ..., m_n) for n >= h = |head|, with `final_offset`
/// added to the last index (nonzero offsets violate the tail condition).
struct PathFamily {
  std::string label;
  std::vector<std::int64_t> head;
  std::int64_t final_offset = 0;

  std::size_t start_level() const noexcept { return std::max<std::size_t>(1, head.size()); }
  BranchPath at(const TowerModel& model, std::size_t n) const;
};

PathFamily canonical_family();
/// Head (m_1, ..., m_{j-1}, m_j + 1).
PathFamily shifted_family(const TowerModel& model, std::size_t j);
/// Canonical indices with the final one replaced by m_n + 1.
PathFamily divergent_family();

struct FamilyEvidence {
  std::string label;
  std::size_t start_level = 1;
  std::vector<double> gaps;        // ||g_{I_{n+1}} - g_{I_n}|| on the probe disk, n = start..N-1
  std::vector<double> bounds;      // 2^-n
  std::size_t bound_from = 1;      // first n with the probe disk inside K_n = {|z| <= 2^n}
  std::vector<double> cn_ratios;   // ||g_{I_n}|| / |b_0 ... b_n|
  double max_inverse_residual = 0.0;  // |f_{0,n}(g_{I_n}(w)) - w| / max(1, |w|)
  bool divergent = false;          // expected to diverge
  bool converged = false;
  bool flagged_divergent = false;  // gap >= pi |b_0 ... b_{n-1}| at every level
};

struct ProbeReport {
  Complex zeta;
  double radius = 0.0;
  double orbit_distance = 0.0;
  bool skipped = false;
  std::string notice;
  std::vector<FamilyEvidence> families;
  double roundtrip_residual = 0.0;  // |F_0(g(zeta)) - zeta|
  bool pass = false;
};

struct SingularSetReport {
  std::vector<Complex> orbit_points;     // E_{(0,k)}(0), k = 0..N
  double orbit_target_residual = 0.0;    // max relative |E_{(0,k)}(0) - a_k|
  bool invariants_ok = true;
  std::vector<std::string> invariant_problems;
  std::vector<ProbeReport> probes;
  double max_roundtrip_residual = 0.0;
  std::vector<std::string> notes;
  bool pass = false;
};

inline constexpr double kInverseResidualTolerance = 1e-8;
inline constexpr double kRoundtripTolerance = 1e-7;
inline constexpr std::size_t kProbeBoundarySamples = 64;

/// Gaps of one family on the disk |w - zeta| <= radius (boundary and centre).
/// The canonical family must meet 2^-n from `bound_from` on.
FamilyEvidence convergence_report(const TowerModel& model, const PathFamily& family, Complex zeta,
                                  double radius, std::size_t samples = kProbeBoundarySamples);

/// Probe disk radius min(0.5, d / 2) where d is the distance to the orbit prefix.
ProbeReport evaluate_probe(const TowerModel& model, const std::vector<Complex>& orbit, Complex zeta);

/// Probes on the circle |zeta| = 2 + max|orbit| at angles 2 pi (j + 1/2) / probe_count.
SingularSetReport singular_set_certify(const TowerModel& model, const DenseSequence& target,
                                       std::size_t probe_count);

}  // namespace exptower
