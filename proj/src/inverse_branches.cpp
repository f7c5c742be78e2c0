#include "exptower/inverse_branches.hpp"

#include <cmath>
#include <limits>

#include "exptower/parallel.hpp"

namespace exptower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Complex> disk_samples(Complex centre, double radius, std::size_t samples) {
  std::vector<Complex> pts;
  pts.reserve(samples + 1);
  pts.push_back(centre);
  for (std::size_t s = 0; s < samples; ++s) {
    const double t = kTwoPi * static_cast<double>(s) / static_cast<double>(samples);
    pts.push_back(centre + std::polar(radius, t));
  }
  return pts;
}

double orbit_distance(const std::vector<Complex>& orbit, Complex z) {
  double d = kInf;
  for (const auto& p : orbit) d = std::min(d, std::abs(z - p));
  return d;
}

}  // namespace

InverseBranch::InverseBranch(const TowerModel& model, BranchPath path)
    : model_(&model), path_(std::move(path)) {
  const std::size_t n = path_.length();
  if (n > model.depth()) throw std::invalid_argument("inverse branch deeper than the tower");
  for (std::size_t i = n; i >= 1; --i) {
    if (path_.at(i) != model.index(i)) {
      admissible_from_ = i;
      break;
    }
  }
  if (n > 0) orbit_ = orbit_of_zero(model.lambdas, n - 1).points;
}

bool InverseBranch::in_admissible_set() const {
  const std::size_t n = path_.length();
  if (n == 0 || path_.at(n) != model_->index(n)) return false;
  for (std::size_t j = 1; j < n; ++j) {
    if (std::abs(path_.at(j)) > model_->index(n - 1)) return false;
  }
  return true;
}

BranchValue InverseBranch::evaluate(Complex z) const {
  const std::size_t n = path_.length();
  if (n == 0) return {z - 1.0, false};
  if (orbit_distance(orbit_, z) <= kOrbitStandOff) {
    throw DomainError("inverse branch evaluated at an orbit point of 0");
  }
  std::size_t head = 0;
  for (std::size_t i = n - 1; i >= 1; --i) {
    if (path_.at(i) != model_->index(i)) {
      head = i;
      break;
    }
  }
  Complex g = head == 0 ? z - 1.0 : literal_inverse_branch(*model_, path_.prefix(head), z);
  for (std::size_t i = head + 1; i <= n; ++i) g = branch_recursion_step(*model_, i, g, path_.at(i));
  return {g, path_.at(n) != model_->index(n)};
}

Complex branch_recursion_step(const TowerModel& model, std::size_t n, Complex g_previous,
                              std::int64_t k_n) {
  const Complex p = model.product(n);
  const Complex w = g_previous / p;
  if (std::abs(1.0 + w) <= NumericContract::puncture_modulus) {
    throw PunctureError(n, "branch recursion hits the puncture at level " + std::to_string(n));
  }
  const double shift = kTwoPi * static_cast<double>(k_n - model.index(n));
  return p * (exptower::log1p(w) + Complex(0.0, shift));
}

Complex literal_inverse_branch(const TowerModel& model, const BranchPath& path, Complex z) {
  const std::size_t n = path.length();
  const auto lambdas = std::span<const Complex>(model.lambdas).first(n);
  return (inverse_tower(lambdas, path, z) - model.b.at(n)) * model.product(n);
}

BranchPath PathFamily::at(const TowerModel& model, std::size_t n) const {
  std::vector<std::int64_t> idx;
  idx.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) idx.push_back(i <= head.size() ? head[i - 1] : model.index(i));
  if (n > 0) idx.back() += final_offset;
  return BranchPath(std::move(idx));
}

PathFamily canonical_family() { return {"canonical", {}, 0}; }

PathFamily shifted_family(const TowerModel& model, std::size_t j) {
  PathFamily f{"shift@" + std::to_string(j), {}, 0};
  for (std::size_t i = 1; i <= j; ++i) f.head.push_back(model.index(i) + (i == j ? 1 : 0));
  return f;
}

PathFamily divergent_family() { return {"divergent", {}, 1}; }

FamilyEvidence convergence_report(const TowerModel& model, const PathFamily& family, Complex zeta,
                                  double radius, std::size_t samples) {
  FamilyEvidence ev;
  ev.label = family.label;
  ev.start_level = family.start_level();
  ev.divergent = family.final_offset != 0;
  const std::size_t depth = model.depth();
  const auto pts = disk_samples(zeta, radius, samples);
  while (std::ldexp(1.0, static_cast<int>(ev.bound_from)) < std::abs(zeta) + radius) ++ev.bound_from;

  std::vector<std::vector<Complex>> values;  // values[n - start][sample]
  for (std::size_t n = ev.start_level; n <= depth; ++n) {
    const InverseBranch g(model, family.at(model, n));
    std::vector<Complex> row;
    row.reserve(pts.size());
    for (const auto& w : pts) {
      const Complex v = g.evaluate(w).value;
      row.push_back(v);
      if (!ev.divergent) {
        const auto back = eval_truncation(model, 0, n, v);
        const double r = back ? std::abs(back.value() - w) / std::max(1.0, std::abs(w)) : kInf;
        ev.max_inverse_residual = std::max(ev.max_inverse_residual, r);
      }
    }
    values.push_back(std::move(row));
  }

  ev.converged = true;
  ev.flagged_divergent = true;
  for (std::size_t n = ev.start_level; n < depth; ++n) {
    const auto& cur = values[n - ev.start_level];
    const auto& next = values[n + 1 - ev.start_level];
    double gap = 0.0;
    double norm = 0.0;
    for (std::size_t s = 0; s < pts.size(); ++s) {
      gap = std::max(gap, std::abs(next[s] - cur[s]));
      norm = std::max(norm, std::abs(cur[s]));
    }
    ev.gaps.push_back(gap);
    ev.bounds.push_back(std::ldexp(1.0, -static_cast<int>(n)));
    ev.cn_ratios.push_back(norm / std::abs(model.product(n + 1)));
    if (!(gap >= kPi * std::abs(model.product(n)))) ev.flagged_divergent = false;
  }
  if (ev.gaps.empty()) {
    ev.flagged_divergent = false;
    ev.converged = !ev.divergent;
  } else if (family.head.empty() && ev.bound_from < depth) {
    for (std::size_t i = 0; i < ev.gaps.size(); ++i) {
      if (ev.start_level + i >= ev.bound_from) ev.converged = ev.converged && ev.gaps[i] <= ev.bounds[i];
    }
  } else {
    // Shifted heads, and probes outside every measured K_n, enter the bound once
    // |b_0 ... b_{n+1}| dominates |g|^2; before that the gaps must contract faster.
    const std::size_t last = ev.gaps.size() - 1;
    bool contracting = last > 0;
    for (std::size_t i = 1; i <= last; ++i) contracting = contracting && ev.gaps[i] <= 0.5 * ev.gaps[i - 1];
    ev.converged = contracting || ev.gaps[last] <= ev.bounds[last];
  }
  if (ev.divergent) ev.converged = false;
  return ev;
}

ProbeReport evaluate_probe(const TowerModel& model, const std::vector<Complex>& orbit, Complex zeta) {
  ProbeReport pr;
  pr.zeta = zeta;
  pr.orbit_distance = orbit_distance(orbit, zeta);
  if (pr.orbit_distance <= kOrbitStandOff) {
    pr.skipped = true;
    pr.notice = "probe within 1e-9 of an orbit point; skipped";
    return pr;
  }
  pr.radius = std::min(0.5, 0.5 * pr.orbit_distance);

  std::vector<PathFamily> families{canonical_family()};
  for (std::size_t j = 1; j <= 2 && j + 1 < model.depth(); ++j) families.push_back(shifted_family(model, j));
  families.push_back(divergent_family());

  pr.pass = true;
  for (const auto& f : families) {
    auto ev = convergence_report(model, f, zeta, pr.radius);
    const bool ok = ev.divergent ? ev.flagged_divergent || ev.gaps.empty()
                                 : ev.converged && ev.max_inverse_residual <= kInverseResidualTolerance;
    pr.pass = pr.pass && ok;
    pr.families.push_back(std::move(ev));
  }

  const InverseBranch g(model, canonical_family().at(model, model.depth()));
  const auto limit = eval_limit(model, g.evaluate(zeta).value);
  pr.roundtrip_residual = limit.value ? std::abs(limit.value.value() - zeta) : kInf;
  pr.pass = pr.pass && pr.roundtrip_residual <= kRoundtripTolerance;
  return pr;
}

SingularSetReport singular_set_certify(const TowerModel& model, const DenseSequence& target,
                                       std::size_t probe_count) {
  SingularSetReport rep;
  const auto inv = check_invariants(model);
  rep.invariants_ok = inv.pass;
  rep.invariant_problems = inv.problems;

  const std::size_t depth = model.depth();
  const auto orbit = orbit_of_zero(model.lambdas, depth);
  rep.orbit_points = orbit.points;
  if (orbit.escaped_at) rep.notes.push_back("orbit of 0 escaped at k = " + std::to_string(*orbit.escaped_at));
  const std::size_t compared = std::min(rep.orbit_points.size(), target.points.size());
  if (compared < depth + 1) rep.notes.push_back("target shorter than the tower; orbit checked on a prefix");
  for (std::size_t k = 0; k < compared; ++k) {
    const Complex a = target.points[k];
    rep.orbit_target_residual =
        std::max(rep.orbit_target_residual, std::abs(rep.orbit_points[k] - a) / std::max(1.0, std::abs(a)));
  }
  rep.notes.push_back("orbit closure approximated by the computed prefix E_(0,k)(0), k <= " +
                      std::to_string(depth));

  rep.pass = rep.invariants_ok && !orbit.escaped_at && rep.orbit_target_residual <= kOrbitHitTolerance;
  if (!rep.invariants_ok) return rep;

  if (probe_count == 0) {
    rep.notes.push_back("warning: no probes requested; the certificate is vacuous");
    return rep;
  }
  double reach = 0.0;
  for (const auto& p : rep.orbit_points) reach = std::max(reach, std::abs(p));
  const double ring = 2.0 + reach;
  rep.probes.resize(probe_count);
  parallel_for(probe_count, [&](std::size_t j) {
    const double t = kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(probe_count);
    rep.probes[j] = evaluate_probe(model, rep.orbit_points, std::polar(ring, t));
  });
  for (const auto& p : rep.probes) {
    if (p.skipped) {
      rep.notes.push_back(p.notice);
      continue;
    }
    rep.max_roundtrip_residual = std::max(rep.max_roundtrip_residual, p.roundtrip_residual);
    rep.pass = rep.pass && p.pass;
  }
  return rep;
}

}  // namespace exptower
