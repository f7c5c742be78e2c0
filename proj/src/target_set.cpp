#include "exptower/target_set.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace exptower {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double max_modulus(const Primitive& p) {
  return std::visit(
      Overloaded{
          [](const PointPrimitive& q) { return std::abs(q.c); },
          [](const SegmentPrimitive& q) { return std::max(std::abs(q.from), std::abs(q.to)); },
          [](const DiskPrimitive& q) { return std::abs(q.center) + q.radius; },
          [](const RectanglePrimitive& q) {
            const Complex c2(q.corner1.real(), q.corner2.imag());
            const Complex c3(q.corner2.real(), q.corner1.imag());
            return std::max({std::abs(q.corner1), std::abs(q.corner2), std::abs(c2), std::abs(c3)});
          },
      },
      p);
}

double diameter(const Primitive& p) {
  return std::visit(Overloaded{
                        [](const PointPrimitive&) { return 0.0; },
                        [](const SegmentPrimitive& q) { return std::abs(q.to - q.from); },
                        [](const DiskPrimitive& q) { return 2.0 * q.radius; },
                        [](const RectanglePrimitive& q) { return std::abs(q.corner2 - q.corner1); },
                    },
                    p);
}

Complex anchor(const Primitive& p) {
  return std::visit(Overloaded{
                        [](const PointPrimitive& q) { return q.c; },
                        [](const SegmentPrimitive& q) { return q.from; },
                        [](const DiskPrimitive& q) { return q.center; },
                        [](const RectanglePrimitive& q) { return q.corner1; },
                    },
                    p);
}

// Grid points first appearing at refinement `level`.
std::vector<Complex> level_points(const Primitive& p, int level) {
  std::vector<Complex> out;
  std::visit(
      Overloaded{
          [&](const PointPrimitive& q) {
            if (level == 0) out.push_back(q.c);
          },
          [&](const SegmentPrimitive& q) {
            const std::int64_t n = std::int64_t{1} << level;
            for (std::int64_t j = 0; j <= n; ++j) {
              if (level > 0 && j % 2 == 0) continue;
              const double t = static_cast<double>(j) / static_cast<double>(n);
              out.push_back(q.from + t * (q.to - q.from));
            }
          },
          [&](const DiskPrimitive& q) {
            if (level == 0) {
              out.push_back(q.center);
              return;
            }
            const std::int64_t n = std::int64_t{1} << (level - 1);
            const double h = q.radius / static_cast<double>(n);
            for (std::int64_t i = -n; i <= n; ++i) {
              for (std::int64_t j = -n; j <= n; ++j) {
                if (i % 2 == 0 && j % 2 == 0) continue;
                if (i * i + j * j > n * n) continue;
                out.push_back(q.center + Complex(h * static_cast<double>(i), h * static_cast<double>(j)));
              }
            }
          },
          [&](const RectanglePrimitive& q) {
            const double x0 = std::min(q.corner1.real(), q.corner2.real());
            const double x1 = std::max(q.corner1.real(), q.corner2.real());
            const double y0 = std::min(q.corner1.imag(), q.corner2.imag());
            const double y1 = std::max(q.corner1.imag(), q.corner2.imag());
            const std::int64_t nx = x1 > x0 ? (std::int64_t{1} << level) : 0;
            const std::int64_t ny = y1 > y0 ? (std::int64_t{1} << level) : 0;
            for (std::int64_t i = 0; i <= nx; ++i) {
              for (std::int64_t j = 0; j <= ny; ++j) {
                const bool fresh = level == 0 || (nx > 0 && i % 2 == 1) || (ny > 0 && j % 2 == 1);
                if (!fresh) continue;
                const double x = nx > 0 ? x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(nx) : x0;
                const double y = ny > 0 ? y0 + (y1 - y0) * static_cast<double>(j) / static_cast<double>(ny) : y0;
                out.emplace_back(x, y);
              }
            }
          },
      },
      p);
  return out;
}

constexpr int kMaxLevel = 40;

class PrimitiveCursor {
 public:
  PrimitiveCursor(const Primitive& p, std::size_t index, std::uint64_t seed)
      : primitive_(p), index_(index), seed_(seed), degenerate_(diameter(p) == 0.0) {}

  bool exhausted() const noexcept { return exhausted_; }

  // Next nonzero point, or nullopt once the primitive has nothing more to give.
  std::optional<Complex> next() {
    if (degenerate_) {
      const Complex c = anchor(primitive_);
      if (std::abs(c) <= kPunctureThreshold) {
        exhausted_ = true;
        return std::nullopt;
      }
      return c;
    }
    while (pos_ >= buffer_.size()) {
      if (level_ >= kMaxLevel) {
        exhausted_ = true;
        return std::nullopt;
      }
      ++level_;
      fill();
    }
    return buffer_[pos_++];
  }

 private:
  void fill() {
    buffer_.clear();
    pos_ = 0;
    for (const auto& z : level_points(primitive_, level_)) {
      if (std::abs(z) > kPunctureThreshold) buffer_.push_back(z);
    }
    std::mt19937_64 rng(seed_ ^ (0x9E3779B97F4A7C15ULL * (index_ + 1)) ^
                        (0xBF58476D1CE4E5B9ULL * static_cast<std::uint64_t>(level_ + 1)));
    for (std::size_t i = buffer_.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(buffer_[i - 1], buffer_[j]);
    }
  }

  Primitive primitive_;
  std::size_t index_;
  std::uint64_t seed_;
  bool degenerate_;
  bool exhausted_ = false;
  int level_ = -1;
  std::vector<Complex> buffer_;
  std::size_t pos_ = 0;
};

}  // namespace

double distance(const Primitive& p, Complex z) {
  return std::visit(
      Overloaded{
          [&](const PointPrimitive& q) { return std::abs(z - q.c); },
          [&](const SegmentPrimitive& q) {
            const Complex d = q.to - q.from;
            const double len2 = std::norm(d);
            if (len2 == 0.0) return std::abs(z - q.from);
            double t = ((z - q.from) * std::conj(d)).real() / len2;
            t = std::clamp(t, 0.0, 1.0);
            return std::abs(z - (q.from + t * d));
          },
          [&](const DiskPrimitive& q) { return std::max(0.0, std::abs(z - q.center) - q.radius); },
          [&](const RectanglePrimitive& q) {
            const double x0 = std::min(q.corner1.real(), q.corner2.real());
            const double x1 = std::max(q.corner1.real(), q.corner2.real());
            const double y0 = std::min(q.corner1.imag(), q.corner2.imag());
            const double y1 = std::max(q.corner1.imag(), q.corner2.imag());
            const double dx = std::max({x0 - z.real(), 0.0, z.real() - x1});
            const double dy = std::max({y0 - z.imag(), 0.0, z.imag() - y1});
            return std::hypot(dx, dy);
          },
      },
      p);
}

double TargetSetSpec::distance(Complex z) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : primitives) best = std::min(best, exptower::distance(p, z));
  return best;
}

bool TargetSetSpec::contains(Complex z, double tol) const { return distance(z) <= tol; }

void TargetSetSpec::validate() const {
  for (const auto& p : primitives) {
    if (const auto* d = std::get_if<DiskPrimitive>(&p); d && !(d->radius >= 0.0)) {
      throw ValidationError("disk radius must be non-negative");
    }
  }
  if (!contains({0.0, 0.0})) throw ValidationError("target set does not contain the origin");
  const bool second = std::any_of(primitives.begin(), primitives.end(),
                                  [](const Primitive& p) { return max_modulus(p) > kPunctureThreshold; });
  if (!second) throw ValidationError("target set has no point other than the origin");
}

void DenseSequence::validate(const TargetSetSpec& spec) const {
  if (points.empty() || points.front() != Complex(0.0, 0.0)) {
    throw ValidationError("dense sequence must start with a_0 = 0");
  }
  for (std::size_t n = 1; n < points.size(); ++n) {
    if (points[n] == Complex(0.0, 0.0)) throw ValidationError("a_n = 0 for n >= 1");
    if (!spec.contains(points[n])) throw ValidationError("a_n outside the target set");
  }
}

DenseSequence generate_dense_sequence(const TargetSetSpec& spec, std::size_t count,
                                      std::uint64_t seed) {
  spec.validate();
  std::vector<PrimitiveCursor> cursors;
  cursors.reserve(spec.primitives.size());
  for (std::size_t i = 0; i < spec.primitives.size(); ++i) cursors.emplace_back(spec.primitives[i], i, seed);

  DenseSequence seq;
  seq.points.reserve(count + 1);
  seq.points.push_back({0.0, 0.0});
  std::size_t turn = 0;
  while (seq.points.size() < count + 1) {
    std::optional<Complex> z;
    for (std::size_t tries = 0; tries < cursors.size() && !z; ++tries) {
      auto& c = cursors[turn % cursors.size()];
      ++turn;
      if (!c.exhausted()) z = c.next();
    }
    if (!z) throw ValidationError("target set has no point other than the origin");
    seq.points.push_back(*z);
  }
  return seq;
}

std::int64_t escalation_index(int attempt) {
  if (attempt == 0) return 0;
  const std::int64_t magnitude = (attempt + 1) / 2;
  return attempt % 2 == 1 ? magnitude : -magnitude;
}

LambdaSolution solve_lambda_sequence(const DenseSequence& seq) {
  LambdaSolution sol;
  if (seq.points.empty()) return sol;
  const std::size_t n = seq.points.size() - 1;
  sol.lambdas.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const Complex target = seq.points[k];
    if (std::abs(target) < kPunctureThreshold) {
      throw SolveError(k, "puncture collision at k = " + std::to_string(k) + ": a_k is 0");
    }
    Complex w = target;
    std::vector<std::int64_t> path;
    path.reserve(k - 1);
    for (std::size_t stage = 1; stage < k; ++stage) {
      bool found = false;
      for (int attempt = 0; attempt <= kMaxEscalations; ++attempt) {
        const std::int64_t idx = escalation_index(attempt);
        const Complex candidate = inverse_branch_step(sol.lambdas[stage - 1], idx, w);
        if (std::abs(candidate) >= kPunctureThreshold) {
          w = candidate;
          path.push_back(idx);
          found = true;
          break;
        }
      }
      if (!found) {
        throw SolveError(k, "puncture collision at k = " + std::to_string(k) + ", stage " +
                                std::to_string(stage));
      }
    }
    sol.lambdas.push_back(w);
    sol.branch_choices.emplace_back(std::move(path));
  }
  for (std::size_t k = 1; k <= n; ++k) {
    const auto e = forward_tower(std::span<const Complex>(sol.lambdas).first(k), Complex(0.0, 0.0));
    sol.residuals.push_back(e ? std::abs(e.value() - seq.points[k]) : std::numeric_limits<double>::infinity());
  }
  return sol;
}

OrbitHitReport verify_orbit_hits(const LambdaSolution& sol, const DenseSequence& seq) {
  OrbitHitReport report;
  if (seq.points.empty()) return report;
  const std::size_t n = seq.points.size() - 1;
  if (sol.lambdas.size() != n) throw std::invalid_argument("verify_orbit_hits: length mismatch");
  const auto orbit = orbit_of_zero(sol.lambdas, n);
  for (std::size_t k = 1; k <= n; ++k) {
    double r = std::numeric_limits<double>::infinity();
    if (k < orbit.points.size()) {
      r = std::abs(orbit.points[k] - seq.points[k]) / std::max(1.0, std::abs(seq.points[k]));
    }
    report.relative_residuals.push_back(r);
    report.max_relative_residual = std::max(report.max_relative_residual, r);
  }
  report.pass = report.max_relative_residual <= kOrbitHitTolerance;
  return report;
}

}  // namespace exptower
