#ifndef SSBO_DESIGN_SPACE_HPP
#define SSBO_DESIGN_SPACE_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssbo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Coordinates in [0,1]^m. Distances, epsilon checks and RBF radii all live
// in this frame.
using UnitPoint = Vector;
// Coordinates in problem units.
using RawPoint = Vector;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box [lower, upper] with lower < upper in every coordinate.
class DesignSpace {
 public:
  DesignSpace(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() < 1) throw Error("design space needs at least one dimension");
    if (lower_.size() != upper_.size()) throw Error("design space bound dimensions differ");
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
      if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
        throw Error("design space bounds must be finite");
      if (!(lower_[i] < upper_[i]))
        throw Error("design space requires lower < upper in dimension " + std::to_string(i));
    }
  }

  static DesignSpace unit(Eigen::Index m) {
    return DesignSpace(Vector::Zero(m), Vector::Ones(m));
  }

  Eigen::Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector width() const { return upper_ - lower_; }

  // tol is relative to the width of each coordinate.
  bool contains(const Vector& x, double tol = 0.0) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index i = 0; i < dim(); ++i) {
      const double slack = tol * (upper_[i] - lower_[i]);
      if (x[i] < lower_[i] - slack || x[i] > upper_[i] + slack) return false;
    }
    return true;
  }

  Vector clip(Vector x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

 private:
  Vector lower_;
  Vector upper_;
};

inline UnitPoint normalize(const RawPoint& x, const DesignSpace& space) {
  if (x.size() != space.dim()) throw Error("normalize: dimension mismatch");
  if (!space.contains(x, 1e-9)) throw Error("normalize: point outside design space");
  UnitPoint u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    u[i] = std::clamp((x[i] - space.lower()[i]) / (space.upper()[i] - space.lower()[i]), 0.0, 1.0);
  }
  return u;
}

// Convex-combination form so that 0 maps to lower and 1 maps to upper exactly.
inline RawPoint denormalize(const UnitPoint& u, const DesignSpace& space) {
  if (u.size() != space.dim()) throw Error("denormalize: dimension mismatch");
  RawPoint x(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    x[i] = (1.0 - u[i]) * space.lower()[i] + u[i] * space.upper()[i];
  }
  return x;
}

/// Latin hypercube design in the unit cube. Each dimension gets an independent
/// random permutation of the n strata; the point sits at the stratum center
/// or, with jitter on, uniformly inside it.
inline std::vector<UnitPoint> lhs_sample(std::size_t n, Eigen::Index m, std::uint64_t seed,
                                         bool jitter = true) {
  if (n == 0) throw Error("lhs_sample: n must be positive");
  if (m < 1) throw Error("lhs_sample: m must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr double kMaxOffset = 1.0 - 1e-9;

  std::vector<UnitPoint> points(n, UnitPoint(m));
  std::vector<std::size_t> perm(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < m; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double offset = jitter ? std::min(unif(rng), kMaxOffset) : 0.5;
      points[i][j] = (static_cast<double>(perm[i]) + offset) * inv_n;
    }
  }
  return points;
}

inline double distance(const UnitPoint& a, const UnitPoint& b) { return (a - b).norm(); }

/// Euclidean distance from x to the nearest member of set.
inline double min_distance(const UnitPoint& x, std::span<const UnitPoint> set) {
  if (set.empty()) throw Error("min_distance: empty set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : set) {
    if (p.size() != x.size()) throw Error("min_distance: dimension mismatch");
    best = std::min(best, (x - p).squaredNorm());
  }
  return std::sqrt(best);
}

}  // namespace ssbo

#endif  // SSBO_DESIGN_SPACE_HPP
