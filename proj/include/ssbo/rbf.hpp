#ifndef SSBO_RBF_HPP
#define SSBO_RBF_HPP

#include "ssbo/design_space.hpp"
#include "ssbo/samples.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ssbo {

enum class KernelKind { Gaussian, Multiquadric, InverseMultiquadric, ThinPlateSpline };

inline constexpr std::array<KernelKind, 4> kAllKernels = {
    KernelKind::Gaussian, KernelKind::Multiquadric, KernelKind::InverseMultiquadric,
    KernelKind::ThinPlateSpline};

inline std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Multiquadric: return "multiquadric";
    case KernelKind::InverseMultiquadric: return "inverse-multiquadric";
    case KernelKind::ThinPlateSpline: return "thin-plate";
  }
  return "unknown";
}

inline std::optional<KernelKind> parse_kernel(std::string_view name) {
  for (auto k : kAllKernels) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

// Kernel as a function of the squared radius.
inline double kernel_from_sq(KernelKind kind, double r2, double c) {
  switch (kind) {
    case KernelKind::Gaussian: return std::exp(-c * r2);
    case KernelKind::Multiquadric: return std::sqrt(1.0 + c * r2);
    case KernelKind::InverseMultiquadric: return 1.0 / std::sqrt(1.0 + c * r2);
    case KernelKind::ThinPlateSpline: return r2 * std::log1p(c * r2);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double kernel_value(KernelKind kind, double r, double c) {
  return kernel_from_sq(kind, r * r, c);
}

/// Fitted interpolant sum_i beta_i f(||x - x_i||). Centers are stored row-wise.
struct RbfModel {
  KernelKind kernel = KernelKind::Gaussian;
  double c = 1.0;
  Matrix centers;
  Vector beta;
  double ridge = 0.0;

  Eigen::Index size() const { return centers.rows(); }
  Eigen::Index dim() const { return centers.cols(); }
  double operator()(const UnitPoint& x) const;
};

namespace detail {

// Systems whose reciprocal condition estimate falls below this get a ridge.
inline constexpr double kMinRcond = 1e-12;
inline constexpr double kRidgeScale = 1e-10;
inline constexpr double kDuplicateTol = 1e-12;
// Unridged fits must reproduce training responses to this relative accuracy.
inline constexpr double kInterpolationTol = 1e-6;

inline Matrix stack_rows(std::span<const UnitPoint> inputs) {
  if (inputs.empty()) throw Error("rbf: no training inputs");
  const Eigen::Index m = inputs.front().size();
  Matrix X(static_cast<Eigen::Index>(inputs.size()), m);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != m) throw Error("rbf: inconsistent input dimensions");
    X.row(static_cast<Eigen::Index>(i)) = inputs[i].transpose();
  }
  return X;
}

inline void check_distinct(const Matrix& X) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
      if ((X.row(i) - X.row(j)).norm() <= kDuplicateTol) throw Error("rbf: duplicate inputs");
    }
  }
}

// Shared by the kernel matrix and predict so both see bitwise-equal entries.
template <typename A, typename B>
double squared_distance(const A& a, const B& b) {
  double r2 = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    r2 += d * d;
  }
  return r2;
}

// Accumulates sum(a_i * b_i) with error-free transformations, so the result
// is as accurate as if computed in twice the working precision.
class CompensatedSum {
 public:
  void add_product(double a, double b) {
    const double h = a * b;
    const double r = std::fma(a, b, -h);
    const double t = p_ + h;
    const double z = t - p_;
    s_ += ((p_ - (t - z)) + (h - z)) + r;
    p_ = t;
  }
  double value() const { return p_ + s_; }

 private:
  double p_ = 0.0;
  double s_ = 0.0;
};

inline Matrix kernel_matrix(const Matrix& X, KernelKind kind, double c) {
  const Eigen::Index n = X.rows();
  Matrix F(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    F(i, i) = kernel_from_sq(kind, 0.0, c);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      F(i, j) = F(j, i) = kernel_from_sq(kind, squared_distance(X.row(i), X.row(j)), c);
    }
  }
  return F;
}

// Thin plate spline has a zero diagonal, so the mean-diagonal scale falls
// back to the largest entry.
inline double ridge_for(const Matrix& F) {
  const double diag = F.diagonal().mean();
  const double scale = diag > 0.0 ? diag : F.cwiseAbs().maxCoeff();
  return kRidgeScale * (scale > 0.0 ? scale : 1.0);
}

/// LU factorization of F, or of F + ridge*I when F is too ill-conditioned.
struct Factorization {
  Eigen::PartialPivLU<Matrix> lu;
  Matrix system;
  double ridge = 0.0;

  explicit Factorization(const Matrix& F, bool force_ridge = false) : system(F) {
    lu.compute(system);
    if (force_ridge || !(lu.rcond() >= kMinRcond)) {
      ridge = ridge_for(F);
      system.diagonal().array() += ridge;
      lu.compute(system);
    }
    if (!(lu.rcond() > 0.0)) throw Error("rbf: interpolation system is singular");
  }

  // Iterative refinement with compensated residuals keeps the interpolation
  // residual near working precision even for condition numbers close to 1e12.
  Vector solve(const Vector& y) const {
    Vector beta = lu.solve(y);
    for (int k = 0; k < 3; ++k) beta += lu.solve(residual(y, beta));
    return beta;
  }

  Vector residual(const Vector& y, const Vector& beta) const {
    const Eigen::Index n = y.size();
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      CompensatedSum acc;
      acc.add_product(y[i], 1.0);
      for (Eigen::Index j = 0; j < n; ++j) acc.add_product(-system(i, j), beta[j]);
      r[i] = acc.value();
    }
    return r;
  }
};

}  // namespace detail

inline double predict(const RbfModel& model, const UnitPoint& x) {
  if (x.size() != model.dim()) throw Error("predict: dimension mismatch");
  detail::CompensatedSum sum;
  for (Eigen::Index i = 0; i < model.size(); ++i) {
    const double r2 = detail::squared_distance(x, model.centers.row(i));
    sum.add_product(model.beta[i], kernel_from_sq(model.kernel, r2, model.c));
  }
  return sum.value();
}

inline double RbfModel::operator()(const UnitPoint& x) const { return predict(*this, x); }

inline RbfModel fit(std::span<const UnitPoint> inputs, const Vector& responses, KernelKind kernel,
                    double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error("fit: shape parameter must be positive");
  Matrix X = detail::stack_rows(inputs);
  if (responses.size() != X.rows()) throw Error("fit: response count does not match inputs");
  if (!responses.allFinite()) throw Error("fit: non-finite responses");
  detail::check_distinct(X);

  const Matrix F = detail::kernel_matrix(X, kernel, c);
  const double scale = 1.0 + responses.cwiseAbs().maxCoeff();
  double ridge = 0.0;
  Vector beta;
  {
    const detail::Factorization fac(F);
    beta = fac.solve(responses);
    ridge = fac.ridge;
    // near the conditioning limit the coefficients can be too large to
    // reproduce the data in double precision; regularize those systems too
    const bool inexact = !beta.allFinite() ||
        fac.residual(responses, beta).cwiseAbs().maxCoeff() > 0.5 * detail::kInterpolationTol * scale;
    if (ridge == 0.0 && inexact) {
      const detail::Factorization ridged(F, true);
      beta = ridged.solve(responses);
      ridge = ridged.ridge;
    }
  }
  if (!beta.allFinite()) throw Error("fit: interpolation system is unsolvable");
  return RbfModel{kernel, c, std::move(X), std::move(beta), ridge};
}

namespace detail {

/// Leave-one-out residuals for any number of responses sharing inputs and c.
/// Uses e_i = beta_i / (K^-1)_ii with K the (possibly ridged) kernel matrix,
/// which equals refitting without sample i.
class LoocvSystem {
 public:
  LoocvSystem(const Matrix& X, KernelKind kernel, double c) {
    try {
      const Factorization fac(kernel_matrix(X, kernel, c));
      inverse_ = fac.lu.inverse();
      valid_ = inverse_.allFinite();
    } catch (const Error&) {
      valid_ = false;
    }
  }

  double error(const Vector& y) const {
    if (!valid_) return std::numeric_limits<double>::infinity();
    const Vector beta = inverse_ * y;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
      const double e = beta[i] / inverse_(i, i);
      sum += e * e;
    }
    return std::isfinite(sum) ? sum : std::numeric_limits<double>::infinity();
  }

 private:
  Matrix inverse_;
  bool valid_ = false;
};

inline void check_loocv_inputs(const Matrix& X, const Vector& y) {
  if (X.rows() < 2) throw Error("loocv: need at least two samples");
  if (y.size() != X.rows()) throw Error("loocv: response count does not match inputs");
  if (!y.allFinite()) throw Error("loocv: non-finite responses");
  check_distinct(X);
}

}  // namespace detail

/// Sum of squared leave-one-out residuals.
inline double loocv_error(std::span<const UnitPoint> inputs, const Vector& responses,
                          KernelKind kernel, double c) {
  if (!(c > 0.0)) throw Error("loocv: shape parameter must be positive");
  const Matrix X = detail::stack_rows(inputs);
  detail::check_loocv_inputs(X, responses);
  return detail::LoocvSystem(X, kernel, c).error(responses);
}

struct ShapeSearch {
  static constexpr int kGridSize = 30;
  static constexpr double kLogMin = -2.0;
  static constexpr double kLogMax = 2.0;
  static constexpr double kRefineFactor = 1e-3;

  static double grid_value(int g) {
    return std::pow(10.0, kLogMin + (kLogMax - kLogMin) * g / (kGridSize - 1));
  }
};

/// Tunes one shape parameter per response column by LOOCV: log grid over
/// [1e-2, 1e2], then golden-section search inside the best grid cell. The
/// returned value never scores worse than any grid point.
inline std::vector<double> tune_shapes(std::span<const UnitPoint> inputs,
                                       std::span<const Vector> responses, KernelKind kernel) {
  const Matrix X = detail::stack_rows(inputs);
  for (const auto& y : responses) detail::check_loocv_inputs(X, y);

  constexpr int G = ShapeSearch::kGridSize;
  const std::size_t k = responses.size();
  std::vector<std::array<double, G>> grid_err(k);
  for (int g = 0; g < G; ++g) {
    const detail::LoocvSystem sys(X, kernel, ShapeSearch::grid_value(g));
    for (std::size_t r = 0; r < k; ++r) grid_err[r][g] = sys.error(responses[r]);
  }

  std::vector<double> result(k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto& errs = grid_err[r];
    int best_g = 0;
    for (int g = 1; g < G; ++g) {
      if (errs[g] < errs[best_g]) best_g = g;
    }
    double best_c = ShapeSearch::grid_value(best_g);
    double best_err = errs[best_g];
    if (!std::isfinite(best_err)) {
      result[r] = 1.0;
      continue;
    }

    auto loocv_at = [&](double log_c) {
      return detail::LoocvSystem(X, kernel, std::pow(10.0, log_c)).error(responses[r]);
    };
    const double step = (ShapeSearch::kLogMax - ShapeSearch::kLogMin) / (G - 1);
    const double center = ShapeSearch::kLogMin + step * best_g;
    double lo = best_g > 0 ? center - step : center;
    double hi = best_g < G - 1 ? center + step : center;
    const double tol = ShapeSearch::kRefineFactor * (hi - lo);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

    double a = hi - inv_phi * (hi - lo);
    double b = lo + inv_phi * (hi - lo);
    double fa = loocv_at(a);
    double fb = loocv_at(b);
    auto consider = [&](double log_c, double err) {
      if (err < best_err) {
        best_err = err;
        best_c = std::pow(10.0, log_c);
      }
    };
    consider(a, fa);
    consider(b, fb);
    while (hi - lo > tol) {
      if (fa <= fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - inv_phi * (hi - lo);
        fa = loocv_at(a);
        consider(a, fa);
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + inv_phi * (hi - lo);
        fb = loocv_at(b);
        consider(b, fb);
      }
    }
    result[r] = best_c;
  }
  return result;
}

inline double tune_shape(std::span<const UnitPoint> inputs, const Vector& responses,
                         KernelKind kernel) {
  return tune_shapes(inputs, std::span<const Vector>(&responses, 1), kernel).front();
}

/// Objective model plus one model per constraint component, all on the same inputs.
struct SurrogateBundle {
  RbfModel objective;
  std::vector<RbfModel> constraints;

  double predict_objective(const UnitPoint& x) const { return predict(objective, x); }
  Vector predict_constraints(const UnitPoint& x) const {
    Vector g(static_cast<Eigen::Index>(constraints.size()));
    for (std::size_t j = 0; j < constraints.size(); ++j)
      g[static_cast<Eigen::Index>(j)] = predict(constraints[j], x);
    return g;
  }
};

inline constexpr double kDefaultShape = 1.0;

inline SurrogateBundle build_bundle(std::span<const Sample> samples, KernelKind kernel, bool tune) {
  if (samples.empty()) throw Error("build_bundle: empty sample set");
  const std::size_t n = samples.size();
  const Eigen::Index q = samples.front().g.size();

  std::vector<UnitPoint> inputs;
  inputs.reserve(n);
  std::vector<Vector> responses(static_cast<std::size_t>(q) + 1, Vector(static_cast<Eigen::Index>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    inputs.push_back(samples[i].x);
    responses[0][row] = samples[i].J;
    for (Eigen::Index j = 0; j < q; ++j) responses[static_cast<std::size_t>(j) + 1][row] = samples[i].g[j];
  }

  std::vector<double> shapes(responses.size(), kDefaultShape);
  if (tune && n >= 2) shapes = tune_shapes(inputs, responses, kernel);

  SurrogateBundle bundle;
  bundle.objective = fit(inputs, responses[0], kernel, shapes[0]);
  bundle.constraints.reserve(static_cast<std::size_t>(q));
  for (std::size_t j = 1; j < responses.size(); ++j)
    bundle.constraints.push_back(fit(inputs, responses[j], kernel, shapes[j]));
  return bundle;
}

inline SurrogateBundle build_bundle(const SampleSet& set, KernelKind kernel, bool tune) {
  return build_bundle(set.samples(), kernel, tune);
}

}  // namespace ssbo

#endif  // SSBO_RBF_HPP
