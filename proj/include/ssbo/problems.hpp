#ifndef SSBO_PROBLEMS_HPP
#define SSBO_PROBLEMS_HPP

#include "ssbo/design_space.hpp"
#include "ssbo/samples.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssbo {

enum class ReferenceSource { Published, Computed };

inline std::string_view to_string(ReferenceSource s) {
  return s == ReferenceSource::Published ? "published" : "computed";
}

/// A black-box problem in raw units: J(x) to minimize subject to g(x) <= 0.
struct ProblemSpec {
  std::string name;
  DesignSpace bounds;
  std::size_t constraint_count = 0;
  std::function<Evaluation(const RawPoint&)> evaluate;
  std::optional<double> best_known;
  ReferenceSource best_known_source = ReferenceSource::Computed;

  Eigen::Index dim() const { return bounds.dim(); }
};

/// Wraps a problem and tallies true evaluations.
class CountingEvaluator {
 public:
  explicit CountingEvaluator(const ProblemSpec& problem) : problem_(&problem) {}
  CountingEvaluator(const CountingEvaluator&) = delete;
  CountingEvaluator& operator=(const CountingEvaluator&) = delete;

  Evaluation operator()(const RawPoint& x) {
    count_.fetch_add(1, std::memory_order_relaxed);
    Evaluation e = problem_->evaluate(x);
    if (static_cast<std::size_t>(e.constraints.size()) != problem_->constraint_count)
      throw Error("evaluator returned " + std::to_string(e.constraints.size()) +
                  " constraints, expected " + std::to_string(problem_->constraint_count));
    return e;
  }

  std::size_t count() const { return count_.load(std::memory_order_relaxed); }
  const ProblemSpec& problem() const { return *problem_; }

 private:
  const ProblemSpec* problem_;
  std::atomic<std::size_t> count_{0};
};

// 1-D multi-peak test function; alpha controls the number of local optima.
inline double forrester_alpha(double x, double alpha) {
  const double a = 6.0 * x - 2.0;
  const double d = x - 1.0;
  return a * a * std::sin(12.0 * x - 4.0) * std::cos(alpha * d * d);
}

inline Evaluation constrained_2d(const RawPoint& x) {
  if (x.size() != 2) throw Error("constrained_2d: expects 2 variables");
  const double x1 = x[0];
  const double x2 = x[1];
  Vector g(3);
  g[0] = 1.0 - x1 * x1 * x2 / 20.0;
  const double s = x1 + x2 - 5.0;
  const double t = x1 - x2 - 12.0;
  g[1] = 1.0 - s * s / 30.0 - t * t / 120.0;
  g[2] = 1.0 - 80.0 / (x1 * x1 + 8.0 * x2 + 5.0);
  return {x1 + x2, g};
}

struct WeldedPlateConstants {
  double C1 = 6.739e-5;
  double C2 = 2.936e-6;
  double L = 500.0;       // mm
  double P = 10000.0;     // N
  double G = 82680.0;     // MPa
  double E = 2.0e5;       // MPa
  double sigma_lim = 210.0;
  double tau_lim = 70.0;
  double delta_lim = 5.0;
};

/// Welded plate cost with five constraints; x = [s, t, h, b] in mm.
/// Constraints: bending stress, shear stress, deflection, buckling ratio,
/// thickness ratio.
inline Evaluation welded_plate(const RawPoint& x, const WeldedPlateConstants& k = {}) {
  if (x.size() != 4) throw Error("welded_plate: expects 4 variables");
  const double s = x[0];
  const double t = x[1];
  const double h = x[2];
  const double b = x[3];
  const double sqrt2 = std::sqrt(2.0);

  const double cost = k.C1 * s * t * t + k.C2 * (k.L + s) * h * b;
  const double sigma_max = 6.0 * k.P * k.L / (b * h * h);

  const double moment = k.P * (k.L + 0.5 * s);
  const double radius = std::sqrt(0.25 * s * s + 0.25 * (t + h) * (t + h));
  const double polar_term = 2.0 * sqrt2 * t * s * (s * s / 12.0 + 0.25 * (t + h) * (t + h));
  const double t1 = k.P / (sqrt2 * t * s);
  const double t2 = moment * radius / polar_term;
  const double tau_max = std::sqrt(t1 * t1 + t2 * t2 + t1 * t2 * s / radius);

  // b in the numerator, as in the source formulation
  const double delta_max = 4.0 * k.P * k.L * k.L * k.L * b / (k.E * h * h * h);

  const double t3 = std::sqrt(k.E * k.G * h * h * std::pow(b, 6) / 36.0);
  const double t4 = 1.0 - 0.25 * h / k.L * std::sqrt(k.E / k.G);
  const double critical_load = 4.013 * t3 * t4 / (k.L * k.L);
  const double eta_pc = 1.0 - critical_load / k.P;
  const double eta_tb = t / b - 1.0;

  Vector g(5);
  g << sigma_max - k.sigma_lim, tau_max - k.tau_lim, delta_max - k.delta_lim, eta_pc, eta_tb;
  return {cost, g};
}

struct ProblemParams {
  double alpha = 0.0;
  double young_modulus = 2.0e5;
};

namespace detail {

// Dense grid plus golden-section polish on the best cell.
inline double forrester_minimum(double alpha) {
  constexpr int kGrid = 100000;
  int best = 0;
  double best_v = forrester_alpha(0.0, alpha);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = forrester_alpha(static_cast<double>(i) / kGrid, alpha);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double lo = std::max(0.0, (best - 1.0) / kGrid);
  double hi = std::min(1.0, (best + 1.0) / kGrid);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 60; ++it) {
    const double a = hi - r * (hi - lo);
    const double b = lo + r * (hi - lo);
    if (forrester_alpha(a, alpha) < forrester_alpha(b, alpha))
      hi = b;
    else
      lo = a;
  }
  return std::min(best_v, forrester_alpha(0.5 * (lo + hi), alpha));
}

}  // namespace detail

// Reference optima.
inline constexpr double kForrester512Best = -8.8988;
inline constexpr double kConstrained2dBest = 5.1768;
// Constrained optimum of welded_plate at E = 2.0e5 MPa, from an SLSQP solve
// started from a differential-evolution result.
inline constexpr double kWeldedPlateBestDefaultE = 2.646152;

inline std::vector<std::string> problem_names() {
  return {"forrester", "constrained2d", "welded_plate"};
}

inline ProblemSpec make_problem(std::string_view name, const ProblemParams& params = {}) {
  if (name == "forrester") {
    if (!(params.alpha >= 0.0) || !std::isfinite(params.alpha))
      throw Error("forrester: alpha must be a finite nonnegative number");
    const double alpha = params.alpha;
    ProblemSpec p{"forrester", DesignSpace(Vector::Zero(1), Vector::Ones(1)), 0,
                  [alpha](const RawPoint& x) {
                    if (x.size() != 1) throw Error("forrester: expects 1 variable");
                    return Evaluation{forrester_alpha(x[0], alpha), Vector(0)};
                  },
                  std::nullopt, ReferenceSource::Computed};
    if (alpha == 512.0) {
      p.best_known = kForrester512Best;
      p.best_known_source = ReferenceSource::Published;
    } else {
      p.best_known = detail::forrester_minimum(alpha);
    }
    return p;
  }
  if (name == "constrained2d") {
    return ProblemSpec{"constrained2d", DesignSpace(Vector::Zero(2), Vector::Constant(2, 10.0)), 3,
                       constrained_2d, kConstrained2dBest, ReferenceSource::Published};
  }
  if (name == "welded_plate") {
    if (!(params.young_modulus > 0.0)) throw Error("welded_plate: Young's modulus must be positive");
    WeldedPlateConstants k;
    k.E = params.young_modulus;
    Vector lo(4), hi(4);
    lo << 100.0, 2.0, 100.0, 5.0;
    hi << 500.0, 6.0, 500.0, 10.0;
    ProblemSpec p{"welded_plate", DesignSpace(lo, hi), 5,
                  [k](const RawPoint& x) { return welded_plate(x, k); }, std::nullopt,
                  ReferenceSource::Computed};
    if (k.E == WeldedPlateConstants{}.E) p.best_known = kWeldedPlateBestDefaultE;
    return p;
  }
  throw Error("unknown problem '" + std::string(name) + "'");
}

/// Hook for user-supplied expensive models.
inline ProblemSpec make_custom_problem(std::string name, DesignSpace bounds,
                                       std::size_t constraint_count,
                                       std::function<Evaluation(const RawPoint&)> evaluate,
                                       std::optional<double> best_known = std::nullopt) {
  if (!evaluate) throw Error("custom problem needs an evaluator");
  return ProblemSpec{std::move(name), std::move(bounds), constraint_count, std::move(evaluate),
                     best_known, ReferenceSource::Computed};
}

}  // namespace ssbo

#endif  // SSBO_PROBLEMS_HPP
