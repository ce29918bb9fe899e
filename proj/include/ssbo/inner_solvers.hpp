#ifndef SSBO_INNER_SOLVERS_HPP
#define SSBO_INNER_SOLVERS_HPP

#include "ssbo/design_space.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace ssbo {

using ScalarField = std::function<double(const UnitPoint&)>;

/// Cheap problem over a sub-box of the unit cube; constraints feasible iff <= 0.
struct BoxProblem {
  ScalarField objective;
  std::vector<ScalarField> constraints;
  DesignSpace box = DesignSpace::unit(1);
};

struct SolverSettings {
  std::size_t population = 50;
  std::size_t generations = 100;
  double penalty_weight = 1e3;
  double fd_step = 1e-6;
  std::size_t max_local_iters = 100;
  std::uint64_t seed = 0;

  // GA operators
  std::size_t tournament_size = 2;
  double crossover_rate = 0.9;
  double blend_alpha = 0.5;
  double mutation_scale = 0.1;  // sigma as a fraction of box width

  void validate() const {
    if (population < 1 || generations < 1 || max_local_iters < 1 || tournament_size < 1)
      throw Error("solver settings: counts must be at least 1");
    if (!(penalty_weight > 0.0)) throw Error("solver settings: penalty weight must be positive");
    if (!(fd_step > 0.0 && fd_step < 1e-2)) throw Error("solver settings: fd_step must be in (0, 1e-2)");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
      throw Error("solver settings: crossover rate must be in [0, 1]");
    if (!(blend_alpha >= 0.0) || !(mutation_scale >= 0.0))
      throw Error("solver settings: GA operator scales must be nonnegative");
  }
};

namespace detail {

inline double checked(double v) {
  if (!std::isfinite(v)) throw Error("inner solver: callable returned a non-finite value");
  return v;
}

struct Scored {
  UnitPoint x;
  double objective = 0.0;
  double violation = 0.0;

  bool feasible() const { return violation == 0.0; }
};

inline Scored score(const BoxProblem& problem, UnitPoint x) {
  Scored s{std::move(x), 0.0, 0.0};
  s.objective = checked(problem.objective(s.x));
  for (const auto& g : problem.constraints) s.violation += std::max(0.0, checked(g(s.x)));
  return s;
}

// Feasible beats infeasible; feasible by objective, infeasible by violation.
inline bool better(const Scored& a, const Scored& b) {
  if (a.feasible() != b.feasible()) return a.feasible();
  if (a.feasible()) return a.objective < b.objective;
  return a.violation < b.violation;
}

}  // namespace detail

/// objective(x) + w * sum_j max(0, g_j(x))^2
inline double penalized_value(const BoxProblem& problem, const UnitPoint& x, double w) {
  double value = detail::checked(problem.objective(x));
  for (const auto& g : problem.constraints) {
    const double v = std::max(0.0, detail::checked(g(x)));
    value += w * v * v;
  }
  return value;
}

/// Real-coded GA: tournament selection, blend crossover, Gaussian mutation
/// with per-gene rate 1/m, and an elite of one. Returns the best point seen
/// over the whole search.
inline UnitPoint ga_minimize(const BoxProblem& problem, const SolverSettings& settings) {
  settings.validate();
  const DesignSpace& box = problem.box;
  const Eigen::Index m = box.dim();
  const Vector width = box.width();
  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t pop_size = settings.population;
  std::vector<detail::Scored> pop;
  pop.reserve(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    UnitPoint x(m);
    for (Eigen::Index j = 0; j < m; ++j) x[j] = box.lower()[j] + unif(rng) * width[j];
    pop.push_back(detail::score(problem, std::move(x)));
  }

  auto best_of = [](const std::vector<detail::Scored>& p) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (detail::better(p[i], p[b])) b = i;
    }
    return b;
  };
  detail::Scored best = pop[best_of(pop)];

  std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
  auto tournament = [&]() -> const detail::Scored& {
    std::size_t w = pick(rng);
    for (std::size_t k = 1; k < settings.tournament_size; ++k) {
      const std::size_t c = pick(rng);
      if (detail::better(pop[c], pop[w])) w = c;
    }
    return pop[w];
  };
  const double gene_rate = 1.0 / static_cast<double>(m);
  auto mutate = [&](UnitPoint& x) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (unif(rng) < gene_rate) x[j] += settings.mutation_scale * width[j] * gauss(rng);
    }
  };

  std::vector<detail::Scored> next;
  next.reserve(pop_size);
  for (std::size_t gen = 0; gen < settings.generations; ++gen) {
    next.clear();
    next.push_back(pop[best_of(pop)]);
    while (next.size() < pop_size) {
      UnitPoint a = tournament().x;
      UnitPoint b = tournament().x;
      if (unif(rng) < settings.crossover_rate) {
        for (Eigen::Index j = 0; j < m; ++j) {
          const double lo = std::min(a[j], b[j]);
          const double hi = std::max(a[j], b[j]);
          const double span = settings.blend_alpha * (hi - lo);
          a[j] = lo - span + unif(rng) * (hi - lo + 2.0 * span);
          b[j] = lo - span + unif(rng) * (hi - lo + 2.0 * span);
        }
      }
      mutate(a);
      mutate(b);
      next.push_back(detail::score(problem, box.clip(std::move(a))));
      if (next.size() < pop_size) next.push_back(detail::score(problem, box.clip(std::move(b))));
    }
    std::swap(pop, next);
    const detail::Scored& gen_best = pop[best_of(pop)];
    if (detail::better(gen_best, best)) best = gen_best;
  }
  return best.x;
}

namespace detail {

// Central differences, one-sided at the box faces.
inline Vector fd_gradient(const std::function<double(const UnitPoint&)>& f, const UnitPoint& x,
                          double fx, double h, const DesignSpace& box) {
  Vector grad(x.size());
  UnitPoint probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const bool up_ok = x[i] + h <= box.upper()[i];
    const bool down_ok = x[i] - h >= box.lower()[i];
    if (up_ok && down_ok) {
      probe[i] = x[i] + h;
      const double fp = f(probe);
      probe[i] = x[i] - h;
      const double fm = f(probe);
      grad[i] = (fp - fm) / (2.0 * h);
    } else if (up_ok) {
      probe[i] = x[i] + h;
      grad[i] = (f(probe) - fx) / h;
    } else if (down_ok) {
      probe[i] = x[i] - h;
      grad[i] = (fx - f(probe)) / h;
    } else {
      grad[i] = 0.0;
    }
    probe[i] = x[i];
  }
  return grad;
}

}  // namespace detail

/// Projected-gradient descent on the penalized surrogate with finite-difference
/// gradients, Barzilai-Borwein trial steps and Armijo backtracking. Never
/// returns a point worse than start.
inline UnitPoint local_minimize(const BoxProblem& problem, const UnitPoint& start,
                                const SolverSettings& settings) {
  settings.validate();
  const DesignSpace& box = problem.box;
  if (start.size() != box.dim()) throw Error("local_minimize: dimension mismatch");
  constexpr double kGradTol = 1e-8;
  constexpr double kStepTol = 1e-10;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;

  auto f = [&](const UnitPoint& x) { return penalized_value(problem, x, settings.penalty_weight); };
  UnitPoint x = box.clip(start);
  double fx = f(x);

  UnitPoint prev_x;
  Vector prev_grad;
  const double diag = box.width().norm();
  for (std::size_t it = 0; it < settings.max_local_iters; ++it) {
    const Vector grad = detail::fd_gradient(f, x, fx, settings.fd_step, box);
    Vector projected = grad;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if ((x[i] <= box.lower()[i] && grad[i] > 0.0) || (x[i] >= box.upper()[i] && grad[i] < 0.0))
        projected[i] = 0.0;
    }
    const double gnorm = projected.norm();
    if (gnorm < kGradTol) break;

    double t = 0.1 * diag / gnorm;
    if (it > 0) {
      const Vector s = x - prev_x;
      const Vector y = grad - prev_grad;
      const double sy = s.dot(y);
      if (sy > 0.0) t = std::min(s.squaredNorm() / sy, 10.0 * diag / gnorm);
    }

    bool accepted = false;
    bool tiny_step = false;
    UnitPoint trial;
    double f_trial = fx;
    for (int k = 0; k < kMaxHalvings; ++k, t *= 0.5) {
      trial = box.clip(x - t * projected);
      const Vector d = trial - x;
      if (d.norm() < kStepTol) {
        tiny_step = true;
        f_trial = f(trial);
        accepted = f_trial <= fx;
        break;
      }
      f_trial = f(trial);
      if (f_trial <= fx + kArmijo * grad.dot(d) && f_trial <= fx) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    prev_x = x;
    prev_grad = grad;
    x = trial;
    fx = f_trial;
    if (tiny_step || (x - prev_x).norm() < kStepTol) break;
  }
  return x;
}

/// Index of the minimal-score candidate; ties keep the lowest index.
inline std::size_t candidate_search_index(const ScalarField& score,
                                          std::span<const UnitPoint> candidates) {
  if (candidates.empty()) throw Error("candidate_search: empty candidate list");
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double s = score(candidates[i]);
    if (s < best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

inline UnitPoint candidate_search(const ScalarField& score, std::span<const UnitPoint> candidates) {
  return candidates[candidate_search_index(score, candidates)];
}

}  // namespace ssbo

#endif  // SSBO_INNER_SOLVERS_HPP
