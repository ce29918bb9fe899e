#ifndef SSBO_DRIVER_HPP
#define SSBO_DRIVER_HPP

#include "ssbo/design_space.hpp"
#include "ssbo/infill.hpp"
#include "ssbo/inner_solvers.hpp"
#include "ssbo/problems.hpp"
#include "ssbo/rbf.hpp"
#include "ssbo/samples.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ssbo {

struct RunConfig {
  std::optional<std::size_t> n0;  // defaults to 2m+1
  std::size_t k_max = 0;          // accepted infill evaluations after the DoE
  double epsilon = kDefaultEpsilon;
  std::optional<std::size_t> p;   // defaults to n0
  double tau_feas = 1e-6;
  KernelKind kernel = KernelKind::Gaussian;
  bool tune = true;
  SolverSettings solver;
  std::uint64_t seed = 0;
  std::vector<Criterion> cycle{Criterion::Global, Criterion::Local, Criterion::Uniform};
  std::size_t n_lhs = kDefaultLhsCandidates;
  bool lhs_jitter = true;

  std::size_t initial_samples(Eigen::Index m) const {
    return n0.value_or(2 * static_cast<std::size_t>(m) + 1);
  }
  std::size_t interval_size(Eigen::Index m) const { return p.value_or(initial_samples(m)); }

  void validate(Eigen::Index m) const {
    const std::size_t n_init = initial_samples(m);
    if (n_init < 2) throw Error("run config: n0 must be at least 2");
    if (!(epsilon > 0.0)) throw Error("run config: epsilon must be positive");
    if (!(tau_feas >= 0.0)) throw Error("run config: tau_feas must be nonnegative");
    if (cycle.empty()) throw Error("run config: criterion cycle is empty");
    if (n_lhs < 1) throw Error("run config: n_lhs must be at least 1");
    const std::size_t p_val = interval_size(m);
    if (p_val < 2) throw Error("run config: p must be at least 2");
    if (p_val > n_init + k_max) throw Error("run config: p exceeds n0 + k_max");
    solver.validate();
  }
};

struct HistoryRow {
  std::size_t eval = 0;                 // 1-based
  std::optional<Criterion> criterion;   // empty for DoE rows
  RawPoint x_raw;
  double J = 0.0;
  Vector g;
  double incumbent_J = 0.0;
  bool incumbent_feasible = false;
};

struct RejectRow {
  std::size_t iteration = 0;
  Criterion criterion = Criterion::Global;
  RawPoint x_raw;
  double min_distance = 0.0;
};

enum class RunStatus { Completed, Stalled, Failed };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Stalled: return "stalled";
    case RunStatus::Failed: return "failed";
  }
  return "unknown";
}

struct RunRecord {
  std::string problem;
  Eigen::Index dim = 0;
  std::size_t constraint_count = 0;
  std::vector<HistoryRow> history;
  std::vector<RejectRow> rejects;
  std::size_t incumbent_row = 0;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
  RunStatus status = RunStatus::Completed;
  std::string message;

  bool has_incumbent() const { return !history.empty(); }
  const HistoryRow& incumbent() const {
    if (history.empty()) throw Error("run record has no evaluations");
    return history.at(incumbent_row);
  }
  double final_J() const { return incumbent().J; }
  bool final_feasible() const { return history.back().incumbent_feasible; }
};

/// Feasible sample with minimal J if one exists, else minimal J overall.
/// Ties keep the earliest insertion.
inline Incumbent select_incumbent(const SampleSet& set, double tau_feas) {
  if (set.empty()) throw Error("select_incumbent: empty sample set");
  std::optional<std::size_t> best_feasible;
  std::size_t best_any = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i].J < set[best_any].J) best_any = i;
    if (set[i].feasible(tau_feas) && (!best_feasible || set[i].J < set[*best_feasible].J))
      best_feasible = i;
  }
  if (best_feasible) return {*best_feasible, true};
  return {best_any, false};
}

/// Sequential surrogate-based optimization of one problem.
///
/// Starts from an LHS design of n0 points, then repeatedly asks the criteria in
/// config.cycle (cyclically) for a candidate. A candidate within epsilon of an
/// existing sample is logged and the next criterion is tried, without spending
/// budget. If a whole pass rejects, a reseeded uniform candidate is tried; if that
/// is rejected too, the run stops as stalled. Evaluator failures stop the run
/// with status Failed and keep the partial history.
inline RunRecord run(const ProblemSpec& problem, const RunConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  const Eigen::Index m = problem.dim();
  config.validate(m);

  RunRecord rec;
  rec.problem = problem.name;
  rec.dim = m;
  rec.constraint_count = problem.constraint_count;

  CountingEvaluator evaluator(problem);
  SampleSet set;
  Incumbent incumbent;
  std::mt19937_64 seeds(config.seed);
  std::optional<SurrogateBundle> bundle;

  auto finish = [&](RunStatus status, std::string message) {
    rec.status = status;
    rec.message = std::move(message);
    rec.evaluations = evaluator.count();
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rec;
  };

  // returns an error message on failure
  auto evaluate_and_add = [&](const UnitPoint& u,
                              std::optional<Criterion> tag) -> std::optional<std::string> {
    const RawPoint x = denormalize(u, problem.bounds);
    Evaluation e;
    try {
      e = evaluator(x);
    } catch (const std::exception& ex) {
      return std::string("evaluator failed: ") + ex.what();
    }
    if (!std::isfinite(e.objective) || !e.constraints.allFinite())
      return std::string("evaluator returned non-finite values");
    set.add(Sample{u, x, e.objective, e.constraints});
    incumbent = select_incumbent(set, config.tau_feas);
    bundle.reset();
    rec.history.push_back(HistoryRow{set.size(), tag, x, e.objective, e.constraints,
                                     set[incumbent.index].J, incumbent.feasible});
    rec.incumbent_row = incumbent.index;
    return std::nullopt;
  };

  const std::size_t n0 = config.initial_samples(m);
  for (const auto& u : lhs_sample(n0, m, seeds(), config.lhs_jitter)) {
    if (auto err = evaluate_and_add(u, std::nullopt)) return finish(RunStatus::Failed, *err);
  }

  auto generate = [&](Criterion c) -> InfillCandidate {
    switch (c) {
      case Criterion::Global:
        if (!bundle) bundle = build_bundle(set, config.kernel, config.tune);
        return criterion_global(*bundle, config.solver, seeds());
      case Criterion::Local: {
        const std::size_t p = std::min(config.interval_size(m), set.size());
        return criterion_local(set, incumbent, p, config.kernel, config.tune, config.solver,
                               seeds());
      }
      case Criterion::Uniform:
        return criterion_uniform(set, config.n_lhs, seeds());
    }
    throw Error("unknown criterion");
  };

  std::size_t cursor = 0;
  for (std::size_t iteration = 1; iteration <= config.k_max; ++iteration) {
    std::optional<InfillCandidate> chosen;
    try {
      for (std::size_t attempt = 0; attempt < config.cycle.size() && !chosen; ++attempt) {
        InfillCandidate cand = generate(config.cycle[cursor++ % config.cycle.size()]);
        const Acceptance verdict = accept_candidate(cand, set, config.epsilon);
        if (verdict) {
          chosen = std::move(cand);
        } else {
          rec.rejects.push_back(RejectRow{iteration, cand.criterion,
                                          denormalize(cand.x, problem.bounds), verdict.min_distance});
        }
      }
      if (!chosen) {
        InfillCandidate cand = criterion_uniform(set, config.n_lhs, seeds());
        const Acceptance verdict = accept_candidate(cand, set, config.epsilon);
        if (!verdict) {
          rec.rejects.push_back(RejectRow{iteration, cand.criterion,
                                          denormalize(cand.x, problem.bounds), verdict.min_distance});
          return finish(RunStatus::Stalled, "every criterion rejected at iteration " +
                                                std::to_string(iteration));
        }
        chosen = std::move(cand);
      }
    } catch (const Error& ex) {
      return finish(RunStatus::Failed, std::string("infill failed: ") + ex.what());
    }
    if (auto err = evaluate_and_add(chosen->x, chosen->criterion))
      return finish(RunStatus::Failed, *err);
  }
  return finish(RunStatus::Completed, "");
}

}  // namespace ssbo

#endif  // SSBO_DRIVER_HPP
