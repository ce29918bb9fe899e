#ifndef SSBO_INFILL_HPP
#define SSBO_INFILL_HPP

#include "ssbo/design_space.hpp"
#include "ssbo/inner_solvers.hpp"
#include "ssbo/rbf.hpp"
#include "ssbo/samples.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

namespace ssbo {

enum class Criterion { Global, Uniform, Local };

inline std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::Global: return "global";
    case Criterion::Uniform: return "uniform";
    case Criterion::Local: return "local";
  }
  return "unknown";
}

inline std::optional<Criterion> parse_criterion(std::string_view name) {
  for (auto c : {Criterion::Global, Criterion::Uniform, Criterion::Local}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

struct InfillCandidate {
  UnitPoint x;
  Criterion criterion = Criterion::Global;
};

/// Box spanned by the p samples nearest to the incumbent.
struct ReducedInterval {
  DesignSpace box;
  std::vector<std::size_t> members;  // indices into the sample set, nearest first
};

inline constexpr std::size_t kDefaultLhsCandidates = 10000;
inline constexpr double kDefaultEpsilon = 1e-3;
inline constexpr double kDegenerateWidening = 0.005;

inline BoxProblem surrogate_problem(const SurrogateBundle& bundle, DesignSpace box) {
  BoxProblem problem;
  problem.box = std::move(box);
  problem.objective = [&model = bundle.objective](const UnitPoint& x) { return predict(model, x); };
  for (const auto& g : bundle.constraints) {
    problem.constraints.push_back([&g](const UnitPoint& x) { return predict(g, x); });
  }
  return problem;
}

/// Criterion 1: global GA search of the surrogate problem over the whole cube.
inline InfillCandidate criterion_global(const SurrogateBundle& bundle, SolverSettings settings,
                                        std::uint64_t seed) {
  settings.seed = seed;
  const BoxProblem problem = surrogate_problem(bundle, DesignSpace::unit(bundle.objective.dim()));
  return {ga_minimize(problem, settings), Criterion::Global};
}

/// Criterion 2: the LHS candidate farthest from every existing sample.
inline InfillCandidate criterion_uniform(const SampleSet& set, std::size_t n_lhs,
                                         std::uint64_t seed) {
  if (set.empty()) throw Error("criterion_uniform: empty sample set");
  const auto candidates = lhs_sample(n_lhs, set.dim(), seed);
  const auto inputs = set.inputs();
  // argmin of 1/d is argmax of d; negating keeps d = 0 finite
  const ScalarField neg_distance = [&inputs](const UnitPoint& x) {
    return -min_distance(x, inputs);
  };
  return {candidate_search(neg_distance, candidates), Criterion::Uniform};
}

/// Orders samples by distance to the incumbent (ties by insertion order) and
/// boxes the first p of them.
inline ReducedInterval reduced_interval(const SampleSet& set, const Incumbent& incumbent,
                                        std::size_t p) {
  if (p < 1) throw Error("reduced_interval: p must be at least 1");
  if (p > set.size()) throw Error("reduced_interval: p exceeds sample count");
  if (incumbent.index >= set.size()) throw Error("reduced_interval: incumbent out of range");

  const UnitPoint& center = set[incumbent.index].x;
  std::vector<double> dist(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) dist[i] = distance(set[i].x, center);
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&dist](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  order.resize(p);

  const Eigen::Index m = set.dim();
  Vector lo = center;
  Vector hi = center;
  for (std::size_t i : order) {
    lo = lo.cwiseMin(set[i].x);
    hi = hi.cwiseMax(set[i].x);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (hi[j] - lo[j] <= 1e-12) {
      lo[j] -= kDegenerateWidening;
      hi[j] += kDegenerateWidening;
    }
    lo[j] = std::clamp(lo[j], 0.0, 1.0);
    hi[j] = std::clamp(hi[j], 0.0, 1.0);
  }
  return {DesignSpace(std::move(lo), std::move(hi)), std::move(order)};
}

/// Criterion 3: local surrogate fitted on the reduced-interval members only,
/// minimized from the incumbent inside the reduced box.
inline InfillCandidate criterion_local(const SampleSet& set, const Incumbent& incumbent,
                                       std::size_t p, KernelKind kernel, bool tune,
                                       SolverSettings settings, std::uint64_t seed) {
  if (p < 2) throw Error("criterion_local: p must be at least 2");
  const ReducedInterval region = reduced_interval(set, incumbent, p);
  std::vector<Sample> members;
  members.reserve(region.members.size());
  for (std::size_t i : region.members) members.push_back(set[i]);

  const SurrogateBundle local = build_bundle(members, kernel, tune);
  settings.seed = seed;
  const BoxProblem problem = surrogate_problem(local, region.box);
  return {local_minimize(problem, set[incumbent.index].x, settings), Criterion::Local};
}

struct Acceptance {
  bool accepted = false;
  double min_distance = 0.0;

  explicit operator bool() const { return accepted; }
};

/// Rejects candidates closer than epsilon (unit space) to an existing sample.
inline Acceptance accept_candidate(const InfillCandidate& candidate, const SampleSet& set,
                                   double epsilon = kDefaultEpsilon) {
  if (set.empty()) throw Error("accept_candidate: empty sample set");
  const auto inputs = set.inputs();
  const double d = min_distance(candidate.x, inputs);
  return {!(d < epsilon), d};
}

}  // namespace ssbo

#endif  // SSBO_INFILL_HPP
