#ifndef SSBO_BENCH_HPP
#define SSBO_BENCH_HPP

#include "ssbo/driver.hpp"
#include "ssbo/problems.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ssbo {

using RunFunction = std::function<RunRecord(const ProblemSpec&, const RunConfig&)>;

struct BatchConfig {
  ProblemSpec problem;
  ProblemParams params;  // echoed into the summary
  RunConfig run;         // seed is overwritten per replication
  std::size_t replications = 50;
  std::uint64_t base_seed = 0;
  double global_tol = 0.01;  // relative, scaled by (1 + |best_known|)
  std::filesystem::path output_dir;  // empty: no files written
  std::size_t threads = 1;

  void validate() const {
    if (replications < 1) throw Error("batch config: replications must be at least 1");
    if (!(global_tol > 0.0)) throw Error("batch config: global tolerance must be positive");
    if (threads < 1) throw Error("batch config: threads must be at least 1");
    run.validate(problem.dim());
  }
};

struct ReplicationResult {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double final_J = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
  std::size_t evaluations = 0;
  RunStatus status = RunStatus::Failed;
  std::string message;
};

struct BatchSummary {
  std::string problem;
  std::optional<double> best_known;
  double global_tol = 0.01;
  std::size_t replications = 0;
  std::vector<ReplicationResult> runs;  // ordered by replication index
  double mean_J = std::numeric_limits<double>::quiet_NaN();
  double std_J = std::numeric_limits<double>::quiet_NaN();
  double mean_evals = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> global_probability;
  double feasible_fraction = std::numeric_limits<double>::quiet_NaN();
  double mean_feasible_J = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> cdf;  // sorted final J of successful replications
  std::vector<std::size_t> failed_replications;
  nlohmann::json config;

  std::size_t successful() const { return cdf.size(); }
};

inline bool reaches_reference(double final_J, bool feasible, double best_known, double tol) {
  return feasible && std::abs(final_J - best_known) <= tol * (1.0 + std::abs(best_known));
}

/// Aggregates per-replication results. Failed replications are listed but
/// excluded from every statistic; std uses the n-1 estimator (0 for one run).
inline BatchSummary summarize(std::string problem, std::vector<ReplicationResult> runs,
                              std::optional<double> best_known, double global_tol) {
  BatchSummary s;
  s.problem = std::move(problem);
  s.best_known = best_known;
  s.global_tol = global_tol;
  s.replications = runs.size();
  std::sort(runs.begin(), runs.end(),
            [](const auto& a, const auto& b) { return a.replication < b.replication; });

  std::vector<double> js;
  double evals = 0.0;
  std::size_t feasible = 0;
  std::size_t hits = 0;
  double feasible_sum = 0.0;
  for (const auto& r : runs) {
    if (!r.ok) {
      s.failed_replications.push_back(r.replication);
      continue;
    }
    js.push_back(r.final_J);
    evals += static_cast<double>(r.evaluations);
    if (r.feasible) {
      ++feasible;
      feasible_sum += r.final_J;
    }
    if (best_known && reaches_reference(r.final_J, r.feasible, *best_known, global_tol)) ++hits;
  }
  s.runs = std::move(runs);

  const std::size_t n = js.size();
  if (n > 0) {
    const double nd = static_cast<double>(n);
    s.mean_J = std::accumulate(js.begin(), js.end(), 0.0) / nd;
    double ss = 0.0;
    for (double j : js) ss += (j - s.mean_J) * (j - s.mean_J);
    s.std_J = n > 1 ? std::sqrt(ss / (nd - 1.0)) : 0.0;
    s.mean_evals = evals / nd;
    s.feasible_fraction = static_cast<double>(feasible) / nd;
    if (feasible > 0) s.mean_feasible_J = feasible_sum / static_cast<double>(feasible);
    if (best_known) s.global_probability = static_cast<double>(hits) / nd;
  }
  s.cdf = std::move(js);
  std::sort(s.cdf.begin(), s.cdf.end());
  return s;
}

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string criterion_label(const std::optional<Criterion>& c) {
  if (!c) return "DoE";
  switch (*c) {
    case Criterion::Global: return "Global";
    case Criterion::Uniform: return "Uniform";
    case Criterion::Local: return "Local";
  }
  return "unknown";
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

inline void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace detail

inline std::string history_header(Eigen::Index m, std::size_t q) {
  std::string h = "eval,criterion";
  for (Eigen::Index i = 1; i <= m; ++i) h += ",x_" + std::to_string(i);
  h += ",J";
  for (std::size_t j = 1; j <= q; ++j) h += ",g_" + std::to_string(j);
  h += ",incumbent_J,incumbent_feasible";
  return h;
}

/// One CSV row per true evaluation, in order. Rejected candidates go to
/// export_rejects instead.
inline void export_history(const RunRecord& record, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << history_header(record.dim, record.constraint_count) << '\n';
  for (const auto& row : record.history) {
    out << row.eval << ',' << detail::criterion_label(row.criterion);
    for (Eigen::Index i = 0; i < row.x_raw.size(); ++i) out << ',' << detail::format_double(row.x_raw[i]);
    out << ',' << detail::format_double(row.J);
    for (Eigen::Index j = 0; j < row.g.size(); ++j) out << ',' << detail::format_double(row.g[j]);
    out << ',' << detail::format_double(row.incumbent_J) << ',' << (row.incumbent_feasible ? 1 : 0)
        << '\n';
  }
  detail::close_checked(out, path);
}

inline void export_rejects(const RunRecord& record, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "iteration,criterion";
  for (Eigen::Index i = 1; i <= record.dim; ++i) out << ",x_" << i;
  out << ",min_distance\n";
  for (const auto& r : record.rejects) {
    out << r.iteration << ',' << detail::criterion_label(r.criterion);
    for (Eigen::Index i = 0; i < r.x_raw.size(); ++i) out << ',' << detail::format_double(r.x_raw[i]);
    out << ',' << detail::format_double(r.min_distance) << '\n';
  }
  detail::close_checked(out, path);
}

inline nlohmann::json to_json(const SolverSettings& s) {
  return {{"population", s.population},         {"generations", s.generations},
          {"penalty_weight", s.penalty_weight}, {"fd_step", s.fd_step},
          {"max_local_iters", s.max_local_iters}, {"tournament_size", s.tournament_size},
          {"crossover_rate", s.crossover_rate}, {"blend_alpha", s.blend_alpha},
          {"mutation_scale", s.mutation_scale}};
}

inline nlohmann::json to_json(const RunConfig& c, Eigen::Index m) {
  nlohmann::json cycle = nlohmann::json::array();
  for (auto cr : c.cycle) cycle.push_back(std::string(to_string(cr)));
  return {{"n0", c.initial_samples(m)},
          {"k_max", c.k_max},
          {"epsilon", c.epsilon},
          {"p", c.interval_size(m)},
          {"tau_feas", c.tau_feas},
          {"kernel", std::string(to_string(c.kernel))},
          {"tune", c.tune},
          {"cycle", cycle},
          {"n_lhs", c.n_lhs},
          {"lhs_jitter", c.lhs_jitter},
          {"solver", to_json(c.solver)}};
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline nlohmann::json to_json(const BatchSummary& s) {
  using nlohmann::json;
  auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  json runs = json::array();
  for (const auto& r : s.runs) {
    runs.push_back({{"replication", r.replication},
                    {"seed", r.seed},
                    {"ok", r.ok},
                    {"status", std::string(to_string(r.status))},
                    {"final_J", num(r.final_J)},
                    {"feasible", r.feasible},
                    {"evaluations", r.evaluations},
                    {"message", r.message}});
  }
  return {{"problem", s.problem},
          {"best_known", s.best_known ? json(*s.best_known) : json(nullptr)},
          {"global_tolerance", s.global_tol},
          {"replications", s.replications},
          {"successful_replications", s.successful()},
          {"mean_J", num(s.mean_J)},
          {"std_J", num(s.std_J)},
          {"mean_evals", num(s.mean_evals)},
          {"global_probability", s.global_probability ? json(*s.global_probability) : json(nullptr)},
          {"feasible_fraction", num(s.feasible_fraction)},
          {"mean_feasible_J", num(s.mean_feasible_J)},
          {"cdf", s.cdf},
          {"failed_replications", s.failed_replications},
          {"runs", runs},
          {"config", s.config}};
}

/// Writes the summary as JSON. Everything but "timestamp" is a pure function
/// of the summary.
inline void export_summary(const BatchSummary& summary, const std::filesystem::path& path,
                           bool with_timestamp = true) {
  nlohmann::json doc = to_json(summary);
  if (with_timestamp) doc["timestamp"] = utc_timestamp();
  auto out = detail::open_for_write(path);
  out << doc.dump(2) << '\n';
  detail::close_checked(out, path);
}

inline std::filesystem::path replication_dir(const std::filesystem::path& root, std::size_t rep) {
  std::ostringstream name;
  name << "rep_" << std::setw(3) << std::setfill('0') << rep;
  return root / name.str();
}

/// R independent runs with seeds base, base+1, ... Replications may run on
/// several threads; results are reduced in replication order.
inline BatchSummary run_batch(const BatchConfig& cfg, const RunFunction& runner = run) {
  cfg.validate();
  std::vector<ReplicationResult> results(cfg.replications);
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < cfg.replications; i = next++) {
      ReplicationResult& r = results[i];
      r.replication = i;
      r.seed = cfg.base_seed + i;
      RunConfig rc = cfg.run;
      rc.seed = r.seed;
      try {
        const RunRecord rec = runner(cfg.problem, rc);
        r.status = rec.status;
        r.message = rec.message;
        r.evaluations = rec.evaluations;
        r.ok = rec.status != RunStatus::Failed && rec.has_incumbent();
        if (r.ok) {
          r.final_J = rec.final_J();
          r.feasible = rec.final_feasible();
        }
        if (!cfg.output_dir.empty()) {
          const auto dir = replication_dir(cfg.output_dir, i);
          export_history(rec, dir / "history.csv");
          export_rejects(rec, dir / "rejects.csv");
        }
      } catch (const std::exception& ex) {
        r.ok = false;
        r.status = RunStatus::Failed;
        r.message = ex.what();
      }
    }
  };

  const std::size_t n_threads = std::min(cfg.threads, cfg.replications);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  BatchSummary summary = summarize(cfg.problem.name, std::move(results), cfg.problem.best_known,
                                   cfg.global_tol);
  summary.config = {{"problem", cfg.problem.name},
                    {"alpha", cfg.params.alpha},
                    {"young_modulus", cfg.params.young_modulus},
                    {"replications", cfg.replications},
                    {"base_seed", cfg.base_seed},
                    {"global_tolerance", cfg.global_tol},
                    {"run", to_json(cfg.run, cfg.problem.dim())}};
  if (!cfg.output_dir.empty()) export_summary(summary, cfg.output_dir / "summary.json");
  return summary;
}

}  // namespace ssbo

#endif  // SSBO_BENCH_HPP
