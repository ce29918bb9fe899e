// Command-line front end: single runs, replicated benchmarks, problem listing.
#include "ssbo/ssbo.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRunFailure = 2;

struct CommonOptions {
  std::string problem;
  double alpha = 0.0;
  double young_modulus = 2.0e5;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::string kernel = "gaussian";
  std::size_t n0 = 0;  // 0: default 2m+1
  std::size_t p = 0;   // 0: default n0
  double epsilon = ssbo::kDefaultEpsilon;
  std::string cycle = "global,local,uniform";
  bool no_tune = false;
  std::size_t population = 50;
  std::size_t generations = 100;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--problem", o.problem, "Problem name (see `ssbo problems`)")->required();
  cmd->add_option("--alpha", o.alpha, "Forrester complexity coefficient");
  cmd->add_option("--young-modulus", o.young_modulus, "Welded plate Young's modulus [MPa]");
  cmd->add_option("--budget", o.budget, "Infill evaluations after the initial design (k_max)")
      ->required();
  cmd->add_option("--seed", o.seed, "RNG seed (base seed for bench)");
  cmd->add_option("--kernel", o.kernel,
                  "gaussian|multiquadric|inverse-multiquadric|thin-plate");
  cmd->add_option("--n0", o.n0, "Initial LHS sample count (default 2m+1)");
  cmd->add_option("--p", o.p, "Reduced-interval size (default n0)");
  cmd->add_option("--epsilon", o.epsilon, "Rejection distance in unit coordinates");
  cmd->add_option("--cycle", o.cycle, "Criterion order, e.g. global,local,uniform");
  cmd->add_flag("--no-tune", o.no_tune, "Use c = 1 instead of LOOCV tuning");
  cmd->add_option("--population", o.population, "Inner GA population");
  cmd->add_option("--generations", o.generations, "Inner GA generations");
  cmd->add_option("--out", o.out, "Output directory")->required();
}

std::vector<ssbo::Criterion> parse_cycle(const std::string& text) {
  std::vector<ssbo::Criterion> cycle;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto c = ssbo::parse_criterion(item);
    if (!c) throw ssbo::Error("unknown criterion '" + item + "' in --cycle");
    cycle.push_back(*c);
  }
  if (cycle.empty()) throw ssbo::Error("--cycle is empty");
  return cycle;
}

ssbo::ProblemParams make_params(const CommonOptions& o) {
  return {o.alpha, o.young_modulus};
}

ssbo::RunConfig make_run_config(const CommonOptions& o) {
  ssbo::RunConfig cfg;
  auto kernel = ssbo::parse_kernel(o.kernel);
  if (!kernel) throw ssbo::Error("unknown kernel '" + o.kernel + "'");
  cfg.kernel = *kernel;
  cfg.k_max = o.budget;
  cfg.seed = o.seed;
  if (o.n0 > 0) cfg.n0 = o.n0;
  if (o.p > 0) cfg.p = o.p;
  cfg.epsilon = o.epsilon;
  cfg.cycle = parse_cycle(o.cycle);
  cfg.tune = !o.no_tune;
  cfg.solver.population = o.population;
  cfg.solver.generations = o.generations;
  return cfg;
}

void print_incumbent(const ssbo::RunRecord& rec) {
  const auto& inc = rec.incumbent();
  std::cout << std::setprecision(10) << "best J = " << inc.J
            << (rec.final_feasible() ? " (feasible)" : " (infeasible)") << " at x = [";
  for (Eigen::Index i = 0; i < inc.x_raw.size(); ++i)
    std::cout << (i ? ", " : "") << inc.x_raw[i];
  std::cout << "]\n";
  if (inc.g.size() > 0) {
    std::cout << "constraints g = [";
    for (Eigen::Index j = 0; j < inc.g.size(); ++j) std::cout << (j ? ", " : "") << inc.g[j];
    std::cout << "]\n";
  }
}

int cmd_run(const CommonOptions& o) {
  const ssbo::ProblemSpec problem = ssbo::make_problem(o.problem, make_params(o));
  const ssbo::RunConfig cfg = make_run_config(o);
  cfg.validate(problem.dim());

  const ssbo::RunRecord rec = ssbo::run(problem, cfg);
  const std::filesystem::path out(o.out);
  ssbo::export_history(rec, out / "history.csv");
  ssbo::export_rejects(rec, out / "rejects.csv");

  std::cout << "problem " << rec.problem << ": " << rec.evaluations << " evaluations, "
            << rec.rejects.size() << " rejected candidates, status " << ssbo::to_string(rec.status)
            << '\n';
  if (rec.has_incumbent()) print_incumbent(rec);
  if (rec.status == ssbo::RunStatus::Failed) {
    std::cerr << "run failed: " << rec.message << '\n';
    return kExitRunFailure;
  }
  if (rec.status == ssbo::RunStatus::Stalled) std::cerr << "warning: " << rec.message << '\n';
  return kExitOk;
}

int cmd_bench(const CommonOptions& o, std::size_t replications, std::size_t threads,
              double global_tol) {
  ssbo::BatchConfig batch{ssbo::make_problem(o.problem, make_params(o)), make_params(o),
                          make_run_config(o)};
  batch.replications = replications;
  batch.base_seed = o.seed;
  batch.global_tol = global_tol;
  batch.threads = threads;
  batch.output_dir = o.out;
  batch.validate();

  const ssbo::BatchSummary s = ssbo::run_batch(batch);
  std::cout << std::setprecision(8) << "problem " << s.problem << ": " << s.successful() << "/"
            << s.replications << " replications succeeded\n"
            << "mean J = " << s.mean_J << ", std J = " << s.std_J
            << ", mean evaluations = " << s.mean_evals << '\n'
            << "feasible fraction = " << s.feasible_fraction;
  if (s.global_probability) std::cout << ", global probability = " << *s.global_probability;
  std::cout << '\n';
  return s.failed_replications.empty() ? kExitOk : kExitRunFailure;
}

int cmd_problems() {
  std::cout << std::left << std::setw(15) << "name" << std::setw(4) << "m" << std::setw(4) << "q"
            << std::setw(44) << "bounds"
            << "best_known\n";
  for (const auto& name : ssbo::problem_names()) {
    const ssbo::ProblemParams params =
        name == "forrester" ? ssbo::ProblemParams{512.0, 2.0e5} : ssbo::ProblemParams{};
    const auto p = ssbo::make_problem(name, params);
    std::ostringstream bounds;
    for (Eigen::Index i = 0; i < p.dim(); ++i) {
      bounds << (i ? " x " : "") << "[" << p.bounds.lower()[i] << "," << p.bounds.upper()[i] << "]";
    }
    std::ostringstream best;
    if (p.best_known) {
      best << std::setprecision(8) << *p.best_known << " (" << ssbo::to_string(p.best_known_source)
           << ")";
    } else {
      best << "-";
    }
    std::cout << std::setw(15) << p.name << std::setw(4) << p.dim() << std::setw(4)
              << p.constraint_count << std::setw(44) << bounds.str() << best.str();
    if (name == "forrester") std::cout << "  [alpha=512; other alpha values computed by grid search]";
    if (name == "welded_plate") std::cout << "  [E=2.0e5 MPa]";
    std::cout << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential surrogate-based optimization of expensive black-box problems"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Optimize one problem and write history.csv/rejects.csv");
  add_common(run_cmd, run_opts);

  CommonOptions bench_opts;
  std::size_t replications = 50;
  std::size_t threads = 1;
  double global_tol = 0.01;
  auto* bench_cmd = app.add_subcommand("bench", "Replicated runs with summary statistics");
  add_common(bench_cmd, bench_opts);
  bench_cmd->add_option("--replications", replications, "Number of replications")->required();
  bench_cmd->add_option("--threads", threads, "Worker threads");
  bench_cmd->add_option("--global-tol", global_tol, "Relative tolerance for global convergence");

  auto* problems_cmd = app.add_subcommand("problems", "List built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run_opts);
    if (*bench_cmd) return cmd_bench(bench_opts, replications, threads, global_tol);
    if (*problems_cmd) return cmd_problems();
  } catch (const ssbo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return kExitConfig;
}
