// Command-line front end: solve a case with a distributed algorithm, tune
// hyperparameters on the descending schedule, or benchmark combinations of
// cases, algorithms, formulations, and worker counts.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dopf/bench.hpp"
#include "dopf/matpower.hpp"
#include "dopf/partition.hpp"
#include "dopf/runtime.hpp"

namespace {

dopf::NetworkCase load_case(const std::string& path, const std::string& areas_path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open case file: " + path);
  dopf::NetworkCase nc = dopf::parse_matpower(in);
  if (nc.name.empty()) nc.name = path;
  std::optional<std::map<int, int>> override;
  if (!areas_path.empty()) {
    std::ifstream ain(areas_path);
    if (!ain) throw std::runtime_error("cannot open area override file: " + areas_path);
    override = dopf::parse_area_override(ain);
  }
  nc = dopf::assign_areas(std::move(nc), override);
  auto violations = dopf::validate_case(nc);
  if (!violations.empty()) throw std::runtime_error("invalid case: " + violations.front());
  return nc;
}

int default_workers() {
  const char* env = std::getenv("DOPF_WORKERS");
  if (env) return std::atoi(env);
  return 0;  // one worker per area
}

struct CommonFlags {
  std::string case_path, areas_path, out_prefix = "dopf";
  std::string alg = "admm", form = "dc", norm = "l2", termination = "central", init = "flat";
  double penalty = 0.0, atc_growth = 1.05, tol = 0.01, solver_tol = 1e-6;
  int max_iter = 1000, workers = default_workers();
  bool no_oracle = false;

  void add_to(CLI::App* cmd, bool need_case = true) {
    cmd->add_option("--case", case_path, "MATPOWER case file")->required(need_case);
    cmd->add_option("--areas", areas_path, "partition override file (bus_id area_id per line)");
    cmd->add_option("--alg", alg, "algorithm: admm | app | atc");
    cmd->add_option("--form", form, "formulation: dc | soc");
    cmd->add_option("--penalty", penalty, "penalty hyperparameter (0 = default)");
    cmd->add_option("--atc-growth", atc_growth, "ATC penalty growth factor alpha");
    cmd->add_option("--tol", tol, "mismatch tolerance");
    cmd->add_option("--norm", norm, "mismatch norm: l2 | linf");
    cmd->add_option("--max-iter", max_iter, "maximum iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--termination", termination, "termination mode: central | distributed");
    cmd->add_option("--init", init, "initialization: flat | warm");
    cmd->add_option("--workers", workers, "worker threads (0 = one per area; env DOPF_WORKERS)");
    cmd->add_option("--solver-tol", solver_tol, "subproblem solver tolerance");
    cmd->add_option("--out", out_prefix, "output file prefix");
    cmd->add_flag("--no-oracle", no_oracle, "skip the centralized oracle comparison");
  }

  dopf::AdaConfig config() const {
    dopf::AdaConfig cfg;
    if (alg == "admm")
      cfg.algorithm = dopf::Algorithm::ADMM;
    else if (alg == "app")
      cfg.algorithm = dopf::Algorithm::APP;
    else if (alg == "atc")
      cfg.algorithm = dopf::Algorithm::ATC;
    else
      throw std::runtime_error("unknown algorithm: " + alg);
    if (form == "dc")
      cfg.formulation = dopf::FormulationKind::DC;
    else if (form == "soc")
      cfg.formulation = dopf::FormulationKind::SOC;
    else
      throw std::runtime_error("unknown formulation: " + form);
    if (norm == "l2")
      cfg.norm = dopf::MismatchNorm::L2;
    else if (norm == "linf")
      cfg.norm = dopf::MismatchNorm::LInf;
    else
      throw std::runtime_error("unknown norm: " + norm);
    if (termination == "central")
      cfg.termination = dopf::TerminationMode::Central;
    else if (termination == "distributed")
      cfg.termination = dopf::TerminationMode::Distributed;
    else
      throw std::runtime_error("unknown termination mode: " + termination);
    if (init == "flat")
      cfg.initialization = dopf::Initialization::Flat;
    else if (init == "warm")
      cfg.initialization = dopf::Initialization::Warm;
    else
      throw std::runtime_error("unknown initialization: " + init);
    cfg.penalty = penalty;
    cfg.atc_growth = atc_growth;
    cfg.mismatch_tol = tol;
    cfg.max_iterations = max_iter;
    cfg.solver_tol = solver_tol;
    cfg.validate();
    return cfg;
  }
};

int cmd_solve(const CommonFlags& flags) {
  dopf::NetworkCase nc = load_case(flags.case_path, flags.areas_path);
  dopf::AdaConfig cfg = flags.config();
  dopf::SolveReport report = flags.no_oracle ? dopf::solve_dopf(nc, cfg, flags.workers)
                                             : dopf::run_with_oracle(nc, cfg, flags.workers);

  std::ofstream json_out(flags.out_prefix + ".json");
  json_out << dopf::report_to_json(nc, cfg, report).dump(2) << "\n";
  std::ofstream csv_out(flags.out_prefix + "_trace.csv");
  dopf::write_trace_csv(csv_out, report);

  std::cout << (report.converged ? "converged" : "not converged") << " in " << report.iterations
            << " iterations, objective " << report.total_objective;
  if (report.oracle_gap) std::cout << ", gap " << *report.oracle_gap * 100.0 << "%";
  std::cout << ", " << report.wall_seconds << " s\n";
  return report.converged ? 0 : 2;
}

int cmd_tune(const CommonFlags& flags, double sweep_start, double sweep_stop) {
  dopf::NetworkCase nc = load_case(flags.case_path, flags.areas_path);
  dopf::AdaConfig cfg = flags.config();
  dopf::TuneSchedule schedule{sweep_start, sweep_stop};
  dopf::TuneResult result = dopf::tune(nc, cfg, schedule, flags.workers);

  std::ofstream csv_out(flags.out_prefix + "_sweep.csv");
  dopf::write_rows_csv(csv_out, result.sweep);

  if (result.best) {
    std::cout << "best hyperparameter: " << *result.best << "\n";
    return 0;
  }
  std::cout << "no hyperparameter in the sweep converged within 1% of the oracle\n";
  return 2;
}

int cmd_compare(const CommonFlags& flags, const std::vector<std::string>& case_paths,
                const std::vector<std::string>& algs, const std::vector<std::string>& forms,
                const std::vector<int>& worker_counts, int repeats) {
  std::vector<dopf::NetworkCase> cases;
  for (const auto& p : case_paths) cases.push_back(load_case(p, flags.areas_path));
  std::vector<dopf::Algorithm> algorithms;
  std::vector<dopf::FormulationKind> formulations;
  for (const auto& a : algs) {
    CommonFlags f = flags;
    f.alg = a;
    algorithms.push_back(f.config().algorithm);
  }
  for (const auto& fo : forms) {
    CommonFlags f = flags;
    f.form = fo;
    formulations.push_back(f.config().formulation);
  }
  dopf::AdaConfig cfg = flags.config();
  std::vector<int> workers = worker_counts.empty() ? std::vector<int>{0} : worker_counts;
  dopf::CompareResult result = dopf::compare(cases, algorithms, formulations, workers, repeats, cfg);

  std::ofstream rows_out(flags.out_prefix + "_rows.csv");
  dopf::write_rows_csv(rows_out, result.rows);
  std::ofstream timings_out(flags.out_prefix + "_timings.csv");
  dopf::write_timings_csv(timings_out, result.timings);
  std::cout << result.rows.size() << " benchmark rows, " << result.timings.size()
            << " timing points written\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed optimal power flow benchmark tool"};
  app.require_subcommand(1);

  CommonFlags solve_flags, tune_flags, compare_flags;
  double sweep_start = 0.0, sweep_stop = 0.0;
  std::vector<std::string> case_paths, algs{"admm"}, forms{"dc"};
  std::vector<int> worker_counts;
  int repeats = 5;

  CLI::App* solve_cmd = app.add_subcommand("solve", "run one distributed solve");
  solve_flags.add_to(solve_cmd);

  CLI::App* tune_cmd = app.add_subcommand("tune", "hyperparameter sweep (descending schedule)");
  tune_flags.add_to(tune_cmd);
  tune_cmd->add_option("--sweep-start", sweep_start, "first sweep value (0 = built-in default)");
  tune_cmd->add_option("--sweep-stop", sweep_stop, "lowest sweep value (0 = default)");

  CLI::App* compare_cmd = app.add_subcommand("compare", "benchmark a Cartesian product of runs");
  compare_flags.add_to(compare_cmd, false);
  compare_cmd->add_option("--cases", case_paths, "MATPOWER case files")->required();
  compare_cmd->add_option("--algs", algs, "algorithms to compare");
  compare_cmd->add_option("--forms", forms, "formulations to compare");
  compare_cmd->add_option("--worker-counts", worker_counts, "worker counts to sweep");
  compare_cmd->add_option("--repeats", repeats, "timing repeats per combination")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_flags);
    if (tune_cmd->parsed()) return cmd_tune(tune_flags, sweep_start, sweep_stop);
    return cmd_compare(compare_flags, case_paths, algs, forms, worker_counts, repeats);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
