#pragma once

// Benchmark front end: distributed runs validated against the centralized
// oracle, hyperparameter sweeps (geometric descent for ADMM/APP, arithmetic
// descent for ATC), and machine-readable CSV/JSON reports.

#include <json.hpp>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dopf/formulations.hpp"
#include "dopf/runtime.hpp"
#include "dopf/solver.hpp"

namespace dopf {

struct BenchmarkRow {
  std::string case_name;
  int areas = 0;
  std::string algorithm;
  std::string formulation;
  double hyperparameter = 0.0;
  int iterations = 0;
  double time_seconds = 0.0;
  bool converged = false;
  std::optional<double> objective_gap;  // only when converged
  double final_l2 = 0.0;
  std::string error;
};

inline double centralized_objective(const NetworkCase& nc, FormulationKind form,
                                    double tol = 1e-8) {
  ConvexProblem p = build_formulation(nc, form);
  SubproblemSolution sol = solve(p, tol);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("centralized " + to_string(form) + " solve failed: " +
                             to_string(sol.status));
  return sol.objective;
}

// Signed fractional gap versus the centralized solve of the same case.
inline double objective_gap(double distributed, double central) {
  return (distributed - central) / std::abs(central);
}

inline SolveReport run_with_oracle(const NetworkCase& nc, const AdaConfig& cfg, int workers = 0) {
  SolveReport report = solve_dopf(nc, cfg, workers);
  double central = centralized_objective(nc, cfg.formulation);
  report.oracle_objective = central;
  if (report.converged) report.oracle_gap = objective_gap(report.total_objective, central);
  return report;
}

inline BenchmarkRow make_row(const NetworkCase& nc, const AdaConfig& cfg,
                             const SolveReport& report) {
  BenchmarkRow row;
  row.case_name = nc.name.empty() ? "unnamed" : nc.name;
  row.areas = static_cast<int>(nc.area_ids().size());
  row.algorithm = to_string(cfg.algorithm);
  row.formulation = to_string(cfg.formulation);
  row.hyperparameter = cfg.algorithm == Algorithm::ATC ? cfg.atc_growth : cfg.effective_penalty();
  row.iterations = report.iterations;
  row.time_seconds = report.wall_seconds;
  row.converged = report.converged;
  if (report.converged) row.objective_gap = report.oracle_gap;
  if (!report.trace.empty()) row.final_l2 = report.trace.back().l2;
  row.error = report.failure_reason;
  return row;
}

struct TuneSchedule {
  double start = 0.0;  // 0 = built-in default (1e6 for ADMM/APP, 1.2 for ATC)
  double stop = 0.0;   // 0 = default (1.0 for ADMM/APP, just above 1 for ATC)

  std::vector<double> candidates(Algorithm alg) const {
    std::vector<double> out;
    if (alg == Algorithm::ATC) {
      double a = start > 0.0 ? start : 1.2;
      double lo = stop > 0.0 ? stop : 1.0 + 1e-9;
      for (; a > lo; a -= 0.05) out.push_back(a);
    } else {
      double v = start > 0.0 ? start : 1e6;
      double lo = stop > 0.0 ? stop : 1.0;
      for (; v >= lo * (1.0 - 1e-12); v /= 10.0) out.push_back(v);
    }
    return out;
  }
};

struct TuneResult {
  std::optional<double> best;
  std::vector<BenchmarkRow> sweep;
};

// Descending sweep, stopping at the first hyperparameter that converges with
// an objective gap within 1% of the centralized solve.
inline TuneResult tune(const NetworkCase& nc, AdaConfig cfg, const TuneSchedule& schedule,
                       int workers = 0) {
  TuneResult result;
  double central = centralized_objective(nc, cfg.formulation);
  for (double value : schedule.candidates(cfg.algorithm)) {
    if (cfg.algorithm == Algorithm::ATC)
      cfg.atc_growth = value;
    else
      cfg.penalty = value;
    BenchmarkRow row;
    try {
      SolveReport report = solve_dopf(nc, cfg, workers);
      report.oracle_objective = central;
      if (report.converged) report.oracle_gap = objective_gap(report.total_objective, central);
      row = make_row(nc, cfg, report);
    } catch (const std::exception& ex) {
      row = make_row(nc, cfg, SolveReport{});
      row.error = ex.what();
    }
    result.sweep.push_back(row);
    if (row.converged && row.objective_gap && std::abs(*row.objective_gap) <= 0.01) {
      result.best = value;
      break;
    }
  }
  return result;
}

struct TimingPoint {
  std::string case_name;
  std::string algorithm;
  std::string formulation;
  int workers = 0;
  double mean_seconds = 0.0;
};

struct CompareResult {
  std::vector<BenchmarkRow> rows;
  std::vector<TimingPoint> timings;
};

// Cartesian product of cases x algorithms x formulations x worker counts,
// averaging wall time over `repeats` sequential runs.
inline CompareResult compare(const std::vector<NetworkCase>& cases,
                             const std::vector<Algorithm>& algorithms,
                             const std::vector<FormulationKind>& formulations,
                             const std::vector<int>& worker_counts, int repeats,
                             const AdaConfig& base_cfg) {
  CompareResult out;
  for (const auto& nc : cases) {
    for (Algorithm alg : algorithms) {
      for (FormulationKind form : formulations) {
        AdaConfig cfg = base_cfg;
        cfg.algorithm = alg;
        cfg.formulation = form;
        SolveReport last;
        bool have_row = false;
        for (int workers : worker_counts) {
          TimingPoint tp;
          tp.case_name = nc.name;
          tp.algorithm = to_string(alg);
          tp.formulation = to_string(form);
          tp.workers = workers;
          double total = 0.0;
          try {
            for (int r = 0; r < repeats; ++r) {
              last = solve_dopf(nc, cfg, workers);
              total += last.wall_seconds;
              have_row = true;
            }
            tp.mean_seconds = total / repeats;
          } catch (const std::exception& ex) {
            BenchmarkRow row = make_row(nc, cfg, SolveReport{});
            row.error = ex.what();
            out.rows.push_back(row);
            tp.mean_seconds = -1.0;
          }
          out.timings.push_back(tp);
        }
        if (have_row) {
          try {
            double central = centralized_objective(nc, form);
            last.oracle_objective = central;
            if (last.converged) last.oracle_gap = objective_gap(last.total_objective, central);
          } catch (const std::exception&) {
          }
          out.rows.push_back(make_row(nc, cfg, last));
        }
      }
    }
  }
  return out;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json report_to_json(const NetworkCase& nc, const AdaConfig& cfg,
                                     const SolveReport& report) {
  nlohmann::json j;
  j["case_name"] = nc.name;
  j["areas"] = nc.area_ids().size();
  j["algorithm"] = to_string(cfg.algorithm);
  j["formulation"] = to_string(cfg.formulation);
  j["hyperparameter"] = cfg.algorithm == Algorithm::ATC ? cfg.atc_growth : cfg.effective_penalty();
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["total_objective"] = report.total_objective;
  j["wall_seconds"] = report.wall_seconds;
  j["final_l2"] = report.trace.empty() ? 0.0 : report.trace.back().l2;
  j["final_linf"] = report.trace.empty() ? 0.0 : report.trace.back().linf;
  if (report.oracle_objective) j["oracle_objective"] = *report.oracle_objective;
  if (report.oracle_gap) j["objective_gap"] = *report.oracle_gap;
  if (!report.failure_reason.empty()) j["failure_reason"] = report.failure_reason;
  nlohmann::json areas = nlohmann::json::object();
  for (const auto& [a, obj] : report.area_objective) areas[std::to_string(a)] = obj;
  j["area_objective"] = areas;
  return j;
}

inline void write_trace_csv(std::ostream& os, const SolveReport& report) {
  os << "iteration,l2,linf,objective\n";
  os << std::setprecision(15);
  for (size_t i = 0; i < report.trace.size(); ++i) {
    const auto& r = report.trace[i];
    os << (i + 1) << "," << r.l2 << "," << r.linf << "," << r.objective << "\n";
  }
}

inline void write_rows_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  os << "case_name,areas,algorithm,formulation,hyperparameter,iterations,time_seconds,"
        "converged,objective_gap,final_l2,error\n";
  os << std::setprecision(15);
  for (const auto& r : rows) {
    os << r.case_name << "," << r.areas << "," << r.algorithm << "," << r.formulation << ","
       << r.hyperparameter << "," << r.iterations << "," << r.time_seconds << ","
       << (r.converged ? "true" : "false") << ",";
    if (r.objective_gap) os << *r.objective_gap;
    os << "," << r.final_l2 << "," << r.error << "\n";
  }
}

inline void write_timings_csv(std::ostream& os, const std::vector<TimingPoint>& timings) {
  os << "case_name,algorithm,formulation,workers,mean_seconds\n";
  os << std::setprecision(15);
  for (const auto& t : timings)
    os << t.case_name << "," << t.algorithm << "," << t.formulation << "," << t.workers << ","
       << t.mean_seconds << "\n";
}

}  // namespace dopf
