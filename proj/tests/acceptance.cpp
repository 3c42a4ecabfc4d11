// End-to-end acceptance gate. Each criterion prints exactly one PASS/FAIL
// line; all must pass for the binary to exit cleanly.

#include <doctest.h>

#include <complex>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cases.hpp"
#include "dopf/bench.hpp"
#include "dopf/runtime.hpp"

using namespace dopf;

namespace {

void verdict(int n, const std::string& what, bool ok) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << n << ": " << what << std::endl;
  std::string tag = "criterion " + std::to_string(n) + ": " + what;
  CHECK_MESSAGE(ok, tag);
}

struct Criterion1Run {
  std::string label;
  BenchmarkRow row;
};
std::vector<Criterion1Run> g_runs;  // shared with the disclosure criterion

}  // namespace

TEST_CASE("criterion 1: DC oracle agreement across algorithms and cases") {
  struct Target {
    std::string case_file, areas_file, label;
  };
  const std::vector<Target> targets = {
      {"case14.m", "case14_areas2.txt", "case14/2-areas"},
      {"case30.m", "case30_areas3.txt", "case30/3-areas"},
  };
  bool all_ok = true;
  for (const auto& t : targets) {
    NetworkCase nc = testing::load_data_case(t.case_file, t.areas_file);
    for (auto alg : {Algorithm::ADMM, Algorithm::APP, Algorithm::ATC}) {
      AdaConfig cfg;
      cfg.algorithm = alg;
      cfg.max_iterations = 2000;
      TuneResult tuned = tune(nc, cfg, TuneSchedule{});
      std::string label = t.label + "/" + to_string(alg);
      bool ok = tuned.best.has_value();
      if (ok) {
        const BenchmarkRow& row = tuned.sweep.back();
        ok = row.converged && row.final_l2 < 0.01 && row.objective_gap &&
             std::abs(*row.objective_gap) <= 0.01 && row.iterations <= 2000 &&
             row.time_seconds <= 120.0;
        g_runs.push_back({label, row});
        MESSAGE(label << ": hyperparameter " << row.hyperparameter << ", " << row.iterations
                      << " iterations, gap " << (row.objective_gap ? *row.objective_gap : 0.0)
                      << ", " << row.time_seconds << " s");
      }
      CHECK_MESSAGE(ok, label);
      all_ok = all_ok && ok;
    }
  }
  verdict(1, "DC runs converge within 1% of the centralized solve (tuned hyperparameters)",
          all_ok);
}

TEST_CASE("criterion 2: SOC consistency on case14") {
  NetworkCase nc = testing::load_data_case("case14.m", "case14_areas2.txt");
  AdaConfig cfg;
  cfg.formulation = FormulationKind::SOC;
  cfg.penalty = 1e3;
  cfg.max_iterations = 3000;
  SolveReport r = run_with_oracle(nc, cfg);
  bool ok = r.converged && !r.trace.empty() && r.trace.back().l2 < 0.01 && r.oracle_gap &&
            std::abs(*r.oracle_gap) <= 0.01 && r.iterations <= 3000 && r.wall_seconds <= 300.0;
  MESSAGE("SOC ADMM: " << r.iterations << " iterations, gap "
                       << (r.oracle_gap ? *r.oracle_gap : 0.0) << ", " << r.wall_seconds << " s");
  verdict(2, "SOC ADMM on case14/2-areas within 1% of centralized SOC", ok);
}

TEST_CASE("criterion 3: SOC objective lower-bounds a brute-force AC oracle") {
  NetworkCase nc = testing::three_bus_ac();
  double soc = centralized_objective(nc, FormulationKind::SOC);

  // dense grid over (Vm, theta) with exact AC injections; generators exist at
  // every bus so a grid point is feasible iff injections fit the unit limits
  using cd = std::complex<double>;
  double best = std::numeric_limits<double>::infinity();
  const int nv = 9, nt = 25;
  std::vector<double> vms(nv), ths(nt);
  for (int i = 0; i < nv; ++i) vms[i] = 0.9 + 0.2 * i / (nv - 1);
  for (int i = 0; i < nt; ++i) ths[i] = -0.3 + 0.6 * i / (nt - 1);
  for (double v1 : vms)
    for (double v2 : vms)
      for (double v3 : vms)
        for (double t2 : ths)
          for (double t3 : ths) {
            cd V[3] = {std::polar(v1, 0.0), std::polar(v2, t2), std::polar(v3, t3)};
            cd S[3] = {};
            for (const auto& br : nc.branches) {
              int f = br.from - 1, t = br.to - 1;
              cd y = 1.0 / cd(br.r, br.x);
              S[f] += V[f] * std::conj((V[f] - V[t]) * y);
              S[t] += V[t] * std::conj((V[t] - V[f]) * y);
            }
            bool feasible = true;
            double cost = 0.0;
            for (int i = 0; i < 3 && feasible; ++i) {
              const Bus& b = nc.buses[i];
              const Generator& g = nc.generators[i];
              double pg = S[i].real() + b.pd;
              double qg = S[i].imag() + b.qd;
              feasible = pg >= g.pmin - 1e-6 && pg <= g.pmax + 1e-6 && qg >= g.qmin - 1e-6 &&
                         qg <= g.qmax + 1e-6;
              cost += generator_cost(g, pg);
            }
            if (feasible) best = std::min(best, cost);
          }
  bool ok = std::isfinite(best) && soc <= best + 1e-6;
  MESSAGE("SOC " << soc << " vs brute-force AC " << best);
  verdict(3, "centralized SOC objective does not exceed the grid-search AC optimum", ok);
}

TEST_CASE("criterion 4: substitute property for non-reproducible reference counts") {
  // externally reported iteration counts/times stem from nonconvex AC
  // formulations, other solvers, and other hardware; the substitute property
  // checks our own runs are finite with recorded traces ending below tolerance
  bool ok = !g_runs.empty();
  for (const auto& run : g_runs)
    ok = ok && run.row.iterations > 0 && run.row.iterations <= 2000 && run.row.final_l2 < 0.01;
  verdict(4, "iteration counts finite and mismatch traces recorded below tolerance", ok);
}

TEST_CASE("criterion 5: parallel timing shape on a four-area case") {
  NetworkCase nc = testing::load_data_case("case14.m", "case14_areas4.txt");
  const int areas = static_cast<int>(nc.area_ids().size());
  REQUIRE(areas == 4);
  AdaConfig cfg;
  cfg.mismatch_tol = 1e-9;  // run the full fixed iteration budget for stable timing
  cfg.max_iterations = 40;
  CompareResult out = compare({nc}, {Algorithm::ADMM}, {FormulationKind::DC}, {1, 2, 3, 4, 5, 6},
                              5, cfg);
  REQUIRE(out.timings.size() == 6);
  std::vector<double> mean;
  for (const auto& t : out.timings) {
    mean.push_back(t.mean_seconds);
    MESSAGE(t.workers << " workers: " << t.mean_seconds << " s");
  }
  bool ok = true;
  for (int w = 1; w < areas; ++w) ok = ok && mean[w] <= mean[w - 1] * 1.2;
  for (int w = areas; w < 6; ++w) ok = ok && std::abs(mean[w] - mean[areas - 1]) <= 0.2 * mean[areas - 1];
  verdict(5, "mean wall time non-increasing up to the area count and flat beyond (20% band)", ok);
}

TEST_CASE("criterion 6: worker-count determinism") {
  NetworkCase nc = testing::load_data_case("case14.m", "case14_areas2.txt");
  AdaConfig cfg;
  cfg.max_iterations = 2000;
  SolveReport one = solve_dopf(nc, cfg, 1);
  SolveReport per_area = solve_dopf(nc, cfg, 2);
  bool ok = one.iterations == per_area.iterations;
  for (size_t k = 0; ok && k < one.trace.size(); ++k)
    ok = std::abs(one.trace[k].l2 - per_area.trace[k].l2) <= 1e-8 &&
         std::abs(one.trace[k].linf - per_area.trace[k].linf) <= 1e-8;
  verdict(6, "mismatch traces agree within 1e-8 for 1 worker vs one worker per area", ok);
}

TEST_CASE("criterion 7: central vs distributed termination equivalence") {
  NetworkCase nc = testing::load_data_case("case14.m", "case14_areas2.txt");
  int diameter = detail::area_graph_diameter(decompose(nc));
  AdaConfig cfg;
  cfg.max_iterations = 2000;
  SolveReport central = solve_dopf(nc, cfg, 1);
  cfg.termination = TerminationMode::Distributed;
  SolveReport dist = solve_dopf(nc, cfg, 1);
  bool ok = central.converged && dist.converged && dist.iterations >= central.iterations &&
            dist.iterations <= central.iterations + diameter;
  for (int k = 0; ok && k < central.iterations; ++k)
    ok = dist.trace[k].l2 == central.trace[k].l2 &&
         dist.trace[k].objective == central.trace[k].objective;
  MESSAGE("central " << central.iterations << " iterations, distributed " << dist.iterations
                     << ", diameter " << diameter);
  verdict(7, "identical iterates; distributed declares at most D iterations later", ok);
}

TEST_CASE("criterion 8: invariant property spot checks") {
  bool ok = true;

  // mirror dual antisymmetry under ADMM updates
  {
    SharedVariableKey key;
    key.kind = SharedVariableKey::Kind::Bus;
    key.bus_id = 1;
    key.var = "va";
    key.owner = 1;
    key.counterpart = 2;
    SharedVariableLedger a, b;
    a.entries.push_back({key, 0.3, -0.1, 0.0, 0.3});
    b.entries.push_back({key.mirrored(), -0.1, 0.3, 0.0, -0.1});
    for (int k = 0; k < 4; ++k) {
      admm_dual_update(a, 100.0);
      admm_dual_update(b, 100.0);
    }
    ok = ok && std::abs(a.entries[0].dual + b.entries[0].dual) < 1e-12;
  }

  // norm dominance and consensus fixed point
  {
    SharedVariableKey key;
    key.kind = SharedVariableKey::Kind::Bus;
    key.var = "va";
    key.owner = 1;
    key.counterpart = 2;
    SharedVariableLedger ledger;
    for (int i = 1; i <= 5; ++i) {
      key.bus_id = i;
      ledger.entries.push_back({key, 0.1 * i, 0.05 * i, 0.0, 0.1 * i});
    }
    ok = ok && compute_mismatch(ledger, MismatchNorm::LInf) <=
                   compute_mismatch(ledger, MismatchNorm::L2) + 1e-15;
    SharedVariableLedger consensus;
    key.bus_id = 1;
    consensus.entries.push_back({key, 0.2, 0.2, 3.0, 0.2});
    admm_dual_update(consensus, 1e4);
    ok = ok && consensus.entries[0].dual == 3.0 &&
         compute_mismatch(consensus, MismatchNorm::L2) == 0.0;
  }

  // ATC beta monotonicity
  {
    SharedVariableLedger ledger;
    ledger.beta = 1.0;
    double prev = ledger.beta;
    for (int k = 0; k < 10; ++k) {
      atc_update(ledger, 1.05);
      ok = ok && ledger.beta > prev;
      prev = ledger.beta;
    }
  }

  // decomposition reassembly on case30
  {
    NetworkCase nc = testing::load_data_case("case30.m", "case30_areas3.txt");
    auto subnets = decompose(nc);
    double load = 0.0;
    std::set<int> bus_ids;
    for (const auto& [a, sn] : subnets)
      for (const auto& b : sn.local_case.buses)
        if (!b.fictitious) {
          load += b.pd;
          bus_ids.insert(b.id);
        }
    double orig = 0.0;
    for (const auto& b : nc.buses) orig += b.pd;
    ok = ok && bus_ids.size() == nc.buses.size() && std::abs(load - orig) < 1e-12;
  }

  // parser round trip at 1e-12
  {
    NetworkCase nc = testing::load_data_case("case14.m");
    ok = ok && std::abs(nc.buses[1].pd * nc.base_mva - 21.7) < 1e-12 &&
         std::abs(nc.generators[0].c1 / nc.base_mva - 20.0) < 1e-12;
  }

  verdict(8, "dual antisymmetry, norm dominance, beta growth, reassembly, parser round-trip", ok);
}
