#pragma once

// Per-iteration orchestration of the alternating loop: initialize, build,
// solve, exchange, update, terminate. Areas run on a worker pool; all
// cross-area data moves through a Mailbox with synchronous per-iteration
// rendezvous semantics.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dopf/ada.hpp"
#include "dopf/formulations.hpp"
#include "dopf/network.hpp"
#include "dopf/partition.hpp"
#include "dopf/solver.hpp"

namespace dopf {

struct Message {
  int iteration = 0;
  std::vector<std::pair<std::string, double>> values;
  bool converged_flag = false;
};

// One slot per ordered area pair; a message posted for iteration k is
// readable by the counterpart only once the sender finished its solve.
class Mailbox {
 public:
  void post(int from, int to, Message msg) {
    std::lock_guard lock(mutex_);
    slots_[{from, to}].push_back(std::move(msg));
    cv_.notify_all();
  }

  Message receive(int to, int from, int iteration,
                  std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
    std::unique_lock lock(mutex_);
    auto ready = [&]() -> bool {
      auto it = slots_.find({from, to});
      if (it == slots_.end()) return false;
      for (const auto& m : it->second)
        if (m.iteration == iteration) return true;
      return false;
    };
    if (!cv_.wait_for(lock, timeout, ready))
      throw std::runtime_error("deadlock: area " + std::to_string(to) +
                               " timed out awaiting iteration " + std::to_string(iteration) +
                               " message from area " + std::to_string(from));
    auto& queue = slots_[{from, to}];
    for (size_t i = 0; i < queue.size(); ++i) {
      if (queue[i].iteration == iteration) {
        Message m = std::move(queue[i]);
        queue.erase(queue.begin() + i);
        return m;
      }
    }
    throw std::logic_error("mailbox slot vanished");
  }

 private:
  std::map<std::pair<int, int>, std::vector<Message>> slots_;
  std::mutex mutex_;
  std::condition_variable cv_;
};

// Fixed-size pool executing batches of independent tasks; the caller blocks
// until the whole batch has finished.
class WorkerPool {
 public:
  explicit WorkerPool(int n) : stop_(false), next_(0), remaining_(0) {
    for (int i = 0; i < n; ++i)
      threads_.emplace_back([this] { worker_loop(); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void run(std::vector<std::function<void()>> tasks) {
    std::unique_lock lock(mutex_);
    tasks_ = std::move(tasks);
    next_ = 0;
    remaining_ = tasks_.size();
    error_ = nullptr;
    cv_.notify_all();
    done_cv_.wait(lock, [this] { return remaining_ == 0; });
    tasks_.clear();
    if (error_) std::rethrow_exception(error_);
  }

  int size() const { return static_cast<int>(threads_.size()); }

 private:
  void worker_loop() {
    while (true) {
      size_t idx;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return stop_ || next_ < tasks_.size(); });
        if (stop_) return;
        idx = next_++;
      }
      try {
        tasks_[idx]();
      } catch (...) {
        std::lock_guard lock(mutex_);
        if (!error_) error_ = std::current_exception();
      }
      {
        std::lock_guard lock(mutex_);
        if (--remaining_ == 0) done_cv_.notify_all();
      }
    }
  }

  std::vector<std::thread> threads_;
  std::vector<std::function<void()>> tasks_;
  bool stop_;
  size_t next_, remaining_;
  std::exception_ptr error_;
  std::mutex mutex_;
  std::condition_variable cv_, done_cv_;
};

struct IterationRecord {
  double l2 = 0.0;
  double linf = 0.0;
  double objective = 0.0;
  double solve_seconds = 0.0;  // max over areas
};

struct SolveReport {
  bool converged = false;
  std::string failure_reason;
  int iterations = 0;
  std::vector<IterationRecord> trace;
  std::map<int, double> area_objective;
  double total_objective = 0.0;
  std::optional<double> oracle_objective;
  std::optional<double> oracle_gap;  // signed fraction vs. centralized solve
  double wall_seconds = 0.0;
};

enum class TerminationDecision { Continue, Converged, IterationLimit };

inline TerminationDecision check_termination_central(double global_mismatch, int iteration,
                                                     const AdaConfig& cfg) {
  if (global_mismatch <= cfg.mismatch_tol) return TerminationDecision::Converged;
  if (iteration >= cfg.max_iterations) return TerminationDecision::IterationLimit;
  return TerminationDecision::Continue;
}

namespace detail {

struct AreaWorker {
  int area_id = 0;
  const AreaSubnetwork* subnet = nullptr;
  ConvexProblem base_problem;
  SharedVariableLedger ledger;
  SubproblemSolution last_solution;
  double last_solve_seconds = 0.0;
  bool local_flag = false;  // own convergence flag of the latest completed iteration
  bool all_neighbor_flags = false;
  int consecutive_ok = 0;
  std::vector<size_t> entries_for_neighbor_cached;
};

// Maps ledger keys to initial shared-variable values under flat or warm start.
inline double initial_value(const SharedVariableKey& key, const NetworkCase& nc,
                            Initialization init, FormulationKind form) {
  auto bus = [&](int id) -> const Bus& {
    const Bus* b = nc.find_bus(id);
    if (!b) throw std::runtime_error("shared key references unknown bus");
    return *b;
  };
  auto branch = [&](int index) -> const Branch& {
    for (const auto& br : nc.branches)
      if (br.index == index) return br;
    throw std::runtime_error("shared key references unknown branch");
  };
  if (init == Initialization::Flat) {
    if (key.kind == SharedVariableKey::Kind::Bus) return key.var == "w" ? 1.0 : 0.0;
    return key.var == "wr" ? 1.0 : 0.0;
  }
  // warm start from the case file voltage data
  if (key.kind == SharedVariableKey::Kind::Bus) {
    const Bus& b = bus(key.bus_id);
    if (key.var == "va") return b.va0;
    return b.vm0 * b.vm0;
  }
  const Branch& br = branch(key.branch_index);
  const Bus& bf = bus(br.from);
  const Bus& bt = bus(br.to);
  double dva = bf.va0 - bt.va0;
  double wr = bf.vm0 * bt.vm0 * std::cos(dva);
  double wi = bf.vm0 * bt.vm0 * std::sin(dva);
  if (key.var == "wr") return wr;
  if (key.var == "wi") return wi;
  if (form == FormulationKind::DC) {
    double flow = (bf.va0 - bt.va0 - br.shift) / (br.x * br.tap);
    return key.from == br.from ? flow : -flow;
  }
  // SOC flows from the pi-model coefficients at the warm-start voltages
  double ys = br.r * br.r + br.x * br.x;
  double g = br.r / ys, b = -br.x / ys;
  double bc = br.b_charge / 2.0;
  double tr = br.tap * std::cos(br.shift), ti = br.tap * std::sin(br.shift);
  double tm2 = br.tap * br.tap;
  double wf = bf.vm0 * bf.vm0, wt = bt.vm0 * bt.vm0;
  bool forward = key.from == br.from;
  if (key.var == "p") {
    if (forward) return g / tm2 * wf + (-g * tr + b * ti) / tm2 * wr + (-b * tr - g * ti) / tm2 * wi;
    return g * wt + (-g * tr - b * ti) / tm2 * wr - (-b * tr + g * ti) / tm2 * wi;
  }
  if (forward)
    return -(b + bc) / tm2 * wf - (-b * tr - g * ti) / tm2 * wr + (-g * tr + b * ti) / tm2 * wi;
  return -(b + bc) * wt - (-b * tr + g * ti) / tm2 * wr - (-g * tr - b * ti) / tm2 * wi;
}

inline double area_generation_cost(const NetworkCase& nc, const SubproblemSolution& sol) {
  double total = 0.0;
  for (const auto& g : nc.generators) {
    if (!g.in_service || g.fictitious) continue;
    total += generator_cost(g, sol.value(bus_var_name("pg", g.index)));
  }
  return total;
}

// Diameter of the area-adjacency graph (longest shortest path), used by the
// distributed termination rule.
inline int area_graph_diameter(const std::map<int, AreaSubnetwork>& subnets) {
  std::vector<int> areas;
  for (const auto& [a, sn] : subnets) areas.push_back(a);
  int diameter = 0;
  for (int src : areas) {
    std::map<int, int> dist;
    dist[src] = 0;
    std::vector<int> frontier{src};
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int u : frontier)
        for (int v : subnets.at(u).neighbors)
          if (!dist.count(v)) {
            dist[v] = dist[u] + 1;
            next.push_back(v);
          }
      frontier = std::move(next);
    }
    for (const auto& [v, d] : dist) diameter = std::max(diameter, d);
  }
  return diameter;
}

}  // namespace detail

// Creates the per-area problem template and shared-variable ledger.
inline std::map<int, std::pair<ConvexProblem, SharedVariableLedger>> initialize(
    const std::map<int, AreaSubnetwork>& subnets, const std::vector<SharedVariableKey>& registry,
    const AdaConfig& cfg) {
  if (cfg.initialization == Initialization::Warm) {
    for (const auto& [a, sn] : subnets)
      for (const auto& b : sn.local_case.buses)
        if (!(b.vm0 > 0.0))
          throw std::runtime_error("warm start requested but bus " + std::to_string(b.id) +
                                   " has no voltage warm-start data");
  }
  std::map<int, std::pair<ConvexProblem, SharedVariableLedger>> out;
  for (const auto& [a, sn] : subnets) {
    ConvexProblem problem = build_formulation(sn.local_case, cfg.formulation);
    SharedVariableLedger ledger;
    ledger.beta = cfg.algorithm == Algorithm::ATC ? cfg.effective_penalty() : 0.0;
    for (const auto& key : registry) {
      if (key.owner != a) continue;
      LedgerEntry e;
      e.key = key;
      e.local = detail::initial_value(key, sn.local_case, cfg.initialization, cfg.formulation);
      e.received = e.local;
      e.prev_local = e.local;
      ledger.entries.push_back(e);
    }
    out.emplace(a, std::make_pair(std::move(problem), std::move(ledger)));
  }
  return out;
}

inline SolveReport solve_dopf(const NetworkCase& nc, const AdaConfig& cfg, int worker_count = 0) {
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();

  auto subnets = decompose(nc);
  auto registry = shared_registry(subnets, cfg.formulation);
  auto initialized = initialize(subnets, registry, cfg);

  std::vector<detail::AreaWorker> workers;
  for (auto& [a, init] : initialized) {
    detail::AreaWorker w;
    w.area_id = a;
    w.subnet = &subnets.at(a);
    w.base_problem = std::move(init.first);
    w.ledger = std::move(init.second);
    workers.push_back(std::move(w));
  }
  const int num_areas = static_cast<int>(workers.size());
  const int pool_size = std::min(num_areas, worker_count > 0
                                                ? worker_count
                                                : num_areas);  // idle workers unused
  const double penalty = cfg.effective_penalty();
  const int diameter = detail::area_graph_diameter(subnets);

  Mailbox mailbox;
  WorkerPool pool(pool_size);
  SolveReport report;

  auto solve_phase = [&](detail::AreaWorker& w) {
    auto ts = std::chrono::steady_clock::now();
    for (auto& e : w.ledger.entries) e.prev_local = e.local;
    ConvexProblem problem = w.base_problem;
    attach_objective_terms(problem, objective_terms(cfg.algorithm, w.ledger, penalty));
    SubproblemSolution sol = solve(problem, cfg.solver_tol);
    if (sol.status != SolveStatus::Optimal)
      throw std::runtime_error("area " + std::to_string(w.area_id) + " iteration " +
                               std::to_string(w.ledger.iteration + 1) + ": subproblem " +
                               to_string(sol.status) +
                               (sol.message.empty() ? "" : " (" + sol.message + ")"));
    for (auto& e : w.ledger.entries) e.local = sol.value(variable_name(e.key));
    w.last_solution = std::move(sol);
    for (int nb : w.subnet->neighbors) {
      Message msg;
      msg.iteration = w.ledger.iteration + 1;
      msg.converged_flag = w.local_flag;
      for (const auto& e : w.ledger.entries)
        if (e.key.counterpart == nb) msg.values.emplace_back(variable_name(e.key), e.local);
      mailbox.post(w.area_id, nb, std::move(msg));
    }
    w.last_solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - ts).count();
  };

  auto update_phase = [&](detail::AreaWorker& w) {
    bool neighbors_ok = true;
    for (int nb : w.subnet->neighbors) {
      Message msg = mailbox.receive(w.area_id, nb, w.ledger.iteration + 1);
      neighbors_ok = neighbors_ok && msg.converged_flag;
      for (const auto& [name, value] : msg.values)
        for (auto& e : w.ledger.entries)
          if (e.key.counterpart == nb && variable_name(e.key) == name) e.received = value;
    }
    w.all_neighbor_flags = neighbors_ok;
    dual_update(cfg.algorithm, w.ledger, penalty, cfg.atc_growth);
    // flag threshold scaled so that all areas' flags imply the global norm
    double local = compute_mismatch(w.ledger, cfg.norm);
    double threshold = cfg.norm == MismatchNorm::L2
                           ? cfg.mismatch_tol / std::sqrt(static_cast<double>(num_areas))
                           : cfg.mismatch_tol;
    w.local_flag = local <= threshold;
  };

  bool limit_hit = false;
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    std::vector<std::function<void()>> tasks;
    for (auto& w : workers) tasks.push_back([&w, &solve_phase] { solve_phase(w); });
    pool.run(std::move(tasks));

    tasks.clear();
    for (auto& w : workers) tasks.push_back([&w, &update_phase] { update_phase(w); });
    pool.run(std::move(tasks));

    IterationRecord rec;
    double sumsq = 0.0;
    for (auto& w : workers) {
      for (const auto& e : w.ledger.entries) {
        double d = e.local - e.received;
        sumsq += d * d;
        rec.linf = std::max(rec.linf, std::abs(d));
      }
      rec.objective += detail::area_generation_cost(w.subnet->local_case, w.last_solution);
      rec.solve_seconds = std::max(rec.solve_seconds, w.last_solve_seconds);
    }
    rec.l2 = std::sqrt(sumsq);
    report.trace.push_back(rec);
    report.iterations = k;

    if (cfg.termination == TerminationMode::Central) {
      double global = cfg.norm == MismatchNorm::L2 ? rec.l2 : rec.linf;
      auto decision = check_termination_central(global, k, cfg);
      if (decision == TerminationDecision::Converged) {
        report.converged = true;
        break;
      }
      if (decision == TerminationDecision::IterationLimit) {
        limit_hit = true;
        break;
      }
    } else {
      bool all_declared = true;
      for (auto& w : workers) {
        bool ok = w.local_flag && w.all_neighbor_flags;
        w.consecutive_ok = ok ? w.consecutive_ok + 1 : 0;
        all_declared = all_declared && w.consecutive_ok >= std::max(1, diameter);
      }
      if (num_areas == 1) all_declared = workers[0].local_flag;
      if (all_declared) {
        report.converged = true;
        break;
      }
      if (k >= cfg.max_iterations) limit_hit = true;
    }
  }
  if (limit_hit) report.failure_reason = "iteration limit reached";

  for (auto& w : workers) {
    double c = detail::area_generation_cost(w.subnet->local_case, w.last_solution);
    report.area_objective[w.area_id] = c;
    report.total_objective += c;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace dopf
