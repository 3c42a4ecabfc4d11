#pragma once

// Convex OPF problem builders: DC approximation over bus angles and the
// second-order cone relaxation in the Jabr bus-injection variables
// (w_i = |V_i|^2, wr/wi = lifted voltage cross-products).

#include <cmath>
#include <map>
#include <vector>

#include "dopf/network.hpp"
#include "dopf/partition.hpp"
#include "dopf/problem.hpp"

namespace dopf {

namespace detail {

inline void add_generator_objective(ConvexProblem& p, const NetworkCase& nc) {
  for (const auto& g : nc.generators) {
    if (!g.in_service || g.fictitious) continue;
    p.add_objective(p.variable(bus_var_name("pg", g.index)), g.c2, g.c1);
    p.add_objective_constant(g.c0);
  }
}

}  // namespace detail

inline ConvexProblem build_dc(const NetworkCase& nc) {
  ConvexProblem p;
  for (const auto& b : nc.buses) p.add_variable(bus_var_name("va", b.id));
  for (const auto& g : nc.generators) {
    if (!g.in_service) continue;
    p.add_variable(bus_var_name("pg", g.index), g.pmin, g.pmax);
  }
  for (const auto& br : nc.branches) {
    if (!br.in_service) continue;
    double lim = br.flow_limited() ? br.rate_a : kInf;
    p.add_variable(flow_var_name("p", br.index, br.from, br.to), -lim, lim);
    p.add_variable(flow_var_name("p", br.index, br.to, br.from), -lim, lim);
  }

  // flow definitions: p_ij = (va_i - va_j - shift) / (x * tap), p_ji = -p_ij
  for (const auto& br : nc.branches) {
    if (!br.in_service) continue;
    double k = 1.0 / (br.x * br.tap);
    int pf = p.variable(flow_var_name("p", br.index, br.from, br.to));
    int pt = p.variable(flow_var_name("p", br.index, br.to, br.from));
    int vf = p.variable(bus_var_name("va", br.from));
    int vt = p.variable(bus_var_name("va", br.to));
    p.add_equality({{{pf, 1.0}, {vf, -k}, {vt, k}}, -k * br.shift});
    p.add_equality({{{pf, 1.0}, {pt, 1.0}}, 0.0});
    if (br.angle_limited()) {
      if (std::isfinite(br.angmax)) p.add_inequality({{{vf, 1.0}, {vt, -1.0}}, br.angmax});
      if (std::isfinite(br.angmin)) p.add_inequality({{{vf, -1.0}, {vt, 1.0}}, -br.angmin});
    }
  }

  // per-bus active power balance; shunt conductance enters as fixed load
  for (const auto& b : nc.buses) {
    LinearConstraint c;
    for (const auto& g : nc.generators)
      if (g.in_service && g.bus == b.id)
        c.terms.emplace_back(p.variable(bus_var_name("pg", g.index)), 1.0);
    for (const auto& br : nc.branches) {
      if (!br.in_service) continue;
      if (br.from == b.id)
        c.terms.emplace_back(p.variable(flow_var_name("p", br.index, br.from, br.to)), -1.0);
      if (br.to == b.id)
        c.terms.emplace_back(p.variable(flow_var_name("p", br.index, br.to, br.from)), -1.0);
    }
    c.rhs = b.pd + b.gs;
    p.add_equality(std::move(c));
  }

  int ref = nc.ref_bus();
  if (ref >= 0) p.add_equality({{{p.variable(bus_var_name("va", ref)), 1.0}}, 0.0});

  detail::add_generator_objective(p, nc);
  return p;
}

inline ConvexProblem build_soc(const NetworkCase& nc) {
  ConvexProblem p;
  std::map<int, const Bus*> bus_by_id;
  for (const auto& b : nc.buses) {
    bus_by_id[b.id] = &b;
    int w = p.add_variable(bus_var_name("w", b.id), b.vmin * b.vmin, b.vmax * b.vmax);
    p.set_initial(w, 0.5 * (b.vmin * b.vmin + b.vmax * b.vmax));
  }
  for (const auto& g : nc.generators) {
    if (!g.in_service) continue;
    p.add_variable(bus_var_name("pg", g.index), g.pmin, g.pmax);
    p.add_variable(bus_var_name("qg", g.index), g.qmin, g.qmax);
  }
  for (const auto& br : nc.branches) {
    if (!br.in_service) continue;
    const Bus* bf = bus_by_id.at(br.from);
    const Bus* bt = bus_by_id.at(br.to);
    double wmax = bf->vmax * bt->vmax;
    int wr = p.add_variable(branch_var_name("wr", br.index), -wmax, wmax);
    p.add_variable(branch_var_name("wi", br.index), -wmax, wmax);
    p.set_initial(wr, 0.9 * bf->vmin * bt->vmin);
    p.add_variable(flow_var_name("p", br.index, br.from, br.to));
    p.add_variable(flow_var_name("q", br.index, br.from, br.to));
    p.add_variable(flow_var_name("p", br.index, br.to, br.from));
    p.add_variable(flow_var_name("q", br.index, br.to, br.from));
  }

  for (const auto& br : nc.branches) {
    if (!br.in_service) continue;
    double ys = br.r * br.r + br.x * br.x;
    double g = br.r / ys, b = -br.x / ys;
    double bc = br.b_charge / 2.0;
    double tr = br.tap * std::cos(br.shift), ti = br.tap * std::sin(br.shift);
    double tm2 = br.tap * br.tap;
    int wf = p.variable(bus_var_name("w", br.from));
    int wt = p.variable(bus_var_name("w", br.to));
    int wr = p.variable(branch_var_name("wr", br.index));
    int wi = p.variable(branch_var_name("wi", br.index));
    int pf = p.variable(flow_var_name("p", br.index, br.from, br.to));
    int qf = p.variable(flow_var_name("q", br.index, br.from, br.to));
    int pt = p.variable(flow_var_name("p", br.index, br.to, br.from));
    int qt = p.variable(flow_var_name("q", br.index, br.to, br.from));

    // branch pi-model flow definitions in the lifted variables
    p.add_equality({{{pf, 1.0},
                     {wf, -g / tm2},
                     {wr, -(-g * tr + b * ti) / tm2},
                     {wi, -(-b * tr - g * ti) / tm2}},
                    0.0});
    p.add_equality({{{qf, 1.0},
                     {wf, (b + bc) / tm2},
                     {wr, (-b * tr - g * ti) / tm2},
                     {wi, -(-g * tr + b * ti) / tm2}},
                    0.0});
    p.add_equality({{{pt, 1.0},
                     {wt, -g},
                     {wr, -(-g * tr - b * ti) / tm2},
                     {wi, (-b * tr + g * ti) / tm2}},
                    0.0});
    p.add_equality({{{qt, 1.0},
                     {wt, (b + bc)},
                     {wr, (-b * tr + g * ti) / tm2},
                     {wi, (-g * tr - b * ti) / tm2}},
                    0.0});

    p.add_rotated_cone({wf, wt, wr, wi});
    if (br.flow_limited()) {
      p.add_cone({pf, qf, br.rate_a});
      p.add_cone({pt, qt, br.rate_a});
    }
    // angle-difference bounds linearized through tan() on the cross-products
    if (std::isfinite(br.angmax) && br.angmax < 1.5)
      p.add_inequality({{{wi, 1.0}, {wr, -std::tan(br.angmax)}}, 0.0});
    if (std::isfinite(br.angmin) && br.angmin > -1.5)
      p.add_inequality({{{wi, -1.0}, {wr, std::tan(br.angmin)}}, 0.0});
  }

  for (const auto& b : nc.buses) {
    LinearConstraint cp, cq;
    int w = p.variable(bus_var_name("w", b.id));
    for (const auto& g : nc.generators) {
      if (!g.in_service || g.bus != b.id) continue;
      cp.terms.emplace_back(p.variable(bus_var_name("pg", g.index)), 1.0);
      cq.terms.emplace_back(p.variable(bus_var_name("qg", g.index)), 1.0);
    }
    for (const auto& br : nc.branches) {
      if (!br.in_service) continue;
      if (br.from == b.id) {
        cp.terms.emplace_back(p.variable(flow_var_name("p", br.index, br.from, br.to)), -1.0);
        cq.terms.emplace_back(p.variable(flow_var_name("q", br.index, br.from, br.to)), -1.0);
      }
      if (br.to == b.id) {
        cp.terms.emplace_back(p.variable(flow_var_name("p", br.index, br.to, br.from)), -1.0);
        cq.terms.emplace_back(p.variable(flow_var_name("q", br.index, br.to, br.from)), -1.0);
      }
    }
    cp.terms.emplace_back(w, -b.gs);
    cp.rhs = b.pd;
    cq.terms.emplace_back(w, b.bs);
    cq.rhs = b.qd;
    p.add_equality(std::move(cp));
    p.add_equality(std::move(cq));
  }

  detail::add_generator_objective(p, nc);
  return p;
}

inline ConvexProblem build_formulation(const NetworkCase& nc, FormulationKind kind) {
  return kind == FormulationKind::DC ? build_dc(nc) : build_soc(nc);
}

}  // namespace dopf
