#pragma once

// Area decomposition: splits a NetworkCase into per-area subnetworks with
// fictitious boundary buses/generators (one fictitious bus per distinct
// neighbor boundary bus, carrying exactly one zero-cost unbounded generator),
// and builds the registry of consistency-constrained shared variables.

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "dopf/network.hpp"

namespace dopf {

enum class FormulationKind { DC, SOC };

inline std::string to_string(FormulationKind f) { return f == FormulationKind::DC ? "dc" : "soc"; }

struct SharedVariableKey {
  enum class Kind { Bus, Branch };
  Kind kind;
  int bus_id = 0;                      // Kind::Bus
  int branch_index = 0, from = 0, to = 0;  // Kind::Branch (directed for flows)
  std::string var;                     // formulation variable: va, w, wr, wi, p, q
  int owner = 0, counterpart = 0;

  auto tie() const { return std::tie(kind, bus_id, branch_index, from, to, var, owner, counterpart); }
  bool operator==(const SharedVariableKey& o) const { return tie() == o.tie(); }
  bool operator<(const SharedVariableKey& o) const { return tie() < o.tie(); }

  SharedVariableKey mirrored() const {
    SharedVariableKey k = *this;
    std::swap(k.owner, k.counterpart);
    return k;
  }
};

struct TieLine {
  int branch_index;
  int from, to;      // as oriented in the case file
  int from_area, to_area;
};

struct AreaSubnetwork {
  int area_id = 0;
  NetworkCase local_case;
  std::set<int> boundary_buses;  // local originals and fictitious copies
  std::vector<TieLine> tie_lines;
  std::set<int> neighbors;
};

// Sets bus areas from the override map when given, otherwise keeps file areas.
inline NetworkCase assign_areas(NetworkCase nc, const std::optional<std::map<int, int>>& override = {}) {
  if (override) {
    for (const auto& [bus_id, area] : *override)
      if (!nc.find_bus(bus_id))
        throw std::runtime_error("area override references unknown bus " + std::to_string(bus_id));
    for (auto& b : nc.buses) {
      auto it = override->find(b.id);
      if (it == override->end())
        throw std::runtime_error("area override missing bus " + std::to_string(b.id));
      b.area = it->second;
    }
  }
  return nc;
}

// Partition override file: "bus_id area_id" per line, '#' comments.
inline std::map<int, int> parse_area_override(std::istream& in) {
  std::map<int, int> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int bus, area;
    if (ls >> bus) {
      if (!(ls >> area))
        throw std::runtime_error("area override line " + std::to_string(lineno) +
                                 ": expected 'bus_id area_id'");
      out[bus] = area;
    }
  }
  return out;
}

inline std::map<int, AreaSubnetwork> decompose(const NetworkCase& nc) {
  std::map<int, int> bus_area;
  for (const auto& b : nc.buses) bus_area[b.id] = b.area;

  std::map<int, AreaSubnetwork> subnets;
  for (const auto& b : nc.buses) {
    auto& sn = subnets[b.area];
    sn.area_id = b.area;
    if (sn.local_case.buses.empty()) {
      sn.local_case.name = nc.name + "_area" + std::to_string(b.area);
      sn.local_case.base_mva = nc.base_mva;
    }
    sn.local_case.buses.push_back(b);
  }
  if (subnets.empty()) throw std::runtime_error("case has no buses");

  for (const auto& g : nc.generators) {
    auto it = bus_area.find(g.bus);
    if (it == bus_area.end())
      throw std::runtime_error("generator " + std::to_string(g.index) + " at unknown bus " +
                               std::to_string(g.bus));
    subnets[it->second].local_case.generators.push_back(g);
  }

  // One fictitious copy of a neighbor boundary bus per area, shared by all
  // tie-lines ending at that bus; the copy keeps the original id and voltage
  // bounds, drops load/shunt, and carries one zero-cost unbounded generator.
  auto add_fictitious_bus = [&](AreaSubnetwork& sn, int foreign_bus_id) {
    if (sn.local_case.find_bus(foreign_bus_id)) return;
    const Bus* orig = nc.find_bus(foreign_bus_id);
    Bus fb = *orig;
    fb.type = BusType::PQ;
    fb.pd = fb.qd = fb.gs = fb.bs = 0.0;
    fb.fictitious = true;
    sn.local_case.buses.push_back(fb);
    sn.boundary_buses.insert(fb.id);

    Generator fg;
    fg.index = 1000000 + foreign_bus_id;
    fg.bus = foreign_bus_id;
    fg.pmin = fg.qmin = -kInf;
    fg.pmax = fg.qmax = kInf;
    fg.fictitious = true;
    sn.local_case.generators.push_back(fg);
  };

  for (const auto& br : nc.branches) {
    auto fit = bus_area.find(br.from);
    auto tit = bus_area.find(br.to);
    if (fit == bus_area.end() || tit == bus_area.end())
      throw std::runtime_error("branch " + std::to_string(br.index) + " endpoint bus missing");
    int fa = fit->second, ta = tit->second;
    if (fa == ta) {
      subnets[fa].local_case.branches.push_back(br);
      continue;
    }
    // tie-line: modeled in full in both areas
    for (int a : {fa, ta}) {
      auto& sn = subnets[a];
      sn.local_case.branches.push_back(br);
      int own = a == fa ? br.from : br.to;
      int foreign = a == fa ? br.to : br.from;
      add_fictitious_bus(sn, foreign);
      sn.boundary_buses.insert(own);
      sn.neighbors.insert(a == fa ? ta : fa);
      if (br.in_service) sn.tie_lines.push_back({br.index, br.from, br.to, fa, ta});
    }
  }

  for (auto& [a, sn] : subnets) {
    auto violations = validate_case(sn.local_case, ReferenceRule::AtMostOne);
    if (!violations.empty())
      throw std::runtime_error("area " + std::to_string(a) + " subnetwork invalid: " + violations[0]);
  }
  return subnets;
}

// Variable names shared between the ledger and the problem builders.
inline std::string bus_var_name(const std::string& var, int bus_id) {
  return var + "[" + std::to_string(bus_id) + "]";
}
inline std::string branch_var_name(const std::string& var, int branch_index) {
  return var + "[" + std::to_string(branch_index) + "]";
}
inline std::string flow_var_name(const std::string& var, int branch_index, int from, int to) {
  return var + "[" + std::to_string(branch_index) + "," + std::to_string(from) + "," +
         std::to_string(to) + "]";
}

inline std::string variable_name(const SharedVariableKey& k) {
  if (k.kind == SharedVariableKey::Kind::Bus) return bus_var_name(k.var, k.bus_id);
  if (k.var == "wr" || k.var == "wi") return branch_var_name(k.var, k.branch_index);
  return flow_var_name(k.var, k.branch_index, k.from, k.to);
}

inline std::vector<SharedVariableKey> shared_registry(const std::map<int, AreaSubnetwork>& subnets,
                                                      FormulationKind formulation) {
  std::set<SharedVariableKey> keys;
  for (const auto& [a, sn] : subnets) {
    for (const auto& tie : sn.tie_lines) {
      int other = tie.from_area == a ? tie.to_area : tie.from_area;
      auto add_bus = [&](int bus_id, const std::string& var) {
        SharedVariableKey k;
        k.kind = SharedVariableKey::Kind::Bus;
        k.bus_id = bus_id;
        k.var = var;
        k.owner = a;
        k.counterpart = other;
        keys.insert(k);
        keys.insert(k.mirrored());
      };
      auto add_branch = [&](const std::string& var, int from, int to) {
        SharedVariableKey k;
        k.kind = SharedVariableKey::Kind::Branch;
        k.branch_index = tie.branch_index;
        k.from = from;
        k.to = to;
        k.var = var;
        k.owner = a;
        k.counterpart = other;
        keys.insert(k);
        keys.insert(k.mirrored());
      };
      if (formulation == FormulationKind::DC) {
        add_bus(tie.from, "va");
        add_bus(tie.to, "va");
        add_branch("p", tie.from, tie.to);
        add_branch("p", tie.to, tie.from);
      } else if (formulation == FormulationKind::SOC) {
        add_bus(tie.from, "w");
        add_bus(tie.to, "w");
        add_branch("wr", tie.from, tie.to);
        add_branch("wi", tie.from, tie.to);
        add_branch("p", tie.from, tie.to);
        add_branch("p", tie.to, tie.from);
        add_branch("q", tie.from, tie.to);
        add_branch("q", tie.to, tie.from);
      } else {
        throw std::runtime_error("unknown formulation");
      }
    }
  }
  return {keys.begin(), keys.end()};
}

}  // namespace dopf
