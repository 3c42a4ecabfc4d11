#pragma once

// Hand-built miniature networks used across the test suites.

#include <fstream>
#include <map>
#include <string>

#include "dopf/matpower.hpp"
#include "dopf/network.hpp"
#include "dopf/partition.hpp"

namespace dopf::testing {

inline std::string data_path(const std::string& file) {
  return std::string(DOPF_DATA_DIR) + "/" + file;
}

inline NetworkCase load_data_case(const std::string& file) {
  std::ifstream in(data_path(file));
  if (!in) throw std::runtime_error("missing data file " + file);
  return parse_matpower(in);
}

inline NetworkCase load_data_case(const std::string& file, const std::string& areas_file) {
  NetworkCase nc = load_data_case(file);
  std::ifstream in(data_path(areas_file));
  return assign_areas(std::move(nc), parse_area_override(in));
}

inline Bus make_bus(int id, BusType type, double pd = 0.0, double qd = 0.0, int area = 1) {
  Bus b;
  b.id = id;
  b.type = type;
  b.pd = pd;
  b.qd = qd;
  b.area = area;
  b.vmin = 0.9;
  b.vmax = 1.1;
  b.vm0 = 1.0;
  return b;
}

inline Generator make_gen(int index, int bus, double c1, double pmax = 10.0, double c2 = 0.0) {
  Generator g;
  g.index = index;
  g.bus = bus;
  g.pmin = 0.0;
  g.pmax = pmax;
  g.qmin = -10.0;
  g.qmax = 10.0;
  g.c1 = c1;
  g.c2 = c2;
  return g;
}

inline Branch make_branch(int index, int from, int to, double x, double r = 0.0) {
  Branch br;
  br.index = index;
  br.from = from;
  br.to = to;
  br.r = r;
  br.x = x;
  return br;
}

// One lossless line, one generator, 1 p.u. load: the hand-solvable DC case.
inline NetworkCase two_bus_case() {
  NetworkCase nc;
  nc.name = "two_bus";
  nc.base_mva = 100.0;
  nc.buses = {make_bus(1, BusType::Ref), make_bus(2, BusType::PQ, 1.0, 0.2)};
  nc.generators = {make_gen(1, 1, 20.0)};
  nc.branches = {make_branch(1, 1, 2, 0.1)};
  return nc;
}

// Triangle with a cheap unit at bus 1 and an expensive one at bus 3.
inline NetworkCase three_bus_triangle() {
  NetworkCase nc;
  nc.name = "three_bus_triangle";
  nc.base_mva = 100.0;
  nc.buses = {make_bus(1, BusType::Ref), make_bus(2, BusType::PQ, 1.0), make_bus(3, BusType::PV)};
  nc.generators = {make_gen(1, 1, 10.0), make_gen(2, 3, 20.0)};
  nc.branches = {make_branch(1, 1, 2, 0.1), make_branch(2, 2, 3, 0.1), make_branch(3, 1, 3, 0.1)};
  return nc;
}

// Generators at every bus so any voltage assignment has feasible injections;
// used by the brute-force AC oracle.
inline NetworkCase three_bus_ac() {
  NetworkCase nc;
  nc.name = "three_bus_ac";
  nc.base_mva = 100.0;
  nc.buses = {make_bus(1, BusType::Ref, 0.0, 0.0), make_bus(2, BusType::PQ, 0.8, 0.25),
              make_bus(3, BusType::PQ, 0.5, 0.1)};
  nc.generators = {make_gen(1, 1, 10.0), make_gen(2, 2, 25.0), make_gen(3, 3, 18.0)};
  nc.branches = {make_branch(1, 1, 2, 0.2, 0.02), make_branch(2, 2, 3, 0.25, 0.03),
                 make_branch(3, 1, 3, 0.15, 0.01)};
  return nc;
}

// Two structurally identical areas joined by a single tie-line. Quadratic
// costs give the area subproblems the curvature APP requires.
inline NetworkCase mirror_four_bus() {
  NetworkCase nc;
  nc.name = "mirror_four_bus";
  nc.base_mva = 100.0;
  nc.buses = {make_bus(1, BusType::Ref, 0.0, 0.0, 1), make_bus(2, BusType::PQ, 0.6, 0.1, 1),
              make_bus(3, BusType::PQ, 0.6, 0.1, 2), make_bus(4, BusType::PV, 0.0, 0.0, 2)};
  nc.generators = {make_gen(1, 1, 12.0, 10.0, 20.0), make_gen(2, 4, 12.0, 10.0, 20.0)};
  nc.branches = {make_branch(1, 1, 2, 0.1), make_branch(2, 2, 3, 0.2), make_branch(3, 3, 4, 0.1)};
  return nc;
}

// Three areas in a line (area-adjacency diameter 2).
inline NetworkCase chain_six_bus() {
  NetworkCase nc;
  nc.name = "chain_six_bus";
  nc.base_mva = 100.0;
  nc.buses = {make_bus(1, BusType::Ref, 0.0, 0.0, 1), make_bus(2, BusType::PQ, 0.4, 0.1, 1),
              make_bus(3, BusType::PQ, 0.3, 0.1, 2), make_bus(4, BusType::PQ, 0.3, 0.1, 2),
              make_bus(5, BusType::PQ, 0.4, 0.1, 3), make_bus(6, BusType::PV, 0.0, 0.0, 3)};
  nc.generators = {make_gen(1, 1, 10.0, 10.0, 15.0), make_gen(2, 6, 15.0, 10.0, 25.0),
                   make_gen(3, 4, 12.0, 0.5, 30.0)};
  nc.branches = {make_branch(1, 1, 2, 0.1), make_branch(2, 2, 3, 0.15), make_branch(3, 3, 4, 0.1),
                 make_branch(4, 4, 5, 0.15), make_branch(5, 5, 6, 0.1)};
  return nc;
}

inline std::map<int, int> split_14(int boundary) {
  std::map<int, int> m;
  for (int b = 1; b <= 14; ++b) m[b] = b <= boundary ? 1 : 2;
  return m;
}

}  // namespace dopf::testing
