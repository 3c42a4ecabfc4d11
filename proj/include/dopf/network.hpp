#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace dopf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class BusType { PQ = 1, PV = 2, Ref = 3, Isolated = 4 };

// All quantities are per-unit on the case base MVA; angles in radians.
struct Bus {
  int id = 0;
  BusType type = BusType::PQ;
  double pd = 0.0, qd = 0.0;  // load
  double gs = 0.0, bs = 0.0;  // shunt admittance
  int area = 1;
  double vmin = 0.0, vmax = 0.0;
  double va0 = 0.0, vm0 = 1.0;  // warm-start voltage
  bool fictitious = false;
};

struct Generator {
  int index = 0;  // stable identity, from the case file row
  int bus = 0;
  double pmin = 0.0, pmax = 0.0;
  double qmin = 0.0, qmax = 0.0;
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;  // $/pu^2, $/pu, $
  bool in_service = true;
  bool fictitious = false;
};

struct Branch {
  int index = 0;  // stable identity, from the case file row
  int from = 0, to = 0;
  double r = 0.0, x = 0.0;
  double b_charge = 0.0;
  double rate_a = kInf;  // apparent-power limit; infinity = unlimited
  double tap = 1.0;
  double shift = 0.0;  // rad
  bool in_service = true;
  double angmin = -kInf, angmax = kInf;  // rad; infinite = unlimited

  bool angle_limited() const { return std::isfinite(angmin) || std::isfinite(angmax); }
  bool flow_limited() const { return std::isfinite(rate_a); }
};

struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Branch> branches;

  const Bus* find_bus(int id) const {
    for (const auto& b : buses)
      if (b.id == id) return &b;
    return nullptr;
  }

  // Returns the reference bus id, or -1 if none.
  int ref_bus() const {
    for (const auto& b : buses)
      if (b.type == BusType::Ref) return b.id;
    return -1;
  }

  std::vector<int> area_ids() const {
    std::vector<int> out;
    for (const auto& b : buses) {
      bool seen = false;
      for (int a : out) seen = seen || a == b.area;
      if (!seen) out.push_back(b.area);
    }
    return out;
  }
};

enum class ReferenceRule { RequireOne, AtMostOne };

// Checks every structural invariant; returns human-readable violations,
// empty when the case is valid.
inline std::vector<std::string> validate_case(const NetworkCase& nc,
                                              ReferenceRule ref_rule = ReferenceRule::RequireOne) {
  std::vector<std::string> out;
  auto note = [&](const std::string& s) { out.push_back(s); };

  if (!(nc.base_mva > 0.0)) note("base_mva must be positive");

  std::map<int, int> bus_count;
  for (const auto& b : nc.buses) bus_count[b.id]++;
  for (const auto& [id, n] : bus_count)
    if (n > 1) note("duplicated bus id " + std::to_string(id));

  int refs = 0;
  for (const auto& b : nc.buses) {
    if (b.type == BusType::Ref) refs++;
    // warm-start Vm is a hint only; published cases routinely carry solved
    // voltages slightly outside the box, so it is not checked here
    if (!(b.vmin > 0.0) || !(b.vmin <= b.vmax))
      note("bus " + std::to_string(b.id) + ": voltage bounds must satisfy 0 < Vmin <= Vmax");
    if (b.area < 1) note("bus " + std::to_string(b.id) + ": area must be >= 1");
  }
  if (refs == 0 && ref_rule == ReferenceRule::RequireOne) note("no reference bus");
  if (refs > 1) note("multiple reference buses (" + std::to_string(refs) + ")");

  for (const auto& g : nc.generators) {
    if (bus_count.find(g.bus) == bus_count.end())
      note("generator " + std::to_string(g.index) + " references unknown bus " + std::to_string(g.bus));
    if (g.pmin > g.pmax) note("generator " + std::to_string(g.index) + ": Pmin > Pmax");
    if (g.qmin > g.qmax) note("generator " + std::to_string(g.index) + ": Qmin > Qmax");
    if (g.c2 < 0.0) note("generator " + std::to_string(g.index) + ": c2 must be nonnegative");
    if (g.fictitious && (g.c2 != 0.0 || g.c1 != 0.0 || g.c0 != 0.0))
      note("fictitious generator " + std::to_string(g.index) + " must have zero cost");
    if (g.fictitious && (std::isfinite(g.pmin) || std::isfinite(g.pmax)))
      note("fictitious generator " + std::to_string(g.index) + " must be unbounded");
  }

  for (const auto& br : nc.branches) {
    if (bus_count.find(br.from) == bus_count.end())
      note("branch " + std::to_string(br.index) + " references unknown bus " + std::to_string(br.from));
    if (bus_count.find(br.to) == bus_count.end())
      note("branch " + std::to_string(br.index) + " references unknown bus " + std::to_string(br.to));
    if (br.in_service && br.x == 0.0)
      note("branch " + std::to_string(br.index) + ": in-service branch with zero reactance");
    if (br.angle_limited() && !(br.angmin <= 0.0 && 0.0 <= br.angmax))
      note("branch " + std::to_string(br.index) + ": angle bounds must straddle zero");
  }
  return out;
}

inline double generator_cost(const Generator& g, double pg) {
  return g.c2 * pg * pg + g.c1 * pg + g.c0;
}

}  // namespace dopf
