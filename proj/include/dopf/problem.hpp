#pragma once

// Carrier for convex subproblems: named bounded variables, linear equalities
// and inequalities, second-order cone constraints, and a separable convex
// quadratic objective. Penalty terms are attached in shifted-quadratic form.

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dopf/network.hpp"

namespace dopf {

struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;  // sum(coeff * x) == rhs, or <= rhs for inequalities
};

// p^2 + q^2 <= radius^2
struct ConeConstraint {
  int p = -1, q = -1;
  double radius = 0.0;
};

// c^2 + d^2 <= a*b with a, b >= 0
struct RotatedConeConstraint {
  int a = -1, b = -1, c = -1, d = -1;
};

class ConvexProblem {
 public:
  int add_variable(const std::string& name, double lb = -kInf, double ub = kInf) {
    if (index_.count(name)) throw std::runtime_error("duplicate variable '" + name + "'");
    int i = static_cast<int>(names_.size());
    index_.emplace(name, i);
    names_.push_back(name);
    lb_.push_back(lb);
    ub_.push_back(ub);
    q2_.push_back(0.0);
    q1_.push_back(0.0);
    init_.push_back(std::nan(""));
    return i;
  }

  int variable(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("unknown variable '" + name + "'");
    return it->second;
  }
  bool has_variable(const std::string& name) const { return index_.count(name) > 0; }

  void add_equality(LinearConstraint c) { eq_.push_back(std::move(c)); }
  void add_inequality(LinearConstraint c) { ineq_.push_back(std::move(c)); }
  void add_cone(ConeConstraint c) { cones_.push_back(c); }
  void add_rotated_cone(RotatedConeConstraint c) { rcones_.push_back(c); }

  // objective += quad * x_i^2 + lin * x_i
  void add_objective(int i, double quad, double lin) {
    if (quad < 0.0) throw std::runtime_error("negative quadratic objective coefficient");
    q2_[i] += quad;
    q1_[i] += lin;
  }
  void add_objective_constant(double c) { obj_const_ += c; }

  // Starting point hint for the solver; must be strictly interior.
  void set_initial(int i, double v) { init_[i] = v; }

  size_t num_variables() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& lower() const { return lb_; }
  const std::vector<double>& upper() const { return ub_; }
  const std::vector<double>& obj_quadratic() const { return q2_; }
  const std::vector<double>& obj_linear() const { return q1_; }
  double obj_constant() const { return obj_const_; }
  const std::vector<double>& initial_hints() const { return init_; }
  const std::vector<LinearConstraint>& equalities() const { return eq_; }
  const std::vector<LinearConstraint>& inequalities() const { return ineq_; }
  const std::vector<ConeConstraint>& cones() const { return cones_; }
  const std::vector<RotatedConeConstraint>& rotated_cones() const { return rcones_; }

  double objective_value(const std::vector<double>& x) const {
    double f = obj_const_;
    for (size_t i = 0; i < names_.size(); ++i) f += q2_[i] * x[i] * x[i] + q1_[i] * x[i];
    return f;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> lb_, ub_;
  std::vector<double> q2_, q1_;
  double obj_const_ = 0.0;
  std::vector<double> init_;
  std::vector<LinearConstraint> eq_, ineq_;
  std::vector<ConeConstraint> cones_;
  std::vector<RotatedConeConstraint> rcones_;
};

// One shifted-quadratic objective addition: lin*v + quad*(v - center)^2.
struct ObjectiveTerm {
  std::string variable;
  double linear = 0.0;
  double quadratic = 0.0;
  double center = 0.0;
};

inline void attach_objective_terms(ConvexProblem& problem, const std::vector<ObjectiveTerm>& terms) {
  for (const auto& t : terms) {
    if (t.quadratic < 0.0)
      throw std::runtime_error("negative quadratic coefficient on '" + t.variable + "'");
    int i = problem.variable(t.variable);
    problem.add_objective(i, t.quadratic, t.linear - 2.0 * t.quadratic * t.center);
    problem.add_objective_constant(t.quadratic * t.center * t.center);
  }
}

}  // namespace dopf
