#pragma once

// Primal barrier interior-point solver for ConvexProblem: separable convex
// quadratic objective, linear equalities handled by infeasible-start Newton,
// bounds / linear inequalities / second-order cones via log barriers.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "dopf/problem.hpp"

namespace dopf {

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    default: return "numerical-failure";
  }
}

struct SubproblemSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::unordered_map<std::string, double> values;
  double objective = 0.0;
  int iterations = 0;  // Newton steps
  double primal_residual = 0.0;
  double duality_gap = 0.0;
  std::string message;

  double value(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw std::runtime_error("no value for variable '" + name + "'");
    return it->second;
  }
};

namespace detail {

class BarrierSolver {
 public:
  BarrierSolver(const ConvexProblem& p, double tol) : p_(p), tol_(tol), n_(p.num_variables()) {}

  SubproblemSolution run() {
    SubproblemSolution sol;
    if (!setup(sol)) return sol;

    double t = 1.0;
    const double mu = 20.0;
    int total_newton = 0;
    double t_done = 0.0;
    Eigen::VectorXd x_done, nu_done;
    for (int outer = 0; outer < 64; ++outer) {
      if (!center(t, total_newton, sol)) {
#ifdef DOPF_SOLVER_TRACE
        std::fprintf(stderr, "[fail] t=%g t_done=%g m=%g gap=%g msg=%s\n", t, t_done,
                     barrier_complexity_, t_done > 0 ? barrier_complexity_ / t_done : -1.0,
                     sol.message.c_str());
#endif
        // deep centering can exceed double precision near binding
        // constraints; fall back to the last centered point when its gap is
        // already far tighter than anything the ADA loop can observe
        if (sol.status == SolveStatus::NumericalFailure && t_done > 0.0 &&
            barrier_complexity_ / t_done <= std::max(tol_, 1e-4)) {
          x_ = x_done;
          nu_ = nu_done;
          sol.status = SolveStatus::Optimal;
          sol.message = "";
          return finish(sol, total_newton, t_done);
        }
        return finish(sol, total_newton, t);
      }
      t_done = t;
      x_done = x_;
      nu_done = nu_;
      if (barrier_complexity_ / t <= tol_) break;
      t *= mu;
    }
    sol.status = SolveStatus::Optimal;
    return finish(sol, total_newton, t);
  }

 private:
  bool setup(SubproblemSolution& sol) {
    const auto& lb = p_.lower();
    const auto& ub = p_.upper();
    for (size_t i = 0; i < n_; ++i) {
      if (lb[i] > ub[i]) {
        sol.status = SolveStatus::Infeasible;
        sol.message = "variable '" + p_.names()[i] + "' has empty bound interval";
        return false;
      }
    }
    for (const auto& c : p_.cones()) {
      if (c.radius <= 0.0) {
        sol.status = SolveStatus::Infeasible;
        sol.message = "cone constraint with nonpositive radius";
        return false;
      }
    }

    // normalize the objective so the barrier parameter is scale-free: huge
    // penalty coefficients otherwise push the KKT system out of double range
    obj_scale_ = 1.0;
    for (size_t i = 0; i < n_; ++i)
      obj_scale_ = std::max({obj_scale_, std::abs(p_.obj_quadratic()[i]),
                             std::abs(p_.obj_linear()[i])});

    // equality rows; exactly fixed variables become equalities
    for (const auto& c : p_.equalities()) eq_.push_back(c);
    for (size_t i = 0; i < n_; ++i) {
      if (lb[i] == ub[i]) {
        LinearConstraint c;
        c.terms = {{static_cast<int>(i), 1.0}};
        c.rhs = lb[i];
        eq_.push_back(c);
        fixed_.push_back(true);
      } else {
        fixed_.push_back(false);
      }
    }
    neq_ = eq_.size();
    eq_scale_ = 1.0;
    for (const auto& c : eq_) {
      eq_scale_ = std::max(eq_scale_, std::abs(c.rhs));
      for (const auto& [j, a] : c.terms) eq_scale_ = std::max(eq_scale_, std::abs(a));
    }

    barrier_complexity_ = 0.0;
    for (size_t i = 0; i < n_; ++i) {
      if (!fixed_[i] && std::isfinite(lb[i])) barrier_complexity_ += 1.0;
      if (!fixed_[i] && std::isfinite(ub[i])) barrier_complexity_ += 1.0;
    }
    barrier_complexity_ += static_cast<double>(p_.inequalities().size());
    barrier_complexity_ += 2.0 * static_cast<double>(p_.cones().size());
    barrier_complexity_ += 2.0 * static_cast<double>(p_.rotated_cones().size());

    x_ = Eigen::VectorXd::Zero(n_);
    const auto& hints = p_.initial_hints();
    for (size_t i = 0; i < n_; ++i) {
      double v;
      if (fixed_[i]) {
        v = lb[i];
      } else if (std::isfinite(lb[i]) && std::isfinite(ub[i])) {
        v = 0.5 * (lb[i] + ub[i]);
      } else if (std::isfinite(lb[i])) {
        v = lb[i] + 1.0;
      } else if (std::isfinite(ub[i])) {
        v = ub[i] - 1.0;
      } else {
        v = 0.0;
      }
      double h = hints[i];
      if (std::isfinite(h) && !fixed_[i] && h > lb[i] && h < ub[i]) v = h;
      x_(i) = v;
    }
    nu_ = Eigen::VectorXd::Zero(neq_);

    if (!std::isfinite(barrier_value(x_))) {
      sol.status = SolveStatus::NumericalFailure;
      sol.message = "initial point is not strictly feasible";
      return false;
    }
    return true;
  }

  double barrier_value(const Eigen::VectorXd& x) const {
    const auto& lb = p_.lower();
    const auto& ub = p_.upper();
    double phi = 0.0;
    for (size_t i = 0; i < n_; ++i) {
      if (fixed_[i]) continue;
      if (std::isfinite(lb[i])) {
        double s = x(i) - lb[i];
        if (s <= 0.0) return kInf;
        phi -= std::log(s);
      }
      if (std::isfinite(ub[i])) {
        double s = ub[i] - x(i);
        if (s <= 0.0) return kInf;
        phi -= std::log(s);
      }
    }
    for (const auto& c : p_.inequalities()) {
      double s = c.rhs;
      for (const auto& [j, a] : c.terms) s -= a * x(j);
      if (s <= 0.0) return kInf;
      phi -= std::log(s);
    }
    for (const auto& c : p_.cones()) {
      double s = c.radius * c.radius - x(c.p) * x(c.p) - x(c.q) * x(c.q);
      if (s <= 0.0) return kInf;
      phi -= std::log(s);
    }
    for (const auto& c : p_.rotated_cones()) {
      double s = x(c.a) * x(c.b) - x(c.c) * x(c.c) - x(c.d) * x(c.d);
      if (s <= 0.0 || x(c.a) <= 0.0 || x(c.b) <= 0.0) return kInf;
      phi -= std::log(s);
    }
    return phi;
  }

  void gradient(double t, const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
    const auto& lb = p_.lower();
    const auto& ub = p_.upper();
    const auto& q2 = p_.obj_quadratic();
    const auto& q1 = p_.obj_linear();
    const double ts = t / obj_scale_;
    g.setZero(n_);
    for (size_t i = 0; i < n_; ++i) {
      g(i) = ts * (2.0 * q2[i] * x(i) + q1[i]);
      if (fixed_[i]) continue;
      if (std::isfinite(lb[i])) g(i) -= 1.0 / (x(i) - lb[i]);
      if (std::isfinite(ub[i])) g(i) += 1.0 / (ub[i] - x(i));
    }
    for (const auto& c : p_.inequalities()) {
      double s = c.rhs;
      for (const auto& [j, a] : c.terms) s -= a * x(j);
      for (const auto& [j, a] : c.terms) g(j) += a / s;
    }
    for (const auto& c : p_.cones()) {
      double s = c.radius * c.radius - x(c.p) * x(c.p) - x(c.q) * x(c.q);
      g(c.p) += 2.0 * x(c.p) / s;
      g(c.q) += 2.0 * x(c.q) / s;
    }
    for (const auto& c : p_.rotated_cones()) {
      double s = x(c.a) * x(c.b) - x(c.c) * x(c.c) - x(c.d) * x(c.d);
      double ds[4] = {x(c.b), x(c.a), -2.0 * x(c.c), -2.0 * x(c.d)};
      int idx[4] = {c.a, c.b, c.c, c.d};
      for (int u = 0; u < 4; ++u) g(idx[u]) -= ds[u] / s;
    }
  }

  // gradient of t*f + phi, Hessian of the same
  void gradient_hessian(double t, const Eigen::VectorXd& x, Eigen::VectorXd& g,
                        Eigen::MatrixXd& H) const {
    const auto& lb = p_.lower();
    const auto& ub = p_.upper();
    const auto& q2 = p_.obj_quadratic();
    const auto& q1 = p_.obj_linear();
    const double ts = t / obj_scale_;
    g.setZero(n_);
    H.setZero(n_, n_);
    for (size_t i = 0; i < n_; ++i) {
      g(i) = ts * (2.0 * q2[i] * x(i) + q1[i]);
      H(i, i) = ts * 2.0 * q2[i];
      if (fixed_[i]) continue;
      if (std::isfinite(lb[i])) {
        double s = x(i) - lb[i];
        g(i) -= 1.0 / s;
        H(i, i) += 1.0 / (s * s);
      }
      if (std::isfinite(ub[i])) {
        double s = ub[i] - x(i);
        g(i) += 1.0 / s;
        H(i, i) += 1.0 / (s * s);
      }
    }
    for (const auto& c : p_.inequalities()) {
      double s = c.rhs;
      for (const auto& [j, a] : c.terms) s -= a * x(j);
      for (const auto& [j, a] : c.terms) {
        g(j) += a / s;
        for (const auto& [k, b] : c.terms) H(j, k) += a * b / (s * s);
      }
    }
    for (const auto& c : p_.cones()) {
      double s = c.radius * c.radius - x(c.p) * x(c.p) - x(c.q) * x(c.q);
      double gp = 2.0 * x(c.p) / s, gq = 2.0 * x(c.q) / s;
      g(c.p) += gp;
      g(c.q) += gq;
      H(c.p, c.p) += 2.0 / s + gp * gp;
      H(c.q, c.q) += 2.0 / s + gq * gq;
      H(c.p, c.q) += gp * gq;
      H(c.q, c.p) += gp * gq;
    }
    for (const auto& c : p_.rotated_cones()) {
      double s = x(c.a) * x(c.b) - x(c.c) * x(c.c) - x(c.d) * x(c.d);
      // barrier -log(s): grad = -ds/s, hess = ds*ds'/s^2 - d2s/s
      double ds[4] = {x(c.b), x(c.a), -2.0 * x(c.c), -2.0 * x(c.d)};
      int idx[4] = {c.a, c.b, c.c, c.d};
      for (int u = 0; u < 4; ++u) {
        g(idx[u]) -= ds[u] / s;
        for (int v = 0; v < 4; ++v) H(idx[u], idx[v]) += ds[u] * ds[v] / (s * s);
      }
      H(c.a, c.b) -= 1.0 / s;
      H(c.b, c.a) -= 1.0 / s;
      H(c.c, c.c) += 2.0 / s;
      H(c.d, c.d) += 2.0 / s;
    }
  }

  Eigen::VectorXd primal_residual(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r(neq_);
    for (size_t i = 0; i < neq_; ++i) {
      double v = -eq_[i].rhs;
      for (const auto& [j, a] : eq_[i].terms) v += a * x(j);
      r(i) = v;
    }
    return r;
  }

  // Infeasible-start Newton centering for min t*f + phi s.t. Ax = b.
  bool center(double t, int& total_newton, SubproblemSolution& sol) {
#ifdef DOPF_SOLVER_TRACE
    std::fprintf(stderr, "[center] t=%g\n", t);
#endif
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    Eigen::MatrixXd K(n_ + neq_, n_ + neq_);
    const int max_newton = 200;
    double prev_res = kInf;
    int stagnant = 0;
    int crawling = 0;
    for (int it = 0; it < max_newton; ++it) {
      if (x_.lpNorm<Eigen::Infinity>() > 1e10) {
        sol.status = SolveStatus::Unbounded;
        sol.message = "iterates diverged";
        return false;
      }
      gradient_hessian(t, x_, g, H);
      Eigen::VectorXd rp = primal_residual(x_);
      Eigen::VectorXd rd = g;
      for (size_t i = 0; i < neq_; ++i)
        for (const auto& [j, a] : eq_[i].terms) rd(j) += a * nu_(i);

      K.setZero();
      K.topLeftCorner(n_, n_) = H;
      for (size_t i = 0; i < neq_; ++i)
        for (const auto& [j, a] : eq_[i].terms) {
          K(j, n_ + i) = a;
          K(n_ + i, j) = a;
        }

      // Ruiz equilibration: near binding constraints the barrier Hessian spans
      // many orders of magnitude against the equality rows, which destroys the
      // LU direction without symmetric diagonal scaling
      const Eigen::Index m = K.rows();
      Eigen::VectorXd scale = Eigen::VectorXd::Ones(m);
      Eigen::MatrixXd Ks = K;
      for (int sweep = 0; sweep < 3; ++sweep) {
        for (Eigen::Index i = 0; i < m; ++i) {
          double r = Ks.row(i).lpNorm<Eigen::Infinity>();
          double f = r > 0.0 ? 1.0 / std::sqrt(r) : 1.0;
          scale(i) *= f;
        }
        Ks = scale.asDiagonal() * K * scale.asDiagonal();
      }
      Ks.diagonal().head(n_).array() += 1e-11;
      Ks.diagonal().tail(neq_).array() -= 1e-11;

      Eigen::VectorXd rhs(n_ + neq_);
      rhs.head(n_) = -rd;
      rhs.tail(neq_) = -rp;
      Eigen::VectorXd rhs_s = scale.asDiagonal() * rhs;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(Ks);
      Eigen::VectorXd y = lu.solve(rhs_s);
      for (int ref = 0; ref < 2; ++ref) y += lu.solve(rhs_s - Ks * y);
      Eigen::VectorXd d = scale.asDiagonal() * y;
      if (!d.allFinite()) {
        sol.status = SolveStatus::NumericalFailure;
        sol.message = "singular KKT system";
        return false;
      }
      Eigen::VectorXd dx = d.head(n_);
      Eigen::VectorXd dnu = d.tail(neq_);

      // Newton decrement on the regularized Hessian; the decrement is
      // affine-invariant, so a fixed threshold works across barrier stages
      double decrement2 =
          dx.dot(H.selfadjointView<Eigen::Lower>() * dx) + 1e-11 * dx.squaredNorm();
      bool primal_ok = rp.lpNorm<Eigen::Infinity>() <= 1e-7 * eq_scale_;
      if (primal_ok && decrement2 <= 1e-5) return true;

      // residual-norm backtracking keeping the barrier finite
      double res0 = std::sqrt(rd.squaredNorm() + rp.squaredNorm());
      // at the floating-point resolution of a given stage the residual stops
      // improving; a small decrement there means the point is centered
      stagnant = res0 >= prev_res * (1.0 - 1e-6) ? stagnant + 1 : 0;
      // sub-0.5%-per-step progress sustained over 25 iterations is the
      // numerical-breakdown crawl near binding constraints; abandon the stage
      // instead of burning the full Newton budget (the centered-point
      // fallback in run() recovers from the previous stage)
      crawling = res0 >= prev_res * (1.0 - 5e-3) ? crawling + 1 : 0;
      prev_res = res0;
      if (primal_ok && stagnant >= 3 && decrement2 <= 1e-2) return true;
      if (crawling >= 25) {
        sol.status = SolveStatus::NumericalFailure;
        sol.message = "centering stalled";
        return false;
      }
#ifdef DOPF_SOLVER_TRACE
      std::fprintf(stderr, "  it=%d res0=%.3e dec2=%.3e rp=%.3e\n", it, res0, decrement2,
                   rp.lpNorm<Eigen::Infinity>());
#endif
      double s = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        Eigen::VectorXd xn = x_ + s * dx;
        if (std::isfinite(barrier_value(xn))) {
          Eigen::VectorXd nun = nu_ + s * dnu;
          Eigen::VectorXd rdn;
          gradient(t, xn, rdn);
          for (size_t i = 0; i < neq_; ++i)
            for (const auto& [j, a] : eq_[i].terms) rdn(j) += a * nun(i);
          Eigen::VectorXd rpn = primal_residual(xn);
          double res = std::sqrt(rdn.squaredNorm() + rpn.squaredNorm());
          if (res <= (1.0 - 0.01 * s) * res0) {
            x_ = xn;
            nu_ = nun;
            accepted = true;
            break;
          }
        }
        s *= 0.5;
      }
      total_newton++;
      if (!accepted) {
        // stalled at floating-point resolution; accept only near the center
        if (primal_ok && decrement2 <= 1e-4) return true;
        sol.status = SolveStatus::NumericalFailure;
        sol.message = "line search stalled";
        return false;
      }
    }
    sol.status = SolveStatus::NumericalFailure;
    sol.message = "Newton iteration limit reached";
    return false;
  }

  SubproblemSolution finish(SubproblemSolution& sol, int total_newton, double t) {
    sol.iterations = total_newton;
    std::vector<double> xv(n_);
    for (size_t i = 0; i < n_; ++i) xv[i] = x_(i);
    for (size_t i = 0; i < n_; ++i) sol.values[p_.names()[i]] = x_(i);
    sol.objective = p_.objective_value(xv);
    sol.primal_residual = neq_ ? primal_residual(x_).lpNorm<Eigen::Infinity>() : 0.0;
    sol.duality_gap = obj_scale_ * barrier_complexity_ / t;
    return sol;
  }

  const ConvexProblem& p_;
  double tol_;
  size_t n_;
  size_t neq_ = 0;
  double eq_scale_ = 1.0;
  double obj_scale_ = 1.0;
  std::vector<LinearConstraint> eq_;
  std::vector<bool> fixed_;
  double barrier_complexity_ = 0.0;
  Eigen::VectorXd x_, nu_;
};

}  // namespace detail

inline SubproblemSolution solve(const ConvexProblem& problem, double tol = 1e-8) {
  detail::BarrierSolver solver(problem, tol);
  return solver.run();
}

}  // namespace dopf
