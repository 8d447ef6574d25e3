#pragma once

// Linear programs in the inequality standard form used by the closed-form
// reductions:  optimize c'x  subject to  A x <= b  and x_i >= 0 for flagged
// variables. Solved through the same cone engine as the SDPs (every row and
// sign constraint becomes a 1x1 block), which supplies dual multipliers and
// a duality-gap report for free.

#include "bqt/sdp/solver.hpp"

#include <string>
#include <vector>

namespace bqt::sdp {

struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  bool maximize = true;
  std::vector<bool> nonneg;  // empty means all variables >= 0

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(a.rows()); }

  void validate() const {
    if (a.rows() != b.size() || (a.size() && a.cols() != c.size()))
      throw std::invalid_argument("LpProblem: inconsistent dimensions");
    if (!nonneg.empty() && static_cast<int>(nonneg.size()) != num_vars())
      throw std::invalid_argument("LpProblem: nonneg flag count mismatch");
  }
  bool var_nonneg(int i) const { return nonneg.empty() ? true : nonneg[i]; }
};

struct LpSolution {
  SolveStatus status = SolveStatus::Inaccurate;
  Eigen::VectorXd x;
  Eigen::VectorXd row_duals;  // multipliers for the A x <= b rows
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool optimal() const { return status == SolveStatus::Optimal; }
};

inline LpSolution solve_lp(const LpProblem& p, const SolverOptions& opts = {}) {
  p.validate();
  const int n = p.num_vars();
  const int m = p.num_rows();

  SolverForm form;
  form.num_params = n;
  form.c = p.maximize ? Eigen::VectorXd(-p.c) : p.c;
  for (int r = 0; r < m; ++r) {
    SolverForm::Block blk;
    blk.dim = 1;
    blk.f0 = Eigen::MatrixXd::Constant(1, 1, p.b(r));
    for (int i = 0; i < n; ++i)
      if (p.a(r, i) != 0.0) {
        SolverForm::Entry e;
        e.param = i;
        e.trips.emplace_back(0, 0, -p.a(r, i));
        blk.entries.push_back(std::move(e));
      }
    form.blocks.push_back(std::move(blk));
  }
  for (int i = 0; i < n; ++i) {
    if (!p.var_nonneg(i)) continue;
    SolverForm::Block blk;
    blk.dim = 1;
    blk.f0 = Eigen::MatrixXd::Zero(1, 1);
    SolverForm::Entry e;
    e.param = i;
    e.trips.emplace_back(0, 0, 1.0);
    blk.entries.push_back(std::move(e));
    form.blocks.push_back(std::move(blk));
  }

  RawSolution raw = solve_cone_program(form, opts);
  LpSolution sol;
  sol.status = raw.status;
  sol.x = raw.x;
  sol.iterations = raw.iterations;
  double sign = p.maximize ? -1.0 : 1.0;
  sol.primal_value = sign * raw.primal_obj;
  sol.dual_value = sign * raw.dual_obj;
  sol.gap = std::abs(raw.primal_obj - raw.dual_obj);
  sol.row_duals.resize(m);
  for (int r = 0; r < m; ++r) sol.row_duals(r) = raw.dual_cone[r](0, 0);
  if (sol.status == SolveStatus::Optimal) {
    // weak duality at the reported optimum (max: primal <= dual, min: reverse)
    double margin = 100.0 * opts.gap_tol * (1.0 + std::abs(sol.primal_value));
    bool ok = p.maximize ? sol.primal_value <= sol.dual_value + margin
                         : sol.primal_value >= sol.dual_value - margin;
    if (!ok) sol.status = SolveStatus::Inaccurate;
  }
  return sol;
}

/// Dual of (max c'x : Ax <= b, x >= 0), namely (min b'y : A'y >= c, y >= 0),
/// written in the same standard form.
inline LpProblem lp_dual(const LpProblem& p) {
  if (!p.maximize) throw std::invalid_argument("lp_dual: expects a maximization problem");
  for (int i = 0; i < p.num_vars(); ++i)
    if (!p.var_nonneg(i)) throw std::invalid_argument("lp_dual: expects all variables >= 0");
  LpProblem d;
  d.c = p.b;
  d.a = -p.a.transpose();
  d.b = -p.c;
  d.maximize = false;
  return d;
}

/// All constraints of the LP satisfied at x within tol.
inline bool lp_feasible(const LpProblem& p, const Eigen::VectorXd& x, double tol,
                        std::string* why = nullptr) {
  p.validate();
  if (x.size() != p.c.size()) throw std::invalid_argument("lp_feasible: wrong point length");
  for (int i = 0; i < p.num_vars(); ++i)
    if (p.var_nonneg(i) && x(i) < -tol) {
      if (why) *why = "x(" + std::to_string(i) + ") = " + std::to_string(x(i)) + " < 0";
      return false;
    }
  if (p.num_rows()) {
    Eigen::VectorXd slack = p.b - p.a * x;
    for (int r = 0; r < p.num_rows(); ++r)
      if (slack(r) < -tol) {
        if (why) *why = "row " + std::to_string(r) + " violated by " + std::to_string(-slack(r));
        return false;
      }
  }
  return true;
}

inline double lp_objective(const LpProblem& p, const Eigen::VectorXd& x) { return p.c.dot(x); }

}  // namespace bqt::sdp
