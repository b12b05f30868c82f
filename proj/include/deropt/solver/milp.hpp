#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

#include "deropt/model/milp_model.hpp"
#include "deropt/solver/simplex.hpp"

namespace deropt::solver {

enum class BranchRule { MostFractional, PseudoCost };

struct SolveConfig {
  double mip_gap_rel = 1e-4;
  double feas_tol = 1e-7;
  double int_tol = 1e-6;
  double time_limit_s = 600.0;
  BranchRule branch_rule = BranchRule::MostFractional;
  long node_limit = 200000;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, TimeLimit };

std::string_view to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  Eigen::VectorXd values;  // indexed by variable id; empty without incumbent
  double objective = 0.0;  // includes the model's objective offset
  double best_bound = 0.0;
  double gap = 0.0;
  long node_count = 0;
  long lp_iterations = 0;
  double root_bound = 0.0;  // LP relaxation optimum at the root

  bool has_values() const { return values.size() > 0; }
  double value(model::Var v) const { return values[v.id]; }
};

// Solves the LP relaxation (binaries treated as continuous in [lower, upper]).
Solution solve_lp(const model::MilpModel& m, const SolveConfig& cfg = {});

// Best-first branch and bound over the binaries. Returns Optimal once the
// relative gap drops to mip_gap_rel; every returned incumbent is re-checked
// against the model rows and throws Error(NumericalBreakdown) if it violates
// them by more than feas_tol.
Solution solve_milp(const model::MilpModel& m, const SolveConfig& cfg = {});

// Assembles the column-major LP data for `m` with integrality dropped.
LpProblem<double> relaxation(const model::MilpModel& m);

}  // namespace deropt::solver
