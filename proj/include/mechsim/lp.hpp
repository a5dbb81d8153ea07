#ifndef MECHSIM_LP_HPP
#define MECHSIM_LP_HPP

#include <utility>
#include <vector>

namespace mechsim {

/// maximize objective . x  subject to  eq_rows x = eq_rhs, ge_rows x >= ge_rhs, x >= 0.
struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> ge_rows;
  std::vector<double> ge_rhs;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  // duals of the original rows; dual_ge entries are <= 0 at optimality
  std::vector<double> dual_eq;
  std::vector<double> dual_ge;
  // certificate, computed against the original data
  double max_primal_residual = 0.0;
  double max_dual_violation = 0.0;
  double duality_gap = 0.0;
  long iterations = 0;
};

struct LpOptions {
  // Optional warm start: a sequence of (row, column) pivots that produces a
  // feasible basis (rows indexed over [eq rows..., ge rows...]). Falls back to
  // phase 1 when the sequence is numerically invalid or infeasible.
  std::vector<std::pair<int, int>> warm_pivots;
  double tol = 1e-9;
  long max_iterations = 0;  // 0: automatic
};

LpResult lp_solve(const LpProblem& problem, const LpOptions& options = {});

}  // namespace mechsim

#endif  // MECHSIM_LP_HPP
