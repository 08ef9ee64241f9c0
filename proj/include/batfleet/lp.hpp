/*
 * lp.hpp
 *
 * Dense two-phase primal simplex with implicit variable bounds. Integrality
 * flags of the input problem are ignored.
 */
#pragma once

#include "batfleet/milp_problem.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace batfleet::solver {

enum class LpStatus { optimal, infeasible, unbounded };
std::string_view to_string(LpStatus status);

struct LpOptions
{
  double feasibility_tol = 1e-9;  // on row-normalised data
  double optimality_tol = 1e-9;   // relative to the largest cost
  double pivot_tol = 1e-7;
  int degenerate_threshold = 50;  // consecutive degenerate pivots before Bland's rule
  int refactor_interval = 100;    // pivots between basis reinversions
  long max_iterations = 0;        // 0: derived from problem size
};

struct LpSolution
{
  LpStatus status = LpStatus::infeasible;
  std::vector<double> values;
  double objective = 0.0;
  bool dual_feasible = false;
  long iterations = 0;
};

LpSolution solve_lp(const MilpProblem& problem, const LpOptions& options = {});

/// Same relaxation with the variable bounds replaced (branch-and-bound nodes).
LpSolution solve_lp(const MilpProblem& problem, std::span<const double> lower,
                    std::span<const double> upper, const LpOptions& options = {});

} // namespace batfleet::solver
