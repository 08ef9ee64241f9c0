/*
 * branch_and_bound.hpp
 *
 * Best-bound branch and bound over the LP relaxation. Node order is fully
 * determined by (bound, node id), so identical inputs give identical results.
 */
#pragma once

#include "batfleet/lp.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace batfleet::solver {

enum class MilpStatus { optimal, feasible_gap, infeasible, node_limit };
std::string_view to_string(MilpStatus status);

/// Proposes an integral point from a node relaxation; nullopt when it cannot.
using IncumbentHeuristic = std::function<std::optional<std::vector<double>>(const LpSolution&)>;

struct MilpOptions
{
  double gap = 0.0;                 // relative
  double absolute_gap = 1e-6;
  std::int64_t node_limit = 200000;
  double time_limit = 0.0;          // seconds, 0 = none
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-7;    // accepted row violation of heuristic points (row-normalised)
  LpOptions lp;
  IncumbentHeuristic heuristic;
  std::vector<double> initial_incumbent; // used when feasible and integral
  bool record_trace = false;
};

struct MilpResult
{
  MilpStatus status = MilpStatus::infeasible;
  std::vector<double> incumbent;    // empty when no feasible point was found
  double objective = 0.0;
  double best_bound = 0.0;
  std::int64_t nodes_explored = 0;  // relaxations solved
  std::int64_t branchings = 0;
  std::vector<double> bound_trace;  // global lower bound when each node is taken

  bool has_incumbent() const { return !incumbent.empty(); }
  /// (objective - best_bound) / max(1, |objective|).
  double relative_gap() const;
};

MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

} // namespace batfleet::solver
