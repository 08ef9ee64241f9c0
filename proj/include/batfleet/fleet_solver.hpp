/*
 * fleet_solver.hpp
 *
 * Glue between the replacement model and the generic MILP engine, plus the
 * exhaustive oracle used to certify small instances.
 */
#pragma once

#include "batfleet/branch_and_bound.hpp"
#include "batfleet/errors.hpp"
#include "batfleet/planner.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace batfleet::solver {

/// Raised by brute_force when the enumeration would exceed its budget.
class SearchSpaceError : public Error
{
public:
  using Error::Error;
};

struct BruteForceCaps
{
  std::vector<std::int64_t> max_purchases; // per time point; empty = big-M of the model
  std::int64_t max_combinations = 10'000'000;
};

/// Enumerates every integral schedule within the caps. The result carries the
/// variable values in model column order (see planner::VariableLayout).
MilpResult brute_force(const planner::PlanningInstance& instance, const BruteForceCaps& caps = {});

/// Rounds a relaxation to a schedule; nullopt when the repair does not pass
/// the feasibility audit.
std::optional<planner::Schedule> round_and_repair(const LpSolution& lp, const planner::PlanningInstance& instance);

struct PlanResult
{
  MilpResult milp;
  std::optional<planner::Schedule> schedule;
  double objective = 0.0; // evaluate_cost of the schedule
};

/// build_milp + branch and bound seeded with round_and_repair.
PlanResult solve_plan(const planner::PlanningInstance& instance, MilpOptions options = {});

/// Small instance with integer costs and integral effective capacities:
/// n <= 3, m <= 4, demand at most three new units per period.
planner::PlanningInstance random_tiny_instance(std::uint64_t seed);

/// Fixed-column MPS dump (rows, then columns in model order with integer
/// markers, RHS, bounds).
void write_mps(std::ostream& out, const MilpProblem& problem);

} // namespace batfleet::solver
