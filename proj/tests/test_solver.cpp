#include "batfleet/fleet_solver.hpp"
#include "batfleet/lp.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

using namespace batfleet;
using namespace batfleet::solver;

namespace {

MilpProblem one_var(double lower, double upper, double cost)
{
  MilpProblem p;
  p.add_variable({"x", lower, upper, false}, cost);
  return p;
}

bool integral(const std::vector<double>& x)
{
  for (double v : x)
    if (std::abs(v - std::round(v)) > 1e-6)
      return false;
  return true;
}

// hand-checked fixture: two periods, two ages, one unit of demand per period
planner::PlanningInstance fixture()
{
  planner::PlanningInstance in;
  in.max_age = 2;
  in.periods = 2;
  in.purchase_cost = {25, 25};
  in.fixed_cost = {4, 4};
  in.om_cost = {1, 1};
  in.inventory_cost = {1, 1};
  in.salvage_revenue = planner::salvage_schedule(2.0, 0.0, 2, 2);
  in.initial_assets = {0, 0};
  in.unit_capacity = 8;
  in.usage_rate = 1;
  in.demand = {6, 6};
  in.loss_fraction = {0, 0.25, 0.5};
  return in;
}

} // namespace

TEST_CASE("lp basics")
{
  auto p = one_var(0.0, infinity, 1.0);
  p.add_constraint({"lb", "row", {{0, 1.0}}, Relation::greater_equal, 3.0});
  auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.values[0] == doctest::Approx(3.0));
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.dual_feasible);

  MilpProblem empty;
  s = solve_lp(empty);
  CHECK(s.status == LpStatus::optimal);
  CHECK(s.objective == 0.0);

  auto down = one_var(-infinity, infinity, 1.0);
  down.add_constraint({"ub", "row", {{0, 1.0}}, Relation::less_equal, 5.0});
  CHECK(solve_lp(down).status == LpStatus::unbounded);

  auto clash = one_var(0.0, 10.0, 1.0);
  clash.add_constraint({"a", "row", {{0, 1.0}}, Relation::greater_equal, 4.0});
  clash.add_constraint({"b", "row", {{0, 1.0}}, Relation::less_equal, 3.0});
  CHECK(solve_lp(clash).status == LpStatus::infeasible);

  // bound overrides
  auto boxed = one_var(0.0, 10.0, -1.0);
  const double lo[] = {0.0}, hi[] = {4.0};
  CHECK(solve_lp(boxed, lo, hi).objective == doctest::Approx(-4.0));
}

TEST_CASE("lp agrees with the tableau oracle on random problems")
{
  std::mt19937_64 rng(2024);
  int optimal = 0, infeasible = 0, unbounded = 0;
  for (int k = 0; k < 50; ++k)
  {
    const auto p = oracle::random_lp(rng, 20, 20, false);
    const auto ref = oracle::tableau_simplex(p);
    const auto got = solve_lp(p);
    CAPTURE(k);
    REQUIRE(static_cast<int>(got.status) == static_cast<int>(ref.status));
    if (got.status != LpStatus::optimal)
    {
      ++infeasible;
      continue;
    }
    ++optimal;
    CHECK(std::abs(got.objective - ref.objective) <= 1e-6 * std::max(1.0, std::abs(ref.objective)));
    CHECK(p.max_violation(got.values) <= 1e-7);
    CHECK(std::abs(p.objective_value(got.values) - got.objective) <= 1e-9 * std::max(1.0, std::abs(got.objective)));
  }
  for (int k = 0; k < 50; ++k)
  {
    const auto p = oracle::random_lp(rng, 12, 12, true);
    const auto ref = oracle::tableau_simplex(p);
    const auto got = solve_lp(p);
    CAPTURE(k);
    REQUIRE(static_cast<int>(got.status) == static_cast<int>(ref.status));
    if (got.status == LpStatus::optimal)
      CHECK(std::abs(got.objective - ref.objective) <= 1e-6 * std::max(1.0, std::abs(ref.objective)));
    unbounded += got.status == LpStatus::unbounded;
  }
  // the generator exercises every outcome
  CHECK(optimal > 20);
  CHECK(infeasible > 0);
  CHECK(unbounded > 0);
}

TEST_CASE("lp iteration cap")
{
  std::mt19937_64 rng(5);
  MilpProblem p;
  while (p.num_constraints() < 5)
    p = oracle::random_lp(rng, 10, 10, false);
  LpOptions o;
  o.max_iterations = 1;
  // either the cap is not hit (trivial start) or it is reported as a solver error
  try
  {
    const auto s = solve_lp(p, o);
    CHECK(s.iterations <= 1);
  }
  catch (const SolverError&)
  {
  }
}

TEST_CASE("branch and bound on a knapsack")
{
  // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
  MilpProblem p;
  p.add_variable({"a", 0, 10, true}, -5);
  p.add_variable({"b", 0, 10, true}, -4);
  p.add_variable({"c", 0, 10, true}, -3);
  p.add_constraint({"r1", "row", {{0, 2}, {1, 3}, {2, 1}}, Relation::less_equal, 5});
  p.add_constraint({"r2", "row", {{0, 4}, {1, 1}, {2, 2}}, Relation::less_equal, 11});
  p.add_constraint({"r3", "row", {{0, 3}, {1, 4}, {2, 2}}, Relation::less_equal, 8});
  MilpOptions o;
  o.record_trace = true;
  const auto r = solve_milp(p, o);
  REQUIRE(r.status == MilpStatus::optimal);
  CHECK(r.objective == doctest::Approx(-13.0));
  CHECK(integral(r.incumbent));
  CHECK(r.best_bound <= r.objective + 1e-9);
  for (std::size_t k = 1; k < r.bound_trace.size(); ++k)
    CHECK(r.bound_trace[k] >= r.bound_trace[k - 1]);

  // integral relaxation: no branching at all
  MilpProblem easy;
  easy.add_variable({"x", 0, 10, true}, 1);
  easy.add_constraint({"r", "row", {{0, 1}}, Relation::greater_equal, 3});
  const auto e = solve_milp(easy);
  CHECK(e.branchings == 0);
  CHECK(e.nodes_explored == 1);
  CHECK(e.objective == doctest::Approx(3.0));

  MilpProblem none;
  none.add_variable({"x", 0, 10, true}, 1);
  none.add_constraint({"r", "row", {{0, 2}}, Relation::equal, 3});
  CHECK(solve_milp(none).status == MilpStatus::infeasible);
}

TEST_CASE("node limit keeps the incumbent and the bound")
{
  const auto in = random_tiny_instance(17);
  MilpOptions o;
  o.node_limit = 1;
  const auto p = planner::build_milp(in);
  const auto r = solve_milp(p, o);
  if (r.status == MilpStatus::node_limit)
    CHECK(r.best_bound <= brute_force(in).objective + 1e-9);
  CHECK(r.nodes_explored <= 1);
}

TEST_CASE("branch and bound equals exhaustive search on tiny instances")
{
  for (std::uint64_t seed = 0; seed < 50; ++seed)
  {
    CAPTURE(seed);
    const auto in = random_tiny_instance(seed);
    const auto bf = brute_force(in);
    const auto plan = solve_plan(in);
    REQUIRE(bf.status == MilpStatus::optimal);
    REQUIRE(plan.milp.status == MilpStatus::optimal);
    CHECK(plan.milp.objective == bf.objective);
    CHECK(integral(plan.milp.incumbent));
    CHECK(plan.milp.best_bound <= plan.milp.objective + 1e-9);
    CHECK(plan.objective <= planner::evaluate_cost(in, planner::heuristic_schedule(in)) + 1e-9);
  }
}

TEST_CASE("runs are reproducible")
{
  for (std::uint64_t seed = 0; seed < 10; ++seed)
  {
    const auto in = random_tiny_instance(seed);
    const auto a = solve_plan(in);
    const auto b = solve_plan(in);
    CHECK(a.milp.incumbent == b.milp.incumbent);
    CHECK(a.milp.nodes_explored == b.milp.nodes_explored);
  }
  CHECK(random_tiny_instance(4).demand == random_tiny_instance(4).demand);
}

TEST_CASE("tiny instance generator stays inside its envelope")
{
  for (std::uint64_t seed = 0; seed < 200; ++seed)
  {
    const auto in = random_tiny_instance(seed);
    CHECK(in.max_age <= 3);
    CHECK(in.periods <= 4);
    for (int j = 0; j < in.periods; ++j)
    {
      CHECK(in.demand[static_cast<std::size_t>(j)] <= 3 * in.effective_capacity(0));
      CHECK(in.purchase_cost[static_cast<std::size_t>(j)] == std::round(in.purchase_cost[static_cast<std::size_t>(j)]));
    }
  }
}

TEST_CASE("brute force")
{
  planner::PlanningInstance zero = fixture();
  zero.demand = {0, 0};
  CHECK(brute_force(zero).objective == 0.0);

  const auto in = fixture();
  const auto r = brute_force(in);
  REQUIRE(r.status == MilpStatus::optimal);
  // buy one (25 + 4), run it twice (1 + 1), sell it at age 2 for 2 * 1/2
  CHECK(r.objective == 30.0);
  CHECK(solve_plan(in).milp.objective == 30.0);

  BruteForceCaps none;
  none.max_purchases = {0, 0};
  CHECK(brute_force(in, none).status == MilpStatus::infeasible);

  BruteForceCaps tight;
  tight.max_combinations = 3;
  CHECK_THROWS_AS(brute_force(random_tiny_instance(8), tight), SearchSpaceError);
}

TEST_CASE("round and repair")
{
  const auto in = fixture();
  const auto p = planner::build_milp(in);

  // an integral point goes through untouched
  const auto bf = brute_force(in);
  LpSolution exact;
  exact.status = LpStatus::optimal;
  exact.values = bf.incumbent;
  exact.objective = bf.objective;
  const auto same = round_and_repair(exact, in);
  REQUIRE(same);
  CHECK(planner::to_values(in, *same) == bf.incumbent);

  int close = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed)
  {
    const auto t = random_tiny_instance(seed);
    const auto lp = solve_lp(planner::build_milp(t));
    REQUIRE(lp.status == LpStatus::optimal);
    const auto repaired = round_and_repair(lp, t);
    REQUIRE(repaired);
    CHECK(planner::check_feasibility(t, *repaired).empty());
    const double cost = planner::evaluate_cost(t, *repaired);
    CHECK(cost >= lp.objective - 1e-9);
    const double best = brute_force(t).objective;
    close += cost <= best + 0.05 * std::max(1.0, std::abs(best));
  }
  CHECK(close >= 40);
  (void)p;
}

TEST_CASE("mps dump")
{
  const auto in = fixture();
  const auto p = planner::build_milp(in);
  std::ostringstream out;
  write_mps(out, p);
  const std::string text = out.str();
  std::istringstream lines(text);
  std::string line, section;
  int rows = 0, markers = 0, bounds = 0;
  std::set<std::string> columns;
  while (std::getline(lines, line))
  {
    if (line.empty())
      continue;
    if (line[0] != ' ')
    {
      section = line.substr(0, line.find(' '));
      continue;
    }
    std::istringstream f(line);
    std::string a, b;
    f >> a >> b;
    if (section == "ROWS")
      ++rows;
    else if (section == "COLUMNS")
    {
      if (b == "'MARKER'")
        ++markers;
      else
        columns.insert(a);
    }
    else if (section == "BOUNDS")
      ++bounds;
  }
  CHECK(text.rfind("NAME", 0) == 0);
  CHECK(text.find("ENDATA") != std::string::npos);
  CHECK(rows == p.num_constraints() + 1);
  CHECK(markers % 2 == 0);
  CHECK(markers >= 2);
  CHECK(static_cast<int>(columns.size()) == p.num_variables());
  CHECK(bounds >= p.num_variables());
}
