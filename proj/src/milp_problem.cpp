#include "batfleet/milp_problem.hpp"

#include "batfleet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace batfleet {

int MilpProblem::add_variable(Variable v, double cost)
{
  variables.push_back(std::move(v));
  objective.push_back(cost);
  return num_variables() - 1;
}

double MilpProblem::objective_value(const std::vector<double>& x) const
{
  double value = objective_constant;
  for (std::size_t k = 0; k < objective.size(); ++k)
    value += objective[k] * x[k];
  return value;
}

double MilpProblem::row_activity(int row, const std::vector<double>& x) const
{
  double activity = 0.0;
  for (const auto& [col, coef] : constraints[static_cast<std::size_t>(row)].terms)
    activity += coef * x[static_cast<std::size_t>(col)];
  return activity;
}

namespace {

double row_violation(const Constraint& c, double activity)
{
  switch (c.relation)
  {
  case Relation::less_equal: return std::max(0.0, activity - c.rhs);
  case Relation::greater_equal: return std::max(0.0, c.rhs - activity);
  case Relation::equal: return std::abs(activity - c.rhs);
  }
  return 0.0;
}

} // namespace

double MilpProblem::max_violation(const std::vector<double>& x) const
{
  double worst = 0.0;
  for (std::size_t k = 0; k < variables.size(); ++k)
  {
    worst = std::max(worst, variables[k].lower - x[k]);
    worst = std::max(worst, x[k] - variables[k].upper);
  }
  for (int r = 0; r < num_constraints(); ++r)
    worst = std::max(worst, row_violation(constraints[static_cast<std::size_t>(r)], row_activity(r, x)));
  return worst;
}

double MilpProblem::max_scaled_violation(const std::vector<double>& x) const
{
  double worst = 0.0;
  for (std::size_t k = 0; k < variables.size(); ++k)
  {
    worst = std::max(worst, variables[k].lower - x[k]);
    worst = std::max(worst, x[k] - variables[k].upper);
  }
  for (int r = 0; r < num_constraints(); ++r)
  {
    const auto& c = constraints[static_cast<std::size_t>(r)];
    double scale = 0.0;
    for (const auto& term : c.terms)
      scale = std::max(scale, std::abs(term.second));
    if (scale == 0.0)
      scale = 1.0;
    worst = std::max(worst, row_violation(c, row_activity(r, x)) / scale);
  }
  return worst;
}

void MilpProblem::validate(bool require_referenced) const
{
  const int n = num_variables();
  if (static_cast<int>(objective.size()) != n)
    throw InputError(name + ": objective length does not match variable count");
  std::vector<char> referenced(static_cast<std::size_t>(n), 0);
  for (int k = 0; k < n; ++k)
  {
    const auto& v = variables[static_cast<std::size_t>(k)];
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
      throw InputError(name + ": variable " + v.name + " has inconsistent bounds");
    if (!std::isfinite(objective[static_cast<std::size_t>(k)]))
      throw InputError(name + ": variable " + v.name + " has a non-finite cost");
    if (objective[static_cast<std::size_t>(k)] != 0.0)
      referenced[static_cast<std::size_t>(k)] = 1;
  }
  for (const auto& c : constraints)
  {
    if (!std::isfinite(c.rhs))
      throw InputError(name + ": row " + c.name + " has a non-finite right-hand side");
    for (const auto& [col, coef] : c.terms)
    {
      if (col < 0 || col >= n)
        throw InputError(name + ": row " + c.name + " references an unknown column");
      if (!std::isfinite(coef))
        throw InputError(name + ": row " + c.name + " has a non-finite coefficient");
      referenced[static_cast<std::size_t>(col)] = 1;
    }
  }
  if (!require_referenced)
    return;
  for (int k = 0; k < n; ++k)
    if (!referenced[static_cast<std::size_t>(k)])
      throw InputError(name + ": variable " + variables[static_cast<std::size_t>(k)].name +
                       " appears in neither objective nor constraints");
}

} // namespace batfleet
