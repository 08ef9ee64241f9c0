#include "batfleet/studies.hpp"

#include "batfleet/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace batfleet::studies {

int AgingSource::lifetime() const
{
  if (!fixed_loss.empty())
    return static_cast<int>(fixed_loss.size()) - 1;
  return profile.lifetime_periods;
}

std::vector<double> AgingSource::loss(double usage_rate) const
{
  if (!fixed_loss.empty())
    return fixed_loss;
  if (profile.lifetime_periods < 1)
    throw InputError("aging source has neither a profile nor a loss vector");
  return profile.blend(usage_rate);
}

AgingSource AgingSource::fixed(std::vector<double> v, std::string label)
{
  if (v.size() < 2)
    throw InputError("a loss vector needs at least v_0 and v_1");
  AgingSource s;
  s.fixed_loss = std::move(v);
  s.label = label.empty() ? fmt::format("L{}", s.fixed_loss.size() - 1) : std::move(label);
  return s;
}

std::vector<AgingSource> physics_lifetime_curves(const degradation::ChemistryParams& chemistry,
                                                 std::span<const int> lifetimes, double eol_fraction,
                                                 int months_per_period, double cycles_per_day)
{
  std::vector<AgingSource> out;
  for (const auto& chosen : degradation::select_lifetime_scenarios(chemistry, lifetimes, eol_fraction,
                                                                   months_per_period, cycles_per_day))
  {
    AgingSource s;
    s.profile = degradation::aging_profile(degradation::condition_for(chosen.scenario, cycles_per_day), chemistry,
                                           eol_fraction, months_per_period);
    s.label = fmt::format("L{}", s.profile.lifetime_periods);
    out.push_back(std::move(s));
  }
  return out;
}

planner::PlanningInstance make_instance(const BaseCase& base)
{
  if (base.periods < 1)
    throw InputError("the horizon needs at least one period");
  if (static_cast<int>(base.demand.size()) < base.periods)
    throw InputError(fmt::format("{} demand values for a {}-period horizon", base.demand.size(), base.periods));
  planner::PlanningInstance in;
  in.max_age = base.aging.lifetime();
  in.periods = base.periods;
  const auto costs = planner::inflate_costs(base.costs, base.costs.rate, base.periods);
  in.purchase_cost = costs.purchase;
  in.fixed_cost = costs.fixed;
  in.om_cost = costs.om;
  in.inventory_cost = costs.inventory;
  in.salvage_revenue =
    planner::salvage_schedule(base.costs.salvage, base.costs.rate, in.max_age, base.periods, base.salvage_decay);
  if (!base.initial_assets.empty())
    in.initial_assets = base.initial_assets;
  else
  {
    in.initial_assets.assign(static_cast<std::size_t>(std::max(1, in.max_age)), 0);
    in.initial_assets[0] = base.initial_new_assets;
  }
  in.unit_capacity = base.unit_capacity;
  in.usage_rate = base.usage_rate;
  in.demand.assign(base.demand.begin(), base.demand.begin() + base.periods);
  in.loss_fraction = base.aging.loss(base.usage_rate);
  in.validate();
  return in;
}

SweepPoint solve_point(const planner::PlanningInstance& instance, const SweepOptions& options)
{
  SweepPoint p;
  p.total_demand = std::accumulate(instance.demand.begin(), instance.demand.end(), 0.0);
  p.instance = instance;
  try
  {
    p.heuristic_cost = planner::evaluate_cost(instance, planner::heuristic_schedule(instance));
  }
  catch (const InfeasibleModelError&)
  {
  }
  try
  {
    auto plan = solver::solve_plan(instance, options.milp);
    p.status = std::string(solver::to_string(plan.milp.status));
    p.nodes = plan.milp.nodes_explored;
    if (plan.schedule)
    {
      p.optimal_cost = plan.objective;
      p.best_bound = plan.milp.best_bound;
      p.schedule = std::move(plan.schedule);
      if (p.total_demand > 0.0)
        p.unit_demand_cost = p.optimal_cost / p.total_demand;
    }
  }
  catch (const InfeasibleModelError& e)
  {
    p.status = "infeasible";
    p.note = e.what();
  }
  return p;
}

namespace {

void require_monotone(std::span<const double> grid, const char* what)
{
  if (grid.empty())
    return;
  bool increasing = true, decreasing = true;
  for (std::size_t k = 1; k < grid.size(); ++k)
  {
    increasing = increasing && grid[k] > grid[k - 1];
    decreasing = decreasing && grid[k] < grid[k - 1];
  }
  if (!increasing && !decreasing)
    throw InputError(fmt::format("{} grid must be strictly monotone", what));
}

} // namespace

SweepResult sweep_usage_rate(const BaseCase& base, std::span<const double> grid, const SweepOptions& options)
{
  require_monotone(grid, "usage rate");
  for (double u : grid)
    if (!(u > 0.0 && u <= 1.0))
      throw InputError(fmt::format("usage rate {} outside (0, 1]", u));
  SweepResult r{"usage_rate", "usage_rate", {}};
  for (double u : grid)
  {
    BaseCase b = base;
    b.usage_rate = u;
    SweepPoint p = solve_point(make_instance(b), options);
    p.series = base.aging.label;
    p.parameter = u;
    p.label = fmt::format("{:g}", u);
    r.points.push_back(std::move(p));
  }
  return r;
}

SweepResult sweep_unit_capacity(const BaseCase& base, std::span<const double> grid, const SweepOptions& options)
{
  require_monotone(grid, "unit capacity");
  for (double a : grid)
    if (!(a > 0.0))
      throw InputError(fmt::format("unit capacity {} must be positive", a));
  if (base.demand.empty())
    throw InputError("unit capacity sweep needs demand");
  SweepResult r{"unit_capacity", "unit_capacity_kwh", {}};
  for (double a : grid)
  {
    BaseCase b = base;
    const double ratio = a / base.unit_capacity;
    b.unit_capacity = a;
    b.costs.purchase = base.costs.purchase * ratio;
    b.costs.salvage = base.costs.salvage * ratio;
    b.initial_assets.clear();
    b.initial_new_assets = static_cast<std::int64_t>(std::ceil(base.demand[0] / (a * base.usage_rate) - 1e-9));
    SweepPoint p = solve_point(make_instance(b), options);
    p.series = base.aging.label;
    p.parameter = a;
    p.label = fmt::format("{:g}", a);
    r.points.push_back(std::move(p));
  }
  return r;
}

SweepResult sweep_lifetime(const BaseCase& base, std::span<const AgingSource> curves, const SweepOptions& options)
{
  std::vector<double> grid;
  for (const auto& c : curves)
    grid.push_back(c.lifetime());
  require_monotone(grid, "lifetime");
  SweepResult r{"lifetime", "lifetime_periods", {}};
  for (const auto& c : curves)
  {
    BaseCase b = base;
    b.aging = c;
    b.initial_assets.clear();
    SweepPoint p = solve_point(make_instance(b), options);
    p.series = c.label;
    p.parameter = c.lifetime();
    p.label = c.label;
    r.points.push_back(std::move(p));
  }
  return r;
}

SweepResult sweep_demand_windows(const BaseCase& base, const demand::DemandSeries& quarterly,
                                 std::span<const std::size_t> window_starts, std::span<const AgingSource> curves,
                                 const SweepOptions& options)
{
  std::vector<double> grid(window_starts.begin(), window_starts.end());
  require_monotone(grid, "window start");
  SweepResult r{"demand_window", "window_start", {}};
  for (std::size_t start : window_starts)
  {
    const auto window = quarterly.window(start, static_cast<std::size_t>(base.periods));
    for (const auto& c : curves)
    {
      BaseCase b = base;
      b.demand = window.values;
      b.aging = c;
      b.initial_assets.clear();
      SweepPoint p = solve_point(make_instance(b), options);
      p.series = c.label;
      p.parameter = static_cast<double>(start);
      p.label = window.labels.front();
      r.points.push_back(std::move(p));
    }
  }
  return r;
}

std::vector<std::size_t> default_window_starts(std::size_t series_length, std::size_t length, std::size_t count)
{
  if (count == 0 || series_length < length)
    throw InputError(fmt::format("a series of {} periods cannot hold a {}-period window", series_length, length));
  const std::size_t last = series_length - length;
  std::size_t step = 2 * length;
  if (count > 1)
    step = std::min(step, last / (count - 1));
  if (count > 1 && step == 0)
    throw InputError("series too short for distinct windows");
  std::vector<std::size_t> starts;
  for (std::size_t k = count; k-- > 0;)
    starts.push_back(last - k * step);
  return starts;
}

double average_salvage_age(const planner::PlanningInstance& in, const planner::Schedule& s)
{
  double weighted = 0.0, count = 0.0;
  for (int j = 1; j < in.periods; ++j)
    for (int i = 1; i <= in.max_age; ++i)
    {
      weighted += static_cast<double>(i) * static_cast<double>(s.salvaged(i, j));
      count += static_cast<double>(s.salvaged(i, j));
    }
  return count > 0.0 ? weighted / count : 0.0;
}

std::vector<int> salvage_time_points(const planner::PlanningInstance& in, const planner::Schedule& s)
{
  std::vector<int> out;
  for (int j = 1; j < in.periods; ++j)
    for (int i = 1; i <= in.max_age; ++i)
      if (s.salvaged(i, j) > 0)
      {
        out.push_back(j);
        break;
      }
  return out;
}

std::vector<int> purchase_time_points(const planner::PlanningInstance& in, const planner::Schedule& s)
{
  std::vector<int> out;
  for (int j = 0; j < in.periods; ++j)
    if (s.purchases[static_cast<std::size_t>(j)] > 0)
      out.push_back(j);
  return out;
}

} // namespace batfleet::studies
