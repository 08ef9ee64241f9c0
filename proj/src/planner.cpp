#include "batfleet/planner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace batfleet::planner {

namespace {

constexpr double ceil_tolerance = 1e-9;
constexpr double demand_tolerance = 1e-7;

std::int64_t ceil_count(double x)
{
  if (x <= 0.0)
    return 0;
  return static_cast<std::int64_t>(std::ceil(x - ceil_tolerance * std::max(1.0, x)));
}

template <typename T>
void require_length(const std::vector<T>& v, std::size_t n, const char* what)
{
  if (v.size() != n)
    throw InputError(fmt::format("planning instance: {} has length {}, expected {}", what, v.size(), n));
}

} // namespace

void PlanningInstance::validate() const
{
  if (max_age < 1 || periods < 1)
    throw InputError("planning instance: need n >= 1 and m >= 1");
  const auto m = static_cast<std::size_t>(periods);
  const auto n = static_cast<std::size_t>(max_age);
  require_length(purchase_cost, m, "P");
  require_length(fixed_cost, m, "K");
  require_length(om_cost, m, "C");
  require_length(inventory_cost, m, "H");
  require_length(demand, m, "d");
  require_length(initial_assets, n, "N");
  require_length(loss_fraction, n + 1, "v");
  if (salvage_revenue.first_age() != 1 || salvage_revenue.last_age() != max_age ||
      salvage_revenue.first_time() != 1 || salvage_revenue.last_time() != periods)
    throw InputError("planning instance: R must be indexed by age 1..n and time 1..m");

  auto non_negative = [](const std::vector<double>& xs, const char* what) {
    for (double x : xs)
      if (!(x >= 0.0) || !std::isfinite(x))
        throw InputError(fmt::format("planning instance: {} must be finite and non-negative", what));
  };
  non_negative(purchase_cost, "P");
  non_negative(fixed_cost, "K");
  non_negative(om_cost, "C");
  non_negative(inventory_cost, "H");
  non_negative(salvage_revenue.values(), "R");
  non_negative(demand, "d");
  for (auto count : initial_assets)
    if (count < 0)
      throw InputError("planning instance: N must be non-negative");
  for (std::size_t i = 0; i < loss_fraction.size(); ++i)
  {
    const double v = loss_fraction[i];
    if (!(v >= 0.0 && v < 1.0))
      throw InputError("planning instance: v_i must lie in [0, 1)");
    if (i > 0 && v < loss_fraction[i - 1])
      throw InputError("planning instance: v must be non-decreasing in age");
  }
  if (!(unit_capacity > 0.0) || !std::isfinite(unit_capacity))
    throw InputError("planning instance: unit capacity must be positive");
  if (!(usage_rate > 0.0 && usage_rate <= 1.0))
    throw InputError("planning instance: usage rate must lie in (0, 1]");
}

Schedule Schedule::empty_for(const PlanningInstance& instance)
{
  const int n = instance.max_age;
  const int m = instance.periods;
  Schedule s;
  s.purchases.assign(static_cast<std::size_t>(m), 0);
  s.purchase_flag.assign(static_cast<std::size_t>(m), 0);
  s.in_use = AgeTimeTable<std::int64_t>(0, n - 1, 0, m - 1);
  s.inventory = AgeTimeTable<std::int64_t>(0, n - 1, 0, m - 1);
  s.salvaged = AgeTimeTable<std::int64_t>(1, n, 1, m);
  return s;
}

CostSchedules inflate_costs(const CostBase& base, double rate, int periods)
{
  if (!(rate > -1.0))
    throw InputError("inflate_costs: rate must exceed -1");
  if (periods < 1)
    throw InputError("inflate_costs: need at least one period");
  CostSchedules out;
  for (int j = 0; j < periods; ++j)
  {
    const double growth = std::pow(1.0 + rate, j);
    out.purchase.push_back(base.purchase * growth);
    out.fixed.push_back(base.fixed * growth);
    out.om.push_back(base.om * growth);
    out.inventory.push_back(base.inventory * growth);
  }
  return out;
}

AgeTimeTable<double> salvage_schedule(double r11, double rate, int max_age, int periods, SalvageDecay decay)
{
  if (!(r11 >= 0.0))
    throw InputError("salvage_schedule: R_11 must be non-negative");
  if (!(rate > -1.0))
    throw InputError("salvage_schedule: rate must exceed -1");
  if (max_age < 1 || periods < 1)
    throw InputError("salvage_schedule: need n >= 1 and m >= 1");
  AgeTimeTable<double> r(1, max_age, 1, periods);
  for (int i = 1; i <= max_age; ++i)
  {
    const double age_factor =
      decay == SalvageDecay::linear ? static_cast<double>(max_age - i + 1) / max_age : 1.0;
    for (int j = 1; j <= periods; ++j)
      r(i, j) = r11 * std::pow(1.0 + rate, j - 1) * age_factor;
  }
  return r;
}

VariableLayout::VariableLayout(const PlanningInstance& instance)
  : n_(instance.max_age), m_(instance.periods)
{
}

std::int64_t purchase_bound(const PlanningInstance& instance, int j)
{
  const double d = instance.demand[static_cast<std::size_t>(j)];
  if (d <= 0.0)
    return 0;
  const double oldest = instance.effective_capacity(instance.max_age);
  if (oldest <= 0.0)
    throw InfeasibleModelError(
      fmt::format("period {}: demand {} but assets at maximum age deliver no capacity", j, d));
  return ceil_count(d / oldest);
}

std::int64_t fleet_bound(const PlanningInstance& instance)
{
  std::int64_t total = std::accumulate(instance.initial_assets.begin(), instance.initial_assets.end(),
                                       std::int64_t{0});
  for (int j = 0; j < instance.periods; ++j)
    total += purchase_bound(instance, j);
  return total;
}

MilpProblem build_milp(const PlanningInstance& inst)
{
  inst.validate();
  const int n = inst.max_age;
  const int m = inst.periods;
  const VariableLayout layout(inst);

  std::vector<std::int64_t> big_m(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j)
    big_m[static_cast<std::size_t>(j)] = purchase_bound(inst, j);
  const double cap = static_cast<double>(fleet_bound(inst));

  MilpProblem p;
  p.name = "battery_fleet";
  for (int j = 0; j < m; ++j)
    p.add_variable({fmt::format("B_{}", j), 0.0, static_cast<double>(big_m[static_cast<std::size_t>(j)]), true},
                   inst.purchase_cost[static_cast<std::size_t>(j)]);
  for (int j = 0; j < m; ++j)
    p.add_variable({fmt::format("Z_{}", j), 0.0, 1.0, true}, inst.fixed_cost[static_cast<std::size_t>(j)]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      p.add_variable({fmt::format("X_{}_{}", i, j), 0.0, cap, true}, inst.om_cost[static_cast<std::size_t>(j)]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      p.add_variable({fmt::format("I_{}_{}", i, j), 0.0, cap, true},
                     inst.inventory_cost[static_cast<std::size_t>(j)]);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= m; ++j)
      p.add_variable({fmt::format("S_{}_{}", i, j), 0.0, cap, true}, -inst.salvage_revenue(i, j));

  // demand
  for (int j = 0; j < m; ++j)
  {
    Constraint c{fmt::format("demand_{}", j), "9", {}, Relation::greater_equal,
                 inst.demand[static_cast<std::size_t>(j)]};
    for (int i = 0; i < n; ++i)
      c.terms.emplace_back(layout.in_use(i, j), inst.effective_capacity(i));
    p.add_constraint(std::move(c));
  }
  // initial fleet
  for (int i = 1; i < n; ++i)
    p.add_constraint({fmt::format("initial_{}", i), "10",
                      {{layout.in_use(i, 0), 1.0}, {layout.inventory(i, 0), 1.0}},
                      Relation::equal, static_cast<double>(inst.initial_assets[static_cast<std::size_t>(i)])});
  p.add_constraint({"initial_0", "11",
                    {{layout.in_use(0, 0), 1.0}, {layout.inventory(0, 0), 1.0}, {layout.purchases(0), -1.0}},
                    Relation::equal, static_cast<double>(inst.initial_assets[0])});
  // flow conservation
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < m; ++j)
      p.add_constraint({fmt::format("flow_{}_{}", i, j), "12",
                        {{layout.in_use(i, j), 1.0},
                         {layout.inventory(i, j), 1.0},
                         {layout.salvaged(i, j), 1.0},
                         {layout.in_use(i - 1, j - 1), -1.0},
                         {layout.inventory(i - 1, j - 1), -1.0}},
                        Relation::equal, 0.0});
  // forced retirement at maximum age
  for (int j = 1; j < m; ++j)
    p.add_constraint({fmt::format("retire_{}", j), "13",
                      {{layout.salvaged(n, j), 1.0},
                       {layout.in_use(n - 1, j - 1), -1.0},
                       {layout.inventory(n - 1, j - 1), -1.0}},
                      Relation::equal, 0.0});
  // terminal salvage
  for (int i = 1; i <= n; ++i)
    p.add_constraint({fmt::format("terminal_{}", i), "14",
                      {{layout.salvaged(i, m), 1.0},
                       {layout.in_use(i - 1, m - 1), -1.0},
                       {layout.inventory(i - 1, m - 1), -1.0}},
                      Relation::equal, 0.0});
  // purchases enter at age 0
  for (int j = 1; j < m; ++j)
    p.add_constraint({fmt::format("assign_{}", j), "15",
                      {{layout.in_use(0, j), 1.0}, {layout.inventory(0, j), 1.0}, {layout.purchases(j), -1.0}},
                      Relation::equal, 0.0});
  // purchase indicator link
  for (int j = 0; j < m; ++j)
    p.add_constraint({fmt::format("fixed_{}", j), "16",
                      {{layout.purchases(j), 1.0},
                       {layout.purchase_flag(j), -static_cast<double>(big_m[static_cast<std::size_t>(j)])}},
                      Relation::less_equal, 0.0});
  return p;
}

std::vector<double> to_values(const PlanningInstance& inst, const Schedule& s)
{
  const VariableLayout layout(inst);
  std::vector<double> x(static_cast<std::size_t>(layout.size()), 0.0);
  for (int j = 0; j < inst.periods; ++j)
  {
    x[static_cast<std::size_t>(layout.purchases(j))] = static_cast<double>(s.purchases[static_cast<std::size_t>(j)]);
    x[static_cast<std::size_t>(layout.purchase_flag(j))] =
      static_cast<double>(s.purchase_flag[static_cast<std::size_t>(j)]);
  }
  for (int i = 0; i < inst.max_age; ++i)
    for (int j = 0; j < inst.periods; ++j)
    {
      x[static_cast<std::size_t>(layout.in_use(i, j))] = static_cast<double>(s.in_use(i, j));
      x[static_cast<std::size_t>(layout.inventory(i, j))] = static_cast<double>(s.inventory(i, j));
    }
  for (int i = 1; i <= inst.max_age; ++i)
    for (int j = 1; j <= inst.periods; ++j)
      x[static_cast<std::size_t>(layout.salvaged(i, j))] = static_cast<double>(s.salvaged(i, j));
  return x;
}

Schedule from_values(const PlanningInstance& inst, const std::vector<double>& x)
{
  const VariableLayout layout(inst);
  if (static_cast<int>(x.size()) != layout.size())
    throw InputError("from_values: value vector does not match the instance layout");
  auto count = [&](int col) { return static_cast<std::int64_t>(std::llround(x[static_cast<std::size_t>(col)])); };
  Schedule s = Schedule::empty_for(inst);
  for (int j = 0; j < inst.periods; ++j)
  {
    s.purchases[static_cast<std::size_t>(j)] = count(layout.purchases(j));
    s.purchase_flag[static_cast<std::size_t>(j)] = count(layout.purchase_flag(j));
  }
  for (int i = 0; i < inst.max_age; ++i)
    for (int j = 0; j < inst.periods; ++j)
    {
      s.in_use(i, j) = count(layout.in_use(i, j));
      s.inventory(i, j) = count(layout.inventory(i, j));
    }
  for (int i = 1; i <= inst.max_age; ++i)
    for (int j = 1; j <= inst.periods; ++j)
      s.salvaged(i, j) = count(layout.salvaged(i, j));
  return s;
}

namespace {

void require_complete(const PlanningInstance& inst, const Schedule& s)
{
  const int n = inst.max_age;
  const int m = inst.periods;
  auto box = [](const auto& t, int a0, int a1, int t0, int t1) {
    return t.first_age() == a0 && t.last_age() == a1 && t.first_time() == t0 && t.last_time() == t1;
  };
  if (s.purchases.size() != static_cast<std::size_t>(m) || s.purchase_flag.size() != static_cast<std::size_t>(m) ||
      !box(s.in_use, 0, n - 1, 0, m - 1) || !box(s.inventory, 0, n - 1, 0, m - 1) ||
      !box(s.salvaged, 1, n, 1, m))
    throw InputError("schedule does not cover the instance index ranges");
}

} // namespace

CostBreakdown cost_breakdown(const PlanningInstance& inst, const Schedule& s)
{
  require_complete(inst, s);
  CostBreakdown c;
  for (int j = 0; j < inst.periods; ++j)
  {
    const auto uj = static_cast<std::size_t>(j);
    c.purchase += inst.purchase_cost[uj] * static_cast<double>(s.purchases[uj]);
    c.fixed += inst.fixed_cost[uj] * static_cast<double>(s.purchase_flag[uj]);
    for (int i = 0; i < inst.max_age; ++i)
    {
      c.om += inst.om_cost[uj] * static_cast<double>(s.in_use(i, j));
      c.inventory += inst.inventory_cost[uj] * static_cast<double>(s.inventory(i, j));
    }
  }
  for (int i = 1; i <= inst.max_age; ++i)
    for (int j = 1; j <= inst.periods; ++j)
      c.salvage += inst.salvage_revenue(i, j) * static_cast<double>(s.salvaged(i, j));
  return c;
}

double evaluate_cost(const PlanningInstance& inst, const Schedule& s) { return cost_breakdown(inst, s).total(); }

std::vector<Violation> check_feasibility(const PlanningInstance& inst, const Schedule& s)
{
  require_complete(inst, s);
  const int n = inst.max_age;
  const int m = inst.periods;
  std::vector<Violation> out;
  auto flag_equal = [&](const char* id, int i, int j, std::int64_t lhs, std::int64_t rhs) {
    if (lhs != rhs)
      out.push_back({id, i, j, static_cast<double>(lhs - rhs)});
  };

  // demand
  for (int j = 0; j < m; ++j)
  {
    double supplied = 0.0;
    for (int i = 0; i < n; ++i)
      supplied += inst.effective_capacity(i) * static_cast<double>(s.in_use(i, j));
    const double d = inst.demand[static_cast<std::size_t>(j)];
    if (supplied < d - demand_tolerance * std::max(1.0, d))
      out.push_back({"9", -1, j, supplied - d});
  }
  for (int i = 1; i < n; ++i)
    flag_equal("10", i, 0, s.in_use(i, 0) + s.inventory(i, 0), inst.initial_assets[static_cast<std::size_t>(i)]);
  flag_equal("11", 0, 0, s.in_use(0, 0) + s.inventory(0, 0) - s.purchases[0], inst.initial_assets[0]);
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < m; ++j)
      flag_equal("12", i, j, s.in_use(i, j) + s.inventory(i, j) + s.salvaged(i, j),
                 s.in_use(i - 1, j - 1) + s.inventory(i - 1, j - 1));
  for (int j = 1; j < m; ++j)
    flag_equal("13", n, j, s.salvaged(n, j), s.in_use(n - 1, j - 1) + s.inventory(n - 1, j - 1));
  for (int i = 1; i <= n; ++i)
    flag_equal("14", i, m, s.salvaged(i, m), s.in_use(i - 1, m - 1) + s.inventory(i - 1, m - 1));
  for (int j = 1; j < m; ++j)
    flag_equal("15", 0, j, s.in_use(0, j) + s.inventory(0, j), s.purchases[static_cast<std::size_t>(j)]);
  for (int j = 0; j < m; ++j)
  {
    const auto uj = static_cast<std::size_t>(j);
    const std::int64_t bound = purchase_bound(inst, j) * s.purchase_flag[uj];
    if (s.purchases[uj] > bound)
      out.push_back({"16", -1, j, static_cast<double>(bound - s.purchases[uj])});
  }
  // integrality ranges
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
    {
      if (s.in_use(i, j) < 0)
        out.push_back({"17", i, j, static_cast<double>(s.in_use(i, j))});
      if (s.inventory(i, j) < 0)
        out.push_back({"17", i, j, static_cast<double>(s.inventory(i, j))});
    }
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= m; ++j)
      if (s.salvaged(i, j) < 0)
        out.push_back({"18", i, j, static_cast<double>(s.salvaged(i, j))});
  for (int j = 0; j < m; ++j)
  {
    const auto uj = static_cast<std::size_t>(j);
    if (s.purchases[uj] < 0)
      out.push_back({"19", -1, j, static_cast<double>(s.purchases[uj])});
    if (s.purchase_flag[uj] != 0 && s.purchase_flag[uj] != 1)
      out.push_back({"20", -1, j, static_cast<double>(s.purchase_flag[uj])});
  }
  return out;
}

Schedule heuristic_schedule(const PlanningInstance& inst)
{
  inst.validate();
  const int n = inst.max_age;
  const int m = inst.periods;
  Schedule s = Schedule::empty_for(inst);

  // cohort[i]: assets of age i available at the start of the current period
  std::vector<std::int64_t> cohort(inst.initial_assets.begin(), inst.initial_assets.end());
  for (int j = 0; j < m; ++j)
  {
    double supplied = 0.0;
    for (int i = 0; i < n; ++i)
      supplied += inst.effective_capacity(i) * static_cast<double>(cohort[static_cast<std::size_t>(i)]);
    const double d = inst.demand[static_cast<std::size_t>(j)];
    const double shortfall = d - supplied;
    std::int64_t buy = 0;
    if (shortfall > demand_tolerance * std::max(1.0, d))
    {
      const double fresh = inst.effective_capacity(0);
      if (fresh <= 0.0)
        throw InfeasibleModelError(fmt::format("period {}: new assets deliver no capacity", j));
      buy = ceil_count(shortfall / fresh);
    }
    s.purchases[static_cast<std::size_t>(j)] = buy;
    s.purchase_flag[static_cast<std::size_t>(j)] = buy > 0 ? 1 : 0;
    cohort[0] += buy;
    for (int i = 0; i < n; ++i)
      s.in_use(i, j) = cohort[static_cast<std::size_t>(i)];

    // age by one period; the oldest cohort leaves the fleet
    if (j + 1 < m)
    {
      s.salvaged(n, j + 1) = cohort[static_cast<std::size_t>(n - 1)];
      for (int i = n - 1; i > 0; --i)
        cohort[static_cast<std::size_t>(i)] = cohort[static_cast<std::size_t>(i - 1)];
      cohort[0] = 0;
    }
    else
    {
      for (int i = 1; i <= n; ++i)
        s.salvaged(i, m) = cohort[static_cast<std::size_t>(i - 1)];
    }
  }
  return s;
}

} // namespace batfleet::planner
