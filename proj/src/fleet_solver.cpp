#include "batfleet/fleet_solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace batfleet::solver {

using planner::PlanningInstance;
using planner::Schedule;
using planner::VariableLayout;

namespace {

constexpr double demand_slack = 1e-7;

double demand_floor(double d) { return d - demand_slack * std::max(1.0, d); }

// Exhaustive search over every integral decision, memoised on the fleet that
// is carried into each period (the future cost depends on nothing else).
class Enumerator
{
public:
  Enumerator(const PlanningInstance& inst, const BruteForceCaps& caps)
    : in_(inst), lay_(inst), n_(inst.max_age), m_(inst.periods), budget_(caps.max_combinations)
  {
    if (caps.max_purchases.empty())
      for (int j = 0; j < m_; ++j)
        caps_.push_back(planner::purchase_bound(inst, j));
    else if (static_cast<int>(caps.max_purchases.size()) != m_)
      throw InputError("brute_force: purchase caps must have one entry per time point");
    else
      caps_ = caps.max_purchases;
    memo_.resize(static_cast<std::size_t>(m_ + 1));
    split_memo_.resize(static_cast<std::size_t>(m_));
  }

  MilpResult run()
  {
    // arrivals[i-1]: assets reaching age i at the current time point, i = 1..n
    std::vector<std::int64_t> arrivals(static_cast<std::size_t>(n_), 0);
    const double cost = future(0, arrivals);
    MilpResult r;
    r.nodes_explored = count_;
    if (!std::isfinite(cost))
    {
      r.status = MilpStatus::infeasible;
      r.best_bound = infinity;
      return r;
    }
    std::vector<double> x(static_cast<std::size_t>(lay_.size()), 0.0);
    replay(x);
    r.status = MilpStatus::optimal;
    r.incumbent = std::move(x);
    r.objective = planner::evaluate_cost(in_, planner::from_values(in_, r.incumbent));
    r.best_bound = r.objective;
    return r;
  }

private:
  using Key = std::vector<std::int64_t>;

  struct Choice
  {
    std::vector<std::int64_t> kept; // ages 1..n-1
    std::int64_t bought = 0;
  };

  struct Entry
  {
    double cost = infinity;
    Choice choice;
  };

  struct Split
  {
    double cost = infinity;
    std::vector<std::int64_t> used;
  };

  void tick()
  {
    if (++count_ > budget_)
      throw SearchSpaceError(
        fmt::format("brute_force: more than {} combinations; shrink the instance or the caps", budget_));
  }

  /// Cheapest X/I split of the held fleet that covers demand in period j.
  const Split& split(int j, const std::vector<std::int64_t>& held)
  {
    auto& memo = split_memo_[static_cast<std::size_t>(j)];
    if (auto it = memo.find(held); it != memo.end())
      return it->second;
    const auto uj = static_cast<std::size_t>(j);
    const double target = demand_floor(in_.demand[uj]);
    Split best;
    std::vector<std::int64_t> used(static_cast<std::size_t>(n_), 0);
    while (true)
    {
      tick();
      double supplied = 0.0, cost = 0.0;
      for (int i = 0; i < n_; ++i)
      {
        const auto ui = static_cast<std::size_t>(i);
        supplied += in_.effective_capacity(i) * static_cast<double>(used[ui]);
        cost += in_.om_cost[uj] * static_cast<double>(used[ui]) +
                in_.inventory_cost[uj] * static_cast<double>(held[ui] - used[ui]);
      }
      if (supplied >= target && cost < best.cost)
      {
        best.cost = cost;
        best.used = used;
      }
      int i = 0;
      while (i < n_ && used[static_cast<std::size_t>(i)] == held[static_cast<std::size_t>(i)])
        used[static_cast<std::size_t>(i++)] = 0;
      if (i == n_)
        break;
      ++used[static_cast<std::size_t>(i)];
    }
    return memo.emplace(held, std::move(best)).first->second;
  }

  double future(int j, const std::vector<std::int64_t>& arrivals)
  {
    auto& memo = memo_[static_cast<std::size_t>(j)];
    if (auto it = memo.find(arrivals); it != memo.end())
      return it->second.cost;

    Entry best;
    if (j == m_)
    {
      best.cost = 0.0;
      for (int i = 1; i <= n_; ++i)
        best.cost -= in_.salvage_revenue(i, m_) * static_cast<double>(arrivals[static_cast<std::size_t>(i - 1)]);
      memo.emplace(arrivals, best);
      return best.cost;
    }

    const auto uj = static_cast<std::size_t>(j);
    double forced = 0.0; // retirement at maximum age
    if (j > 0)
      forced = -in_.salvage_revenue(n_, j) * static_cast<double>(arrivals[static_cast<std::size_t>(n_ - 1)]);

    std::vector<std::int64_t> kept(static_cast<std::size_t>(std::max(0, n_ - 1)));
    for (int i = 1; i < n_; ++i)
      kept[static_cast<std::size_t>(i - 1)] =
        j == 0 ? in_.initial_assets[static_cast<std::size_t>(i)] : arrivals[static_cast<std::size_t>(i - 1)];

    std::vector<std::int64_t> held(static_cast<std::size_t>(n_));
    while (true)
    {
      double sold = 0.0;
      for (int i = 1; i < n_; ++i)
        if (j > 0)
          sold -= in_.salvage_revenue(i, j) *
                  static_cast<double>(arrivals[static_cast<std::size_t>(i - 1)] - kept[static_cast<std::size_t>(i - 1)]);
      const std::int64_t base = j == 0 ? in_.initial_assets[0] : 0;
      for (std::int64_t b = 0; b <= caps_[uj]; ++b)
      {
        held[0] = base + b;
        for (int i = 1; i < n_; ++i)
          held[static_cast<std::size_t>(i)] = kept[static_cast<std::size_t>(i - 1)];
        const Split& s = split(j, held);
        if (!std::isfinite(s.cost))
          continue;
        const double spend = in_.purchase_cost[uj] * static_cast<double>(b) + (b > 0 ? in_.fixed_cost[uj] : 0.0);
        const double rest = future(j + 1, held);
        const double total = forced + sold + spend + s.cost + rest;
        if (total < best.cost)
        {
          best.cost = total;
          best.choice = {kept, b};
        }
      }
      // next keep vector (counting down from "keep all"); j == 0 has no choice
      if (j == 0)
        break;
      int i = 0;
      while (i < n_ - 1 && kept[static_cast<std::size_t>(i)] == 0)
      {
        kept[static_cast<std::size_t>(i)] = arrivals[static_cast<std::size_t>(i)];
        ++i;
      }
      if (i >= n_ - 1)
        break;
      --kept[static_cast<std::size_t>(i)];
    }
    memo.emplace(arrivals, best);
    return best.cost;
  }

  void replay(std::vector<double>& x)
  {
    auto at = [&x](int column) -> double& { return x[static_cast<std::size_t>(column)]; };
    std::vector<std::int64_t> arrivals(static_cast<std::size_t>(n_), 0);
    for (int j = 0; j < m_; ++j)
    {
      const Entry& e = memo_[static_cast<std::size_t>(j)].at(arrivals);
      const std::int64_t base = j == 0 ? in_.initial_assets[0] : 0;
      std::vector<std::int64_t> held(static_cast<std::size_t>(n_));
      held[0] = base + e.choice.bought;
      for (int i = 1; i < n_; ++i)
      {
        held[static_cast<std::size_t>(i)] = e.choice.kept[static_cast<std::size_t>(i - 1)];
        if (j > 0)
          at(lay_.salvaged(i, j)) =
            static_cast<double>(arrivals[static_cast<std::size_t>(i - 1)] - e.choice.kept[static_cast<std::size_t>(i - 1)]);
      }
      if (j > 0)
        at(lay_.salvaged(n_, j)) = static_cast<double>(arrivals[static_cast<std::size_t>(n_ - 1)]);
      at(lay_.purchases(j)) = static_cast<double>(e.choice.bought);
      at(lay_.purchase_flag(j)) = e.choice.bought > 0 ? 1.0 : 0.0;
      const Split& s = split(j, held);
      for (int i = 0; i < n_; ++i)
      {
        const auto ui = static_cast<std::size_t>(i);
        at(lay_.in_use(i, j)) = static_cast<double>(s.used[ui]);
        at(lay_.inventory(i, j)) = static_cast<double>(held[ui] - s.used[ui]);
      }
      arrivals = held;
    }
    for (int i = 1; i <= n_; ++i)
      at(lay_.salvaged(i, m_)) = static_cast<double>(arrivals[static_cast<std::size_t>(i - 1)]);
  }

  const PlanningInstance& in_;
  VariableLayout lay_;
  int n_, m_;
  std::int64_t budget_;
  std::vector<std::int64_t> caps_;
  std::vector<std::map<Key, Entry>> memo_;
  std::vector<std::map<Key, Split>> split_memo_;
  std::int64_t count_ = 0;
};

std::int64_t round_up(double v, double tol = 1e-6) { return static_cast<std::int64_t>(std::ceil(v - tol)); }
std::int64_t round_near(double v) { return static_cast<std::int64_t>(std::llround(v)); }

} // namespace

MilpResult brute_force(const PlanningInstance& instance, const BruteForceCaps& caps)
{
  instance.validate();
  Enumerator e(instance, caps);
  return e.run();
}

namespace {

// one rounding pass; `drop` is how much of a fractional value may be dropped
std::optional<Schedule> repair_once(const LpSolution& lp, const PlanningInstance& inst, double drop)
{
  const VariableLayout lay(inst);
  const int n = inst.max_age;
  const int m = inst.periods;
  auto val = [&](int column) { return std::max(0.0, lp.values[static_cast<std::size_t>(column)]); };

  Schedule s = Schedule::empty_for(inst);
  for (int j = 0; j < m; ++j)
  {
    const auto uj = static_cast<std::size_t>(j);
    // assets of age >= 1 carried into this period, kept or sold
    for (int i = 1; i < n; ++i)
    {
      const std::int64_t avail = j == 0 ? inst.initial_assets[static_cast<std::size_t>(i)]
                                        : s.in_use(i - 1, j - 1) + s.inventory(i - 1, j - 1);
      std::int64_t kept = avail;
      if (j > 0)
        kept = std::min(avail, round_up(val(lay.in_use(i, j)) + val(lay.inventory(i, j)), drop));
      const std::int64_t used = std::min(kept, round_up(val(lay.in_use(i, j)), drop));
      s.in_use(i, j) = used;
      s.inventory(i, j) = kept - used;
      if (j > 0)
        s.salvaged(i, j) = avail - kept;
    }
    if (j > 0)
      s.salvaged(n, j) = s.in_use(n - 1, j - 1) + s.inventory(n - 1, j - 1);

    const std::int64_t base = j == 0 ? inst.initial_assets[0] : 0;
    std::int64_t used0 = round_up(val(lay.in_use(0, j)), drop);
    std::int64_t stored0 = round_near(val(lay.inventory(0, j)));
    if (used0 + stored0 < base)
      stored0 = base - used0;

    // cover any remaining shortfall: stored units first (youngest first), then new ones
    auto supplied = [&] {
      double total = inst.effective_capacity(0) * static_cast<double>(used0);
      for (int i = 1; i < n; ++i)
        total += inst.effective_capacity(i) * static_cast<double>(s.in_use(i, j));
      return total;
    };
    const double target = demand_floor(inst.demand[uj]);
    while (supplied() < target && stored0 > 0)
    {
      ++used0;
      --stored0;
    }
    for (int i = 1; i < n && supplied() < target; ++i)
      while (supplied() < target && s.inventory(i, j) > 0)
      {
        ++s.in_use(i, j);
        --s.inventory(i, j);
      }
    if (supplied() < target)
    {
      const double fresh = inst.effective_capacity(0);
      if (fresh <= 0.0)
        return std::nullopt;
      used0 += round_up((target - supplied()) / fresh, 0.0);
      while (supplied() < target)
        ++used0;
    }
    s.in_use(0, j) = used0;
    s.inventory(0, j) = stored0;
    s.purchases[uj] = used0 + stored0 - base;
    s.purchase_flag[uj] = s.purchases[uj] > 0 ? 1 : 0;
  }
  for (int i = 1; i <= n; ++i)
    s.salvaged(i, m) = s.in_use(i - 1, m - 1) + s.inventory(i - 1, m - 1);

  if (!planner::check_feasibility(inst, s).empty())
    return std::nullopt;
  return s;
}

} // namespace

std::optional<Schedule> round_and_repair(const LpSolution& lp, const PlanningInstance& inst)
{
  if (lp.status != LpStatus::optimal)
    return std::nullopt;
  if (static_cast<int>(lp.values.size()) != VariableLayout(inst).size())
    return std::nullopt;
  // plain round-up first; looser roundings lean on the demand repair and
  // often keep fewer idle units around
  std::optional<Schedule> best;
  double best_cost = infinity;
  for (double drop : {1e-6, 0.25, 0.5, 0.75})
    if (auto s = repair_once(lp, inst, drop))
    {
      const double cost = planner::evaluate_cost(inst, *s);
      if (cost < best_cost - 1e-9)
      {
        best_cost = cost;
        best = std::move(s);
      }
    }
  return best;
}

PlanResult solve_plan(const PlanningInstance& instance, MilpOptions options)
{
  const MilpProblem problem = planner::build_milp(instance);
  if (!options.heuristic)
    options.heuristic = [&instance](const LpSolution& lp) -> std::optional<std::vector<double>> {
      if (auto s = round_and_repair(lp, instance))
        return planner::to_values(instance, *s);
      return std::nullopt;
    };
  if (options.initial_incumbent.empty())
  {
    try
    {
      options.initial_incumbent = planner::to_values(instance, planner::heuristic_schedule(instance));
    }
    catch (const InfeasibleModelError&)
    {
    }
  }
  PlanResult out;
  out.milp = solve_milp(problem, options);
  if (out.milp.has_incumbent())
  {
    out.schedule = planner::from_values(instance, out.milp.incumbent);
    out.objective = planner::evaluate_cost(instance, *out.schedule);
  }
  return out;
}

PlanningInstance random_tiny_instance(std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  // raw engine output keeps the stream identical across standard libraries
  auto pick = [&rng](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };

  PlanningInstance inst;
  inst.max_age = pick(1, 3);
  inst.periods = pick(1, 4);
  inst.unit_capacity = 8.0;
  inst.usage_rate = 1.0;
  const int n = inst.max_age;
  const int m = inst.periods;

  // dyadic loss fractions keep every effective capacity an exact integer
  int eighths = pick(0, 1);
  for (int i = 0; i <= n; ++i)
  {
    inst.loss_fraction.push_back(eighths / 8.0);
    eighths = std::min(4, eighths + pick(0, 2));
  }
  double cheapest = infinity;
  for (int j = 0; j < m; ++j)
  {
    inst.purchase_cost.push_back(pick(5, 30));
    inst.fixed_cost.push_back(pick(0, 20));
    inst.om_cost.push_back(pick(1, 6));
    inst.inventory_cost.push_back(pick(0, 4));
    inst.demand.push_back(pick(0, static_cast<int>(3.0 * inst.effective_capacity(0))));
    cheapest = std::min(cheapest, inst.purchase_cost.back());
  }
  inst.salvage_revenue = planner::AgeTimeTable<double>(1, n, 1, m);
  for (int j = 1; j <= m; ++j)
  {
    const int fresh = pick(0, static_cast<int>(cheapest) / 2);
    for (int i = 1; i <= n; ++i)
      inst.salvage_revenue(i, j) = std::floor(fresh * static_cast<double>(n - i + 1) / n);
  }
  for (int i = 0; i < n; ++i)
    inst.initial_assets.push_back(pick(0, 2));
  inst.validate();
  return inst;
}

} // namespace batfleet::solver
