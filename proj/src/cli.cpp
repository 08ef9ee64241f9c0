#include "batfleet/cli.hpp"

#include "batfleet/degradation.hpp"
#include "batfleet/demand.hpp"
#include "batfleet/errors.hpp"
#include "batfleet/fleet_solver.hpp"
#include "batfleet/planner.hpp"
#include "batfleet/studies.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace batfleet::cli {

namespace fs = std::filesystem;

namespace {

// key, default ("" = unset)
const std::vector<std::pair<std::string, std::string>>& defaults_table()
{
  static const std::vector<std::pair<std::string, std::string>> table = {
    // degradation
    {"chemistry", "LFP"},
    {"chemistry_file", ""},
    {"kappa_delta", ""},
    {"calibrate", "false"},
    {"anchor_temp_c", "25"},
    {"anchor_dod_pct", "90"},
    {"anchor_c_rate", "0.5"},
    {"anchor_cycles", "2780"},
    {"eol", "0.75"},
    {"cycles_per_day", "3"},
    {"months_per_period", "3"},
    {"temps_c", "25,40,55"},
    {"dods_pct", "90,50,10"},
    {"c_rates", "0.5,1,3"},
    {"temp_c", "25"},
    {"dod_pct", "90"},
    {"c_rate", "0.5"},
    // planning instance
    {"instance", "model"},
    {"seed", "0"},
    {"periods", "20"},
    {"usage_rate", "0.8"},
    {"unit_capacity", "8100"},
    {"P0", "250"},
    {"K0", "40"},
    {"C0", "10"},
    {"H0", "10"},
    {"R11", "20"},
    {"inflation", "0.0024"},
    {"salvage_decay", "linear"},
    {"N0", "120"},
    {"initial_assets", ""},
    {"lifetime", "3"},
    {"scenario", ""},
    {"loss_fraction", ""},
    {"demand", ""},
    {"demand_file", ""},
    {"demand_scale", "0.001"},
    {"demand_start", ""},
    // solver
    {"gap", "0.001"},
    {"node_limit", "200000"},
    {"time_limit", "0"},
    {"write_mps", "false"},
    {"solver", "milp"},
    {"purchase_cap", ""},
    // studies
    {"sweep", "usage_rate"},
    {"grid", ""},
    {"lifetimes", "3,4,8,9,10"},
    {"windows", ""},
  };
  return table;
}

bool is_set(const KeyValues& kv, const std::string& key)
{
  auto v = kv.get(key);
  return v && !v->empty();
}

int as_int(const KeyValues& kv, const std::string& key, std::int64_t lo, std::int64_t hi)
{
  const auto v = kv.get_int(key, 0);
  if (v < lo || v > hi)
    throw InputError(fmt::format("{} = {} outside [{}, {}]", key, v, lo, hi));
  return static_cast<int>(v);
}

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// --- degradation inputs ------------------------------------------------------

degradation::ChemistryParams chemistry_from(const KeyValues& kv)
{
  degradation::ChemistryParams chem;
  if (is_set(kv, "chemistry_file"))
    chem = degradation::load_chemistry_file(*kv.get("chemistry_file"));
  else
  {
    const std::string name = kv.get_string("chemistry", "LFP");
    auto builtin = degradation::builtin_chemistry(name);
    if (!builtin)
    {
      std::string known;
      for (const auto& n : degradation::builtin_chemistry_names())
        known += (known.empty() ? "" : ", ") + n;
      throw InputError(fmt::format("unknown chemistry '{}' (known: {})", name, known));
    }
    chem = *builtin;
  }
  if (is_set(kv, "kappa_delta"))
    chem.kappa_delta = kv.get_double("kappa_delta", chem.kappa_delta);
  chem.validate();
  return chem;
}

double eol_from(const KeyValues& kv)
{
  const double eol = kv.get_double("eol", 0.75);
  if (!(eol > 0.0 && eol < 1.0))
    throw InputError("eol must lie in (0, 1)");
  return eol;
}

double cycles_per_day_from(const KeyValues& kv)
{
  const double c = kv.get_double("cycles_per_day", 3.0);
  if (!(c > 0.0) || !std::isfinite(c))
    throw InputError("cycles_per_day must be positive");
  return c;
}

/// Applies `calibrate` to the chemistry when requested.
degradation::ChemistryParams calibrated(const KeyValues& kv, degradation::ChemistryParams chem, std::ostream& out)
{
  if (!kv.get_bool("calibrate", false))
    return chem;
  const auto anchor = degradation::OperatingCondition::from_celsius(
    kv.get_double("anchor_temp_c", 25.0), kv.get_double("anchor_dod_pct", 90.0) / 100.0,
    kv.get_double("anchor_c_rate", 0.5), cycles_per_day_from(kv));
  anchor.validate();
  chem.kappa_delta = degradation::calibrate_kappa(chem, anchor, kv.get_int("anchor_cycles", 2780), eol_from(kv));
  fmt::print(out, "calibrated kappa_delta = {:.13e}\n", chem.kappa_delta);
  return chem;
}

// --- planning inputs ---------------------------------------------------------

planner::CostBase costs_from(const KeyValues& kv)
{
  planner::CostBase c;
  c.purchase = kv.get_double("P0", c.purchase);
  c.fixed = kv.get_double("K0", c.fixed);
  c.om = kv.get_double("C0", c.om);
  c.inventory = kv.get_double("H0", c.inventory);
  c.salvage = kv.get_double("R11", c.salvage);
  c.rate = kv.get_double("inflation", c.rate);
  return c;
}

planner::SalvageDecay decay_from(const KeyValues& kv)
{
  const std::string d = lower(kv.get_string("salvage_decay", "linear"));
  if (d == "linear")
    return planner::SalvageDecay::linear;
  if (d == "constant")
    return planner::SalvageDecay::constant;
  throw InputError(fmt::format("salvage_decay must be linear or constant, not '{}'", d));
}

/// Quarterly (or monthly) series the instance draws its demand from.
demand::DemandSeries demand_series_from(const KeyValues& kv)
{
  const double scale = kv.get_double("demand_scale", demand::raw_sales_scale);
  const int mpp = as_int(kv, "months_per_period", 1, 120);
  demand::DemandSeries raw;
  if (is_set(kv, "demand_file"))
    raw = demand::load_demand(*kv.get("demand_file"), scale);
  else
  {
    if (!(scale > 0.0))
      throw InputError("demand_scale must be positive");
    raw = demand::synthetic_monthly_series();
    for (auto& v : raw.values)
      v *= scale;
    raw.scale_factor = scale;
  }
  if (raw.granularity == demand::Granularity::quarterly)
  {
    if (mpp != 3)
      throw InputError("a quarterly demand file needs months_per_period = 3");
    return raw;
  }
  if (mpp == 3)
    return raw.to_quarterly();
  if (mpp == 1)
    return raw;
  throw InputError("monthly demand supports months_per_period 1 or 3 only");
}

std::vector<double> demand_window_from(const KeyValues& kv, int periods)
{
  if (is_set(kv, "demand"))
  {
    auto d = kv.get_doubles("demand", {});
    if (static_cast<int>(d.size()) < periods)
      throw InputError(fmt::format("demand lists {} values for {} periods", d.size(), periods));
    d.resize(static_cast<std::size_t>(periods));
    return d;
  }
  const auto series = demand_series_from(kv);
  if (static_cast<int>(series.size()) < periods)
    throw InputError(fmt::format("demand series has {} periods, the horizon needs {}", series.size(), periods));
  const std::size_t first = is_set(kv, "demand_start") ? series.index_of(*kv.get("demand_start"))
                                                       : series.size() - static_cast<std::size_t>(periods);
  return series.window(first, static_cast<std::size_t>(periods)).values;
}

bool data_mode(const KeyValues& kv) { return is_set(kv, "loss_fraction"); }

studies::AgingSource aging_from(const KeyValues& kv, std::ostream& out)
{
  if (data_mode(kv))
    return studies::AgingSource::fixed(kv.get_doubles("loss_fraction", {}));
  const auto chem = calibrated(kv, chemistry_from(kv), out);
  const int mpp = as_int(kv, "months_per_period", 1, 120);
  if (is_set(kv, "scenario"))
  {
    const int id = as_int(kv, "scenario", 1, 27);
    studies::AgingSource s;
    s.profile = degradation::aging_profile(
      degradation::condition_for(degradation::standard_scenario_grid()[static_cast<std::size_t>(id - 1)],
                                 cycles_per_day_from(kv)),
      chem, eol_from(kv), mpp);
    s.label = fmt::format("L{}", s.profile.lifetime_periods);
    return s;
  }
  const int lifetime = as_int(kv, "lifetime", 1, 1000);
  const int wanted[] = {lifetime};
  auto curves = studies::physics_lifetime_curves(chem, wanted, eol_from(kv), mpp, cycles_per_day_from(kv));
  return curves.front();
}

std::vector<studies::AgingSource> lifetime_curves_from(const KeyValues& kv, std::ostream& out)
{
  if (data_mode(kv))
    throw InputError("lifetime curves need the physics model; unset loss_fraction");
  std::vector<int> lifetimes;
  for (auto l : kv.get_ints("lifetimes", {}))
  {
    if (l < 1 || l > 1000)
      throw InputError(fmt::format("lifetime {} outside [1, 1000]", l));
    lifetimes.push_back(static_cast<int>(l));
  }
  if (lifetimes.empty())
    throw InputError("lifetimes is empty");
  const auto chem = calibrated(kv, chemistry_from(kv), out);
  return studies::physics_lifetime_curves(chem, lifetimes, eol_from(kv), as_int(kv, "months_per_period", 1, 120),
                                          cycles_per_day_from(kv));
}

studies::BaseCase base_case_from(const KeyValues& kv, std::ostream& out, bool with_aging = true)
{
  studies::BaseCase b;
  b.costs = costs_from(kv);
  b.salvage_decay = decay_from(kv);
  b.periods = as_int(kv, "periods", 1, 10000);
  b.usage_rate = kv.get_double("usage_rate", b.usage_rate);
  b.unit_capacity = kv.get_double("unit_capacity", b.unit_capacity);
  b.initial_new_assets = kv.get_int("N0", b.initial_new_assets);
  if (is_set(kv, "initial_assets"))
    b.initial_assets = kv.get_ints("initial_assets", {});
  b.demand = demand_window_from(kv, b.periods);
  if (with_aging)
    b.aging = aging_from(kv, out);
  return b;
}

planner::PlanningInstance instance_from(const KeyValues& kv, std::ostream& out)
{
  const std::string kind = lower(kv.get_string("instance", "model"));
  if (kind == "random_tiny")
  {
    const auto seed = kv.get_int("seed", 0);
    if (seed < 0)
      throw InputError("seed must be non-negative");
    return solver::random_tiny_instance(static_cast<std::uint64_t>(seed));
  }
  if (kind != "model")
    throw InputError(fmt::format("instance must be model or random_tiny, not '{}'", kind));
  return studies::make_instance(base_case_from(kv, out));
}

solver::MilpOptions milp_from(const KeyValues& kv)
{
  solver::MilpOptions o;
  o.gap = kv.get_double("gap", 1e-3);
  if (!(o.gap >= 0.0) || !std::isfinite(o.gap))
    throw InputError("gap must be a non-negative number");
  o.node_limit = kv.get_int("node_limit", o.node_limit);
  if (o.node_limit < 1)
    throw InputError("node_limit must be positive");
  o.time_limit = kv.get_double("time_limit", 0.0);
  if (!(o.time_limit >= 0.0))
    throw InputError("time_limit must be non-negative");
  return o;
}

// --- output helpers ----------------------------------------------------------

std::ofstream open_out(const fs::path& dir, const std::string& name)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  std::ofstream f(dir / name, std::ios::binary);
  if (!f)
    throw Error(fmt::format("cannot write {}", (dir / name).string()));
  return f;
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

void audit(const planner::PlanningInstance& in, const planner::Schedule& s, const std::string& what)
{
  const auto violations = planner::check_feasibility(in, s);
  if (!violations.empty())
  {
    const auto& v = violations.front();
    throw SolverError(fmt::format("{}: emitted schedule violates constraint {} (age {}, time {}, slack {:g})", what,
                                  v.constraint, v.age, v.time, v.slack));
  }
}

bool limit_status(const std::string& status) { return status == "feasible_gap" || status == "node_limit"; }

// --- commands ----------------------------------------------------------------

int cmd_prognosis(const KeyValues& kv, const fs::path& out_dir, std::ostream& out)
{
  auto chem = chemistry_from(kv);
  const double eol = eol_from(kv);
  const double cpd = cycles_per_day_from(kv);
  const auto temps = kv.get_doubles("temps_c", {});
  const auto dods = kv.get_doubles("dods_pct", {});
  const auto rates = kv.get_doubles("c_rates", {});
  if (temps.empty() || dods.empty() || rates.empty())
    throw InputError("temps_c, dods_pct and c_rates must each list at least one value");
  std::vector<degradation::Scenario> grid;
  for (double r : rates)
    for (double d : dods)
      for (double t : temps)
        grid.push_back({static_cast<int>(grid.size()) + 1, t, d, r});
  for (const auto& s : grid)
    degradation::condition_for(s, cpd).validate();
  chem = calibrated(kv, chem, out);

  std::vector<degradation::LifetimeResult> lives;
  for (const auto& s : grid)
    lives.push_back(degradation::predict_cycle_life(degradation::condition_for(s, cpd), chem, eol));

  auto f = open_out(out_dir, "prognosis.csv");
  f << "scenario,temp_c,dod_pct,c_rate,cycles,months\n";
  for (std::size_t k = 0; k < grid.size(); ++k)
    f << fmt::format("{},{:g},{:g},{:g},{},{}\n", grid[k].id, grid[k].temp_c, grid[k].dod_pct, grid[k].c_rate,
                     lives[k].cycles, lives[k].months);
  fmt::print(out, "{} scenarios -> {}\n", grid.size(), (out_dir / "prognosis.csv").string());
  return exit_ok;
}

int cmd_degrade(const KeyValues& kv, const fs::path& out_dir, std::ostream& out)
{
  const auto chem = calibrated(kv, chemistry_from(kv), out);
  const auto cond = degradation::OperatingCondition::from_celsius(
    kv.get_double("temp_c", 25.0), kv.get_double("dod_pct", 90.0) / 100.0, kv.get_double("c_rate", 0.5),
    cycles_per_day_from(kv));
  cond.validate();
  const int mpp = as_int(kv, "months_per_period", 1, 120);
  const double u = kv.get_double("usage_rate", 0.8);
  if (!(u >= 0.0 && u <= 1.0))
    throw InputError("usage_rate must lie in [0, 1]");
  const auto profile = degradation::aging_profile(cond, chem, eol_from(kv), mpp);
  const int horizon = profile.lifetime_periods * mpp;
  const auto used = degradation::degradation_fractions(cond, chem, horizon);
  const auto idle = degradation::calendar_fractions(cond, chem, horizon);
  const auto blended = profile.blend(u);

  {
    auto f = open_out(out_dir, "degradation.csv");
    f << "month,usage_remaining,idle_remaining\n";
    for (int k = 0; k < horizon; ++k)
      f << fmt::format("{},{},{}\n", k + 1, num(used.monthly_fraction[static_cast<std::size_t>(k)]),
                       num(idle.monthly_fraction[static_cast<std::size_t>(k)]));
  }
  {
    auto f = open_out(out_dir, "aging_index.csv");
    f << "age,v_usage,v_idle,v\n";
    for (std::size_t i = 0; i < blended.size(); ++i)
      f << fmt::format("{},{},{},{}\n", i, num(profile.usage_loss[i]), num(profile.idle_loss[i]), num(blended[i]));
  }
  fmt::print(out, "cycle life {} cycles, {} months, {} periods ({})\n", profile.life.cycles, profile.life.months,
             profile.lifetime_periods, degradation::to_string(profile.life.limiting_mechanism));
  return exit_ok;
}

void write_schedule(std::ostream& f, const planner::PlanningInstance& in, const planner::Schedule& s)
{
  f << "variable,i,j,value\n";
  for (int j = 0; j < in.periods; ++j)
    f << fmt::format("B,,{},{}\n", j, s.purchases[static_cast<std::size_t>(j)]);
  for (int j = 0; j < in.periods; ++j)
    f << fmt::format("Z,,{},{}\n", j, s.purchase_flag[static_cast<std::size_t>(j)]);
  for (int i = 0; i < in.max_age; ++i)
    for (int j = 0; j < in.periods; ++j)
      f << fmt::format("X,{},{},{}\n", i, j, s.in_use(i, j));
  for (int i = 0; i < in.max_age; ++i)
    for (int j = 0; j < in.periods; ++j)
      f << fmt::format("I,{},{},{}\n", i, j, s.inventory(i, j));
  for (int i = 1; i <= in.max_age; ++i)
    for (int j = 1; j <= in.periods; ++j)
      f << fmt::format("S,{},{},{}\n", i, j, s.salvaged(i, j));
}

int cmd_plan(const KeyValues& kv, const fs::path& out_dir, std::ostream& out)
{
  const auto options = milp_from(kv);
  const bool mps = kv.get_bool("write_mps", false);
  const auto in = instance_from(kv, out);
  if (mps)
  {
    auto f = open_out(out_dir, "model.mps");
    solver::write_mps(f, planner::build_milp(in));
  }
  const std::string method = lower(kv.get_string("solver", "milp"));
  solver::PlanResult plan;
  if (method == "brute_force")
  {
    solver::BruteForceCaps caps;
    if (is_set(kv, "purchase_cap"))
    {
      const auto cap = kv.get_int("purchase_cap", 0);
      if (cap < 0)
        throw InputError("purchase_cap must be non-negative");
      caps.max_purchases.assign(static_cast<std::size_t>(in.periods), cap);
    }
    plan.milp = solver::brute_force(in, caps);
    if (!plan.milp.has_incumbent())
      throw InfeasibleModelError(
        is_set(kv, "purchase_cap")
          ? fmt::format("demand (constraint 9) cannot be met with at most {} purchases per time point",
                        kv.get_int("purchase_cap", 0))
          : std::string("no integral schedule meets demand (constraint 9)"));
    plan.schedule = planner::from_values(in, plan.milp.incumbent);
    plan.objective = planner::evaluate_cost(in, *plan.schedule);
  }
  else if (method == "milp")
  {
    plan = solver::solve_plan(in, options);
    if (!plan.schedule)
    {
      if (plan.milp.status == solver::MilpStatus::infeasible)
        throw InfeasibleModelError("no integral schedule meets every period's demand (constraint 9)");
      throw SolverError(fmt::format("solver stopped ({}) without an incumbent", solver::to_string(plan.milp.status)));
    }
  }
  else
    throw InputError(fmt::format("solver must be milp or brute_force, not '{}'", method));
  const std::string status(solver::to_string(plan.milp.status));
  const auto& s = *plan.schedule;
  const auto violations = planner::check_feasibility(in, s);
  const auto cost = planner::cost_breakdown(in, s);

  {
    auto f = open_out(out_dir, "schedule.csv");
    write_schedule(f, in, s);
  }
  {
    auto f = open_out(out_dir, "summary.csv");
    f << "item,value\n";
    f << "status," << status << '\n';
    f << "purchase," << studies::format_currency(cost.purchase) << '\n';
    f << "fixed," << studies::format_currency(cost.fixed) << '\n';
    f << "om," << studies::format_currency(cost.om) << '\n';
    f << "inventory," << studies::format_currency(cost.inventory) << '\n';
    f << "salvage_revenue," << studies::format_currency(cost.salvage) << '\n';
    f << "total," << studies::format_currency(cost.total()) << '\n';
    f << "best_bound," << studies::format_currency(plan.milp.best_bound) << '\n';
    f << "relative_gap," << num(plan.milp.relative_gap()) << '\n';
    f << "nodes," << plan.milp.nodes_explored << '\n';
    f << "max_age," << in.max_age << '\n';
    f << "periods," << in.periods << '\n';
    f << "average_salvage_age," << fmt::format("{:.2f}", studies::average_salvage_age(in, s)) << '\n';
  }
  {
    auto f = open_out(out_dir, "feasibility.csv");
    f << "constraint,age,time,slack\n";
    for (const auto& v : violations)
      f << fmt::format("{},{},{},{}\n", v.constraint, v.age, v.time, num(v.slack));
  }
  fmt::print(out, "status {} total cost {} (bound {}, {} nodes)\n", status, studies::format_currency(cost.total()),
             studies::format_currency(plan.milp.best_bound), plan.milp.nodes_explored);
  if (!violations.empty())
    throw SolverError(fmt::format("schedule fails the feasibility audit at constraint {}", violations.front().constraint));
  return plan.milp.status == solver::MilpStatus::optimal ? exit_ok : exit_limit;
}

int finish_points(const studies::SweepResult& r, std::ostream& out)
{
  bool any_limit = false, all_infeasible = !r.points.empty();
  for (const auto& p : r.points)
  {
    if (p.schedule && p.instance)
      audit(*p.instance, *p.schedule, fmt::format("{} {}", r.name, p.label));
    any_limit = any_limit || limit_status(p.status);
    all_infeasible = all_infeasible && p.status == "infeasible";
    fmt::print(out, "{} {} {}: status {}, optimal {}, heuristic {}\n", r.name, p.series, p.label, p.status,
               studies::format_currency(p.optimal_cost), studies::format_currency(p.heuristic_cost));
  }
  if (all_infeasible)
    return exit_infeasible;
  return any_limit ? exit_limit : exit_ok;
}

std::vector<double> grid_from(const KeyValues& kv, std::vector<double> fallback)
{
  auto g = kv.get_doubles("grid", fallback);
  if (g.empty())
    g = std::move(fallback);
  return g;
}

int cmd_sweep(const KeyValues& kv, const fs::path& out_dir, std::ostream& out)
{
  const std::string kind = lower(kv.get_string("sweep", "usage_rate"));
  studies::SweepOptions opts;
  opts.milp = milp_from(kv);
  if (lower(kv.get_string("instance", "model")) != "model")
    throw InputError("sweeps run on the model instance only");

  studies::SweepResult r;
  if (kind == "usage_rate")
  {
    const auto grid = grid_from(kv, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
    r = studies::sweep_usage_rate(base_case_from(kv, out), grid, opts);
  }
  else if (kind == "unit_capacity")
  {
    std::vector<double> fallback;
    for (double a = 3600.0; a <= 18000.0; a += 1800.0)
      fallback.push_back(a);
    const auto grid = grid_from(kv, fallback);
    r = studies::sweep_unit_capacity(base_case_from(kv, out), grid, opts);
  }
  else if (kind == "lifetime")
  {
    const auto curves = lifetime_curves_from(kv, out);
    r = studies::sweep_lifetime(base_case_from(kv, out, false), curves, opts);
  }
  else if (kind == "demand_window")
  {
    if (is_set(kv, "demand"))
      throw InputError("demand_window sweeps read a demand series; unset demand");
    const auto base = base_case_from(kv, out, false);
    const auto series = demand_series_from(kv);
    std::vector<std::size_t> starts;
    if (is_set(kv, "windows"))
    {
      std::stringstream list(*kv.get("windows"));
      std::string label;
      while (std::getline(list, label, ','))
      {
        label.erase(0, label.find_first_not_of(" \t"));
        label.erase(label.find_last_not_of(" \t") + 1);
        if (!label.empty())
          starts.push_back(series.index_of(label));
      }
    }
    else
      starts = studies::default_window_starts(series.size(), static_cast<std::size_t>(base.periods));
    std::vector<studies::AgingSource> curves;
    if (data_mode(kv))
      curves.push_back(aging_from(kv, out));
    else
      curves = lifetime_curves_from(kv, out);
    r = studies::sweep_demand_windows(base, series, starts, curves, opts);
  }
  else
    throw InputError(fmt::format("sweep must be usage_rate, unit_capacity, lifetime or demand_window, not '{}'",
                                 kind));
  const int code = finish_points(r, out);
  for (const auto& path : studies::emit_report(r, out_dir))
    fmt::print(out, "wrote {}\n", path.string());
  return code;
}

int cmd_compare(const KeyValues& kv, const fs::path& out_dir, std::ostream& out)
{
  studies::SweepOptions opts;
  opts.milp = milp_from(kv);
  studies::SweepResult r;
  const std::string kind = lower(kv.get_string("instance", "model"));
  if (kind == "model" && !data_mode(kv))
  {
    const auto curves = lifetime_curves_from(kv, out);
    r = studies::sweep_lifetime(base_case_from(kv, out, false), curves, opts);
  }
  else
  {
    const auto in = instance_from(kv, out);
    auto p = studies::solve_point(in, opts);
    p.series = fmt::format("L{}", in.max_age);
    p.parameter = in.max_age;
    p.label = p.series;
    r = {"compare", "lifetime_periods", {std::move(p)}};
  }
  const int code = finish_points(r, out);
  auto f = open_out(out_dir, "comparison.csv");
  studies::write_comparison_csv(f, r);
  fmt::print(out, "wrote {}\n", (out_dir / "comparison.csv").string());
  return code;
}

} // namespace

KeyValues default_config()
{
  KeyValues kv;
  for (const auto& [k, v] : defaults_table())
    kv.set(k, v);
  return kv;
}

const std::vector<std::string>& known_keys()
{
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& entry : defaults_table())
      k.push_back(entry.first);
    return k;
  }();
  return keys;
}

KeyValues resolve_config(const std::string& config_path, const std::vector<std::string>& overrides)
{
  const auto& keys = known_keys();
  auto check = [&](const KeyValues& kv, const std::string& where) {
    for (const auto& [k, v] : kv.entries())
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        throw InputError(fmt::format("{}: unknown key '{}'", where, k));
  };
  KeyValues kv = default_config();
  if (!config_path.empty())
  {
    const auto file = KeyValues::load(config_path);
    check(file, config_path);
    kv.merge(file);
  }
  KeyValues cmdline;
  for (const auto& token : overrides)
    cmdline.assign(token);
  check(cmdline, "--set");
  kv.merge(cmdline);
  return kv;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Battery fleet degradation and replacement planning", "batfleet"};
  std::string command, config_path, demand_path, out_dir = "out";
  std::vector<std::string> overrides;
  std::optional<double> gap;
  std::optional<std::int64_t> seed;
  app.add_option("command", command, "prognosis | degrade | plan | sweep | compare")
    ->required()
    ->check(CLI::IsMember({"prognosis", "degrade", "plan", "sweep", "compare"}));
  app.add_option("--config", config_path, "key = value parameter file")->check(CLI::ExistingFile);
  app.add_option("--demand", demand_path, "demand CSV (period,demand_kwh)")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", overrides, "override one parameter, key=value (repeatable)");
  app.add_option("--gap", gap, "relative optimality gap");
  app.add_option("--seed", seed, "seed for random test instances");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try
  {
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp&)
  {
    out << app.help();
    return exit_ok;
  }
  catch (const CLI::ParseError& e)
  {
    fmt::print(err, "batfleet: {}\n", e.what());
    return exit_input;
  }

  try
  {
    // dedicated flags rank with --set; --set is applied last
    std::vector<std::string> tokens;
    if (!demand_path.empty())
      tokens.push_back("demand_file=" + demand_path);
    if (gap)
      tokens.push_back(fmt::format("gap={:.17g}", *gap));
    if (seed)
      tokens.push_back(fmt::format("seed={}", *seed));
    tokens.insert(tokens.end(), overrides.begin(), overrides.end());
    const KeyValues kv = resolve_config(config_path, tokens);

    if (command == "prognosis")
      return cmd_prognosis(kv, out_dir, out);
    if (command == "degrade")
      return cmd_degrade(kv, out_dir, out);
    if (command == "plan")
      return cmd_plan(kv, out_dir, out);
    if (command == "sweep")
      return cmd_sweep(kv, out_dir, out);
    return cmd_compare(kv, out_dir, out);
  }
  catch (const InputError& e)
  {
    fmt::print(err, "batfleet: input error: {}\n", e.what());
    return exit_input;
  }
  catch (const degradation::CalibrationError& e)
  {
    fmt::print(err, "batfleet: calibration failed: {} (best kappa {:.6e} -> {} cycles)\n", e.what(), e.best_kappa(),
               e.best_cycles());
    return exit_input;
  }
  catch (const InfeasibleModelError& e)
  {
    fmt::print(err, "batfleet: infeasible: {}\n", e.what());
    return exit_infeasible;
  }
  catch (const degradation::NoConvergenceError& e)
  {
    fmt::print(err, "batfleet: limit reached: {}\n", e.what());
    return exit_limit;
  }
  catch (const solver::SearchSpaceError& e)
  {
    fmt::print(err, "batfleet: limit reached: {}\n", e.what());
    return exit_limit;
  }
  catch (const std::exception& e)
  {
    fmt::print(err, "batfleet: internal error: {}\n", e.what());
    return exit_internal;
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err)
{
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k)
    args.emplace_back(argv[k]);
  return run(args, out, err);
}

} // namespace batfleet::cli
