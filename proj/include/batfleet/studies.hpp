/*
 * studies.hpp
 *
 * Parametric studies on the replacement model: usage rate, unit capacity,
 * lifetime (operating condition) and demand window sweeps, plus CSV/SVG
 * reports. Every sweep copies the base case; the base is never modified.
 */
#pragma once

#include "batfleet/degradation.hpp"
#include "batfleet/demand.hpp"
#include "batfleet/fleet_solver.hpp"
#include "batfleet/planner.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace batfleet::studies {

inline constexpr double not_available = std::numeric_limits<double>::quiet_NaN();

/// Loss curves for one asset type: physics profile (blended by usage rate) or
/// a fixed v_0..v_n vector.
struct AgingSource
{
  std::string label;
  degradation::AgingProfile profile;
  std::vector<double> fixed_loss;

  int lifetime() const;
  std::vector<double> loss(double usage_rate) const;

  static AgingSource fixed(std::vector<double> v, std::string label = {});
};

/// One AgingSource per lifetime from the standard scenario grid.
std::vector<AgingSource> physics_lifetime_curves(const degradation::ChemistryParams& chemistry,
                                                 std::span<const int> lifetimes, double eol_fraction,
                                                 int months_per_period, double cycles_per_day);

struct BaseCase
{
  planner::CostBase costs;
  planner::SalvageDecay salvage_decay = planner::SalvageDecay::linear;
  int periods = 20;
  double usage_rate = 0.8;
  double unit_capacity = 8100.0;
  std::int64_t initial_new_assets = 120;
  std::vector<std::int64_t> initial_assets; // by age; overrides initial_new_assets when set
  std::vector<double> demand;               // at least `periods` values, kWh
  AgingSource aging;
};

planner::PlanningInstance make_instance(const BaseCase& base);

struct SweepPoint
{
  std::string series;
  double parameter = 0.0;
  std::string label;
  std::string status;
  double optimal_cost = not_available;
  double heuristic_cost = not_available;
  double best_bound = not_available;
  double total_demand = 0.0;
  double unit_demand_cost = not_available;
  std::int64_t nodes = 0;
  std::string note;
  std::optional<planner::PlanningInstance> instance;
  std::optional<planner::Schedule> schedule;
};

struct SweepResult
{
  std::string name;      // file stem
  std::string parameter; // column name of the swept value
  std::vector<SweepPoint> points;
};

struct SweepOptions
{
  solver::MilpOptions milp = default_milp();

  static solver::MilpOptions default_milp()
  {
    solver::MilpOptions o;
    o.gap = 1e-3;
    return o;
  }
};

/// Solves one instance; infeasibility and solver limits are recorded, not thrown.
SweepPoint solve_point(const planner::PlanningInstance& instance, const SweepOptions& options);

SweepResult sweep_usage_rate(const BaseCase& base, std::span<const double> grid, const SweepOptions& options = {});

/// P_0 and R_11 scale with a / a_base; N_0 = ceil(d_0 / (a u)) with no older assets.
SweepResult sweep_unit_capacity(const BaseCase& base, std::span<const double> grid,
                                const SweepOptions& options = {});

SweepResult sweep_lifetime(const BaseCase& base, std::span<const AgingSource> curves,
                           const SweepOptions& options = {});

/// One record per (window, curve); parameter = window start index.
SweepResult sweep_demand_windows(const BaseCase& base, const demand::DemandSeries& quarterly,
                                 std::span<const std::size_t> window_starts, std::span<const AgingSource> curves,
                                 const SweepOptions& options = {});

/// `count` windows of `length` periods spaced 2*length apart (or tighter when
/// the series is short), the last one ending with the series.
std::vector<std::size_t> default_window_starts(std::size_t series_length, std::size_t length = 20,
                                               std::size_t count = 5);

// --- schedule summaries ------------------------------------------------------

/// Mean age of assets salvaged at time points 1..m-1 (0 when none).
double average_salvage_age(const planner::PlanningInstance& instance, const planner::Schedule& schedule);
std::vector<int> salvage_time_points(const planner::PlanningInstance& instance, const planner::Schedule& schedule);
std::vector<int> purchase_time_points(const planner::PlanningInstance& instance, const planner::Schedule& schedule);

// --- reports -------------------------------------------------------------------

std::string format_currency(double value);

/// `<name>.csv` always; `<name>.svg` only when there is at least one point.
std::vector<std::filesystem::path> emit_report(const SweepResult& result, const std::filesystem::path& out_dir);

/// Optimal against heuristic decisions, one row per lifetime.
void write_comparison_csv(std::ostream& out, const SweepResult& lifetime_sweep);

struct ChartSeries
{
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Self-contained SVG line chart, one polyline per series.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<ChartSeries>& series);

} // namespace batfleet::studies
