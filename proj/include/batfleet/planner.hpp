/*
 * planner.hpp
 *
 * Parallel battery replacement model. Ages i and periods/time points j follow
 * the usual convention: X, I live on (age 0..n-1, period 0..m-1); S lives on
 * (age 1..n, time point 1..m); B and Z on time points 0..m-1.
 */
#pragma once

#include "batfleet/errors.hpp"
#include "batfleet/milp_problem.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace batfleet::planner {

/// Dense table over an inclusive (age, time) index box.
template <typename T>
class AgeTimeTable
{
public:
  AgeTimeTable() = default;
  AgeTimeTable(int first_age, int last_age, int first_time, int last_time, T fill = T{})
    : first_age_(first_age), last_age_(last_age), first_time_(first_time), last_time_(last_time),
      data_(static_cast<std::size_t>(std::max(0, last_age - first_age + 1)) *
              static_cast<std::size_t>(std::max(0, last_time - first_time + 1)),
            fill)
  {
  }

  int first_age() const { return first_age_; }
  int last_age() const { return last_age_; }
  int first_time() const { return first_time_; }
  int last_time() const { return last_time_; }
  bool contains(int i, int j) const
  {
    return i >= first_age_ && i <= last_age_ && j >= first_time_ && j <= last_time_;
  }

  T& operator()(int i, int j) { return data_[index(i, j)]; }
  const T& operator()(int i, int j) const { return data_[index(i, j)]; }

  const std::vector<T>& values() const { return data_; }

  bool operator==(const AgeTimeTable&) const = default;

private:
  std::size_t index(int i, int j) const
  {
    if (!contains(i, j))
      throw InputError("age/time index out of range");
    return static_cast<std::size_t>(i - first_age_) * static_cast<std::size_t>(last_time_ - first_time_ + 1) +
           static_cast<std::size_t>(j - first_time_);
  }

  int first_age_ = 0, last_age_ = -1, first_time_ = 0, last_time_ = -1;
  std::vector<T> data_;
};

struct PlanningInstance
{
  int max_age = 1;  // n
  int periods = 1;  // m
  std::vector<double> purchase_cost;  // P_j, j = 0..m-1
  std::vector<double> fixed_cost;     // K_j
  std::vector<double> om_cost;        // C_j
  std::vector<double> inventory_cost; // H_j
  AgeTimeTable<double> salvage_revenue; // R_ij, i = 1..n, j = 1..m
  std::vector<std::int64_t> initial_assets; // N_i, i = 0..n-1
  double unit_capacity = 1.0;         // a, kWh
  std::vector<double> demand;         // d_j, kWh
  std::vector<double> loss_fraction;  // v_i, i = 0..n
  double usage_rate = 1.0;            // u

  /// Effective kWh one asset of age i delivers in a period.
  double effective_capacity(int age) const
  {
    return (1.0 - loss_fraction[static_cast<std::size_t>(age)]) * unit_capacity * usage_rate;
  }

  void validate() const;
};

struct Schedule
{
  std::vector<std::int64_t> purchases;  // B_j
  std::vector<std::int64_t> purchase_flag; // Z_j
  AgeTimeTable<std::int64_t> in_use;    // X_ij
  AgeTimeTable<std::int64_t> inventory; // I_ij
  AgeTimeTable<std::int64_t> salvaged;  // S_ij

  static Schedule empty_for(const PlanningInstance& instance);
  bool operator==(const Schedule&) const = default;
};

// --- cost schedules -----------------------------------------------------------

struct CostBase
{
  double purchase = 250.0;  // P_0
  double fixed = 40.0;      // K_0
  double om = 10.0;         // C_0
  double inventory = 10.0;  // H_0
  double salvage = 20.0;    // R_11
  double rate = 0.0024;     // per period
};

struct CostSchedules
{
  std::vector<double> purchase;
  std::vector<double> fixed;
  std::vector<double> om;
  std::vector<double> inventory;
};

/// value_j = base * (1 + r)^j for j = 0..m-1.
CostSchedules inflate_costs(const CostBase& base, double rate, int periods);

/// Age decay of salvage value, relative to a new asset (1 at age 1).
enum class SalvageDecay { linear, constant };

/// R_ij = R_11 (1 + r)^(j-1) * decay(i), i = 1..n, j = 1..m.
AgeTimeTable<double> salvage_schedule(double r11, double rate, int max_age, int periods,
                                      SalvageDecay decay = SalvageDecay::linear);

// --- model --------------------------------------------------------------------

/// Column order of the MILP: B_0..B_{m-1}, Z_0..Z_{m-1}, X (age-major),
/// I (age-major), S (age-major, i = 1..n, j = 1..m).
class VariableLayout
{
public:
  explicit VariableLayout(const PlanningInstance& instance);

  int purchases(int j) const { return j; }
  int purchase_flag(int j) const { return m_ + j; }
  int in_use(int i, int j) const { return 2 * m_ + i * m_ + j; }
  int inventory(int i, int j) const { return 2 * m_ + n_ * m_ + i * m_ + j; }
  int salvaged(int i, int j) const { return 2 * m_ + 2 * n_ * m_ + (i - 1) * m_ + (j - 1); }
  int size() const { return 2 * m_ + 3 * n_ * m_; }

private:
  int n_, m_;
};

/// Big-M of the purchase-indicator link: ceil(d_j / ((1 - v_n) u a)).
std::int64_t purchase_bound(const PlanningInstance& instance, int j);

/// Upper bound on any single count: every asset that can ever exist.
std::int64_t fleet_bound(const PlanningInstance& instance);

MilpProblem build_milp(const PlanningInstance& instance);

std::vector<double> to_values(const PlanningInstance& instance, const Schedule& schedule);
Schedule from_values(const PlanningInstance& instance, const std::vector<double>& values);

struct CostBreakdown
{
  double purchase = 0.0;
  double fixed = 0.0;
  double om = 0.0;
  double inventory = 0.0;
  double salvage = 0.0; // revenue, subtracted from the total
  double total() const { return purchase + fixed + om + inventory - salvage; }
};

CostBreakdown cost_breakdown(const PlanningInstance& instance, const Schedule& schedule);
double evaluate_cost(const PlanningInstance& instance, const Schedule& schedule);

struct Violation
{
  std::string constraint; // "9" .. "20"
  int age = -1;           // -1 when the constraint has no age index
  int time = -1;
  double slack = 0.0;     // signed amount by which the constraint misses
};

std::vector<Violation> check_feasibility(const PlanningInstance& instance, const Schedule& schedule);

/// Use every asset until it reaches the maximum age, buy just enough new units
/// to cover each period's demand, salvage everything at the horizon.
Schedule heuristic_schedule(const PlanningInstance& instance);

} // namespace batfleet::planner
