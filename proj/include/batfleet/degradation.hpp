/*
 * degradation.hpp
 *
 * Lithium-ion capacity fade under cycling (SEI side reaction integrated over the
 * constant-current charge), calendar aging during rest, the usage/idle aging
 * index and the monthly-to-decision-period discretisation used by the planner.
 *
 * Temperatures are kelvin internally. The calendar model is tabulated in
 * Celsius, so calendar_loss_interval converts back.
 */
#pragma once

#include "batfleet/errors.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace batfleet::degradation {

inline constexpr double gas_constant = 8.314;   // J/(mol K)
inline constexpr double kelvin_offset = 273.15; // K at 0 degC
inline constexpr double ramp_kelvin_per_c = 4.0; // 1C charge heats the cell by 4 K
inline constexpr int default_substeps = 100;

inline double to_kelvin(double celsius) { return celsius + kelvin_offset; }
inline double to_celsius(double kelvin) { return kelvin - kelvin_offset; }

struct ChemistryParams
{
  std::string name;
  double activation_energy = 0.0; // J/mol
  double beta0 = 0.0;
  double lambda0 = 0.0;           // 1/m
  double m_exp = 0.0;             // tabulated, no governing equation uses it
  double nominal_capacity = 0.0;  // Ah
  double anode_area = 0.0;        // m^2
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double calendar_t0_c = 0.0;     // degC
  double kappa_delta = 0.0;       // m*m^2/Ah, SEI thickness per side-reaction charge

  void validate() const;
};

/// Built-in chemistries: "LFP", "NMC", "NCA" (case-insensitive).
std::optional<ChemistryParams> builtin_chemistry(std::string_view name);
std::vector<std::string> builtin_chemistry_names();

/// Loads a chemistry from a `key = value` parameter file. Keys missing from the
/// file fall back to the built-in chemistry named by `base` (default LFP).
ChemistryParams load_chemistry_file(const std::string& path);
void write_chemistry_file(const std::string& path, const ChemistryParams& params);

struct OperatingCondition
{
  double ambient_k = to_kelvin(25.0);
  double dod = 0.9;
  double c_rate = 0.5;
  double cycles_per_day = 3.0;
  double usage_rate = 1.0;

  static OperatingCondition from_celsius(double temp_c, double dod, double c_rate,
                                         double cycles_per_day = 3.0,
                                         double usage_rate = 1.0);
  double ambient_c() const { return to_celsius(ambient_k); }
  void validate() const;
};

struct CycleState
{
  std::int64_t cycle_index = 0;
  double q_loss = 0.0;    // Ah, cycling + calendar
  double delta = 0.0;     // m
  double q_cycling = 0.0; // Ah, side-reaction share of q_loss

  double q_calendar() const { return q_loss - q_cycling; }
};

enum class LimitingMechanism { cycling_dominant, calendar_dominant };
std::string_view to_string(LimitingMechanism mechanism);

struct LifetimeResult
{
  std::int64_t cycles = 0;
  std::int64_t months = 0;
  LimitingMechanism limiting_mechanism = LimitingMechanism::cycling_dominant;
};

/// predict_cycle_life hit its cycle guard before reaching end of life.
class NoConvergenceError : public Error
{
public:
  NoConvergenceError(const std::string& what, LifetimeResult partial)
    : Error(what), partial_(partial)
  {
  }
  const LifetimeResult& partial() const { return partial_; }

private:
  LifetimeResult partial_;
};

/// calibrate_kappa could not bracket or hit the target.
class CalibrationError : public Error
{
public:
  CalibrationError(const std::string& what, double best_kappa, std::int64_t best_cycles)
    : Error(what), best_kappa_(best_kappa), best_cycles_(best_cycles)
  {
  }
  double best_kappa() const { return best_kappa_; }
  std::int64_t best_cycles() const { return best_cycles_; }

private:
  double best_kappa_;
  std::int64_t best_cycles_;
};

// --- parameter fitting -------------------------------------------------------

/// Activation energy from the loss ratio Q(T1)/Q(T2) at equal cycle count.
double fit_activation_energy(double q_ratio, double t1_k, double t2_k);

struct SideReactionSample
{
  double delta = 0.0;            // m
  double temperature_k = 0.0;
  double side_current = 0.0;     // A/m^2
  double kinetic_current = 0.0;  // A/m^2
};

struct BetaLambda
{
  double beta0 = 0.0;
  double lambda0 = 0.0;
};

/// Least-squares line through the log-linearised side-reaction law.
BetaLambda fit_beta_lambda(std::span<const SideReactionSample> points,
                           double activation_energy);

// --- forward model -----------------------------------------------------------

double side_current_density(double delta, double t_int_k, double kinetic_current,
                            const ChemistryParams& params);

/// Nominal intercalation current spread over the anode, A/m^2.
double kinetic_current_density(const OperatingCondition& cond, const ChemistryParams& params);

/// Constant-current charge duration in seconds.
double cc_charge_time(const OperatingCondition& cond);

/// Calendar capacity loss (Ah) over one rest interval at the given SOC.
double calendar_loss_interval(double soc, const OperatingCondition& cond,
                              const ChemistryParams& params);

/// Calendar loss of one full cycle slot: half the rest at full charge, half at 1 - DOD.
double calendar_loss_per_cycle(const OperatingCondition& cond, const ChemistryParams& params);

CycleState cycle_step(const CycleState& state, const OperatingCondition& cond,
                      const ChemistryParams& params, int substeps = default_substeps);

LifetimeResult predict_cycle_life(const OperatingCondition& cond, const ChemistryParams& params,
                                  double eol_fraction, std::int64_t max_cycles = 1'000'000,
                                  int substeps = default_substeps);

/// Bisection on kappa_delta (log scale) so the anchor condition lives target_cycles.
double calibrate_kappa(const ChemistryParams& params, const OperatingCondition& anchor,
                       std::int64_t target_cycles, double eol_fraction = 0.75);

// --- discretisation ----------------------------------------------------------

struct DegradationCurve
{
  std::vector<double> monthly_fraction;
  int months_per_period = 1;
  std::vector<double> v_per_period;
};

std::int64_t cycles_per_month(const OperatingCondition& cond);

/// Remaining-capacity fraction at the end of each month under full availability.
DegradationCurve degradation_fractions(const OperatingCondition& cond,
                                       const ChemistryParams& params, int horizon_months);

/// Remaining-capacity fraction of an idle asset (calendar terms only).
DegradationCurve calendar_fractions(const OperatingCondition& cond,
                                    const ChemistryParams& params, int horizon_months);

/// v_i = 1 - mean of the monthly fractions in period i; a short last period is
/// padded with the final monthly value.
std::vector<double> periodize(const DegradationCurve& curve, int months_per_period);

double aging_index(double usage_rate, double v_usage, double v_idle);

/// Per-age loss fractions for the planner.
struct AgingProfile
{
  std::vector<double> usage_loss; // v1 by age, length lifetime_periods + 1
  std::vector<double> idle_loss;  // v2 by age
  int lifetime_periods = 0;
  LifetimeResult life;

  std::vector<double> blend(double usage_rate) const;
};

AgingProfile aging_profile(const OperatingCondition& cond, const ChemistryParams& params,
                           double eol_fraction, int months_per_period);

// --- scenario grid -----------------------------------------------------------

struct Scenario
{
  int id = 0;
  double temp_c = 0.0;
  double dod_pct = 0.0;
  double c_rate = 0.0;
};

/// 3 temperatures x 3 DODs x 3 charge rates, temperature varying fastest.
std::vector<Scenario> standard_scenario_grid();

OperatingCondition condition_for(const Scenario& scenario, double cycles_per_day = 3.0);

struct ScenarioLifetime
{
  Scenario scenario;
  LifetimeResult life;
};

/// For each target lifetime (in periods) the first grid scenario whose predicted
/// life rounds up to exactly that many periods.
std::vector<ScenarioLifetime> select_lifetime_scenarios(const ChemistryParams& params,
                                                        std::span<const int> lifetimes,
                                                        double eol_fraction,
                                                        int months_per_period,
                                                        double cycles_per_day = 3.0);

} // namespace batfleet::degradation
