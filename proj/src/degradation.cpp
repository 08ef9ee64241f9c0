/*
 * degradation.cpp
 *
 * Cycling fade: the side-reaction current density decays with SEI thickness,
 *   J_s = beta0 * exp(-lambda * delta) * exp(-E_a / (R T)) * J_k,
 *   lambda = lambda0 * exp(E_a / (R T)),
 * and is integrated over the constant-current charge while the cell heats up
 * linearly by 4 K per C of charge rate. SEI thickness follows the accumulated
 * side-reaction charge: delta = kappa_delta * q_cycling / S_neg.
 *
 * Calendar fade is a piecewise-in-SOC linear-in-temperature law evaluated once
 * per rest interval; every cycle rests half at full charge and half at 1 - DOD.
 */
#include "batfleet/degradation.hpp"

#include "batfleet/kv_file.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

namespace batfleet::degradation {

namespace {

constexpr double soc_epsilon = 1e-12;

bool finite(double x) { return std::isfinite(x); }

std::string upper(std::string_view s)
{
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

ChemistryParams make_lfp()
{
  ChemistryParams p;
  p.name = "LFP";
  p.activation_energy = 30336.0;
  p.beta0 = 77.86;
  p.lambda0 = 0.83;
  p.m_exp = 2.60;
  p.nominal_capacity = 2.30;
  p.anode_area = 7.76;
  p.alpha1 = 1.375e-4;
  p.alpha2 = 5.5e-5;
  p.alpha3 = 1.1e-4;
  p.calendar_t0_c = 10.0;
  // Calibrated with calibrate_kappa: 25 degC, 90 % DOD, 0.5C, 3 cycles/day -> 2780 cycles.
  p.kappa_delta = 1.0308312637336e-03;
  return p;
}

ChemistryParams make_nmc()
{
  ChemistryParams p;
  p.name = "NMC";
  p.activation_energy = 28775.0;
  p.beta0 = 128.29;
  p.lambda0 = 0.33;
  p.m_exp = 2.62;
  p.nominal_capacity = 1.50;
  p.anode_area = 1.17;
  p.alpha1 = 1.4e-4;
  p.alpha2 = 4.8e-5;
  p.alpha3 = 1.0e-4;
  p.calendar_t0_c = 8.0;
  p.kappa_delta = make_lfp().kappa_delta; // not calibrated, no reference lifetimes
  return p;
}

// NOTE: E_a, beta0 and lambda0 (< 0) are shipped as tabulated even though they
// describe an accelerating rather than decelerating fade.
ChemistryParams make_nca()
{
  ChemistryParams p;
  p.name = "NCA";
  p.activation_energy = 2992.0;
  p.beta0 = 0.000061;
  p.lambda0 = -120838.0;
  p.m_exp = 1.17;
  p.nominal_capacity = 0.40;
  p.anode_area = 15.56;
  p.alpha1 = 1.3e-4;
  p.alpha2 = 5.0e-5;
  p.alpha3 = 0.9e-4;
  p.calendar_t0_c = 15.0;
  p.kappa_delta = make_lfp().kappa_delta;
  return p;
}

} // namespace

void ChemistryParams::validate() const
{
  const double all[] = {activation_energy, beta0, lambda0, m_exp, nominal_capacity, anode_area,
                        alpha1, alpha2, alpha3, calendar_t0_c, kappa_delta};
  for (double x : all)
    if (!finite(x))
      throw InputError("chemistry " + name + ": non-finite parameter");
  if (nominal_capacity <= 0.0)
    throw InputError("chemistry " + name + ": C_n must be positive");
  if (anode_area <= 0.0)
    throw InputError("chemistry " + name + ": S_neg must be positive");
  if (calendar_t0_c <= 0.0)
    throw InputError("chemistry " + name + ": T0 must be positive");
  if (alpha1 < 0.0 || alpha2 < 0.0 || alpha3 < 0.0)
    throw InputError("chemistry " + name + ": calendar factors must be non-negative");
  if (kappa_delta <= 0.0)
    throw InputError("chemistry " + name + ": kappa_delta must be positive");
}

std::optional<ChemistryParams> builtin_chemistry(std::string_view name)
{
  const std::string key = upper(name);
  if (key == "LFP")
    return make_lfp();
  if (key == "NMC")
    return make_nmc();
  if (key == "NCA")
    return make_nca();
  return std::nullopt;
}

std::vector<std::string> builtin_chemistry_names() { return {"LFP", "NMC", "NCA"}; }

ChemistryParams load_chemistry_file(const std::string& path)
{
  static const std::set<std::string> known = {"name",   "base",   "E_a",    "beta0", "lambda0",
                                              "m",      "C_n",    "S_neg",  "alpha1", "alpha2",
                                              "alpha3", "T0",     "kappa_delta"};
  const KeyValues kv = KeyValues::load(path);
  for (const auto& [key, value] : kv.entries())
    if (!known.count(key))
      throw InputError(path + ": unknown chemistry key '" + key + "'");

  const std::string base = kv.get_string("base", "LFP");
  auto params = builtin_chemistry(base);
  if (!params)
    throw InputError(path + ": unknown base chemistry '" + base + "'");
  ChemistryParams p = *params;
  p.name = kv.get_string("name", p.name);
  p.activation_energy = kv.get_double("E_a", p.activation_energy);
  p.beta0 = kv.get_double("beta0", p.beta0);
  p.lambda0 = kv.get_double("lambda0", p.lambda0);
  p.m_exp = kv.get_double("m", p.m_exp);
  p.nominal_capacity = kv.get_double("C_n", p.nominal_capacity);
  p.anode_area = kv.get_double("S_neg", p.anode_area);
  p.alpha1 = kv.get_double("alpha1", p.alpha1);
  p.alpha2 = kv.get_double("alpha2", p.alpha2);
  p.alpha3 = kv.get_double("alpha3", p.alpha3);
  p.calendar_t0_c = kv.get_double("T0", p.calendar_t0_c);
  p.kappa_delta = kv.get_double("kappa_delta", p.kappa_delta);
  p.validate();
  return p;
}

void write_chemistry_file(const std::string& path, const ChemistryParams& p)
{
  auto out = fmt::output_file(path);
  out.print("# chemistry parameter file\n");
  out.print("name = {}\n", p.name);
  out.print("E_a = {:.17g}\n", p.activation_energy);
  out.print("beta0 = {:.17g}\n", p.beta0);
  out.print("lambda0 = {:.17g}\n", p.lambda0);
  out.print("m = {:.17g}\n", p.m_exp);
  out.print("C_n = {:.17g}\n", p.nominal_capacity);
  out.print("S_neg = {:.17g}\n", p.anode_area);
  out.print("alpha1 = {:.17g}\n", p.alpha1);
  out.print("alpha2 = {:.17g}\n", p.alpha2);
  out.print("alpha3 = {:.17g}\n", p.alpha3);
  out.print("T0 = {:.17g}\n", p.calendar_t0_c);
  out.print("kappa_delta = {:.17g}\n", p.kappa_delta);
}

OperatingCondition OperatingCondition::from_celsius(double temp_c, double dod, double c_rate,
                                                    double cycles_per_day, double usage_rate)
{
  OperatingCondition c;
  c.ambient_k = to_kelvin(temp_c);
  c.dod = dod;
  c.c_rate = c_rate;
  c.cycles_per_day = cycles_per_day;
  c.usage_rate = usage_rate;
  c.validate();
  return c;
}

void OperatingCondition::validate() const
{
  if (!(ambient_k > 0.0) || !finite(ambient_k))
    throw InputError("operating condition: temperature must be above 0 K");
  if (!(dod > 0.0 && dod <= 1.0))
    throw InputError("operating condition: DOD must lie in (0, 1]");
  if (!(c_rate > 0.0) || !finite(c_rate))
    throw InputError("operating condition: charge rate must be positive");
  if (!(cycles_per_day >= 1.0) || !finite(cycles_per_day))
    throw InputError("operating condition: usage frequency must be >= 1 cycle/day");
  if (dod / c_rate > 24.0 / cycles_per_day)
    throw InputError("operating condition: charge does not fit in one cycle slot");
  if (!(usage_rate > 0.0 && usage_rate <= 1.0))
    throw InputError("operating condition: usage rate must lie in (0, 1]");
}

std::string_view to_string(LimitingMechanism mechanism)
{
  return mechanism == LimitingMechanism::cycling_dominant ? "cycling-dominant" : "calendar-dominant";
}

double fit_activation_energy(double q_ratio, double t1_k, double t2_k)
{
  if (!(q_ratio > 0.0) || !finite(q_ratio))
    throw InputError("fit_activation_energy: loss ratio must be positive");
  if (!(t1_k > 0.0) || !(t2_k > 0.0))
    throw InputError("fit_activation_energy: temperatures must be above 0 K");
  if (t1_k == t2_k)
    throw DegenerateInputError("fit_activation_energy: temperatures must differ");
  return gas_constant * std::log(q_ratio) / (1.0 / t2_k - 1.0 / t1_k);
}

BetaLambda fit_beta_lambda(std::span<const SideReactionSample> points, double activation_energy)
{
  std::vector<double> xs, ys;
  xs.reserve(points.size());
  ys.reserve(points.size());
  for (const auto& p : points)
  {
    if (!(p.temperature_k > 0.0))
      throw InputError("fit_beta_lambda: temperature must be above 0 K");
    if (p.side_current == 0.0 || p.kinetic_current == 0.0)
      throw InputError("fit_beta_lambda: current densities must be non-zero");
    const double arrhenius = activation_energy / (gas_constant * p.temperature_k);
    xs.push_back(p.delta * std::exp(arrhenius));
    ys.push_back(std::log(std::abs(p.side_current)) + arrhenius - std::log(std::abs(p.kinetic_current)));
  }
  std::vector<double> distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2)
    throw DegenerateInputError("fit_beta_lambda: need at least two distinct abscissae");

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k)
  {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k)
  {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  return {std::exp(intercept), -slope};
}

double side_current_density(double delta, double t_int_k, double kinetic_current,
                            const ChemistryParams& params)
{
  const double arrhenius = params.activation_energy / (gas_constant * t_int_k);
  const double lambda = params.lambda0 * std::exp(arrhenius);
  return params.beta0 * std::exp(-lambda * delta) * std::exp(-arrhenius) * kinetic_current;
}

double kinetic_current_density(const OperatingCondition& cond, const ChemistryParams& params)
{
  return params.nominal_capacity * cond.c_rate / params.anode_area;
}

double cc_charge_time(const OperatingCondition& cond) { return 3600.0 * cond.dod / cond.c_rate; }

double calendar_loss_interval(double soc, const OperatingCondition& cond, const ChemistryParams& params)
{
  if (soc < 0.0 || soc > 1.0)
    throw InputError("calendar_loss_interval: SOC must lie in [0, 1]");
  const double factor = cond.ambient_c() / params.calendar_t0_c - 1.0;
  if (factor <= 0.0)
    return 0.0;
  const double per_interval = factor * params.nominal_capacity / cond.cycles_per_day;
  double loss = 0.0;
  if (soc <= 0.40 + soc_epsilon)
    loss = params.alpha1 * soc * per_interval;
  else if (soc < 0.70 - soc_epsilon)
    loss = params.alpha2 * per_interval;
  else
    loss = params.alpha3 * per_interval;
  return std::max(0.0, loss);
}

double calendar_loss_per_cycle(const OperatingCondition& cond, const ChemistryParams& params)
{
  const double rest_soc = std::clamp(1.0 - cond.dod, 0.0, 1.0);
  return calendar_loss_interval(1.0, cond, params) + calendar_loss_interval(rest_soc, cond, params);
}

CycleState cycle_step(const CycleState& state, const OperatingCondition& cond,
                      const ChemistryParams& params, int substeps)
{
  if (substeps < 1)
    throw InputError("cycle_step: substeps must be >= 1");
  CycleState next = state;
  const double t_cc = cc_charge_time(cond);
  const double kinetic = kinetic_current_density(cond, params);
  const double ramp = ramp_kelvin_per_c * cond.c_rate;

  double q_side = 0.0;
  if (t_cc > 0.0)
  {
    const double h = t_cc / substeps;
    auto temperature = [&](double t) { return cond.ambient_k + ramp * t / t_cc; };
    for (int k = 0; k < substeps; ++k)
    {
      const double t0 = k * h;
      const double t1 = t0 + h;
      const double j0 = side_current_density(next.delta, temperature(t0), kinetic, params);
      const double j1 = side_current_density(next.delta, temperature(t1), kinetic, params);
      // A/m^2 * s * m^2 -> C -> Ah
      const double dq = params.anode_area * 0.5 * h * (j0 + j1) / 3600.0;
      q_side += dq;
      next.q_cycling += dq;
      next.delta = params.kappa_delta * next.q_cycling / params.anode_area;
    }
  }
  next.q_loss += q_side + calendar_loss_per_cycle(cond, params);
  next.cycle_index += 1;
  return next;
}

namespace {

std::int64_t months_for(std::int64_t cycles, double cycles_per_day)
{
  if (cycles <= 0)
    return 0;
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(cycles) / (30.0 * cycles_per_day) - 1e-12));
}

LifetimeResult make_result(const CycleState& s, const OperatingCondition& cond)
{
  LifetimeResult r;
  r.cycles = s.cycle_index;
  r.months = months_for(s.cycle_index, cond.cycles_per_day);
  r.limiting_mechanism = s.q_cycling >= s.q_calendar() ? LimitingMechanism::cycling_dominant
                                                       : LimitingMechanism::calendar_dominant;
  return r;
}

} // namespace

LifetimeResult predict_cycle_life(const OperatingCondition& cond, const ChemistryParams& params,
                                  double eol_fraction, std::int64_t max_cycles, int substeps)
{
  if (!(eol_fraction > 0.0 && eol_fraction <= 1.0))
    throw InputError("predict_cycle_life: end-of-life fraction must lie in (0, 1)");
  cond.validate();
  params.validate();
  const double threshold = (1.0 - eol_fraction) * params.nominal_capacity;
  CycleState state;
  while (state.q_loss < threshold)
  {
    if (state.cycle_index >= max_cycles)
      throw NoConvergenceError(fmt::format("predict_cycle_life: no end of life within {} cycles", max_cycles),
                               make_result(state, cond));
    state = cycle_step(state, cond, params, substeps);
  }
  return make_result(state, cond);
}

double calibrate_kappa(const ChemistryParams& params, const OperatingCondition& anchor,
                       std::int64_t target_cycles, double eol_fraction)
{
  if (target_cycles < 1)
    throw InputError("calibrate_kappa: target must be at least one cycle");
  ChemistryParams trial = params;
  auto life_at = [&](double kappa) {
    trial.kappa_delta = kappa;
    return predict_cycle_life(anchor, trial, eol_fraction).cycles;
  };

  const double start = params.kappa_delta > 0.0 ? params.kappa_delta : 1e-3;
  const std::int64_t start_life = life_at(start);
  if (start_life == target_cycles)
    return start;

  double best_kappa = start;
  std::int64_t best_life = start_life;
  auto consider = [&](double kappa, std::int64_t life) {
    if (std::llabs(life - target_cycles) < std::llabs(best_life - target_cycles))
    {
      best_kappa = kappa;
      best_life = life;
    }
  };

  // Thicker SEI per unit side-reaction charge slows the fade, so life is
  // non-decreasing in kappa. Walk by doubling/halving until the target is bracketed.
  double lo = start, hi = start;
  std::int64_t life_lo = start_life, life_hi = start_life;
  const bool grow = start_life < target_cycles;
  for (int step = 0; step < 80; ++step)
  {
    if (grow)
    {
      const double next = hi * 2.0;
      const std::int64_t life = life_at(next);
      if (life < life_hi)
        throw CalibrationError("calibrate_kappa: life is not monotone in kappa", best_kappa, best_life);
      lo = hi;
      life_lo = life_hi;
      hi = next;
      life_hi = life;
      consider(hi, life_hi);
      if (life_hi >= target_cycles)
        break;
    }
    else
    {
      const double next = lo * 0.5;
      const std::int64_t life = life_at(next);
      if (life > life_lo)
        throw CalibrationError("calibrate_kappa: life is not monotone in kappa", best_kappa, best_life);
      hi = lo;
      life_hi = life_lo;
      lo = next;
      life_lo = life;
      consider(lo, life_lo);
      if (life_lo <= target_cycles)
        break;
    }
  }
  if (life_lo > target_cycles || life_hi < target_cycles)
    throw CalibrationError("calibrate_kappa: target outside the reachable range", best_kappa, best_life);

  for (int iter = 0; iter < 200 && best_life != target_cycles; ++iter)
  {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi))
      break;
    const std::int64_t life = life_at(mid);
    consider(mid, life);
    if (life < target_cycles)
      lo = mid;
    else
      hi = mid;
  }
  if (std::llabs(best_life - target_cycles) > std::max<std::int64_t>(1, target_cycles / 100))
    throw CalibrationError(fmt::format("calibrate_kappa: closest life {} misses target {} by more than 1%",
                                       best_life, target_cycles),
                           best_kappa, best_life);
  return best_kappa;
}

std::int64_t cycles_per_month(const OperatingCondition& cond)
{
  return std::max<std::int64_t>(1, std::llround(30.0 * cond.cycles_per_day));
}

DegradationCurve degradation_fractions(const OperatingCondition& cond, const ChemistryParams& params,
                                       int horizon_months)
{
  if (horizon_months < 1)
    throw InputError("degradation_fractions: horizon must be at least one month");
  cond.validate();
  params.validate();
  DegradationCurve curve;
  curve.monthly_fraction.reserve(horizon_months);
  const std::int64_t per_month = cycles_per_month(cond);
  CycleState state;
  for (int month = 0; month < horizon_months; ++month)
  {
    for (std::int64_t c = 0; c < per_month; ++c)
      state = cycle_step(state, cond, params);
    curve.monthly_fraction.push_back(std::max(0.0, 1.0 - state.q_loss / params.nominal_capacity));
  }
  return curve;
}

DegradationCurve calendar_fractions(const OperatingCondition& cond, const ChemistryParams& params,
                                    int horizon_months)
{
  if (horizon_months < 1)
    throw InputError("calendar_fractions: horizon must be at least one month");
  cond.validate();
  params.validate();
  DegradationCurve curve;
  const double per_month = static_cast<double>(cycles_per_month(cond)) * calendar_loss_per_cycle(cond, params);
  for (int month = 0; month < horizon_months; ++month)
    curve.monthly_fraction.push_back(
      std::max(0.0, 1.0 - (month + 1) * per_month / params.nominal_capacity));
  return curve;
}

std::vector<double> periodize(const DegradationCurve& curve, int months_per_period)
{
  if (months_per_period < 1)
    throw InputError("periodize: months_per_period must be >= 1");
  const auto& c = curve.monthly_fraction;
  if (c.empty())
    throw DegenerateInputError("periodize: empty curve");
  const std::size_t periods = (c.size() + months_per_period - 1) / months_per_period;
  std::vector<double> v;
  v.reserve(periods);
  for (std::size_t p = 0; p < periods; ++p)
  {
    double sum = 0.0;
    for (int k = 0; k < months_per_period; ++k)
    {
      const std::size_t idx = std::min(p * months_per_period + k, c.size() - 1);
      sum += c[idx];
    }
    v.push_back(1.0 - sum / months_per_period);
  }
  return v;
}

double aging_index(double usage_rate, double v_usage, double v_idle)
{
  return usage_rate * v_usage + (1.0 - usage_rate) * v_idle;
}

std::vector<double> AgingProfile::blend(double usage_rate) const
{
  std::vector<double> v(usage_loss.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = aging_index(usage_rate, usage_loss[i], idle_loss[i]);
  return v;
}

AgingProfile aging_profile(const OperatingCondition& cond, const ChemistryParams& params,
                           double eol_fraction, int months_per_period)
{
  if (months_per_period < 1)
    throw InputError("aging_profile: months_per_period must be >= 1");
  AgingProfile profile;
  profile.life = predict_cycle_life(cond, params, eol_fraction);
  profile.lifetime_periods = std::max<int>(
    1, static_cast<int>((profile.life.months + months_per_period - 1) / months_per_period));
  const int horizon = (profile.lifetime_periods + 1) * months_per_period;
  auto usage = periodize(degradation_fractions(cond, params, horizon), months_per_period);
  auto idle = periodize(calendar_fractions(cond, params, horizon), months_per_period);
  const std::size_t len = static_cast<std::size_t>(profile.lifetime_periods) + 1;
  usage.resize(len);
  idle.resize(len);
  profile.usage_loss = std::move(usage);
  profile.idle_loss = std::move(idle);
  return profile;
}

std::vector<Scenario> standard_scenario_grid()
{
  std::vector<Scenario> grid;
  int id = 1;
  for (double rate : {0.5, 1.0, 3.0})
    for (double dod : {90.0, 50.0, 10.0})
      for (double temp : {25.0, 40.0, 55.0})
        grid.push_back({id++, temp, dod, rate});
  return grid;
}

OperatingCondition condition_for(const Scenario& s, double cycles_per_day)
{
  return OperatingCondition::from_celsius(s.temp_c, s.dod_pct / 100.0, s.c_rate, cycles_per_day);
}

std::vector<ScenarioLifetime> select_lifetime_scenarios(const ChemistryParams& params,
                                                        std::span<const int> lifetimes,
                                                        double eol_fraction, int months_per_period,
                                                        double cycles_per_day)
{
  std::vector<ScenarioLifetime> evaluated;
  for (const auto& s : standard_scenario_grid())
    evaluated.push_back({s, predict_cycle_life(condition_for(s, cycles_per_day), params, eol_fraction)});

  std::vector<ScenarioLifetime> chosen;
  for (int target : lifetimes)
  {
    auto it = std::find_if(evaluated.begin(), evaluated.end(), [&](const ScenarioLifetime& e) {
      return (e.life.months + months_per_period - 1) / months_per_period == target;
    });
    if (it == evaluated.end())
      throw InputError(fmt::format("no grid scenario yields a lifetime of {} periods", target));
    chosen.push_back(*it);
  }
  return chosen;
}

} // namespace batfleet::degradation
