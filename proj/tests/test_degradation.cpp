#include "batfleet/degradation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace batfleet;
using namespace batfleet::degradation;

namespace {

ChemistryParams lfp() { return *builtin_chemistry("LFP"); }

OperatingCondition scenario(int id) { return condition_for(standard_scenario_grid()[static_cast<std::size_t>(id - 1)]); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("activation energy fit")
{
  CHECK(fit_activation_energy(1.0, 298.15, 313.15) == doctest::Approx(0.0));

  // forward: q(T1)/q(T2) = exp(E_a/R (1/T2 - 1/T1))
  const double ratio = std::exp(30336.0 / 8.314 * (1.0 / 313.15 - 1.0 / 298.15));
  CHECK(rel(fit_activation_energy(ratio, 298.15, 313.15), 30336.0) < 1e-6);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ea(1e3, 1e5), temp(250.0, 350.0);
  for (int k = 0; k < 200; ++k)
  {
    const double e = ea(rng), t1 = temp(rng), t2 = t1 + 5.0 + temp(rng) / 10.0;
    const double q = std::exp(e / 8.314 * (1.0 / t2 - 1.0 / t1));
    CHECK(rel(fit_activation_energy(q, t1, t2), e) < 1e-9);
  }

  CHECK_THROWS_AS(fit_activation_energy(2.0, 300.0, 300.0), DegenerateInputError);
  CHECK_THROWS_AS(fit_activation_energy(0.0, 300.0, 310.0), InputError);
  CHECK_THROWS_AS(fit_activation_energy(-1.0, 300.0, 310.0), InputError);
}

TEST_CASE("beta/lambda fit")
{
  const double ea = 30336.0;
  auto sample = [&](double beta0, double lambda0, double delta, double t, double jk) {
    const double arr = std::exp(ea / (8.314 * t));
    return SideReactionSample{delta, t, beta0 * std::exp(-lambda0 * arr * delta) / arr * jk, jk};
  };
  const SideReactionSample two[] = {sample(77.86, 0.83, 1e-9, 298.15, 1.0), sample(77.86, 0.83, 4e-9, 310.0, 0.7)};
  const auto fit = fit_beta_lambda(two, ea);
  CHECK(rel(fit.beta0, 77.86) < 1e-9);
  CHECK(rel(fit.lambda0, 0.83) < 1e-9);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> b(1.0, 200.0), l(0.1, 2.0), d(0.0, 1e-8), t(280.0, 330.0), j(0.1, 2.0);
  for (int k = 0; k < 100; ++k)
  {
    const double beta0 = b(rng), lambda0 = l(rng);
    std::vector<SideReactionSample> pts;
    for (int p = 0; p < 6; ++p)
      pts.push_back(sample(beta0, lambda0, d(rng), t(rng), j(rng)));
    const auto f = fit_beta_lambda(pts, ea);
    CHECK(rel(f.beta0, beta0) < 1e-6);
    CHECK(rel(f.lambda0, lambda0) < 1e-6);
  }

  const SideReactionSample flat[] = {{0.0, 300.0, 1.0, 1.0}, {0.0, 300.0, 2.0, 1.0}, {0.0, 300.0, 3.0, 1.0}};
  CHECK_THROWS_AS(fit_beta_lambda(flat, ea), DegenerateInputError);
  CHECK_THROWS_AS(fit_beta_lambda(std::span<const SideReactionSample>(two, 1), ea), DegenerateInputError);
}

TEST_CASE("side current density")
{
  const auto p = lfp();
  const double t = 298.15;
  CHECK(side_current_density(0.0, t, 2.0, p) ==
        doctest::Approx(p.beta0 * std::exp(-p.activation_energy / (gas_constant * t)) * 2.0).epsilon(1e-14));

  auto flat = p;
  flat.activation_energy = 0.0;
  flat.lambda0 = 0.0;
  CHECK(side_current_density(3e-8, 320.0, 1.5, flat) == doctest::Approx(p.beta0 * 1.5).epsilon(1e-14));

  // frozen from a scalar evaluation outside the library
  CHECK(rel(side_current_density(1e-8, 298.15, 1.0, p), 0.0003763890942036016) < 1e-12);
}

TEST_CASE("charge time")
{
  CHECK(cc_charge_time(OperatingCondition::from_celsius(25, 1.0, 1.0)) == doctest::Approx(3600.0));
  CHECK(cc_charge_time(OperatingCondition::from_celsius(25, 0.9, 0.5)) == doctest::Approx(6480.0));
  CHECK(cc_charge_time(OperatingCondition::from_celsius(25, 0.1, 3.0)) == doctest::Approx(120.0));
}

TEST_CASE("calendar loss")
{
  const auto p = lfp();
  for (double soc : {0.0, 0.1, 0.5, 0.7, 1.0})
  {
    CHECK(calendar_loss_interval(soc, OperatingCondition::from_celsius(p.calendar_t0_c, 0.5, 1.0), p) == 0.0);
    CHECK(calendar_loss_interval(soc, OperatingCondition::from_celsius(5.0, 0.5, 1.0), p) == 0.0);
  }
  const auto warm = OperatingCondition::from_celsius(25.0, 0.9, 0.5, 3.0);
  CHECK(rel(calendar_loss_interval(0.10, warm, p), 1.5812499999999998e-05) < 1e-12);
  // the 0.70 boundary belongs to the full-charge branch
  CHECK(calendar_loss_interval(0.70, warm, p) == doctest::Approx(p.alpha3 * (25.0 / 10.0 - 1.0) * 2.30 / 3.0));
  CHECK(calendar_loss_interval(0.55, warm, p) == doctest::Approx(p.alpha2 * (25.0 / 10.0 - 1.0) * 2.30 / 3.0));
  CHECK_THROWS_AS(calendar_loss_interval(1.2, warm, p), InputError);

  for (double soc : {0.2, 0.5, 0.9})
  {
    double previous = 0.0;
    for (double t = 10.0; t <= 60.0; t += 2.5)
    {
      const double q = calendar_loss_interval(soc, OperatingCondition::from_celsius(t, 0.5, 1.0), p);
      CHECK(q >= previous);
      previous = q;
    }
  }
}

TEST_CASE("cycle step")
{
  const auto p = lfp();
  // no charge and a cold rest: nothing but the counter moves
  OperatingCondition idle = OperatingCondition::from_celsius(5.0, 0.5, 1.0);
  idle.dod = 0.0;
  CycleState s0{4, 0.01, 1e-9, 0.005};
  const auto s1 = cycle_step(s0, idle, p);
  CHECK(s1.cycle_index == 5);
  CHECK(s1.q_loss == s0.q_loss);
  CHECK(s1.delta == s0.delta);

  const auto cond = scenario(1);
  const auto a = cycle_step(CycleState{}, cond, p);
  CHECK(a.q_loss > 0.0);
  CHECK(a.cycle_index == 1);

  // refinement oracle: ten times the panels, coded separately
  const double dense = oracle::one_cycle_loss(cond, p, 10 * default_substeps);
  CHECK(rel(a.q_loss, dense) < 1e-3);
  const auto fine = cycle_step(CycleState{}, cond, p, 10 * default_substeps);
  CHECK(rel(a.q_loss, fine.q_loss) < 1e-3);
  CHECK(rel(fine.q_loss, dense) < 1e-9);

  // monotone state over random steps and conditions
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> temp(15.0, 60.0), dod(0.05, 1.0), rate(0.2, 3.0);
  CycleState s;
  for (int k = 0; k < 1000; ++k)
  {
    const auto c = OperatingCondition::from_celsius(temp(rng), dod(rng), rate(rng));
    const auto next = cycle_step(s, c, p);
    CHECK(next.q_loss >= s.q_loss);
    CHECK(next.delta >= s.delta);
    CHECK(next.q_cycling > s.q_cycling);
    CHECK(next.cycle_index == s.cycle_index + 1);
    s = next;
  }
}

TEST_CASE("cycle life prediction")
{
  const auto p = lfp();
  CHECK(predict_cycle_life(scenario(1), p, 1.0).cycles == 0);

  const auto s1 = predict_cycle_life(scenario(1), p, 0.75);
  CHECK(s1.cycles == 2780);
  CHECK(s1.months == 31);
  CHECK(s1.months == static_cast<std::int64_t>(std::ceil(s1.cycles / 90.0)));

  const auto s3 = predict_cycle_life(scenario(3), p, 0.75);
  CHECK(s3.cycles < s1.cycles);
  CHECK(std::abs(static_cast<double>(s3.cycles) - 666.0) / 666.0 < 0.25);

  try
  {
    predict_cycle_life(scenario(1), p, 0.75, 100);
    FAIL("guard did not trigger");
  }
  catch (const NoConvergenceError& e)
  {
    CHECK(e.partial().cycles == 100);
  }
  CHECK_THROWS_AS(predict_cycle_life(scenario(1), p, 0.0), InputError);

  // temperature ordering inside every DOD / rate group
  const auto grid = standard_scenario_grid();
  for (std::size_t g = 0; g < grid.size(); g += 3)
  {
    const auto c25 = predict_cycle_life(condition_for(grid[g]), p, 0.75).cycles;
    const auto c40 = predict_cycle_life(condition_for(grid[g + 1]), p, 0.75).cycles;
    const auto c55 = predict_cycle_life(condition_for(grid[g + 2]), p, 0.75).cycles;
    CHECK(c25 > c40);
    CHECK(c40 > c55);
  }
}

TEST_CASE("scenario grid")
{
  const auto grid = standard_scenario_grid();
  REQUIRE(grid.size() == 27);
  CHECK(grid[0].temp_c == 25.0);
  CHECK(grid[1].temp_c == 40.0);
  CHECK(grid[3].dod_pct == 50.0);
  CHECK(grid[9].c_rate == 1.0);
  CHECK(grid[26].id == 27);

  const int wanted[] = {3, 4, 8, 9, 10};
  const auto chosen = select_lifetime_scenarios(lfp(), wanted, 0.75, 3);
  REQUIRE(chosen.size() == 5);
  for (std::size_t k = 0; k < chosen.size(); ++k)
    CHECK((chosen[k].life.months + 2) / 3 == wanted[k]);
  const int impossible[] = {50};
  CHECK_THROWS_AS(select_lifetime_scenarios(lfp(), impossible, 0.75, 3), InputError);
}

TEST_CASE("monthly fractions")
{
  auto inert = lfp();
  inert.beta0 = 0.0;
  inert.alpha1 = inert.alpha2 = inert.alpha3 = 0.0;
  CHECK(degradation_fractions(scenario(1), inert, 1).monthly_fraction.at(0) == 1.0);

  const auto curve = degradation_fractions(scenario(1), lfp(), 36);
  REQUIRE(curve.monthly_fraction.size() == 36);
  CHECK(curve.monthly_fraction[0] <= 1.0);
  for (std::size_t k = 1; k < curve.monthly_fraction.size(); ++k)
    CHECK(curve.monthly_fraction[k] <= curve.monthly_fraction[k - 1]);
  // end of life lands in month 31, one month either way
  int month = 0;
  while (curve.monthly_fraction[static_cast<std::size_t>(month)] > 0.75)
    ++month;
  CHECK(std::abs(month + 1 - 31) <= 1);

  const auto idle = calendar_fractions(scenario(1), lfp(), 12);
  for (std::size_t k = 0; k < 12; ++k)
    CHECK(idle.monthly_fraction[k] >= curve.monthly_fraction[k]);
}

TEST_CASE("periodize")
{
  DegradationCurve flat;
  flat.monthly_fraction.assign(9, 0.9);
  for (double v : periodize(flat, 3))
    CHECK(v == doctest::Approx(0.1).epsilon(1e-15));

  DegradationCurve c;
  c.monthly_fraction = {1.00, 0.98, 0.96, 0.95};
  const auto v = periodize(c, 3);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(0.05).epsilon(1e-14)); // padded with the final month

  // dyadic values: the averaging identity holds bit for bit
  c.monthly_fraction = {1.0, 0.984375, 0.96875};
  CHECK(1.0 - periodize(c, 3)[0] == (1.0 + 0.984375 + 0.96875) / 3.0);

  c.monthly_fraction = {0.97, 0.91, 0.88};
  const auto ident = periodize(c, 1);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(ident[k] == 1.0 - c.monthly_fraction[k]);

  CHECK_THROWS_AS(periodize(DegradationCurve{}, 3), DegenerateInputError);
  CHECK_THROWS_AS(periodize(c, 0), InputError);
}

TEST_CASE("aging index")
{
  CHECK(aging_index(1.0, 0.07, 0.01) == 0.07);
  CHECK(aging_index(0.0, 0.07, 0.01) == 0.01);
  CHECK(aging_index(0.8, 0.05, 0.01) == doctest::Approx(0.042).epsilon(1e-15));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 1000; ++k)
  {
    const double u = unit(rng), v = unit(rng);
    CHECK(aging_index(u, v, v) == doctest::Approx(v).epsilon(1e-15));
  }
}

TEST_CASE("aging profile")
{
  const auto profile = aging_profile(scenario(1), lfp(), 0.75, 3);
  CHECK(profile.lifetime_periods == 11);
  REQUIRE(profile.usage_loss.size() == 12);
  REQUIRE(profile.idle_loss.size() == 12);
  const auto v = profile.blend(0.8);
  for (std::size_t i = 1; i < v.size(); ++i)
  {
    CHECK(v[i] >= v[i - 1]);
    CHECK(profile.usage_loss[i] >= profile.usage_loss[i - 1]);
  }
  CHECK(v.back() < 1.0);
}

TEST_CASE("kappa calibration")
{
  const auto p = lfp();
  const auto anchor = scenario(1);
  const auto here = predict_cycle_life(anchor, p, 0.75).cycles;
  CHECK(calibrate_kappa(p, anchor, here) == p.kappa_delta);

  auto off = p;
  off.kappa_delta *= 4.0;
  const double kappa = calibrate_kappa(off, anchor, 2780);
  off.kappa_delta = kappa;
  const auto life = predict_cycle_life(anchor, off, 0.75).cycles;
  CHECK(life >= 2752);
  CHECK(life <= 2808);

  // a thicker layer per unit side charge slows the fade: doubling never shortens life
  auto k1 = p;
  for (int k = 0; k < 4; ++k)
  {
    auto k2 = k1;
    k2.kappa_delta *= 2.0;
    CHECK(predict_cycle_life(anchor, k2, 0.75).cycles >= predict_cycle_life(anchor, k1, 0.75).cycles);
    k1 = k2;
  }

  CHECK_THROWS_AS(calibrate_kappa(p, anchor, 0), InputError);
  CHECK_THROWS_AS(calibrate_kappa(p, anchor, 100000000), CalibrationError);
}

TEST_CASE("chemistry parameters")
{
  CHECK(builtin_chemistry("lfp").has_value());
  CHECK(builtin_chemistry("NMC")->beta0 == 128.29);
  CHECK(builtin_chemistry("NCA")->lambda0 == -120838.0);
  CHECK_FALSE(builtin_chemistry("LMO").has_value());
  CHECK(lfp().activation_energy == 30336.0);

  const auto path = std::filesystem::temp_directory_path() / "batfleet_chem_roundtrip.txt";
  auto p = lfp();
  p.name = "custom";
  p.beta0 = 12.5;
  write_chemistry_file(path.string(), p);
  const auto q = load_chemistry_file(path.string());
  CHECK(q.name == "custom");
  CHECK(q.beta0 == 12.5);
  CHECK(q.kappa_delta == p.kappa_delta);
  std::filesystem::remove(path);

  auto bad = lfp();
  bad.nominal_capacity = 0.0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  CHECK_THROWS_AS(OperatingCondition::from_celsius(25.0, 0.0, 1.0), InputError);
  CHECK_THROWS_AS(OperatingCondition::from_celsius(25.0, 1.0, 0.1), InputError); // 10 h charge, 8 h slot
}
