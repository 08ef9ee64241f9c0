#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

using batfleet::Constraint;
using batfleet::MilpProblem;
using batfleet::Relation;
using batfleet::Variable;

namespace {

using real = long double;

struct Column
{
  int original;
  real sign;   // x = offset + sign * y
  real offset;
};

} // namespace

TableauResult tableau_simplex(const MilpProblem& pb)
{
  const int nx = pb.num_variables();
  std::vector<Column> cols;
  std::vector<std::vector<real>> rows; // coefficients over y, rhs kept apart
  std::vector<real> rhs;
  std::vector<int> sense; // -1 <=, 0 =, +1 >=
  std::vector<std::vector<int>> of_var(static_cast<std::size_t>(nx));

  for (int k = 0; k < nx; ++k)
  {
    const Variable& v = pb.variables[static_cast<std::size_t>(k)];
    const bool lo = std::isfinite(v.lower), hi = std::isfinite(v.upper);
    if (lo)
      cols.push_back({k, 1, v.lower});
    else if (hi)
      cols.push_back({k, -1, v.upper});
    else
    {
      cols.push_back({k, 1, 0});
      cols.push_back({k, -1, 0});
    }
  }
  const int ny = static_cast<int>(cols.size());
  for (int c = 0; c < ny; ++c)
    of_var[static_cast<std::size_t>(cols[static_cast<std::size_t>(c)].original)].push_back(c);

  for (const Constraint& con : pb.constraints)
  {
    std::vector<real> a(static_cast<std::size_t>(ny), 0);
    real b = con.rhs;
    for (auto [k, coef] : con.terms)
      for (int c : of_var[static_cast<std::size_t>(k)])
      {
        const auto& col = cols[static_cast<std::size_t>(c)];
        a[static_cast<std::size_t>(c)] += coef * col.sign;
        if (c == of_var[static_cast<std::size_t>(k)].front())
          b -= coef * col.offset;
      }
    rows.push_back(a);
    rhs.push_back(b);
    sense.push_back(con.relation == Relation::less_equal ? -1 : con.relation == Relation::equal ? 0 : 1);
  }
  for (int c = 0; c < ny; ++c)
  {
    const auto& col = cols[static_cast<std::size_t>(c)];
    const Variable& v = pb.variables[static_cast<std::size_t>(col.original)];
    if (col.sign > 0 && std::isfinite(v.lower) && std::isfinite(v.upper))
    {
      std::vector<real> a(static_cast<std::size_t>(ny), 0);
      a[static_cast<std::size_t>(c)] = 1;
      rows.push_back(a);
      rhs.push_back(static_cast<real>(v.upper) - v.lower);
      sense.push_back(-1);
    }
  }

  // objective over y
  std::vector<real> cost(static_cast<std::size_t>(ny), 0);
  real cost0 = pb.objective_constant;
  for (int k = 0; k < nx; ++k)
  {
    const real ck = pb.objective.empty() ? 0 : pb.objective[static_cast<std::size_t>(k)];
    for (int c : of_var[static_cast<std::size_t>(k)])
      cost[static_cast<std::size_t>(c)] += ck * cols[static_cast<std::size_t>(c)].sign;
    cost0 += ck * cols[static_cast<std::size_t>(of_var[static_cast<std::size_t>(k)].front())].offset;
  }

  // equality form: y | slacks | artificials | rhs
  const int m = static_cast<int>(rows.size());
  int ns = 0;
  for (int s : sense)
    ns += s != 0;
  const int width = ny + ns + m;
  std::vector<std::vector<real>> T(static_cast<std::size_t>(m), std::vector<real>(static_cast<std::size_t>(width + 1), 0));
  std::vector<int> basis(static_cast<std::size_t>(m));
  int slack = ny;
  for (int r = 0; r < m; ++r)
  {
    auto& t = T[static_cast<std::size_t>(r)];
    for (int c = 0; c < ny; ++c)
      t[static_cast<std::size_t>(c)] = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    if (sense[static_cast<std::size_t>(r)] != 0)
      t[static_cast<std::size_t>(slack++)] = sense[static_cast<std::size_t>(r)] < 0 ? 1 : -1;
    t[static_cast<std::size_t>(width)] = rhs[static_cast<std::size_t>(r)];
    if (t[static_cast<std::size_t>(width)] < 0)
      for (auto& e : t)
        e = -e;
    t[static_cast<std::size_t>(ny + ns + r)] = 1;
    basis[static_cast<std::size_t>(r)] = ny + ns + r;
  }
  const int first_art = ny + ns;
  const real eps = 1e-11L;

  auto pivot = [&](int r, int c) {
    auto& pr = T[static_cast<std::size_t>(r)];
    const real p = pr[static_cast<std::size_t>(c)];
    for (auto& e : pr)
      e /= p;
    for (int q = 0; q < m; ++q)
    {
      if (q == r)
        continue;
      auto& row = T[static_cast<std::size_t>(q)];
      const real f = row[static_cast<std::size_t>(c)];
      if (f != 0)
        for (int k = 0; k <= width; ++k)
          row[static_cast<std::size_t>(k)] -= f * pr[static_cast<std::size_t>(k)];
    }
    basis[static_cast<std::size_t>(r)] = c;
  };

  // returns false when unbounded
  auto run = [&](const std::vector<real>& c, bool allow_art) {
    for (int guard = 0; guard < 100000; ++guard)
    {
      int enter = -1;
      for (int j = 0; j < width && enter < 0; ++j)
      {
        if (!allow_art && j >= first_art)
          break;
        real d = c[static_cast<std::size_t>(j)];
        for (int r = 0; r < m; ++r)
          d -= c[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] * T[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        if (d < -1e-9L)
          enter = j;
      }
      if (enter < 0)
        return true;
      int leave = -1;
      real best = 0;
      for (int r = 0; r < m; ++r)
      {
        const real a = T[static_cast<std::size_t>(r)][static_cast<std::size_t>(enter)];
        if (a <= eps)
          continue;
        const real ratio = T[static_cast<std::size_t>(r)][static_cast<std::size_t>(width)] / a;
        if (leave < 0 || ratio < best - eps ||
            (ratio <= best + eps && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)]))
        {
          leave = r;
          best = ratio;
        }
      }
      if (leave < 0)
        return false;
      pivot(leave, enter);
    }
    return true;
  };

  TableauResult result;
  std::vector<real> phase1(static_cast<std::size_t>(width), 0);
  for (int j = first_art; j < width; ++j)
    phase1[static_cast<std::size_t>(j)] = 1;
  run(phase1, true);
  real infeas = 0;
  for (int r = 0; r < m; ++r)
    if (basis[static_cast<std::size_t>(r)] >= first_art)
      infeas += T[static_cast<std::size_t>(r)][static_cast<std::size_t>(width)];
  if (infeas > 1e-8L)
  {
    result.status = Outcome::infeasible;
    return result;
  }
  for (int r = 0; r < m; ++r)
    if (basis[static_cast<std::size_t>(r)] >= first_art)
      for (int j = 0; j < first_art; ++j)
        if (std::abs(T[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]) > 1e-9L)
        {
          pivot(r, j);
          break;
        }

  std::vector<real> phase2(static_cast<std::size_t>(width), 0);
  for (int j = 0; j < ny; ++j)
    phase2[static_cast<std::size_t>(j)] = cost[static_cast<std::size_t>(j)];
  if (!run(phase2, false))
  {
    result.status = Outcome::unbounded;
    return result;
  }

  std::vector<real> y(static_cast<std::size_t>(width), 0);
  for (int r = 0; r < m; ++r)
    y[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] = T[static_cast<std::size_t>(r)][static_cast<std::size_t>(width)];
  result.x.assign(static_cast<std::size_t>(nx), 0.0);
  std::vector<real> x(static_cast<std::size_t>(nx), 0);
  for (int k = 0; k < nx; ++k)
    x[static_cast<std::size_t>(k)] = cols[static_cast<std::size_t>(of_var[static_cast<std::size_t>(k)].front())].offset;
  for (int c = 0; c < ny; ++c)
    x[static_cast<std::size_t>(cols[static_cast<std::size_t>(c)].original)] +=
      cols[static_cast<std::size_t>(c)].sign * y[static_cast<std::size_t>(c)];
  real obj = cost0;
  for (int c = 0; c < ny; ++c)
    obj += cost[static_cast<std::size_t>(c)] * y[static_cast<std::size_t>(c)];
  for (int k = 0; k < nx; ++k)
    result.x[static_cast<std::size_t>(k)] = static_cast<double>(x[static_cast<std::size_t>(k)]);
  result.status = Outcome::optimal;
  result.objective = static_cast<double>(obj);
  return result;
}

MilpProblem random_lp(std::mt19937_64& rng, int max_vars, int max_rows, bool allow_free)
{
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  MilpProblem pb;
  pb.name = "random";
  const int n = pick(1, max_vars);
  const int m = pick(0, max_rows);
  std::vector<double> anchor;
  for (int k = 0; k < n; ++k)
  {
    Variable v;
    v.name = "x" + std::to_string(k);
    v.lower = pick(-5, 2);
    v.upper = v.lower + pick(0, 8);
    if (allow_free)
    {
      const int kind = pick(0, 5);
      if (kind == 0)
        v.lower = -batfleet::infinity;
      else if (kind == 1)
        v.upper = batfleet::infinity;
    }
    double a = std::isfinite(v.lower) ? v.lower : (std::isfinite(v.upper) ? v.upper - 2 : 0.0);
    if (std::isfinite(v.upper))
      a = std::min(a + pick(0, 3), v.upper);
    anchor.push_back(a);
    pb.add_variable(v, pick(-10, 10));
  }
  const bool consistent = pick(0, 4) != 0;
  for (int r = 0; r < m; ++r)
  {
    Constraint c;
    c.name = "r" + std::to_string(r);
    c.family = "row";
    double activity = 0.0;
    for (int k = 0; k < n; ++k)
      if (pick(0, 1))
      {
        const int coef = pick(-5, 5);
        if (coef != 0)
        {
          c.terms.emplace_back(k, coef);
          activity += coef * anchor[static_cast<std::size_t>(k)];
        }
      }
    if (c.terms.empty())
      c.terms.emplace_back(pick(0, n - 1), 1.0), activity = anchor[static_cast<std::size_t>(c.terms[0].first)];
    const int rel = pick(0, 4);
    c.relation = rel < 2 ? Relation::less_equal : rel < 4 ? Relation::greater_equal : Relation::equal;
    if (consistent)
      c.rhs = activity + (c.relation == Relation::less_equal ? pick(0, 4)
                          : c.relation == Relation::greater_equal ? -pick(0, 4)
                                                                  : 0);
    else
      c.rhs = pick(-20, 20);
    pb.add_constraint(c);
  }
  return pb;
}

std::set<ViolationKey> violated(const batfleet::planner::PlanningInstance& in, const batfleet::planner::Schedule& s)
{
  const int n = in.max_age, m = in.periods;
  std::set<ViolationKey> out;
  auto held = [&](int i, int j) { return s.in_use(i, j) + s.inventory(i, j); };
  auto B = [&](int j) { return s.purchases[static_cast<std::size_t>(j)]; };
  auto Z = [&](int j) { return s.purchase_flag[static_cast<std::size_t>(j)]; };

  // demand served by units in use, each delivering (1 - v_i) a u
  for (int j = 0; j < m; ++j)
  {
    long double supply = 0;
    for (int i = 0; i < n; ++i)
      supply += (1.0L - in.loss_fraction[static_cast<std::size_t>(i)]) * in.unit_capacity * in.usage_rate *
                s.in_use(i, j);
    const double d = in.demand[static_cast<std::size_t>(j)];
    if (supply < d - 1e-7 * std::max(1.0, d))
      out.insert({"9", -1, j});
  }
  // opening fleet
  for (int i = 1; i < n; ++i)
    if (held(i, 0) != in.initial_assets[static_cast<std::size_t>(i)])
      out.insert({"10", i, 0});
  if (held(0, 0) != in.initial_assets[0] + B(0))
    out.insert({"11", 0, 0});
  // ageing: what is held at (i-1, j-1) is held, or sold, at (i, j)
  for (int j = 1; j < m; ++j)
    for (int i = 1; i < n; ++i)
      if (held(i, j) + s.salvaged(i, j) != held(i - 1, j - 1))
        out.insert({"12", i, j});
  for (int j = 1; j < m; ++j)
    if (s.salvaged(n, j) != held(n - 1, j - 1))
      out.insert({"13", n, j});
  for (int i = 1; i <= n; ++i)
    if (s.salvaged(i, m) != held(i - 1, m - 1))
      out.insert({"14", i, m});
  for (int j = 1; j < m; ++j)
    if (held(0, j) != B(j))
      out.insert({"15", 0, j});
  for (int j = 0; j < m; ++j)
  {
    const double eff = (1.0 - in.loss_fraction[static_cast<std::size_t>(n)]) * in.usage_rate * in.unit_capacity;
    const auto big_m = static_cast<std::int64_t>(std::ceil(in.demand[static_cast<std::size_t>(j)] / eff - 1e-9));
    if (B(j) > big_m * Z(j))
      out.insert({"16", -1, j});
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (s.in_use(i, j) < 0 || s.inventory(i, j) < 0)
        out.insert({"17", i, j});
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= m; ++j)
      if (s.salvaged(i, j) < 0)
        out.insert({"18", i, j});
  for (int j = 0; j < m; ++j)
  {
    if (B(j) < 0)
      out.insert({"19", -1, j});
    if (Z(j) != 0 && Z(j) != 1)
      out.insert({"20", -1, j});
  }
  return out;
}

std::set<ViolationKey> keys_of(const std::vector<batfleet::planner::Violation>& v)
{
  std::set<ViolationKey> out;
  for (const auto& x : v)
    out.insert({x.constraint, x.age, x.time});
  return out;
}

namespace {

double side_j(const batfleet::degradation::OperatingCondition& cond, const batfleet::degradation::ChemistryParams& p,
              double delta, double t, double t_cc)
{
  const double temp = cond.ambient_k + 4.0 * cond.c_rate * t / t_cc;
  const double arr = std::exp(p.activation_energy / (8.314 * temp));
  const double jk = p.nominal_capacity * cond.c_rate / p.anode_area;
  return p.beta0 * std::exp(-p.lambda0 * arr * delta) / arr * jk;
}

double calendar_piece(double soc, const batfleet::degradation::OperatingCondition& cond,
                      const batfleet::degradation::ChemistryParams& p)
{
  const double rise = (cond.ambient_k - 273.15) / p.calendar_t0_c - 1.0;
  if (rise <= 0)
    return 0;
  const double base = rise * p.nominal_capacity / cond.cycles_per_day;
  if (soc >= 0.70 - 1e-12)
    return p.alpha3 * base;
  if (soc > 0.40 + 1e-12)
    return p.alpha2 * base;
  return p.alpha1 * soc * base;
}

} // namespace

double side_charge(const batfleet::degradation::OperatingCondition& cond,
                   const batfleet::degradation::ChemistryParams& p, double delta, int substeps)
{
  const double t_cc = 3600.0 * cond.dod / cond.c_rate;
  const double h = t_cc / substeps;
  double integral = 0.0;
  for (int k = 0; k < substeps; ++k)
    integral += 0.5 * h * (side_j(cond, p, delta, k * h, t_cc) + side_j(cond, p, delta, (k + 1) * h, t_cc));
  return p.anode_area * integral / 3600.0;
}

double one_cycle_loss(const batfleet::degradation::OperatingCondition& cond,
                      const batfleet::degradation::ChemistryParams& p, int substeps)
{
  const double t_cc = 3600.0 * cond.dod / cond.c_rate;
  const double h = t_cc / substeps;
  double q = 0.0, delta = 0.0;
  for (int k = 0; k < substeps; ++k)
  {
    q += p.anode_area * 0.5 * h * (side_j(cond, p, delta, k * h, t_cc) + side_j(cond, p, delta, (k + 1) * h, t_cc)) /
         3600.0;
    delta = p.kappa_delta * q / p.anode_area;
  }
  return q + calendar_piece(1.0, cond, p) + calendar_piece(1.0 - cond.dod, cond, p);
}

} // namespace oracle
