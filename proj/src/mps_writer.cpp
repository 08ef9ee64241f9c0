// Fixed-column MPS. Names longer than 8 characters push later fields to the
// right; readers in free-format mode accept the file either way.
#include "batfleet/fleet_solver.hpp"

#include <fmt/format.h>

#include <cmath>
#include <map>

namespace batfleet::solver {

namespace {

std::string number(double v) { return fmt::format("{:.12g}", v); }

void line(std::ostream& out, std::string_view type, std::string_view a, std::string_view b = {},
          std::string_view c = {}, std::string_view d = {}, std::string_view e = {})
{
  std::string s = fmt::format(" {:<2} {:<8}", type, a);
  if (!b.empty())
    s += fmt::format("  {:<8}  {:>12}", b, c);
  if (!d.empty())
    s += fmt::format("   {:<8}  {:>12}", d, e);
  while (!s.empty() && s.back() == ' ')
    s.pop_back();
  out << s << '\n';
}

char row_type(Relation r)
{
  switch (r)
  {
  case Relation::less_equal: return 'L';
  case Relation::greater_equal: return 'G';
  case Relation::equal: return 'E';
  }
  return 'E';
}

} // namespace

void write_mps(std::ostream& out, const MilpProblem& p)
{
  p.validate(/*require_referenced=*/false);
  out << "NAME          " << p.name << '\n';
  out << "ROWS\n";
  line(out, "N", "COST");
  for (const auto& c : p.constraints)
    line(out, std::string(1, row_type(c.relation)), c.name);

  // column-wise view of the rows
  std::vector<std::vector<std::pair<int, double>>> columns(p.variables.size());
  for (int r = 0; r < p.num_constraints(); ++r)
  {
    std::map<int, double> merged;
    for (const auto& [col, coef] : p.constraints[static_cast<std::size_t>(r)].terms)
      merged[col] += coef;
    for (const auto& [col, coef] : merged)
      if (coef != 0.0)
        columns[static_cast<std::size_t>(col)].emplace_back(r, coef);
  }

  out << "COLUMNS\n";
  bool in_integer_block = false;
  int marker = 0;
  for (std::size_t k = 0; k < p.variables.size(); ++k)
  {
    const auto& v = p.variables[k];
    if (v.integer != in_integer_block)
    {
      out << fmt::format("    MARKER{:04d}  'MARKER'                 '{}'\n", marker++,
                         v.integer ? "INTORG" : "INTEND");
      in_integer_block = v.integer;
    }
    std::vector<std::pair<std::string, double>> entries;
    if (p.objective[k] != 0.0)
      entries.emplace_back("COST", p.objective[k]);
    for (const auto& [r, coef] : columns[k])
      entries.emplace_back(p.constraints[static_cast<std::size_t>(r)].name, coef);
    if (entries.empty())
      entries.emplace_back("COST", 0.0);
    for (std::size_t e = 0; e < entries.size(); e += 2)
    {
      if (e + 1 < entries.size())
        line(out, "", v.name, entries[e].first, number(entries[e].second), entries[e + 1].first,
             number(entries[e + 1].second));
      else
        line(out, "", v.name, entries[e].first, number(entries[e].second));
    }
  }
  if (in_integer_block)
    out << fmt::format("    MARKER{:04d}  'MARKER'                 'INTEND'\n", marker++);

  out << "RHS\n";
  if (p.objective_constant != 0.0)
    line(out, "", "RHS", "COST", number(-p.objective_constant));
  for (const auto& c : p.constraints)
    if (c.rhs != 0.0)
      line(out, "", "RHS", c.name, number(c.rhs));

  out << "BOUNDS\n";
  for (const auto& v : p.variables)
  {
    const bool lo_inf = !std::isfinite(v.lower);
    const bool up_inf = !std::isfinite(v.upper);
    if (lo_inf && up_inf)
      line(out, "FR", "BND", v.name);
    else if (!lo_inf && !up_inf && v.lower == v.upper)
      line(out, "FX", "BND", v.name, number(v.lower));
    else
    {
      if (lo_inf)
        line(out, "MI", "BND", v.name);
      else if (v.lower != 0.0)
        line(out, "LO", "BND", v.name, number(v.lower));
      if (!up_inf)
        line(out, "UP", "BND", v.name, number(v.upper));
    }
  }
  out << "ENDATA\n";
}

} // namespace batfleet::solver
