#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace batfleet {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct Variable
{
  std::string name;
  double lower = 0.0;
  double upper = infinity;
  bool integer = false;
};

enum class Relation { less_equal, equal, greater_equal };

struct Constraint
{
  std::string name;
  std::string family; // model constraint the row belongs to, e.g. "9"
  std::vector<std::pair<int, double>> terms;
  Relation relation = Relation::equal;
  double rhs = 0.0;
};

/// min c'x + c0 subject to rows and bounds.
struct MilpProblem
{
  std::string name = "problem";
  std::vector<Variable> variables;
  std::vector<double> objective;
  double objective_constant = 0.0;
  std::vector<Constraint> constraints;

  int add_variable(Variable v, double cost = 0.0);
  void add_constraint(Constraint c) { constraints.push_back(std::move(c)); }

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }

  double objective_value(const std::vector<double>& x) const;
  double row_activity(int row, const std::vector<double>& x) const;
  /// Largest bound or row violation of x (0 when feasible).
  double max_violation(const std::vector<double>& x) const;
  /// Same check with every row divided by its largest absolute coefficient.
  double max_scaled_violation(const std::vector<double>& x) const;

  /// Throws InputError on malformed data (bad indices, lower > upper, NaN) and,
  /// when asked, on columns that appear in neither objective nor rows.
  void validate(bool require_referenced = true) const;
};

} // namespace batfleet
