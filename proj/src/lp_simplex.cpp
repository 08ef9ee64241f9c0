/*
 * lp_simplex.cpp
 *
 * Bounded-variable primal simplex on a dense tableau.
 *
 * Every row gets a slack (inequalities) and an artificial column. Phase 1
 * minimises the artificial sum from the all-artificial basis; phase 2 fixes
 * artificials at zero and minimises the real objective. Nonbasic columns sit
 * at one of their bounds (or at zero when free). Pricing is Dantzig with a
 * permanent switch to Bland's rule after a run of degenerate pivots; the ratio
 * test is Harris' two-pass variant outside Bland mode. The basis is reinverted
 * from the original columns every few pivots and once at the end.
 */
#include "batfleet/lp.hpp"

#include "batfleet/errors.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>

namespace batfleet::solver {

std::string_view to_string(LpStatus status)
{
  switch (status)
  {
  case LpStatus::optimal: return "optimal";
  case LpStatus::infeasible: return "infeasible";
  case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

enum class State : unsigned char { basic, at_lower, at_upper, at_zero };

class Simplex
{
public:
  Simplex(const MilpProblem& problem, std::span<const double> lower, std::span<const double> upper,
          const LpOptions& options)
    : problem_(problem), opt_(options)
  {
    nstruct_ = problem.num_variables();
    nrows_ = problem.num_constraints();
    int nslack = 0;
    for (const auto& c : problem.constraints)
      if (c.relation != Relation::equal)
        ++nslack;
    first_art_ = nstruct_ + nslack;
    ncols_ = first_art_ + nrows_;

    a_ = Eigen::MatrixXd::Zero(nrows_, ncols_);
    b_ = Eigen::VectorXd::Zero(nrows_);
    lo_.assign(static_cast<std::size_t>(ncols_), 0.0);
    up_.assign(static_cast<std::size_t>(ncols_), infinity);
    for (int k = 0; k < nstruct_; ++k)
    {
      lo_[static_cast<std::size_t>(k)] = lower[static_cast<std::size_t>(k)];
      up_[static_cast<std::size_t>(k)] = upper[static_cast<std::size_t>(k)];
    }

    int slack = nstruct_;
    for (int r = 0; r < nrows_; ++r)
    {
      const auto& c = problem.constraints[static_cast<std::size_t>(r)];
      double scale = 0.0;
      for (const auto& term : c.terms)
        scale = std::max(scale, std::abs(term.second));
      scale = scale > 0.0 ? 1.0 / scale : 1.0;
      for (const auto& [col, coef] : c.terms)
        a_(r, col) += coef * scale;
      b_(r) = c.rhs * scale;
      if (c.relation == Relation::less_equal)
        a_(r, slack++) = 1.0;
      else if (c.relation == Relation::greater_equal)
        a_(r, slack++) = -1.0;
    }

    cost_.assign(static_cast<std::size_t>(ncols_), 0.0);
    double cmax = 0.0;
    for (int k = 0; k < nstruct_; ++k)
    {
      cost_[static_cast<std::size_t>(k)] = problem.objective[static_cast<std::size_t>(k)];
      cmax = std::max(cmax, std::abs(cost_[static_cast<std::size_t>(k)]));
    }
    cost_scale_ = std::max(1.0, cmax);

    max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations : 50L * (nrows_ + ncols_) + 10000L;
  }

  LpSolution run()
  {
    LpSolution sol;
    for (int k = 0; k < nstruct_; ++k)
      if (lo_[static_cast<std::size_t>(k)] > up_[static_cast<std::size_t>(k)])
        return sol; // empty box

    initial_basis();
    if (!iterate(/*phase=*/1))
      throw SolverError("simplex: phase 1 reported an unbounded direction");
    // artificial left in row r: allow rounding noise relative to that row only
    bool feasible = true;
    for (int r = 0; r < nrows_; ++r)
      if (x_[u(first_art_ + r)] > 1e-9 * std::max(1.0, std::abs(b_(r))))
        feasible = false;
    if (!feasible)
    {
      sol.iterations = iterations_;
      return sol;
    }

    leave_phase_one();
    if (!iterate(/*phase=*/2))
    {
      sol.status = LpStatus::unbounded;
      sol.iterations = iterations_;
      return sol;
    }
    reinvert(2);

    sol.status = LpStatus::optimal;
    sol.values.assign(x_.begin(), x_.begin() + nstruct_);
    for (int k = 0; k < nstruct_; ++k)
    {
      double& v = sol.values[static_cast<std::size_t>(k)];
      v = std::clamp(v, lo_[static_cast<std::size_t>(k)], up_[static_cast<std::size_t>(k)]);
    }
    sol.objective = problem_.objective_value(sol.values);
    sol.dual_feasible = dual_feasible(2);
    sol.iterations = iterations_;
    return sol;
  }

private:
  std::size_t u(int k) const { return static_cast<std::size_t>(k); }

  bool is_art(int k) const { return k >= first_art_; }

  double phase_cost(int k, int phase) const
  {
    if (phase == 1)
      return is_art(k) ? 1.0 : 0.0;
    return cost_[u(k)];
  }

  void initial_basis()
  {
    x_.assign(u(ncols_), 0.0);
    state_.assign(u(ncols_), State::at_lower);
    for (int k = 0; k < first_art_; ++k)
    {
      if (std::isfinite(lo_[u(k)]))
      {
        x_[u(k)] = lo_[u(k)];
        state_[u(k)] = State::at_lower;
      }
      else if (std::isfinite(up_[u(k)]))
      {
        x_[u(k)] = up_[u(k)];
        state_[u(k)] = State::at_upper;
      }
      else
      {
        x_[u(k)] = 0.0;
        state_[u(k)] = State::at_zero;
      }
    }
    Eigen::VectorXd residual = b_;
    for (int k = 0; k < first_art_; ++k)
      if (x_[u(k)] != 0.0)
        residual -= a_.col(k) * x_[u(k)];

    head_.assign(u(nrows_), 0);
    for (int r = 0; r < nrows_; ++r)
    {
      const double sign = residual(r) >= 0.0 ? 1.0 : -1.0;
      a_(r, first_art_ + r) = sign;
      head_[u(r)] = first_art_ + r;
      state_[u(first_art_ + r)] = State::basic;
      x_[u(first_art_ + r)] = std::abs(residual(r));
    }
    // B = diag(sign), so B^-1 A flips the sign of negative rows.
    tableau_ = a_;
    for (int r = 0; r < nrows_; ++r)
      if (a_(r, first_art_ + r) < 0.0)
        tableau_.row(r) *= -1.0;
    compute_reduced_costs(1);
  }

  void compute_reduced_costs(int phase)
  {
    Eigen::VectorXd cb(nrows_);
    for (int r = 0; r < nrows_; ++r)
      cb(r) = phase_cost(head_[u(r)], phase);
    Eigen::VectorXd reduced = -(tableau_.transpose() * cb);
    d_.resize(u(ncols_));
    for (int k = 0; k < ncols_; ++k)
      d_[u(k)] = phase_cost(k, phase) + reduced(k);
    for (int r = 0; r < nrows_; ++r)
      d_[u(head_[u(r)])] = 0.0;
  }

  void reinvert(int phase)
  {
    if (nrows_ == 0)
    {
      compute_reduced_costs(phase);
      return;
    }
    Eigen::MatrixXd basis(nrows_, nrows_);
    for (int r = 0; r < nrows_; ++r)
      basis.col(r) = a_.col(head_[u(r)]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    const double det_scale = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(det_scale > 1e-13))
      throw SolverError("simplex: basis became singular");
    tableau_ = lu.solve(a_);
    Eigen::VectorXd rhs = b_;
    for (int k = 0; k < ncols_; ++k)
      if (state_[u(k)] != State::basic && x_[u(k)] != 0.0)
        rhs -= a_.col(k) * x_[u(k)];
    Eigen::VectorXd xb = lu.solve(rhs);
    for (int r = 0; r < nrows_; ++r)
      x_[u(head_[u(r)])] = xb(r);
    compute_reduced_costs(phase);
    pivots_since_refactor_ = 0;
  }

  bool eligible(int k, int phase, double& direction) const
  {
    if (state_[u(k)] == State::basic)
      return false;
    if (phase == 2 && is_art(k))
      return false;
    if (lo_[u(k)] == up_[u(k)])
      return false;
    const double tol = opt_.optimality_tol * (phase == 1 ? 1.0 : cost_scale_);
    const double dk = d_[u(k)];
    switch (state_[u(k)])
    {
    case State::at_lower:
      if (dk < -tol)
      {
        direction = 1.0;
        return true;
      }
      return false;
    case State::at_upper:
      if (dk > tol)
      {
        direction = -1.0;
        return true;
      }
      return false;
    case State::at_zero:
      if (std::abs(dk) > tol)
      {
        direction = dk < 0.0 ? 1.0 : -1.0;
        return true;
      }
      return false;
    case State::basic: break;
    }
    return false;
  }

  bool dual_feasible(int phase) const
  {
    for (int k = 0; k < ncols_; ++k)
    {
      double dir = 0.0;
      if (eligible(k, phase, dir))
        return false;
    }
    return true;
  }

  /// Harris two-pass ratio test (exact minimum with lowest-index ties under
  /// Bland's rule). Returns the blocking row (-1 if none) and the step.
  std::pair<int, double> ratio_test(int entering, double direction, bool bland, double pivot_tol) const
  {
    const double feas = opt_.feasibility_tol;
    const auto column = tableau_.col(entering);
    double relaxed_step = infinity;
    for (int r = 0; r < nrows_; ++r)
    {
      const double alpha = column(r);
      if (std::abs(alpha) <= pivot_tol)
        continue;
      const int k = head_[u(r)];
      const double delta = -direction * alpha;
      double limit = infinity;
      if (delta < 0.0 && std::isfinite(lo_[u(k)]))
        limit = (x_[u(k)] - lo_[u(k)] + (bland ? 0.0 : feas)) / -delta;
      else if (delta > 0.0 && std::isfinite(up_[u(k)]))
        limit = (up_[u(k)] - x_[u(k)] + (bland ? 0.0 : feas)) / delta;
      relaxed_step = std::min(relaxed_step, limit);
    }
    int leave_row = -1;
    double step = infinity;
    double best_alpha = 0.0;
    for (int r = 0; r < nrows_; ++r)
    {
      const double alpha = column(r);
      if (std::abs(alpha) <= pivot_tol)
        continue;
      const int k = head_[u(r)];
      const double delta = -direction * alpha;
      double limit = infinity;
      if (delta < 0.0 && std::isfinite(lo_[u(k)]))
        limit = (x_[u(k)] - lo_[u(k)]) / -delta;
      else if (delta > 0.0 && std::isfinite(up_[u(k)]))
        limit = (up_[u(k)] - x_[u(k)]) / delta;
      if (!std::isfinite(limit))
        continue;
      limit = std::max(0.0, limit);
      if (bland)
      {
        if (limit < step - 1e-12 || (limit <= step + 1e-12 && leave_row >= 0 && k < head_[u(leave_row)]))
        {
          step = std::min(step, limit);
          leave_row = r;
        }
      }
      else if (limit <= relaxed_step && std::abs(alpha) > best_alpha)
      {
        best_alpha = std::abs(alpha);
        leave_row = r;
        step = limit;
      }
    }
    return {leave_row, step};
  }

  /// Returns false when the objective is unbounded below.
  bool iterate(int phase)
  {
    bool bland = false;
    int degenerate_run = 0;
    while (true)
    {
      if (++iterations_ > max_iterations_)
        throw SolverError(fmt::format("simplex: iteration cap {} reached", max_iterations_));

      int entering = -1;
      double direction = 0.0;
      double best_score = 0.0;
      for (int k = 0; k < ncols_; ++k)
      {
        double dir = 0.0;
        if (!eligible(k, phase, dir))
          continue;
        if (bland)
        {
          entering = k;
          direction = dir;
          break;
        }
        const double score = std::abs(d_[u(k)]);
        if (score > best_score)
        {
          best_score = score;
          entering = k;
          direction = dir;
        }
      }
      if (entering < 0)
        return true;

      auto [leave_row, step] = ratio_test(entering, direction, bland, opt_.pivot_tol);
      const double span = up_[u(entering)] - lo_[u(entering)];
      if (!std::isfinite(step) && !std::isfinite(span))
      {
        // Tiny pivots were skipped; rebuild the tableau and look again before
        // calling the problem unbounded.
        reinvert(phase);
        if (!eligible(entering, phase, direction))
          continue;
        std::tie(leave_row, step) = ratio_test(entering, direction, bland, 1e-13);
      }
      const bool flip = std::isfinite(span) && span <= step;
      if (flip)
        step = span;
      if (!std::isfinite(step))
        return false;
      const auto column = tableau_.col(entering);

      if (step <= 1e-12)
      {
        if (++degenerate_run > opt_.degenerate_threshold)
          bland = true;
      }
      else
        degenerate_run = 0;

      for (int r = 0; r < nrows_; ++r)
      {
        const double alpha = column(r);
        if (alpha != 0.0)
          x_[u(head_[u(r)])] -= direction * alpha * step;
      }
      x_[u(entering)] += direction * step;

      if (flip)
      {
        if (direction > 0.0)
        {
          state_[u(entering)] = State::at_upper;
          x_[u(entering)] = up_[u(entering)];
        }
        else
        {
          state_[u(entering)] = State::at_lower;
          x_[u(entering)] = lo_[u(entering)];
        }
        continue;
      }

      const int leaving = head_[u(leave_row)];
      const double delta = -direction * column(leave_row);
      if (delta < 0.0)
      {
        state_[u(leaving)] = State::at_lower;
        x_[u(leaving)] = lo_[u(leaving)];
      }
      else
      {
        state_[u(leaving)] = State::at_upper;
        x_[u(leaving)] = up_[u(leaving)];
      }
      pivot(leave_row, entering);
      if (++pivots_since_refactor_ >= opt_.refactor_interval)
        reinvert(phase);
    }
  }

  void pivot(int row, int col)
  {
    const double alpha = tableau_(row, col);
    Eigen::VectorXd column = tableau_.col(col);
    Eigen::RowVectorXd pivot_row = tableau_.row(row) / alpha;
    tableau_.noalias() -= column * pivot_row;
    tableau_.row(row) = pivot_row;
    const double dq = d_[u(col)];
    if (dq != 0.0)
      for (int k = 0; k < ncols_; ++k)
        d_[u(k)] -= dq * pivot_row(k);
    d_[u(col)] = 0.0;
    head_[u(row)] = col;
    state_[u(col)] = State::basic;
  }

  void leave_phase_one()
  {
    for (int r = 0; r < nrows_; ++r)
    {
      const int art = first_art_ + r;
      up_[u(art)] = 0.0;
      if (state_[u(art)] != State::basic)
      {
        state_[u(art)] = State::at_lower;
        x_[u(art)] = 0.0;
      }
    }
    // Drive basic artificials out of the basis with degenerate pivots.
    for (int r = 0; r < nrows_; ++r)
    {
      if (!is_art(head_[u(r)]))
        continue;
      int best = -1;
      double best_abs = 1e-5;
      for (int k = 0; k < first_art_; ++k)
      {
        if (state_[u(k)] == State::basic)
          continue;
        const double a = std::abs(tableau_(r, k));
        if (a > best_abs)
        {
          best_abs = a;
          best = k;
        }
      }
      if (best < 0)
        continue; // redundant row, the artificial stays basic at zero
      const int art = head_[u(r)];
      x_[u(art)] = 0.0;
      state_[u(art)] = State::at_lower;
      pivot(r, best);
    }
    reinvert(2);
  }

  const MilpProblem& problem_;
  LpOptions opt_;
  int nstruct_ = 0, nrows_ = 0, first_art_ = 0, ncols_ = 0;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd tableau_;
  std::vector<double> lo_, up_, cost_, x_, d_;
  std::vector<State> state_;
  std::vector<int> head_;
  double cost_scale_ = 1.0;
  long iterations_ = 0;
  long max_iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

} // namespace

LpSolution solve_lp(const MilpProblem& problem, const LpOptions& options)
{
  std::vector<double> lower, upper;
  for (const auto& v : problem.variables)
  {
    lower.push_back(v.lower);
    upper.push_back(v.upper);
  }
  return solve_lp(problem, lower, upper, options);
}

LpSolution solve_lp(const MilpProblem& problem, std::span<const double> lower, std::span<const double> upper,
                    const LpOptions& options)
{
  problem.validate(/*require_referenced=*/false);
  if (lower.size() != problem.variables.size() || upper.size() != problem.variables.size())
    throw InputError("solve_lp: bound vectors do not match the variable count");
  Simplex simplex(problem, lower, upper, options);
  return simplex.run();
}

} // namespace batfleet::solver
