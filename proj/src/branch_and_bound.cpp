#include "batfleet/branch_and_bound.hpp"

#include "batfleet/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace batfleet::solver {

std::string_view to_string(MilpStatus status)
{
  switch (status)
  {
  case MilpStatus::optimal: return "optimal";
  case MilpStatus::feasible_gap: return "feasible_gap";
  case MilpStatus::infeasible: return "infeasible";
  case MilpStatus::node_limit: return "node_limit";
  }
  return "unknown";
}

double MilpResult::relative_gap() const
{
  if (!has_incumbent())
    return infinity;
  return (objective - best_bound) / std::max(1.0, std::abs(objective));
}

namespace {

struct Node
{
  double bound;
  std::int64_t id;
  std::vector<double> lower, upper;
};

struct NodeOrder
{
  bool operator()(const Node& a, const Node& b) const
  {
    // std::priority_queue pops the "largest"; invert for min-(bound, id).
    if (a.bound != b.bound)
      return a.bound > b.bound;
    return a.id > b.id;
  }
};

class Search
{
public:
  Search(const MilpProblem& problem, const MilpOptions& options) : p_(problem), opt_(options) {}

  MilpResult run()
  {
    p_.validate(/*require_referenced=*/false);
    const auto start = std::chrono::steady_clock::now();

    Node root{-infinity, next_id_++, {}, {}};
    for (const auto& v : p_.variables)
    {
      double lo = v.lower, up = v.upper;
      if (v.integer)
      {
        lo = std::isfinite(lo) ? std::ceil(lo - opt_.integrality_tol) : lo;
        up = std::isfinite(up) ? std::floor(up + opt_.integrality_tol) : up;
      }
      root.lower.push_back(lo);
      root.upper.push_back(up);
    }
    queue_.push(std::move(root));
    if (!opt_.initial_incumbent.empty() && acceptable(opt_.initial_incumbent))
      offer(opt_.initial_incumbent);

    bool stopped_by_nodes = false, stopped_by_time = false;
    while (!queue_.empty())
    {
      if (closed(queue_.top().bound))
        break;
      if (result_.nodes_explored >= opt_.node_limit)
      {
        stopped_by_nodes = true;
        break;
      }
      if (opt_.time_limit > 0.0 &&
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > opt_.time_limit)
      {
        stopped_by_time = true;
        break;
      }
      Node node = queue_.top();
      queue_.pop();
      if (opt_.record_trace)
        result_.bound_trace.push_back(std::max(node.bound, last_trace_));
      last_trace_ = std::max(node.bound, last_trace_);
      process(node);
    }

    if (queue_.empty() || (!stopped_by_nodes && !stopped_by_time))
    {
      // Search exhausted or gap closed.
      if (!result_.has_incumbent())
      {
        result_.status = MilpStatus::infeasible;
        result_.best_bound = infinity;
        return result_;
      }
      result_.best_bound = std::min(result_.objective, pruned_floor_);
      if (!queue_.empty())
        result_.best_bound = std::min(result_.best_bound, queue_.top().bound);
      result_.status = MilpStatus::optimal;
      return result_;
    }
    result_.best_bound = std::min({queue_.top().bound, pruned_floor_, result_.has_incumbent() ? result_.objective : infinity});
    result_.status = stopped_by_nodes ? MilpStatus::node_limit : MilpStatus::feasible_gap;
    return result_;
  }

private:
  double tolerance() const
  {
    if (!result_.has_incumbent())
      return 0.0;
    return std::max(opt_.absolute_gap, opt_.gap * std::max(1.0, std::abs(result_.objective)));
  }

  /// True when a node with this bound cannot improve the incumbent enough.
  bool closed(double bound) const
  {
    return result_.has_incumbent() && bound >= result_.objective - tolerance();
  }

  void offer(std::vector<double> values)
  {
    for (std::size_t k = 0; k < values.size(); ++k)
      if (p_.variables[k].integer)
        values[k] = std::round(values[k]);
    const double objective = p_.objective_value(values);
    if (!result_.has_incumbent() || objective < result_.objective)
    {
      result_.incumbent = std::move(values);
      result_.objective = objective;
    }
  }

  bool acceptable(const std::vector<double>& values) const
  {
    if (values.size() != p_.variables.size())
      return false;
    for (std::size_t k = 0; k < values.size(); ++k)
      if (p_.variables[k].integer && std::abs(values[k] - std::round(values[k])) > opt_.integrality_tol)
        return false;
    return p_.max_scaled_violation(values) <= opt_.feasibility_tol;
  }

  void process(const Node& node)
  {
    LpSolution lp = solve_lp(p_, node.lower, node.upper, opt_.lp);
    ++result_.nodes_explored;
    if (lp.status == LpStatus::infeasible)
      return;
    if (lp.status == LpStatus::unbounded)
      throw SolverError("branch and bound: the relaxation is unbounded");
    if (closed(lp.objective))
    {
      pruned_floor_ = std::min(pruned_floor_, lp.objective);
      return;
    }

    int branch_var = -1;
    double best_distance = infinity;
    for (std::size_t k = 0; k < lp.values.size(); ++k)
    {
      if (!p_.variables[k].integer)
        continue;
      const double x = lp.values[k];
      const double frac = x - std::floor(x);
      if (std::min(frac, 1.0 - frac) <= opt_.integrality_tol)
        continue;
      const double distance = std::abs(frac - 0.5);
      if (distance < best_distance)
      {
        best_distance = distance;
        branch_var = static_cast<int>(k);
      }
    }
    if (branch_var < 0)
    {
      offer(lp.values);
      return;
    }

    if (opt_.heuristic)
      if (auto candidate = opt_.heuristic(lp); candidate && acceptable(*candidate))
        offer(std::move(*candidate));

    ++result_.branchings;
    const auto k = static_cast<std::size_t>(branch_var);
    const double x = lp.values[k];
    Node down{lp.objective, next_id_++, node.lower, node.upper};
    down.upper[k] = std::floor(x);
    Node up{lp.objective, next_id_++, node.lower, node.upper};
    up.lower[k] = std::ceil(x);
    queue_.push(std::move(down));
    queue_.push(std::move(up));
  }

  const MilpProblem& p_;
  const MilpOptions& opt_;
  MilpResult result_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue_;
  std::int64_t next_id_ = 0;
  double last_trace_ = -infinity;
  double pruned_floor_ = infinity; // smallest relaxation value cut off by the gap test
};

} // namespace

MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& options)
{
  Search search(problem, options);
  return search.run();
}

} // namespace batfleet::solver
