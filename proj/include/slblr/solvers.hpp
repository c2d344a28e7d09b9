#pragma once

#include <optional>
#include <vector>

#include "slblr/gap.hpp"
#include "slblr/knapsack.hpp"
#include "slblr/problem.hpp"

namespace slblr {

struct SubproblemResult {
  Vector solution;
  double value = 0.0;  // priced objective of the subproblem slice
};

/// Separable bound selection: each variable sits at its lower bound when the
/// priced coefficient is >= 0 (tolerance 1e-12, ties toward the lower bound)
/// and at its upper bound otherwise.
SubproblemResult solve_bounded_integer_linear(const Vector& priced_costs,
                                              const std::vector<VariableBounds>& bounds);

/// Exact solve of one subproblem at the given priced costs. Dispatches to
/// the knapsack DP for binary single-row subproblems, to bound selection for
/// unconstrained boxes, and to bounded enumeration otherwise.
SubproblemResult solve_subproblem(const SeparableProblem& problem, Index sub,
                                  const Vector& priced_costs_for_sub,
                                  std::int64_t enumeration_cap = 1'000'000);

/// Exact dual value q(lambda): every subproblem solved to optimality.
double dual_function_oracle(const SeparableProblem& problem, const Vector& multipliers);

/// Exact relaxed solution at lambda (all subproblems optimal); also returns
/// q(lambda) through the value field of each part's contribution.
CompositeSolution solve_relaxed_exact(const SeparableProblem& problem, const Vector& multipliers);

struct OracleResult {
  bool feasible = false;
  double value = 0.0;
  Vector solution;                  // assembled, empty when infeasible
  std::int64_t nodes_explored = 0;  // enumeration / branch-and-bound nodes
};

/// Ground-truth optimum of the full problem by enumeration over the product
/// of local feasible sets. Refuses (ResourceError) when the candidate count
/// exceeds the cap; tests must shrink the instance.
OracleResult exact_primal_oracle(const SeparableProblem& problem,
                                 std::int64_t candidate_cap = 10'000'000);

/// Ground-truth optimum of an assignment instance by depth-first
/// branch-and-bound over jobs. Refuses (ResourceError) past the node cap.
OracleResult exact_primal_oracle(const GapInstance& instance,
                                 std::int64_t node_cap = 1'000'000);

/// Best assignment of `jobs` (given residual capacities) extending a partial
/// solution; used by the primal oracle and the repair heuristic. Returns
/// nullopt when no completion fits. The node budget is consumed in place.
std::optional<std::vector<int>> branch_and_bound_assignment(
    const GapInstance& instance, const std::vector<Index>& jobs,
    const GapInstance::IntVector& residual_capacity, std::int64_t* node_budget);

struct ResidualSearchResult {
  std::optional<std::vector<int>> assignment;  // best found, in input job order
  bool proven = false;  // optimality (or infeasibility) proven within budget
  std::int64_t nodes = 0;
};

/// Depth-first branch-and-bound over the given jobs, optionally warm-started
/// with an incumbent. Exhausting the node cap returns the incumbent
/// unproven instead of failing.
ResidualSearchResult solve_residual_assignment(
    const GapInstance& instance, const std::vector<Index>& jobs,
    const GapInstance::IntVector& residual_capacity, std::int64_t node_cap,
    const std::optional<std::vector<int>>& warm_start = std::nullopt);

}  // namespace slblr
