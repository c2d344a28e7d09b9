#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slblr/engine.hpp"
#include "slblr/gap.hpp"
#include "slblr/problem.hpp"

namespace slblr {

struct RepairReport {
  bool feasible = false;
  std::vector<int> assignment;             // job -> machine (assignment instances)
  Vector solution;                         // assembled solution vector
  double upper_bound = 0.0;                // feasible cost
  std::optional<double> lower_bound;       // certified dual bound, filled by the caller
  std::optional<double> relative_gap;      // (UB - LB) / UB
  int jobs_adjusted = 0;
  double wall_seconds = 0.0;
  std::string note;                        // failure detail when not feasible
};

struct RepairBudget {
  int eviction_rounds = 6;
  std::int64_t node_cap = 1'000'000;
};

/// Turns the terminal composite into a feasible assignment: cleanly assigned
/// jobs are kept, conflicted jobs are re-solved exactly over the remaining
/// capacity, and when the residual is infeasible the lowest-regret clean
/// jobs are unfixed and the solve retried, up to the budget. Exhausting the
/// budget yields a failed report, not an exception.
RepairReport repair_gap(const GapInstance& instance, const CompositeSolution& composite,
                        const RepairBudget& budget = {});

/// Cheapest-fit completion in decreasing-regret job order; the fallback past
/// the branch-and-bound node cap and the baseline the exact residual solve
/// must dominate.
std::optional<std::vector<int>> greedy_complete(const GapInstance& instance,
                                                const std::vector<Index>& jobs,
                                                const GapInstance::IntVector& residual_capacity);

/// Feasibility-first completion: bulky jobs first, least resource use per
/// machine. Cost-blind; callers polish afterwards.
std::optional<std::vector<int>> fit_complete(const GapInstance& instance,
                                             const std::vector<Index>& jobs,
                                             const GapInstance::IntVector& residual_capacity);

/// Cost-improving shift and swap passes over the given jobs, holding every
/// other assignment fixed. Feasibility is preserved.
void polish_assignment(const GapInstance& instance, const std::vector<Index>& jobs,
                       std::vector<int>* assignment, int max_passes = 25);

/// Rounding repair for bounded-integer instances with greater-equal rows:
/// raises the cheapest violation-reducing variable until feasible.
RepairReport repair_small_milp(const SmallMilpInstance& instance, const Vector& start);

/// Relative gap (UB - LB) / UB against the trace's certified dual bound.
/// Throws ValidationError when the trace has no certified bound and
/// SolverError when UB undercuts the bound by more than 1e-9.
double gap_metrics(double upper_bound, const RunTrace& trace);

}  // namespace slblr
