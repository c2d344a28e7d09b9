#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "slblr/gap.hpp"
#include "slblr/problem.hpp"
#include "slblr/types.hpp"

namespace slblr::test {

/// Exhaustive assignment enumeration: every job to every machine. The
/// independent primal oracle used to cross-check the branch-and-bound.
inline std::pair<bool, std::int64_t> enumerate_gap_optimum(const GapInstance& instance) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<int> assignment(static_cast<std::size_t>(instance.jobs), 0);
  std::function<void(Index, std::int64_t)> walk = [&](Index job, std::int64_t cost) {
    if (cost >= best) return;
    if (job == instance.jobs) {
      if (instance.assignment_fits(assignment)) best = std::min(best, cost);
      return;
    }
    for (int j = 0; j < instance.machines; ++j) {
      assignment[static_cast<std::size_t>(job)] = j;
      walk(job + 1, cost + instance.cost(job, j));
    }
  };
  // Without the cost pruning this is the plain M^N walk; pruning only skips
  // provably worse branches.
  walk(0, 0);
  return {best != std::numeric_limits<std::int64_t>::max(), best};
}

/// Exhaustive 0/1 subset enumeration for small knapsacks.
inline double enumerate_knapsack_min(const Vector& costs, const std::vector<std::int64_t>& weights,
                                     std::int64_t capacity) {
  const Index n = costs.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double value = 0.0;
    std::int64_t weight = 0;
    for (Index i = 0; i < n; ++i)
      if (mask & (1ULL << i)) {
        value += costs[i];
        weight += weights[static_cast<std::size_t>(i)];
      }
    if (weight <= capacity) best = std::min(best, value);
  }
  return best;
}

/// Composite holding a full assignment (job i on machine assign[i]).
inline CompositeSolution assignment_composite(const SeparableProblem& problem,
                                              const GapInstance& instance,
                                              const std::vector<int>& assignment) {
  CompositeSolution composite(problem);
  for (Index j = 0; j < instance.machines; ++j) {
    Vector part = Vector::Zero(instance.jobs);
    for (Index i = 0; i < instance.jobs; ++i)
      if (assignment[static_cast<std::size_t>(i)] == j) part[i] = 1.0;
    composite.set_part(problem, j, part);
  }
  return composite;
}

}  // namespace slblr::test
