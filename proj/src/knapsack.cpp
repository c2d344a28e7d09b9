#include "slblr/knapsack.hpp"

#include <algorithm>
#include <sstream>

namespace slblr {

namespace {
constexpr double kFixTolerance = 1e-12;
}

KnapsackResult solve_knapsack_min(const KnapsackSubproblem& sub) {
  const Index n = sub.reduced_costs.size();
  if (static_cast<Index>(sub.weights.size()) != n)
    throw ValidationError("knapsack weight count mismatch");
  if (sub.capacity < 0) throw ValidationError("negative knapsack capacity");
  for (std::int64_t w : sub.weights)
    if (w < 0) throw ValidationError("negative knapsack weight");

  KnapsackResult result;
  result.solution = Vector::Zero(n);

  std::vector<Index> active;
  for (Index i = 0; i < n; ++i)
    if (sub.reduced_costs[i] < -kFixTolerance) active.push_back(i);
  if (active.empty()) return result;

  const std::int64_t cells =
      static_cast<std::int64_t>(active.size()) * (sub.capacity + 1);
  if (cells > sub.table_cell_limit) {
    std::ostringstream msg;
    msg << "knapsack table of " << cells << " cells exceeds limit " << sub.table_cell_limit;
    throw ResourceError(msg.str());
  }

  // Suffix table dp(a, w) = best value using active items a.. with capacity
  // w. Deciding items front-to-back and preferring "skip" on ties yields the
  // lexicographically smallest optimizer.
  const Index m = static_cast<Index>(active.size());
  const Index width = static_cast<Index>(sub.capacity) + 1;
  Matrix dp = Matrix::Zero(m + 1, width);
  for (Index a = m - 1; a >= 0; --a) {
    const Index item = active[static_cast<std::size_t>(a)];
    const std::int64_t weight = sub.weights[static_cast<std::size_t>(item)];
    const double cost = sub.reduced_costs[item];
    for (Index w = 0; w < width; ++w) {
      double best = dp(a + 1, w);
      if (weight <= w) best = std::min(best, cost + dp(a + 1, w - weight));
      dp(a, w) = best;
    }
  }

  std::int64_t remaining = sub.capacity;
  for (Index a = 0; a < m; ++a) {
    const Index item = active[static_cast<std::size_t>(a)];
    const std::int64_t weight = sub.weights[static_cast<std::size_t>(item)];
    if (dp(a, remaining) == dp(a + 1, remaining)) continue;  // skip ties with optimum
    result.solution[item] = 1.0;
    remaining -= weight;
  }
  result.value = dp(0, static_cast<Index>(sub.capacity));
  return result;
}

}  // namespace slblr
