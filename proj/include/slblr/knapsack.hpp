#pragma once

#include <vector>

#include "slblr/types.hpp"

namespace slblr {

/// One machine subproblem of the relaxed assignment problem: minimize the
/// priced item costs subject to a single integer capacity row, x in {0,1}.
struct KnapsackSubproblem {
  Vector reduced_costs;                // may be any sign; only negatives matter
  std::vector<std::int64_t> weights;   // nonnegative
  std::int64_t capacity = 0;           // nonnegative

  /// Guard on the DP table: weights.size() * (capacity + 1) must not exceed
  /// this many cells.
  std::int64_t table_cell_limit = 1'000'000'000;
};

struct KnapsackResult {
  Vector solution;  // 0/1 per item
  double value = 0.0;
};

/// Exact minimizer via dynamic programming over capacity. Items whose
/// reduced cost is >= 0 (tolerance 1e-12) are fixed to zero; ties are broken
/// toward the lexicographically smallest solution vector.
KnapsackResult solve_knapsack_min(const KnapsackSubproblem& sub);

}  // namespace slblr
