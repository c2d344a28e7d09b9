#include "slblr/repair.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "slblr/solvers.hpp"

namespace slblr {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t move_regret(const GapInstance& instance, Index job, int current_machine) {
  std::int64_t best_other = std::numeric_limits<std::int64_t>::max() / 4;
  for (int j = 0; j < instance.machines; ++j) {
    if (j == current_machine) continue;
    best_other = std::min(best_other, instance.cost(job, j));
  }
  return best_other - instance.cost(job, current_machine);
}

}  // namespace

std::optional<std::vector<int>> greedy_complete(const GapInstance& instance,
                                                const std::vector<Index>& jobs,
                                                const GapInstance::IntVector& residual_capacity) {
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::int64_t> regret(jobs.size());
  for (std::size_t d = 0; d < jobs.size(); ++d) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max() / 4;
    std::int64_t second = best;
    for (int j = 0; j < instance.machines; ++j) {
      const std::int64_t c = instance.cost(jobs[d], j);
      if (c < best) {
        second = best;
        best = c;
      } else if (c < second) {
        second = c;
      }
    }
    regret[d] = second - best;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (regret[a] != regret[b]) return regret[a] > regret[b];
    return jobs[a] < jobs[b];
  });

  GapInstance::IntVector slack = residual_capacity;
  std::vector<int> result(jobs.size(), -1);
  for (std::size_t d : order) {
    int pick = -1;
    for (int j = 0; j < instance.machines; ++j) {
      if (instance.resource(jobs[d], j) > slack[j]) continue;
      if (pick < 0 || instance.cost(jobs[d], j) < instance.cost(jobs[d], pick)) pick = j;
    }
    if (pick < 0) return std::nullopt;
    result[d] = pick;
    slack[pick] -= instance.resource(jobs[d], pick);
  }
  return result;
}

std::optional<std::vector<int>> fit_complete(const GapInstance& instance,
                                             const std::vector<Index>& jobs,
                                             const GapInstance::IntVector& residual_capacity) {
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const std::int64_t ra = instance.resource.row(jobs[a]).minCoeff();
    const std::int64_t rb = instance.resource.row(jobs[b]).minCoeff();
    if (ra != rb) return ra > rb;
    return jobs[a] < jobs[b];
  });

  GapInstance::IntVector slack = residual_capacity;
  std::vector<int> result(jobs.size(), -1);
  for (std::size_t d : order) {
    int pick = -1;
    for (int j = 0; j < instance.machines; ++j) {
      const std::int64_t need = instance.resource(jobs[d], j);
      if (need > slack[j]) continue;
      if (pick < 0 || need < instance.resource(jobs[d], pick) ||
          (need == instance.resource(jobs[d], pick) &&
           instance.cost(jobs[d], j) < instance.cost(jobs[d], pick)))
        pick = j;
    }
    if (pick < 0) return std::nullopt;
    result[d] = pick;
    slack[pick] -= instance.resource(jobs[d], pick);
  }
  return result;
}

void polish_assignment(const GapInstance& instance, const std::vector<Index>& jobs,
                       std::vector<int>* assignment, int max_passes) {
  GapInstance::IntVector slack = instance.capacity;
  // assignment holds the full job->machine map; slack accounts for all jobs.
  for (Index i = 0; i < instance.jobs; ++i)
    if ((*assignment)[static_cast<std::size_t>(i)] >= 0)
      slack[(*assignment)[static_cast<std::size_t>(i)]] -= instance.resource(i, (*assignment)[static_cast<std::size_t>(i)]);

  for (int pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    // Shifts: move one job to a cheaper machine with room.
    for (Index i : jobs) {
      int& at = (*assignment)[static_cast<std::size_t>(i)];
      for (int j = 0; j < instance.machines; ++j) {
        if (j == at || instance.cost(i, j) >= instance.cost(i, at)) continue;
        if (instance.resource(i, j) > slack[j]) continue;
        slack[at] += instance.resource(i, at);
        slack[j] -= instance.resource(i, j);
        at = j;
        improved = true;
      }
    }
    // Swaps among the polished jobs.
    for (std::size_t a = 0; a < jobs.size(); ++a) {
      for (std::size_t b = a + 1; b < jobs.size(); ++b) {
        const Index ia = jobs[a];
        const Index ib = jobs[b];
        int& ja = (*assignment)[static_cast<std::size_t>(ia)];
        int& jb = (*assignment)[static_cast<std::size_t>(ib)];
        if (ja == jb) continue;
        const std::int64_t delta = instance.cost(ia, jb) + instance.cost(ib, ja) -
                                   instance.cost(ia, ja) - instance.cost(ib, jb);
        if (delta >= 0) continue;
        const std::int64_t slack_a = slack[ja] + instance.resource(ia, ja) - instance.resource(ib, ja);
        const std::int64_t slack_b = slack[jb] + instance.resource(ib, jb) - instance.resource(ia, jb);
        if (slack_a < 0 || slack_b < 0) continue;
        slack[ja] = slack_a;
        slack[jb] = slack_b;
        std::swap(ja, jb);
        improved = true;
      }
    }
    if (!improved) break;
  }
}

namespace {

/// Piecewise-exact improvement over the freed jobs: rotating chunks small
/// enough to re-solve to proven optimality with everything else fixed.
void improve_free_exact(const GapInstance& instance, const std::vector<Index>& free_jobs,
                        std::vector<int>* assignment, int max_passes) {
  if (free_jobs.empty()) return;
  constexpr std::size_t kChunk = 12;
  for (int pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    const std::size_t rotation = (static_cast<std::size_t>(pass) * 7) % free_jobs.size();
    for (std::size_t begin = 0; begin < free_jobs.size(); begin += kChunk) {
      std::vector<Index> chunk;
      for (std::size_t d = begin; d < std::min(begin + kChunk, free_jobs.size()); ++d)
        chunk.push_back(free_jobs[(d + rotation) % free_jobs.size()]);

      GapInstance::IntVector residual = instance.capacity;
      std::vector<bool> in_chunk(static_cast<std::size_t>(instance.jobs), false);
      for (Index i : chunk) in_chunk[static_cast<std::size_t>(i)] = true;
      for (Index i = 0; i < instance.jobs; ++i) {
        const int j = (*assignment)[static_cast<std::size_t>(i)];
        if (j >= 0 && !in_chunk[static_cast<std::size_t>(i)]) residual[j] -= instance.resource(i, j);
      }

      std::vector<int> warm(chunk.size());
      std::int64_t warm_cost = 0;
      for (std::size_t d = 0; d < chunk.size(); ++d) {
        warm[d] = (*assignment)[static_cast<std::size_t>(chunk[d])];
        warm_cost += instance.cost(chunk[d], warm[d]);
      }
      const ResidualSearchResult res =
          solve_residual_assignment(instance, chunk, residual, 200'000, warm);
      if (!res.assignment) continue;
      std::int64_t new_cost = 0;
      for (std::size_t d = 0; d < chunk.size(); ++d)
        new_cost += instance.cost(chunk[d], (*res.assignment)[d]);
      if (new_cost < warm_cost) {
        for (std::size_t d = 0; d < chunk.size(); ++d)
          (*assignment)[static_cast<std::size_t>(chunk[d])] = (*res.assignment)[d];
        improved = true;
      }
    }
    if (!improved) break;
  }
}

}  // namespace

RepairReport repair_gap(const GapInstance& instance, const CompositeSolution& composite,
                        const RepairBudget& budget) {
  const auto start = Clock::now();
  RepairReport report;
  if (composite.part_count() != instance.machines)
    throw ValidationError("composite does not match instance machine count");

  // Assigned-count census over the relaxed solution.
  std::vector<int> clean_machine(static_cast<std::size_t>(instance.jobs), -1);
  std::vector<int> assigned_count(static_cast<std::size_t>(instance.jobs), 0);
  for (Index j = 0; j < instance.machines; ++j) {
    const Vector& part = composite.part(j);
    for (Index i = 0; i < instance.jobs; ++i)
      if (std::llround(part[i]) == 1) {
        ++assigned_count[static_cast<std::size_t>(i)];
        clean_machine[static_cast<std::size_t>(i)] = static_cast<int>(j);
      }
  }

  std::vector<Index> conflicted;
  for (Index i = 0; i < instance.jobs; ++i)
    if (assigned_count[static_cast<std::size_t>(i)] != 1) {
      conflicted.push_back(i);
      clean_machine[static_cast<std::size_t>(i)] = -1;
    }
  const std::vector<int> original_clean = clean_machine;

  std::vector<Index> evicted;
  bool residual_was_infeasible = false;
  std::optional<std::vector<int>> best_assignment;
  int best_adjusted = 0;

  for (int round = 0; round <= budget.eviction_rounds; ++round) {
    std::vector<Index> free_jobs = conflicted;
    free_jobs.insert(free_jobs.end(), evicted.begin(), evicted.end());
    std::sort(free_jobs.begin(), free_jobs.end());

    GapInstance::IntVector residual = instance.capacity;
    for (Index i = 0; i < instance.jobs; ++i) {
      const int j = clean_machine[static_cast<std::size_t>(i)];
      if (j >= 0) residual[j] -= instance.resource(i, j);
    }

    // A heuristic incumbent first: cost-greedy when slack is loose, the
    // feasibility-first packing otherwise. It answers quickly and
    // warm-starts the exact search.
    std::optional<std::vector<int>> incumbent = greedy_complete(instance, free_jobs, residual);
    if (!incumbent) incumbent = fit_complete(instance, free_jobs, residual);
    const ResidualSearchResult search =
        solve_residual_assignment(instance, free_jobs, residual, budget.node_cap, incumbent);

    if (search.assignment) {
      std::vector<int> assignment = clean_machine;
      for (std::size_t d = 0; d < free_jobs.size(); ++d)
        assignment[static_cast<std::size_t>(free_jobs[d])] = (*search.assignment)[d];
      polish_assignment(instance, free_jobs, &assignment);
      improve_free_exact(instance, free_jobs, &assignment, 16);

      int adjusted = static_cast<int>(conflicted.size());
      for (Index i : evicted)
        if (assignment[static_cast<std::size_t>(i)] != original_clean[static_cast<std::size_t>(i)])
          ++adjusted;
      if (!best_assignment ||
          instance.assignment_cost(assignment) < instance.assignment_cost(*best_assignment)) {
        best_assignment = std::move(assignment);
        best_adjusted = adjusted;
      }
      // Clean assignments stay put when the first residual was solvable;
      // otherwise the guard is void and wider evictions may keep improving.
      if (!residual_was_infeasible) break;
    } else {
      if (round == 0) residual_was_infeasible = true;
      if (!residual_was_infeasible && best_assignment) break;
    }

    // Unfix the cheapest-to-move clean jobs and retry with a wider residual.
    std::vector<std::pair<std::int64_t, Index>> candidates;
    for (Index i = 0; i < instance.jobs; ++i) {
      const int j = clean_machine[static_cast<std::size_t>(i)];
      if (j >= 0) candidates.emplace_back(move_regret(instance, i, j), i);
    }
    if (candidates.empty()) break;
    std::sort(candidates.begin(), candidates.end());
    const std::size_t unfix = std::min<std::size_t>(candidates.size(), std::size_t{8} << round);
    for (std::size_t u = 0; u < unfix; ++u) {
      const Index i = candidates[u].second;
      evicted.push_back(i);
      clean_machine[static_cast<std::size_t>(i)] = -1;
    }
  }

  if (best_assignment) {
    report.feasible = true;
    report.assignment = *best_assignment;
    report.upper_bound = static_cast<double>(instance.assignment_cost(*best_assignment));
    report.solution = Vector::Zero(instance.machines * instance.jobs);
    for (Index i = 0; i < instance.jobs; ++i)
      report.solution[(*best_assignment)[static_cast<std::size_t>(i)] * instance.jobs + i] = 1.0;
    report.jobs_adjusted = best_adjusted;
    report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return report;
  }

  report.note = "repair budget exhausted without a feasible assignment";
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

namespace {

/// Raise phase: cheapest violation reduction per unit cost until feasible.
/// Returns false when the box cannot close the remaining violation.
bool raise_until_feasible(const SmallMilpInstance& instance, Vector* x) {
  const Index n = instance.objective.size();
  while (true) {
    const Vector shortfall = instance.rhs_ge - instance.coupling_ge * (*x);
    double total_short = 0.0;
    for (Index r = 0; r < shortfall.size(); ++r) total_short += std::max(0.0, shortfall[r]);
    if (total_short <= 0.0) return true;

    Index pick = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      if ((*x)[j] + 1 > static_cast<double>(instance.bounds[static_cast<std::size_t>(j)].upper))
        continue;
      double reduction = 0.0;
      for (Index r = 0; r < shortfall.size(); ++r)
        if (shortfall[r] > 0.0) reduction += std::min(shortfall[r], instance.coupling_ge(r, j));
      if (reduction <= 0.0) continue;
      const double ratio = instance.objective[j] / reduction;
      if (ratio < best_ratio) {
        best_ratio = ratio;
        pick = j;
      }
    }
    if (pick < 0) return false;
    (*x)[pick] += 1.0;
  }
}

/// Trim phase: lower overshooting variables while all rows stay satisfied,
/// most expensive coefficient first.
void trim_slack(const SmallMilpInstance& instance, Vector* x) {
  const Index n = instance.objective.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (instance.objective[a] != instance.objective[b])
      return instance.objective[a] > instance.objective[b];
    return a < b;
  });
  for (Index j : order) {
    const Vector slack = instance.coupling_ge * (*x) - instance.rhs_ge;
    double reducible = (*x)[j] - static_cast<double>(instance.bounds[static_cast<std::size_t>(j)].lower);
    for (Index r = 0; r < slack.size(); ++r)
      if (instance.coupling_ge(r, j) > 0.0)
        reducible = std::min(reducible, std::floor(slack[r] / instance.coupling_ge(r, j)));
    if (reducible > 0.0) (*x)[j] -= reducible;
  }
}

}  // namespace

RepairReport repair_small_milp(const SmallMilpInstance& instance, const Vector& start) {
  const auto start_time = Clock::now();
  RepairReport report;
  const Index n = instance.objective.size();

  Vector from_composite = start;
  for (Index j = 0; j < n; ++j) {
    const auto& b = instance.bounds[static_cast<std::size_t>(j)];
    from_composite[j] = std::clamp(std::round(from_composite[j]), static_cast<double>(b.lower),
                                   static_cast<double>(b.upper));
  }
  Vector from_lower(n);
  for (Index j = 0; j < n; ++j)
    from_lower[j] = static_cast<double>(instance.bounds[static_cast<std::size_t>(j)].lower);

  std::optional<Vector> best;
  for (Vector x : {from_composite, from_lower}) {
    if (!raise_until_feasible(instance, &x)) continue;
    trim_slack(instance, &x);
    if (!best || instance.objective.dot(x) < instance.objective.dot(*best)) best = x;
  }

  if (!best) {
    report.note = "no variable can reduce the remaining violation";
    report.wall_seconds = std::chrono::duration<double>(Clock::now() - start_time).count();
    return report;
  }
  report.feasible = true;
  report.solution = *best;
  report.upper_bound = instance.objective.dot(*best);
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start_time).count();
  return report;
}

double gap_metrics(double upper_bound, const RunTrace& trace) {
  if (!trace.best_exact_dual)
    throw ValidationError("metric unavailable: trace carries no certified dual bound");
  const double lower_bound = *trace.best_exact_dual;
  if (upper_bound < lower_bound - 1e-9) throw SolverError("feasible cost undercuts the dual bound");
  if (upper_bound == 0.0) return 0.0;
  return (upper_bound - lower_bound) / upper_bound;
}

}  // namespace slblr
