#include "slblr/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace slblr {

namespace {

constexpr double kZeroCostTolerance = 1e-12;

bool integral_within(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol; }

/// True when the subproblem is a 0-1 knapsack: binary box, one local row
/// with nonnegative integer coefficients and right-hand side.
bool knapsack_shaped(const SeparableProblem& problem, const SubproblemShape& shape) {
  if (shape.local_rows.size() != 1) return false;
  for (Index j = 0; j < shape.count; ++j) {
    const auto& b = problem.bounds()[static_cast<std::size_t>(shape.offset + j)];
    if (b.lower != 0 || b.upper != 1) return false;
  }
  const auto& row = shape.local_rows.front();
  if (!integral_within(row.rhs) || row.rhs < 0) return false;
  for (Index j = 0; j < shape.count; ++j) {
    const double c = row.coefficients[j];
    if (!integral_within(c) || c < 0) return false;
  }
  return true;
}

std::vector<Vector> enumerate_local_set(const SeparableProblem& problem, Index sub,
                                        std::int64_t cap) {
  const auto& shape = problem.subproblem(sub);
  std::int64_t count = 1;
  for (Index j = 0; j < shape.count; ++j) {
    const auto& b = problem.bounds()[static_cast<std::size_t>(shape.offset + j)];
    const std::int64_t range = b.upper - b.lower + 1;
    if (count > cap / range + 1) throw ResourceError("local feasible set too large to enumerate");
    count *= range;
  }
  if (count > cap) throw ResourceError("local feasible set too large to enumerate");

  std::vector<Vector> points;
  Vector x(shape.count);
  for (Index j = 0; j < shape.count; ++j)
    x[j] = static_cast<double>(problem.bounds()[static_cast<std::size_t>(shape.offset + j)].lower);
  while (true) {
    bool ok = true;
    for (const auto& row : shape.local_rows)
      if (row.coefficients.dot(x) > row.rhs + 1e-9) {
        ok = false;
        break;
      }
    if (ok) points.push_back(x);
    Index j = shape.count - 1;
    for (; j >= 0; --j) {
      const auto& b = problem.bounds()[static_cast<std::size_t>(shape.offset + j)];
      if (x[j] + 1 <= static_cast<double>(b.upper)) {
        x[j] += 1;
        break;
      }
      x[j] = static_cast<double>(b.lower);
    }
    if (j < 0) break;
  }
  return points;
}

}  // namespace

SubproblemResult solve_bounded_integer_linear(const Vector& priced_costs,
                                              const std::vector<VariableBounds>& bounds) {
  const Index n = priced_costs.size();
  if (static_cast<Index>(bounds.size()) != n)
    throw ValidationError("bound count must match cost count");
  SubproblemResult result;
  result.solution = Vector(n);
  for (Index j = 0; j < n; ++j) {
    const auto& b = bounds[static_cast<std::size_t>(j)];
    const double value = priced_costs[j] >= -kZeroCostTolerance ? static_cast<double>(b.lower)
                                                                : static_cast<double>(b.upper);
    result.solution[j] = value;
    result.value += priced_costs[j] * value;
  }
  return result;
}

SubproblemResult solve_subproblem(const SeparableProblem& problem, Index sub,
                                  const Vector& priced_costs_for_sub,
                                  std::int64_t enumeration_cap) {
  const auto& shape = problem.subproblem(sub);
  if (priced_costs_for_sub.size() != shape.count)
    throw ValidationError("priced cost slice dimension mismatch");

  if (shape.local_rows.empty()) {
    std::vector<VariableBounds> bounds(
        problem.bounds().begin() + shape.offset,
        problem.bounds().begin() + shape.offset + shape.count);
    return solve_bounded_integer_linear(priced_costs_for_sub, bounds);
  }

  if (knapsack_shaped(problem, shape)) {
    KnapsackSubproblem knap;
    knap.reduced_costs = priced_costs_for_sub;
    knap.weights.resize(static_cast<std::size_t>(shape.count));
    const auto& row = shape.local_rows.front();
    for (Index j = 0; j < shape.count; ++j)
      knap.weights[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::llround(row.coefficients[j]));
    knap.capacity = static_cast<std::int64_t>(std::llround(row.rhs));
    const KnapsackResult kr = solve_knapsack_min(knap);
    return SubproblemResult{kr.solution, kr.value};
  }

  // General bounded-integer subproblem: enumerate the local feasible set.
  SubproblemResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& x : enumerate_local_set(problem, sub, enumeration_cap)) {
    const double v = priced_costs_for_sub.dot(x);
    if (v < best.value) {
      best.value = v;
      best.solution = x;
    }
  }
  if (!std::isfinite(best.value)) throw SolverError("subproblem has no locally feasible point");
  return best;
}

CompositeSolution solve_relaxed_exact(const SeparableProblem& problem, const Vector& multipliers) {
  const Vector priced = problem.priced_objective(multipliers);
  CompositeSolution composite(problem);
  for (Index i = 0; i < problem.subproblem_count(); ++i) {
    const auto& shape = problem.subproblem(i);
    composite.set_part(problem, i,
                       solve_subproblem(problem, i, priced.segment(shape.offset, shape.count)).solution);
  }
  return composite;
}

double dual_function_oracle(const SeparableProblem& problem, const Vector& multipliers) {
  const Vector priced = problem.priced_objective(multipliers);
  double total = -multipliers.dot(problem.coupling_rhs());
  for (Index i = 0; i < problem.subproblem_count(); ++i) {
    const auto& shape = problem.subproblem(i);
    total += solve_subproblem(problem, i, priced.segment(shape.offset, shape.count)).value;
  }
  return total;
}

OracleResult exact_primal_oracle(const SeparableProblem& problem, std::int64_t candidate_cap) {
  const Index subs = problem.subproblem_count();
  std::vector<std::vector<Vector>> locals(static_cast<std::size_t>(subs));
  std::int64_t total = 1;
  for (Index i = 0; i < subs; ++i) {
    locals[static_cast<std::size_t>(i)] = enumerate_local_set(problem, i, candidate_cap);
    const std::int64_t size = static_cast<std::int64_t>(locals[static_cast<std::size_t>(i)].size());
    if (size == 0) return OracleResult{};
    if (total > candidate_cap / size + 1) throw ResourceError("oracle refused: candidate space too large");
    total *= size;
  }
  if (total > candidate_cap) throw ResourceError("oracle refused: candidate space too large");

  OracleResult result;
  result.value = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(static_cast<std::size_t>(subs), 0);
  Vector assembled(problem.variable_count());
  while (true) {
    for (Index i = 0; i < subs; ++i) {
      const auto& shape = problem.subproblem(i);
      assembled.segment(shape.offset, shape.count) =
          locals[static_cast<std::size_t>(i)][pick[static_cast<std::size_t>(i)]];
    }
    ++result.nodes_explored;
    if (problem.coupling_feasible(assembled)) {
      const double v = problem.objective().dot(assembled);
      if (!result.feasible || v < result.value) {
        result.feasible = true;
        result.value = v;
        result.solution = assembled;
      }
    }
    Index i = subs - 1;
    for (; i >= 0; --i) {
      auto& p = pick[static_cast<std::size_t>(i)];
      if (++p < locals[static_cast<std::size_t>(i)].size()) break;
      p = 0;
    }
    if (i < 0) break;
  }
  if (!result.feasible) result.value = 0.0;
  return result;
}

ResidualSearchResult solve_residual_assignment(const GapInstance& instance,
                                               const std::vector<Index>& jobs,
                                               const GapInstance::IntVector& residual_capacity,
                                               std::int64_t node_cap,
                                               const std::optional<std::vector<int>>& warm_start) {
  const Index machines = instance.machines;
  const std::size_t depth_count = jobs.size();
  ResidualSearchResult result;
  if (depth_count == 0) {
    result.assignment = std::vector<int>{};
    result.proven = true;
    return result;
  }

  // Per-job machine candidates that fit the root residual, cheapest first.
  struct JobChoices {
    Index job;
    std::size_t input_position = 0;
    std::vector<int> machine_order;
    std::int64_t min_cost = 0;
    std::int64_t regret = 0;
  };
  std::vector<JobChoices> choices(depth_count);
  for (std::size_t d = 0; d < depth_count; ++d) {
    auto& jc = choices[d];
    jc.job = jobs[d];
    jc.input_position = d;
    for (int j = 0; j < machines; ++j)
      if (instance.resource(jc.job, j) <= residual_capacity[j]) jc.machine_order.push_back(j);
    if (jc.machine_order.empty()) {
      result.proven = true;  // some job fits no machine at all
      return result;
    }
    std::sort(jc.machine_order.begin(), jc.machine_order.end(), [&](int a, int b) {
      if (instance.cost(jc.job, a) != instance.cost(jc.job, b))
        return instance.cost(jc.job, a) < instance.cost(jc.job, b);
      return a < b;
    });
    jc.min_cost = instance.cost(jc.job, jc.machine_order.front());
    jc.regret = jc.machine_order.size() > 1
                    ? instance.cost(jc.job, jc.machine_order[1]) - jc.min_cost
                    : std::numeric_limits<std::int64_t>::max() / 4;
  }
  // Hard jobs (large regret, then fewer options) first.
  std::sort(choices.begin(), choices.end(), [](const JobChoices& a, const JobChoices& b) {
    if (a.regret != b.regret) return a.regret > b.regret;
    if (a.machine_order.size() != b.machine_order.size())
      return a.machine_order.size() < b.machine_order.size();
    return a.job < b.job;
  });

  std::vector<std::int64_t> suffix_min(depth_count + 1, 0);
  for (std::size_t d = depth_count; d-- > 0;)
    suffix_min[d] = suffix_min[d + 1] + choices[d].min_cost;

  GapInstance::IntVector slack = residual_capacity;
  std::vector<int> current(depth_count, -1);
  std::vector<int> best;
  std::int64_t best_cost = std::numeric_limits<std::int64_t>::max();
  if (warm_start) {
    std::int64_t warm_cost = 0;
    for (std::size_t d = 0; d < depth_count; ++d)
      warm_cost += instance.cost(jobs[d], (*warm_start)[d]);
    best_cost = warm_cost;
    best.resize(depth_count);
    for (std::size_t d = 0; d < depth_count; ++d)
      best[d] = (*warm_start)[choices[d].input_position];
  }

  std::int64_t budget = node_cap;
  bool exhausted = false;
  std::function<void(std::size_t, std::int64_t)> dfs = [&](std::size_t d, std::int64_t cost_so_far) {
    if (exhausted) return;
    if (budget-- <= 0) {
      exhausted = true;
      return;
    }
    if (cost_so_far + suffix_min[d] >= best_cost) return;
    if (d == depth_count) {
      best_cost = cost_so_far;
      best = current;
      return;
    }
    const auto& jc = choices[d];
    for (int j : jc.machine_order) {
      const std::int64_t need = instance.resource(jc.job, j);
      if (need > slack[j]) continue;
      slack[j] -= need;
      current[d] = j;
      dfs(d + 1, cost_so_far + instance.cost(jc.job, j));
      current[d] = -1;
      slack[j] += need;
      if (exhausted) return;
    }
  };
  dfs(0, 0);

  result.nodes = node_cap - budget;
  result.proven = !exhausted;
  if (!best.empty()) {
    std::vector<int> by_input(depth_count, -1);
    for (std::size_t d = 0; d < depth_count; ++d) by_input[choices[d].input_position] = best[d];
    result.assignment = std::move(by_input);
  }
  return result;
}

std::optional<std::vector<int>> branch_and_bound_assignment(
    const GapInstance& instance, const std::vector<Index>& jobs,
    const GapInstance::IntVector& residual_capacity, std::int64_t* node_budget) {
  const ResidualSearchResult result =
      solve_residual_assignment(instance, jobs, residual_capacity, *node_budget);
  *node_budget -= result.nodes;
  if (!result.proven)
    throw ResourceError("assignment branch-and-bound node budget exhausted");
  return result.assignment;
}

OracleResult exact_primal_oracle(const GapInstance& instance, std::int64_t node_cap) {
  std::vector<Index> all_jobs(static_cast<std::size_t>(instance.jobs));
  std::iota(all_jobs.begin(), all_jobs.end(), Index{0});
  std::int64_t budget = node_cap;
  const auto assignment = branch_and_bound_assignment(instance, all_jobs, instance.capacity, &budget);

  OracleResult result;
  result.nodes_explored = node_cap - budget;
  if (!assignment) return result;
  result.feasible = true;
  result.value = static_cast<double>(instance.assignment_cost(*assignment));
  result.solution = Vector::Zero(instance.machines * instance.jobs);
  for (Index i = 0; i < instance.jobs; ++i)
    result.solution[(*assignment)[static_cast<std::size_t>(i)] * instance.jobs + i] = 1.0;
  return result;
}

}  // namespace slblr
