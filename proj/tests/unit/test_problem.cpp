#include "doctest.h"

#include "slblr/gap.hpp"
#include "slblr/problem.hpp"
#include "slblr/solvers.hpp"
#include "test_support.hpp"

using namespace slblr;

namespace {

/// Two machines, two jobs, assignment rows written as sum_j x_ij - 1 = 0
/// (positive orientation) to pin the violation arithmetic.
SeparableProblem positive_assignment_problem() {
  Vector objective(4);
  objective << 3, 4, 5, 6;
  std::vector<VariableBounds> bounds(4, VariableBounds{0, 1});
  std::vector<SubproblemShape> subs(2);
  subs[0].offset = 0;
  subs[0].count = 2;
  subs[1].offset = 2;
  subs[1].count = 2;
  SparseRowMatrix coupling(2, 4);
  std::vector<Eigen::Triplet<double>> entries = {{0, 0, 1.0}, {0, 2, 1.0}, {1, 1, 1.0}, {1, 3, 1.0}};
  coupling.setFromTriplets(entries.begin(), entries.end());
  Vector rhs(2);
  rhs << 1, 1;
  return SeparableProblem(objective, bounds, std::move(subs), std::move(coupling), rhs,
                          {RowSense::Equality, RowSense::Equality});
}

}  // namespace

TEST_CASE("reference instance converts to six one-variable subproblems") {
  const SeparableProblem problem = make_example1().to_separable();
  CHECK(problem.subproblem_count() == 6);
  CHECK(problem.coupling_count() == 2);
  CHECK(problem.variable_count() == 6);
  for (Index r = 0; r < 2; ++r) CHECK(problem.sense(r) == RowSense::LessEqual);
  for (const auto& b : problem.bounds()) {
    CHECK(b.lower == 0);
    CHECK(b.upper == 26);
  }
}

TEST_CASE("lagrangian at zero multipliers is the raw objective") {
  const SeparableProblem problem = make_example1().to_separable();
  CompositeSolution composite(problem);
  for (Index i = 0; i < 6; ++i) {
    Vector x(1);
    x << static_cast<double>(i % 3);
    composite.set_part(problem, i, x);
  }
  const Vector zero = Vector::Zero(2);
  const Vector assembled = composite.assemble(problem);
  CHECK(evaluate_lagrangian(problem, composite, zero) ==
        doctest::Approx(problem.objective().dot(assembled)).epsilon(1e-12));
}

TEST_CASE("feasible solutions annihilate the dual term") {
  const GapInstance gap = make_random_feasible_gap(2, 4, 5);
  const SeparableProblem problem = gap_to_separable(gap);
  const OracleResult oracle = exact_primal_oracle(gap);
  REQUIRE(oracle.feasible);
  std::vector<int> assignment(static_cast<std::size_t>(gap.jobs));
  for (Index i = 0; i < gap.jobs; ++i)
    for (Index j = 0; j < gap.machines; ++j)
      if (oracle.solution[j * gap.jobs + i] > 0.5) assignment[static_cast<std::size_t>(i)] = static_cast<int>(j);
  const CompositeSolution composite = test::assignment_composite(problem, gap, assignment);
  CHECK(constraint_violation(problem, composite).norm() == doctest::Approx(0.0));
  SplitMix64 rng(9);
  Vector lambda(problem.coupling_count());
  for (Index r = 0; r < lambda.size(); ++r) lambda[r] = rng.uniform_real(-30.0, 30.0);
  CHECK(evaluate_lagrangian(problem, composite, lambda) ==
        doctest::Approx(static_cast<double>(oracle.value)).epsilon(1e-12));
}

TEST_CASE("reference instance at the all-zeros point under unit multipliers") {
  // Greater-equal rows are stored negated, so the violation of the all-zeros
  // point is (26, 16) and the dual term adds 42.
  const SeparableProblem problem = make_example1().to_separable();
  CompositeSolution composite(problem);
  const Vector g = constraint_violation(problem, composite);
  CHECK(g[0] == doctest::Approx(26.0));
  CHECK(g[1] == doctest::Approx(16.0));
  Vector ones(2);
  ones << 1, 1;
  CHECK(evaluate_lagrangian(problem, composite, ones) == doctest::Approx(42.0));
}

TEST_CASE("violation arithmetic on assignment rows written sum minus one") {
  const SeparableProblem problem = positive_assignment_problem();
  CompositeSolution composite(problem);

  // Job 0 on machine 0 only, job 1 nowhere.
  Vector part0(2), part1(2);
  part0 << 1, 0;
  part1 << 0, 0;
  composite.set_part(problem, 0, part0);
  composite.set_part(problem, 1, part1);
  Vector g = constraint_violation(problem, composite);
  CHECK(g[0] == doctest::Approx(0.0));   // assigned exactly once
  CHECK(g[1] == doctest::Approx(-1.0));  // assigned to zero machines

  // Job 1 on both machines.
  part0 << 1, 1;
  part1 << 0, 1;
  composite.set_part(problem, 0, part0);
  composite.set_part(problem, 1, part1);
  g = constraint_violation(problem, composite);
  CHECK(g[1] == doctest::Approx(1.0));
}

TEST_CASE("dimension mismatches are rejected") {
  const SeparableProblem problem = make_example1().to_separable();
  CHECK_THROWS_AS(constraint_violation(problem, Vector::Zero(3)), ValidationError);
  CHECK_THROWS_AS(evaluate_lagrangian(problem, Vector::Zero(6), Vector::Zero(3)), ValidationError);
}

TEST_CASE("gap conversion dimensions and row structure") {
  const GapInstance small = make_random_feasible_gap(2, 3, 11);
  const SeparableProblem problem = gap_to_separable(small);
  CHECK(problem.subproblem_count() == 2);
  CHECK(problem.coupling_count() == 3);
  for (Index r = 0; r < problem.coupling_count(); ++r) {
    int nonzeros = 0;
    for (SparseRowMatrix::InnerIterator it(problem.coupling(), r); it; ++it)
      if (it.value() != 0.0) ++nonzeros;
    CHECK(nonzeros == small.machines);
    CHECK(problem.sense(r) == RowSense::Equality);
  }
}

TEST_CASE("bilinearity of the dual term") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const GapInstance gap = make_random_feasible_gap(2 + trial % 2, 4 + trial % 3, 100 + static_cast<std::uint64_t>(trial));
    const SeparableProblem problem = gap_to_separable(gap);
    CompositeSolution composite(problem);
    for (Index j = 0; j < problem.subproblem_count(); ++j) {
      Vector part(gap.jobs);
      for (Index i = 0; i < gap.jobs; ++i) part[i] = static_cast<double>(rng.uniform_int(0, 1));
      composite.set_part(problem, j, part);
    }
    Vector lambda(problem.coupling_count());
    for (Index r = 0; r < lambda.size(); ++r) lambda[r] = rng.uniform_real(-50.0, 50.0);
    const double with_lambda = evaluate_lagrangian(problem, composite, lambda);
    const double at_zero = evaluate_lagrangian(problem, composite, Vector::Zero(lambda.size()));
    const double dual_term = lambda.dot(constraint_violation(problem, composite));
    CHECK(with_lambda - at_zero == doctest::Approx(dual_term).epsilon(1e-9));
  }
}

TEST_CASE("relaxation preserves the exact optimum on small instances") {
  for (std::uint64_t seed : {31ULL, 32ULL, 33ULL}) {
    const GapInstance gap = make_random_feasible_gap(3, 7, seed);
    const SeparableProblem problem = gap_to_separable(gap);
    const OracleResult direct = exact_primal_oracle(gap);
    const OracleResult through_relaxation = exact_primal_oracle(problem, 10'000'000);
    const auto [feasible, enumerated] = test::enumerate_gap_optimum(gap);
    REQUIRE(direct.feasible);
    REQUIRE(through_relaxation.feasible);
    REQUIRE(feasible);
    CHECK(direct.value == doctest::Approx(static_cast<double>(enumerated)));
    CHECK(through_relaxation.value == doctest::Approx(static_cast<double>(enumerated)));
  }
}

TEST_CASE("composite caches stay consistent and staleness ticks") {
  const SeparableProblem problem = make_example1().to_separable();
  CompositeSolution composite(problem);
  CHECK(composite.caches_consistent(problem));
  Vector x(1);
  x << 4;
  composite.set_part(problem, 2, x);
  CHECK(composite.cached_contribution(2) == doctest::Approx(12.0));  // objective 3 * 4
  CHECK(composite.caches_consistent(problem));
  composite.tick({2});
  CHECK(composite.staleness(2) == 0);
  CHECK(composite.staleness(0) == 1);
}

TEST_CASE("coupling rows confined to one subproblem are rejected") {
  Vector objective(2);
  objective << 1, 1;
  std::vector<VariableBounds> bounds(2, VariableBounds{0, 1});
  std::vector<SubproblemShape> subs(2);
  subs[0] = {0, 1, {}};
  subs[1] = {1, 1, {}};
  SparseRowMatrix coupling(1, 2);
  std::vector<Eigen::Triplet<double>> entries = {{0, 0, 1.0}};  // touches one subproblem only
  coupling.setFromTriplets(entries.begin(), entries.end());
  CHECK_THROWS_AS(SeparableProblem(objective, bounds, std::move(subs), std::move(coupling),
                                   Vector::Ones(1), {RowSense::LessEqual}),
                  ValidationError);
}
