#pragma once

#include <optional>
#include <vector>

#include "slblr/types.hpp"

namespace slblr {

/// Integer bounds of one decision variable. The framework requires finite
/// boxes so every subproblem feasible set is finite.
struct VariableBounds {
  std::int64_t lower = 0;
  std::int64_t upper = 0;
};

/// A local (non-relaxed) constraint of one subproblem, row . x <= rhs,
/// expressed over the subproblem's own variables.
struct LocalRow {
  Vector coefficients;
  double rhs = 0.0;
};

/// One subproblem: a contiguous slice of the global variable vector plus its
/// local constraints. The objective slice lives in SeparableProblem.
struct SubproblemShape {
  Index offset = 0;
  Index count = 0;
  std::vector<LocalRow> local_rows;
};

/// A minimization problem split into independently solvable subproblems tied
/// together by coupling rows. Coupling rows are stored normalized: equality
/// rows keep their sign, inequality rows are less-equal (greater-equal input
/// is negated at construction).
class SeparableProblem {
 public:
  SeparableProblem(Vector objective, std::vector<VariableBounds> bounds,
                   std::vector<SubproblemShape> subproblems,
                   SparseRowMatrix coupling, Vector coupling_rhs,
                   std::vector<RowSense> senses);

  Index variable_count() const { return objective_.size(); }
  Index subproblem_count() const { return static_cast<Index>(subproblems_.size()); }
  Index coupling_count() const { return coupling_rhs_.size(); }

  const Vector& objective() const { return objective_; }
  const std::vector<VariableBounds>& bounds() const { return bounds_; }
  const SubproblemShape& subproblem(Index i) const { return subproblems_[static_cast<std::size_t>(i)]; }
  const SparseRowMatrix& coupling() const { return coupling_; }
  const Vector& coupling_rhs() const { return coupling_rhs_; }
  RowSense sense(Index row) const { return senses_[static_cast<std::size_t>(row)]; }
  const std::vector<RowSense>& senses() const { return senses_; }

  /// Reduced objective c + A^T lambda over all variables.
  Vector priced_objective(const Vector& multipliers) const;

  /// True when x satisfies the subproblem's box and local rows.
  bool locally_feasible(Index sub, const Vector& x, double tol = 1e-9) const;

  /// True when x (global) satisfies every coupling row under its sense.
  bool coupling_feasible(const Vector& x, double tol = 1e-9) const;

 private:
  Vector objective_;
  std::vector<VariableBounds> bounds_;
  std::vector<SubproblemShape> subproblems_;
  SparseRowMatrix coupling_;
  Vector coupling_rhs_;
  std::vector<RowSense> senses_;
};

/// Pool of the most recent solution kept for every subproblem, with cached
/// objective contributions and per-subproblem staleness counters.
class CompositeSolution {
 public:
  CompositeSolution() = default;
  explicit CompositeSolution(const SeparableProblem& problem);

  Index part_count() const { return static_cast<Index>(parts_.size()); }
  const Vector& part(Index i) const { return parts_[static_cast<std::size_t>(i)]; }
  double cached_contribution(Index i) const { return contributions_[static_cast<std::size_t>(i)]; }
  int staleness(Index i) const { return staleness_[static_cast<std::size_t>(i)]; }

  /// Installs a fresh solution for subproblem i and resets its staleness.
  void set_part(const SeparableProblem& problem, Index i, Vector x);

  /// Ages every subproblem except those solved this iteration.
  void tick(const std::vector<int>& solved_now);

  /// Concatenation of all parts in global variable order.
  Vector assemble(const SeparableProblem& problem) const;

  /// Sum of cached objective contributions.
  double objective_total() const;

  /// Re-derives every cached contribution and compares; true when each cache
  /// matches recomputation within tol.
  bool caches_consistent(const SeparableProblem& problem, double tol = 1e-9) const;

 private:
  std::vector<Vector> parts_;
  std::vector<double> contributions_;
  std::vector<int> staleness_;
};

/// Per-row violation of the coupling constraints: component r is
/// row_r . x - rhs_r under the normalized sense (signed for equalities,
/// slack-negative for less-equal rows).
Vector constraint_violation(const SeparableProblem& problem, const CompositeSolution& solution);
Vector constraint_violation(const SeparableProblem& problem, const Vector& assembled);

/// Lagrangian value L(x, lambda) = c.x + lambda.(Ax - b) at the stored
/// composite solution. Not necessarily the dual value: the solution need not
/// minimize the relaxed problem.
double evaluate_lagrangian(const SeparableProblem& problem, const CompositeSolution& solution,
                           const Vector& multipliers);
double evaluate_lagrangian(const SeparableProblem& problem, const Vector& assembled,
                           const Vector& multipliers);

/// Small bounded-integer MILP with greater-equal coupling rows, used for the
/// six-variable reference instance with known optimal multipliers.
struct SmallMilpInstance {
  Vector objective;
  std::vector<VariableBounds> bounds;
  Matrix coupling_ge;  // rows a_r with a_r . x >= rhs_r
  Vector rhs_ge;

  SeparableProblem to_separable() const;
};

/// The six-variable reference instance. Optimal multipliers of its dual are
/// (0.6, 0).
SmallMilpInstance make_example1();

/// Known optimal multipliers of make_example1().
Vector example1_reference_multipliers();

}  // namespace slblr
