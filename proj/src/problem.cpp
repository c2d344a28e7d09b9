#include "slblr/problem.hpp"

#include <cmath>
#include <set>

namespace slblr {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

SeparableProblem::SeparableProblem(Vector objective, std::vector<VariableBounds> bounds,
                                   std::vector<SubproblemShape> subproblems,
                                   SparseRowMatrix coupling, Vector coupling_rhs,
                                   std::vector<RowSense> senses)
    : objective_(std::move(objective)),
      bounds_(std::move(bounds)),
      subproblems_(std::move(subproblems)),
      coupling_(std::move(coupling)),
      coupling_rhs_(std::move(coupling_rhs)),
      senses_(std::move(senses)) {
  const Index n = objective_.size();
  require(static_cast<Index>(bounds_.size()) == n, "bounds size must match objective size");
  require(!subproblems_.empty(), "at least one subproblem required");
  require(coupling_.cols() == n, "coupling column count must match variable count");
  require(coupling_.rows() == coupling_rhs_.size(), "coupling rhs size mismatch");
  require(static_cast<Index>(senses_.size()) == coupling_rhs_.size(), "sense count mismatch");

  // Every variable belongs to exactly one subproblem: slices must tile [0, n).
  Index expected = 0;
  for (const auto& sub : subproblems_) {
    require(sub.offset == expected, "subproblem slices must be contiguous");
    require(sub.count >= 1, "empty subproblem");
    for (const auto& row : sub.local_rows)
      require(row.coefficients.size() == sub.count, "local row width mismatch");
    expected += sub.count;
  }
  require(expected == n, "subproblem slices must cover all variables");

  for (const auto& b : bounds_)
    require(b.lower <= b.upper, "variable with empty bound range");

  // A coupling row confined to one subproblem is a local constraint and does
  // not belong here.
  for (Index r = 0; r < coupling_.rows(); ++r) {
    std::set<Index> touched;
    for (SparseRowMatrix::InnerIterator it(coupling_, r); it; ++it) {
      if (it.value() == 0.0) continue;
      Index s = 0;
      while (it.col() >= subproblems_[static_cast<std::size_t>(s)].offset +
                             subproblems_[static_cast<std::size_t>(s)].count)
        ++s;
      touched.insert(s);
    }
    require(touched.size() >= 2, "coupling row touches fewer than two subproblems");
  }
}

Vector SeparableProblem::priced_objective(const Vector& multipliers) const {
  require(multipliers.size() == coupling_.rows(), "multiplier dimension mismatch");
  return objective_ + coupling_.transpose() * multipliers;
}

bool SeparableProblem::locally_feasible(Index sub, const Vector& x, double tol) const {
  const auto& shape = subproblems_[static_cast<std::size_t>(sub)];
  if (x.size() != shape.count) return false;
  for (Index j = 0; j < shape.count; ++j) {
    const auto& b = bounds_[static_cast<std::size_t>(shape.offset + j)];
    if (x[j] < static_cast<double>(b.lower) - tol) return false;
    if (x[j] > static_cast<double>(b.upper) + tol) return false;
  }
  for (const auto& row : shape.local_rows)
    if (row.coefficients.dot(x) > row.rhs + tol) return false;
  return true;
}

bool SeparableProblem::coupling_feasible(const Vector& x, double tol) const {
  const Vector g = coupling_ * x - coupling_rhs_;
  for (Index r = 0; r < g.size(); ++r) {
    if (senses_[static_cast<std::size_t>(r)] == RowSense::Equality) {
      if (std::abs(g[r]) > tol) return false;
    } else if (g[r] > tol) {
      return false;
    }
  }
  return true;
}

CompositeSolution::CompositeSolution(const SeparableProblem& problem) {
  const Index count = problem.subproblem_count();
  parts_.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    const auto& shape = problem.subproblem(i);
    Vector x = Vector::Zero(shape.count);
    for (Index j = 0; j < shape.count; ++j)
      x[j] = static_cast<double>(problem.bounds()[static_cast<std::size_t>(shape.offset + j)].lower);
    parts_.push_back(std::move(x));
    contributions_.push_back(
        problem.objective().segment(shape.offset, shape.count).dot(parts_.back()));
    staleness_.push_back(0);
  }
}

void CompositeSolution::set_part(const SeparableProblem& problem, Index i, Vector x) {
  const auto& shape = problem.subproblem(i);
  if (x.size() != shape.count) throw ValidationError("composite part dimension mismatch");
  contributions_[static_cast<std::size_t>(i)] =
      problem.objective().segment(shape.offset, shape.count).dot(x);
  parts_[static_cast<std::size_t>(i)] = std::move(x);
  staleness_[static_cast<std::size_t>(i)] = 0;
}

void CompositeSolution::tick(const std::vector<int>& solved_now) {
  for (std::size_t i = 0; i < staleness_.size(); ++i) ++staleness_[i];
  for (int i : solved_now) staleness_[static_cast<std::size_t>(i)] = 0;
}

Vector CompositeSolution::assemble(const SeparableProblem& problem) const {
  Vector x(problem.variable_count());
  for (Index i = 0; i < part_count(); ++i) {
    const auto& shape = problem.subproblem(i);
    x.segment(shape.offset, shape.count) = parts_[static_cast<std::size_t>(i)];
  }
  return x;
}

double CompositeSolution::objective_total() const {
  double total = 0.0;
  for (double c : contributions_) total += c;
  return total;
}

bool CompositeSolution::caches_consistent(const SeparableProblem& problem, double tol) const {
  for (Index i = 0; i < part_count(); ++i) {
    const auto& shape = problem.subproblem(i);
    const double fresh =
        problem.objective().segment(shape.offset, shape.count).dot(parts_[static_cast<std::size_t>(i)]);
    if (std::abs(fresh - contributions_[static_cast<std::size_t>(i)]) > tol) return false;
  }
  return true;
}

Vector constraint_violation(const SeparableProblem& problem, const Vector& assembled) {
  if (assembled.size() != problem.variable_count())
    throw ValidationError("solution dimension mismatch");
  return problem.coupling() * assembled - problem.coupling_rhs();
}

Vector constraint_violation(const SeparableProblem& problem, const CompositeSolution& solution) {
  return constraint_violation(problem, solution.assemble(problem));
}

double evaluate_lagrangian(const SeparableProblem& problem, const Vector& assembled,
                           const Vector& multipliers) {
  if (multipliers.size() != problem.coupling_count())
    throw ValidationError("multiplier dimension mismatch");
  return problem.objective().dot(assembled) +
         multipliers.dot(constraint_violation(problem, assembled));
}

double evaluate_lagrangian(const SeparableProblem& problem, const CompositeSolution& solution,
                           const Vector& multipliers) {
  return evaluate_lagrangian(problem, solution.assemble(problem), multipliers);
}

SeparableProblem SmallMilpInstance::to_separable() const {
  const Index n = objective.size();
  std::vector<SubproblemShape> subs(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    subs[static_cast<std::size_t>(i)].offset = i;
    subs[static_cast<std::size_t>(i)].count = 1;
  }
  // Normalize a.x >= rhs to (-a).x <= -rhs; the dual then lives on the
  // nonnegative orthant and the engine projects instead of carrying slacks.
  SparseRowMatrix coupling(coupling_ge.rows(), n);
  std::vector<Eigen::Triplet<double>> entries;
  for (Index r = 0; r < coupling_ge.rows(); ++r)
    for (Index c = 0; c < n; ++c)
      if (coupling_ge(r, c) != 0.0)
        entries.emplace_back(r, c, -coupling_ge(r, c));
  coupling.setFromTriplets(entries.begin(), entries.end());
  return SeparableProblem(objective, bounds, std::move(subs), std::move(coupling), -rhs_ge,
                          std::vector<RowSense>(static_cast<std::size_t>(coupling_ge.rows()),
                                                RowSense::LessEqual));
}

SmallMilpInstance make_example1() {
  SmallMilpInstance inst;
  inst.objective = Vector(6);
  inst.objective << 1, 2, 3, 1, 2, 3;
  inst.bounds.assign(6, VariableBounds{0, 26});
  inst.coupling_ge = Matrix(2, 6);
  inst.coupling_ge << 1, 3, 5, 1, 3, 5,
                      2, 1.5, 5, 2, 0.5, 1;
  inst.rhs_ge = Vector(2);
  inst.rhs_ge << 26, 16;
  return inst;
}

Vector example1_reference_multipliers() {
  Vector ref(2);
  ref << 0.6, 0.0;
  return ref;
}

}  // namespace slblr
