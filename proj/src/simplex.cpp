#include "slblr/simplex.hpp"

#include <cmath>
#include <sstream>

namespace slblr {

namespace {
constexpr double kEnteringTol = 1e-9;
constexpr double kPivotTol = 1e-11;
}  // namespace

PhaseOneResult phase_one_least_violation(const Matrix& normals, const Vector& offsets,
                                         long iteration_cap) {
  const Index rows = normals.rows();
  const Index dim = normals.cols();
  if (offsets.size() != rows) throw ValidationError("offset count mismatch");

  PhaseOneResult result;
  result.point = Vector::Zero(dim);
  if (rows == 0) return result;

  // lambda = 0 already satisfies the system when no offset is positive.
  Index worst = 0;
  const double max_offset = offsets.maxCoeff(&worst);
  if (max_offset <= 0.0) return result;

  // Variables: u (dim), v (dim), t, surplus w (rows); lambda = u - v.
  // Row k states normals_k.(u - v) + t - w_k = offsets_k. Initial basis: t in
  // the worst row, surplus elsewhere.
  using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Index t_col = 2 * dim;
  const Index w_col = 2 * dim + 1;
  const Index ncols = 2 * dim + 1 + rows;

  Tableau tab = Tableau::Zero(rows, ncols + 1);
  for (Index k = 0; k < rows; ++k) {
    tab.row(k).segment(0, dim) = normals.row(k);
    tab.row(k).segment(dim, dim) = -normals.row(k);
    tab(k, t_col) = 1.0;
    tab(k, w_col + k) = -1.0;
    tab(k, ncols) = offsets[k];
  }
  for (Index k = 0; k < rows; ++k) {
    if (k == worst) continue;
    tab.row(k) = tab.row(worst) - tab.row(k);
  }

  std::vector<Index> basis(static_cast<std::size_t>(rows));
  for (Index k = 0; k < rows; ++k) basis[static_cast<std::size_t>(k)] = w_col + k;
  basis[static_cast<std::size_t>(worst)] = t_col;

  Eigen::RowVectorXd reduced = Eigen::RowVectorXd::Zero(ncols);
  reduced.segment(0, dim) = -normals.row(worst);
  reduced.segment(dim, dim) = normals.row(worst);
  reduced[w_col + worst] = 1.0;
  double objective = max_offset;

  while (true) {
    // Bland: smallest improving column with a usable pivot enters. Columns
    // whose entries are all below the pivot tolerance are numerically
    // ill-defined directions and are skipped (the objective t >= 0 cannot be
    // unbounded, so such a column is roundoff noise).
    Index entering = -1;
    Index leaving = -1;
    double best_ratio = 0.0;
    for (Index j = 0; j < ncols && entering < 0; ++j) {
      if (reduced[j] >= -kEnteringTol) continue;
      for (Index i = 0; i < rows; ++i) {
        const double pivot = tab(i, j);
        if (pivot <= kPivotTol) continue;
        const double ratio = tab(i, ncols) / pivot;
        if (leaving < 0 || ratio < best_ratio - 1e-12 ||
            (std::abs(ratio - best_ratio) <= 1e-12 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leaving)])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (leaving >= 0) entering = j;
    }
    if (entering < 0) break;

    tab.row(leaving) /= tab(leaving, entering);
    for (Index i = 0; i < rows; ++i) {
      if (i == leaving) continue;
      const double factor = tab(i, entering);
      if (factor != 0.0) tab.row(i) -= factor * tab.row(leaving);
    }
    const double rate = reduced[entering];
    objective += rate * tab(leaving, ncols);
    reduced -= rate * tab.row(leaving).segment(0, ncols);
    basis[static_cast<std::size_t>(leaving)] = entering;

    if (++result.iterations > iteration_cap) {
      std::ostringstream msg;
      msg << "phase-1 simplex exceeded " << iteration_cap << " pivots on " << rows << " rows, "
          << dim << " columns (objective " << objective << ")";
      throw SolverError(msg.str());
    }
  }

  for (Index i = 0; i < rows; ++i) {
    const Index var = basis[static_cast<std::size_t>(i)];
    const double value = tab(i, ncols);
    if (var < dim)
      result.point[var] += value;
    else if (var < 2 * dim)
      result.point[var - dim] -= value;
  }
  result.optimum = objective;
  return result;
}

}  // namespace slblr
