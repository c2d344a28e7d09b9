#pragma once

#include "slblr/types.hpp"

namespace slblr {

struct PhaseOneResult {
  double optimum = 0.0;  // min over lambda of max_k (offset_k - normal_k . lambda), floored at 0
  Vector point;          // argmin lambda
  long iterations = 0;
};

/// Dense phase-1 simplex with Bland's rule for the program
///   min t   s.t.   normals.row(k) . lambda + t >= offsets[k],  t >= 0,
/// with lambda free. The system { normals . lambda >= offsets } is feasible
/// exactly when the optimum is 0. Throws SolverError past iteration_cap.
PhaseOneResult phase_one_least_violation(const Matrix& normals, const Vector& offsets,
                                         long iteration_cap);

}  // namespace slblr
