#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "slblr/problem.hpp"
#include "slblr/types.hpp"

namespace slblr {

/// Generalized assignment instance: assign each job to exactly one machine,
/// minimizing cost, subject to machine capacities. Stored job-major
/// (cost(i, j) is job i on machine j); the text format is machine-major.
struct GapInstance {
  using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
  using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

  Index machines = 0;
  Index jobs = 0;
  IntMatrix cost;      // jobs x machines
  IntMatrix resource;  // jobs x machines
  IntVector capacity;  // machines

  /// Throws ValidationError on negative entries, inconsistent dimensions, or
  /// a job no machine can host.
  void validate() const;

  /// Cost of a full assignment (job i -> machine assignment[i]).
  std::int64_t assignment_cost(const std::vector<int>& assignment) const;

  /// True when the assignment respects every machine capacity.
  bool assignment_fits(const std::vector<int>& assignment) const;
};

struct OrlibParseOptions {
  /// Strict mode errors on unconsumed trailing integers; lenient mode
  /// tolerates trailing content and strips '#'-to-end-of-line comments.
  bool strict = true;
};

/// Reads the plain-text format: problem count P, then per problem M, N,
/// M*N costs (machine-major), M*N resources (machine-major), M capacities.
std::vector<GapInstance> parse_orlib_gap(std::istream& in, const OrlibParseOptions& options = {});
std::vector<GapInstance> parse_orlib_gap(const std::string& text, const OrlibParseOptions& options = {});

/// Inverse of parse_orlib_gap: reproduces the integer sequence of the file.
std::string serialize_orlib_gap(const std::vector<GapInstance>& instances);

/// Relaxes the per-job assignment equalities; machine capacities stay local.
/// Subproblem j is then a 0-1 knapsack over jobs for machine j. Rows are
/// oriented so the priced item cost is cost(i, j) - lambda_i.
SeparableProblem gap_to_separable(const GapInstance& instance);

/// Type-D benchmark instance: resource in U[1,100], cost 111 - resource plus
/// U[-10,10] noise, capacity 0.8 * column sum / machines. Deterministic in
/// the seed.
GapInstance make_type_d_gap(Index machines, Index jobs, std::uint64_t seed);

/// Small random instance for tests; retries until at least one full
/// assignment fits, so the result is always feasible.
GapInstance make_random_feasible_gap(Index machines, Index jobs, std::uint64_t seed);

}  // namespace slblr
