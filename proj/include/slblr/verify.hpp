#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slblr/types.hpp"

namespace slblr {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<PropertyResult> properties;

  bool all_passed() const {
    for (const auto& p : properties)
      if (!p.passed) return false;
    return true;
  }
};

/// Grid-search value of the optimal dual of the six-variable reference
/// instance (lambda in [0,2]^2, step 0.01).
double example1_grid_optimal_dual();

/// Polyak rule with the oracle optimum: multiplier distance to the optimal
/// multipliers strictly decreases at every update.
SuiteResult verify_theorem1();

/// LP feasibility of the update halfspaces agrees with direct checking of
/// the norm conditions over randomized windows (dimension <= 4, length <= 6).
SuiteResult verify_detector_equivalence(int window_count = 1000, std::uint64_t seed = 7);

/// Every level inferred during the reference-instance convergence sweeps
/// strictly exceeds the oracle optimal dual value.
SuiteResult verify_level_overestimate();

/// Repair after short level-based runs never undercuts the exact optimum on
/// random small assignment instances and matches it on at least 60%.
SuiteResult verify_oracle_parity(int instance_count = 100, std::uint64_t seed = 11);

std::vector<std::string> verify_suite_names();

/// Runs a suite by name ("theorem1", "detector-equivalence",
/// "level-overestimate", "oracle-parity"); nullopt for unknown names.
std::optional<SuiteResult> run_verify_suite(const std::string& name);

}  // namespace slblr
