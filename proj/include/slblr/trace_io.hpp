#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "slblr/engine.hpp"
#include "slblr/repair.hpp"

namespace slblr {

/// Shortest round-trip decimal form, always '.'-decimal regardless of locale.
std::string format_double(double value);

/// Per-iteration trace. Columns: k, stepsize, L, dual_value_if_exact,
/// grad_norm, level_in_force, detector_fired,
/// lambda_distance_to_reference_if_known. Unknown fields stay empty.
void write_trace_csv(std::ostream& out, const RunTrace& trace,
                     const std::optional<Vector>& reference_multipliers);

/// Run summary as JSON text (RepairReport, termination, totals). Matches
/// schema/summary.schema.json.
std::string summarize_run(const std::string& instance, const std::string& policy,
                          const RunTrace& trace, const RepairReport* repair);

}  // namespace slblr
