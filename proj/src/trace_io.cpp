#include "slblr/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "json.hpp"

namespace slblr {

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace,
                     const std::optional<Vector>& reference_multipliers) {
  out << "k,stepsize,L,dual_value_if_exact,grad_norm,level_in_force,detector_fired,"
         "lambda_distance_to_reference_if_known\n";
  for (const auto& record : trace.records) {
    out << record.k << ',' << format_double(record.stepsize) << ','
        << format_double(record.surrogate_value) << ',';
    if (record.exact_dual) out << format_double(*record.exact_dual);
    out << ',' << format_double(record.subgradient.norm()) << ',';
    if (record.level_in_force) out << format_double(*record.level_in_force);
    out << ',' << (record.detector_fired ? 1 : 0) << ',';
    if (reference_multipliers)
      out << format_double((record.multipliers - *reference_multipliers).norm());
    out << '\n';
  }
}

std::string summarize_run(const std::string& instance, const std::string& policy,
                          const RunTrace& trace, const RepairReport* repair) {
  nlohmann::ordered_json summary;
  summary["instance"] = instance;
  summary["policy"] = policy;
  summary["iterations"] = trace.records.empty() ? 0 : trace.records.back().k;
  summary["termination"] = to_string(trace.termination);
  summary["subproblem_solves"] = trace.total_subproblem_solves;
  summary["wall_seconds"] = trace.total_seconds;
  summary["level_updates"] = static_cast<int>(trace.level_events.size());
  if (trace.best_exact_dual)
    summary["best_dual_bound"] = *trace.best_exact_dual;
  else
    summary["best_dual_bound"] = nullptr;
  if (trace.certified_final_dual)
    summary["certified_final_dual"] = *trace.certified_final_dual;
  else
    summary["certified_final_dual"] = nullptr;

  if (repair != nullptr) {
    nlohmann::ordered_json r;
    r["feasible"] = repair->feasible;
    r["cost"] = repair->upper_bound;
    if (repair->lower_bound)
      r["lower_bound"] = *repair->lower_bound;
    else
      r["lower_bound"] = nullptr;
    if (repair->relative_gap) {
      // Reported in percent with four decimals.
      r["relative_gap_percent"] = std::round(*repair->relative_gap * 1e6) / 1e4;
    } else {
      r["relative_gap_percent"] = nullptr;
    }
    r["jobs_adjusted"] = repair->jobs_adjusted;
    r["wall_seconds"] = repair->wall_seconds;
    r["note"] = repair->note;
    summary["repair"] = std::move(r);
  } else {
    summary["repair"] = nullptr;
  }
  return summary.dump(2) + "\n";
}

}  // namespace slblr
