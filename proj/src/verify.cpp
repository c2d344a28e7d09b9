#include "slblr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slblr/detector.hpp"
#include "slblr/engine.hpp"
#include "slblr/gap.hpp"
#include "slblr/problem.hpp"
#include "slblr/repair.hpp"
#include "slblr/solvers.hpp"

namespace slblr {

namespace {

EngineConfig example1_slblr_config(double gamma) {
  EngineConfig config;
  config.init = ExplicitInit{Vector::Zero(2)};
  config.initial_stepsize = 0.1;
  config.max_iterations = 1000;
  config.policy.kind = PolicyKind::Slblr;
  config.policy.gamma = gamma;
  config.detector.variant = DetectorVariant::Linear;
  return config;
}

/// Direct check of the norm conditions at a point.
bool satisfies_norm_conditions(const DetectorWindow& window, const Vector& point, double tol) {
  for (const auto& step : window.steps()) {
    const Vector next = step.multipliers + step.stepsize * step.effective_subgradient;
    if ((point - next).squaredNorm() > (point - step.multipliers).squaredNorm() + tol) return false;
  }
  return true;
}

}  // namespace

double example1_grid_optimal_dual() {
  const SeparableProblem problem = make_example1().to_separable();
  double best = -std::numeric_limits<double>::infinity();
  Vector lambda(2);
  for (int a = 0; a <= 200; ++a)
    for (int b = 0; b <= 200; ++b) {
      lambda[0] = a / 100.0;
      lambda[1] = b / 100.0;
      best = std::max(best, dual_function_oracle(problem, lambda));
    }
  return best;
}

SuiteResult verify_theorem1() {
  SuiteResult suite{"theorem1", {}};
  const SeparableProblem problem = make_example1().to_separable();
  const double q_star = example1_grid_optimal_dual();
  const Vector reference = example1_reference_multipliers();

  EngineConfig config;
  config.init = ExplicitInit{Vector::Zero(2)};
  config.initial_stepsize = 0.1;
  config.max_iterations = 200;
  config.stepsize_floor = 1e-12;
  config.mode = UpdateMode::FullPass;
  config.policy.kind = PolicyKind::PolyakKnown;
  config.policy.gamma = 1.0;
  config.policy.q_star = q_star;
  config.detector.variant = DetectorVariant::Off;

  const RunTrace trace = run_engine(problem, config);

  int violations = 0;
  int updates = 0;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    if (trace.records[i].stepsize <= 0.0) continue;
    if (trace.records[i].subgradient.squaredNorm() == 0.0) continue;
    ++updates;
    const double before = (trace.records[i].multipliers - reference).norm();
    const double after = (trace.records[i + 1].multipliers - reference).norm();
    if (!(after < before)) ++violations;
  }

  std::ostringstream detail;
  detail << updates << " updates, " << violations << " monotonicity violations, final distance "
         << (trace.final_multipliers - reference).norm() << ", termination: "
         << to_string(trace.termination);
  suite.properties.push_back(
      PropertyResult{"distance to optimal multipliers strictly decreases", violations == 0 && updates > 0,
                     detail.str()});
  return suite;
}

SuiteResult verify_detector_equivalence(int window_count, std::uint64_t seed) {
  SuiteResult suite{"detector-equivalence", {}};
  SplitMix64 rng(seed);

  int feasible_windows = 0;
  int infeasible_windows = 0;
  int disagreements = 0;
  std::string first_disagreement;

  for (int w = 0; w < window_count; ++w) {
    const Index dim = static_cast<Index>(rng.uniform_int(1, 4));
    const Index length = static_cast<Index>(rng.uniform_int(1, 6));
    const bool contractive = rng.uniform_int(0, 1) == 0;

    DetectorWindow window;
    window.restart(0);
    Vector lambda(dim);
    for (Index d = 0; d < dim; ++d) lambda[d] = rng.uniform_real(-2.0, 2.0);
    Vector target(dim);
    for (Index d = 0; d < dim; ++d) target[d] = rng.uniform_real(-2.0, 2.0);

    for (Index s = 0; s < length; ++s) {
      const double stepsize = rng.uniform_real(0.05, 1.0);
      Vector g(dim);
      if (contractive) {
        // Step toward the target, never overshooting past it: the target
        // then witnesses every norm condition.
        const Vector to_target = target - lambda;
        const double scale = std::min(1.0, to_target.norm() / (stepsize + 1e-12));
        g = scale * to_target / std::max(to_target.norm(), 1e-12);
      } else {
        for (Index d = 0; d < dim; ++d) g[d] = rng.uniform_real(-1.0, 1.0);
      }
      WindowStep step;
      step.multipliers = lambda;
      step.effective_subgradient = g;
      step.stepsize = stepsize;
      step.surrogate_value = 0.0;
      step.raw_subgradient_norm_sq = g.squaredNorm();
      lambda = lambda + stepsize * g;
      if (g.squaredNorm() > 0.0) window.append(std::move(step));
    }
    if (window.empty()) continue;

    const FeasibilityOutcome lp = lp_feasible(build_halfspaces(window));

    double scale = 1.0;
    for (const auto& step : window.steps())
      scale = std::max({scale, step.multipliers.cwiseAbs().maxCoeff(),
                        (step.multipliers + step.stepsize * step.effective_subgradient)
                            .cwiseAbs()
                            .maxCoeff()});
    const double tol = 1e-9 * scale;

    bool agreed = true;
    std::string reason;
    if (lp.feasible) {
      // The witness must satisfy the norm conditions directly.
      if (!satisfies_norm_conditions(window, lp.witness, tol)) {
        agreed = false;
        reason = "witness fails a norm condition";
      }
      ++feasible_windows;
    } else {
      // Sampling must find no point satisfying the norm conditions.
      ++infeasible_windows;
      Vector lo = window.step(0).multipliers;
      Vector hi = lo;
      for (const auto& step : window.steps()) {
        const Vector next = step.multipliers + step.stepsize * step.effective_subgradient;
        lo = lo.cwiseMin(step.multipliers).cwiseMin(next);
        hi = hi.cwiseMax(step.multipliers).cwiseMax(next);
      }
      const Vector center = 0.5 * (lo + hi);
      const Vector half = 0.5 * (hi - lo) + Vector::Constant(dim, 1.0);
      Vector probe(dim);

      // Coarse grid at three inflation scales plus random samples.
      for (double inflate : {1.0, 3.0, 10.0}) {
        const int per_axis = dim <= 2 ? 21 : (dim == 3 ? 11 : 7);
        std::vector<Index> idx(static_cast<std::size_t>(dim), 0);
        while (agreed) {
          for (Index d = 0; d < dim; ++d)
            probe[d] = center[d] +
                       inflate * half[d] * (2.0 * idx[static_cast<std::size_t>(d)] / (per_axis - 1) - 1.0);
          if (satisfies_norm_conditions(window, probe, -tol)) {
            agreed = false;
            reason = "grid point satisfies the norm conditions";
          }
          Index d = dim - 1;
          for (; d >= 0; --d) {
            if (++idx[static_cast<std::size_t>(d)] < per_axis) break;
            idx[static_cast<std::size_t>(d)] = 0;
          }
          if (d < 0) break;
        }
      }
      for (int r = 0; r < 2000 && agreed; ++r) {
        for (Index d = 0; d < dim; ++d)
          probe[d] = center[d] + rng.uniform_real(-10.0, 10.0) * half[d];
        if (satisfies_norm_conditions(window, probe, -tol)) {
          agreed = false;
          reason = "sampled point satisfies the norm conditions";
        }
      }
    }

    if (!agreed) {
      ++disagreements;
      if (first_disagreement.empty()) {
        std::ostringstream msg;
        msg << "window " << w << " (dim " << dim << ", length " << window.length() << "): " << reason;
        first_disagreement = msg.str();
      }
    }
  }

  std::ostringstream detail;
  detail << feasible_windows << " feasible, " << infeasible_windows << " infeasible, "
         << disagreements << " disagreements";
  if (!first_disagreement.empty()) detail << "; first: " << first_disagreement;
  suite.properties.push_back(PropertyResult{
      "halfspace feasibility agrees with direct norm-condition checking",
      disagreements == 0 && feasible_windows > 0 && infeasible_windows > 0, detail.str()});
  return suite;
}

SuiteResult verify_level_overestimate() {
  SuiteResult suite{"level-overestimate", {}};
  const SeparableProblem problem = make_example1().to_separable();
  const double q_star = example1_grid_optimal_dual();

  for (double gamma : {0.05, 0.1, 0.2, 0.4}) {
    const RunTrace trace = run_engine(problem, example1_slblr_config(gamma));
    int below = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& event : trace.level_events) {
      worst_margin = std::min(worst_margin, event.level - q_star);
      if (!(event.level > q_star - 1e-9)) ++below;
    }
    std::ostringstream name;
    name << "levels overestimate the optimal dual (gamma " << gamma << ")";
    std::ostringstream detail;
    detail << trace.level_events.size() << " level updates, " << below
           << " at or below the optimum, smallest margin " << worst_margin;
    suite.properties.push_back(
        PropertyResult{name.str(), below == 0 && !trace.level_events.empty(), detail.str()});
  }
  return suite;
}

SuiteResult verify_oracle_parity(int instance_count, std::uint64_t seed) {
  SuiteResult suite{"oracle-parity", {}};
  int undercuts = 0;
  int matches = 0;
  int failures = 0;

  for (int i = 0; i < instance_count; ++i) {
    const Index machines = 2 + (i % 2);
    const Index jobs = 6 + (i % 5);
    const GapInstance instance = make_random_feasible_gap(machines, jobs, seed + static_cast<std::uint64_t>(i));
    const SeparableProblem problem = gap_to_separable(instance);

    EngineConfig config;
    config.init = ConstantInit{101.0};
    config.initial_stepsize = 0.5;
    config.max_iterations = 500;
    config.policy.kind = PolicyKind::Slblr;
    config.detector.variant = DetectorVariant::Linear;
    const RunTrace trace = run_engine(problem, config);

    const RepairReport report = repair_gap(instance, trace.final_composite);
    if (!report.feasible) {
      ++failures;
      continue;
    }
    const OracleResult oracle = exact_primal_oracle(instance, 10'000'000);
    if (report.upper_bound < oracle.value - 1e-9) ++undercuts;
    if (std::abs(report.upper_bound - oracle.value) <= 1e-9) ++matches;
  }

  std::ostringstream detail;
  detail << instance_count << " instances, " << failures << " repair failures, " << matches
         << " optimal repairs, " << undercuts << " oracle undercuts";
  suite.properties.push_back(PropertyResult{"repaired cost never undercuts the exact optimum",
                                            undercuts == 0 && failures == 0, detail.str()});
  const double match_rate = static_cast<double>(matches) / instance_count;
  std::ostringstream rate_detail;
  rate_detail << "match rate " << 100.0 * match_rate << "% (floor 60%)";
  suite.properties.push_back(
      PropertyResult{"repaired cost matches the optimum on at least 60% of instances",
                     match_rate >= 0.60, rate_detail.str()});
  return suite;
}

std::vector<std::string> verify_suite_names() {
  return {"theorem1", "detector-equivalence", "level-overestimate", "oracle-parity"};
}

std::optional<SuiteResult> run_verify_suite(const std::string& name) {
  if (name == "theorem1") return verify_theorem1();
  if (name == "detector-equivalence") return verify_detector_equivalence();
  if (name == "level-overestimate") return verify_level_overestimate();
  if (name == "oracle-parity") return verify_oracle_parity();
  return std::nullopt;
}

}  // namespace slblr
