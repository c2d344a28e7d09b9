#include "slblr/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "slblr/solvers.hpp"

namespace slblr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector initial_multipliers(const SeparableProblem& problem, const EngineConfig& config) {
  const Index m = problem.coupling_count();
  Vector lambda(m);
  if (const auto* constant = std::get_if<ConstantInit>(&config.init)) {
    lambda.setConstant(constant->value);
  } else if (const auto* explicit_init = std::get_if<ExplicitInit>(&config.init)) {
    if (explicit_init->multipliers.size() != m)
      throw ValidationError("explicit multiplier vector has wrong dimension");
    lambda = explicit_init->multipliers;
  } else {
    const auto& random = std::get<UniformRandomInit>(config.init);
    if (random.lo > random.hi) throw ValidationError("random init needs lo <= hi");
    SplitMix64 rng(config.seed);
    for (Index r = 0; r < m; ++r) lambda[r] = rng.uniform_real(random.lo, random.hi);
  }
  for (Index r = 0; r < m; ++r)
    if (problem.sense(r) == RowSense::LessEqual) lambda[r] = std::max(0.0, lambda[r]);
  return lambda;
}

PolicyState make_policy_state(const PolicySpec& spec, double gamma, double s0) {
  switch (spec.kind) {
    case PolicyKind::NonSummable:
      return NonSummableState{s0};
    case PolicyKind::PolyakKnown:
      if (gamma <= 0.0 || gamma >= 2.0) throw ValidationError("polyak gamma must lie in (0, 2)");
      return PolyakKnownState{spec.q_star, gamma};
    case PolicyKind::SurrogatePolyak:
      if (gamma <= 0.0 || gamma >= 1.0)
        throw ValidationError("surrogate polyak gamma must lie in (0, 1)");
      return SurrogatePolyakState{spec.q_star, gamma};
    case PolicyKind::SubgradientLevel: {
      SubgradientLevelState state;
      state.gamma = gamma;
      state.delta = spec.level_delta0;
      state.beta = spec.level_beta;
      state.tau = spec.level_tau;
      state.path_budget = spec.level_path_budget;
      if (state.delta <= 0.0 || state.path_budget <= 0.0)
        throw ValidationError("subgradient-level needs positive delta0 and R");
      return state;
    }
    case PolicyKind::SlrContraction: {
      SlrContractionState state;
      state.big_m = spec.slr_big_m;
      state.rate = spec.slr_rate;
      if (state.big_m < 1.0) throw ValidationError("contraction M must be >= 1");
      if (state.rate < 0.0 || state.rate > 1.0) throw ValidationError("contraction r must lie in [0, 1]");
      return state;
    }
    case PolicyKind::Slblr: {
      if (gamma <= 0.0 || gamma >= 1.0) throw ValidationError("level-based gamma must lie in (0, 1)");
      if (spec.zeta <= 0.0 || spec.zeta > 1.0) throw ValidationError("zeta must lie in (0, 1]");
      SlblrState state;
      state.gamma = gamma;
      state.zeta = spec.zeta;
      return state;
    }
  }
  throw ValidationError("unknown policy kind");
}

}  // namespace

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::MaxIterations:
      return "max iterations";
    case TerminationReason::StepsizeFloor:
      return "stepsize floor";
    case TerminationReason::ZeroSubgradient:
      return "zero surrogate subgradient";
    case TerminationReason::SurrogateConditionUnattainable:
      return "surrogate condition unattainable";
    case TerminationReason::LevelNotAboveValue:
      return "level not above current value";
  }
  return "unknown";
}

void EngineConfig::validate() const {
  if (initial_stepsize <= 0.0) throw ValidationError("initial stepsize must be positive");
  if (max_iterations < 0) throw ValidationError("max iterations must be nonnegative");
  if (stepsize_floor < 0.0) throw ValidationError("stepsize floor must be nonnegative");
  if (exact_eval_cadence < 0) throw ValidationError("cadence must be nonnegative");
}

bool surrogate_condition_holds(const SeparableProblem& problem, const CompositeSolution& previous,
                               const CompositeSolution& candidate, const Vector& multipliers) {
  return evaluate_lagrangian(problem, candidate, multipliers) <
         evaluate_lagrangian(problem, previous, multipliers);
}

Vector update_multipliers(const Vector& multipliers, double stepsize, const Vector& subgradient,
                          const std::vector<RowSense>& senses) {
  if (!(stepsize > 0.0) || !std::isfinite(stepsize))
    throw ValidationError("stepsize must be positive and finite");
  if (multipliers.size() != subgradient.size() ||
      static_cast<std::size_t>(multipliers.size()) != senses.size())
    throw ValidationError("multiplier update dimension mismatch");
  if (!multipliers.allFinite() || !subgradient.allFinite())
    throw ValidationError("non-finite multiplier update input");

  Vector next = multipliers + stepsize * subgradient;
  for (Index r = 0; r < next.size(); ++r)
    if (senses[static_cast<std::size_t>(r)] == RowSense::LessEqual) next[r] = std::max(0.0, next[r]);
  return next;
}

Vector incremental_update(const Vector& psi, const Vector& contribution, double stepsize,
                          const Vector& target) {
  if (psi.size() != contribution.size() || psi.size() != target.size())
    throw ValidationError("incremental update dimension mismatch");
  if (!std::isfinite(stepsize)) throw ValidationError("non-finite stepsize");
  return psi + stepsize * (contribution - target);
}

namespace {

/// Per-run driver holding the mutable pieces of one coordination loop.
class EngineRun {
 public:
  EngineRun(const SeparableProblem& problem, const EngineConfig& config)
      : problem_(problem),
        config_(config),
        gamma_(config.policy.gamma > 0.0
                   ? config.policy.gamma
                   : 1.0 / static_cast<double>(problem.subproblem_count())),
        policy_(make_policy_state(config.policy, gamma_, config.initial_stepsize)),
        detector_(make_detector(config, gamma_)),
        scheduler_(problem.subproblem_count()),
        start_(Clock::now()) {}

  RunTrace run();

 private:
  static ConvergenceDetector make_detector(const EngineConfig& config, double gamma) {
    DetectorConfig dc = config.detector;
    dc.gamma = gamma;
    return ConvergenceDetector(dc);
  }

  double evaluate(const CompositeSolution& composite, const Vector& lambda) const {
    return evaluate_lagrangian(problem_, composite, lambda);
  }

  /// Advances the composite for interleaved mode: solve the scheduled
  /// subproblem, then keep solving within the iteration until the surrogate
  /// condition holds or a full pass completes. A completed full pass leaves
  /// an exact relaxed solution and the iteration proceeds with it whether or
  /// not the decrease was strict (an exact solution's violation vector is a
  /// true subgradient, so the update stays valid).
  void advance_interleaved(const Vector& lambda, std::vector<int>* solved, bool* exact,
                           bool* halving_requested, bool* strict_improvement) {
    const Vector priced = problem_.priced_objective(lambda);
    const double base = evaluate(composite_, lambda);
    const Index count = problem_.subproblem_count();
    for (Index attempt = 1; attempt <= count; ++attempt) {
      const Index i = scheduler_.next();
      solved->push_back(static_cast<int>(i));
      const auto& shape = problem_.subproblem(i);
      composite_.set_part(problem_, i,
                          solve_subproblem(problem_, i, priced.segment(shape.offset, shape.count)).solution);
      ++solves_;
      if (evaluate(composite_, lambda) < base) {
        *strict_improvement = true;
        break;
      }
      if (config_.fallback == SurrogateFallback::AcceptHalved && attempt == 1) {
        *halving_requested = true;
        break;
      }
    }
    composite_.tick(*solved);
    *exact = static_cast<Index>(solved->size()) == count;
  }

  std::optional<double> policy_stepsize(int k, double surrogate_value, double g_norm_sq,
                                        bool* refreshed, double* refreshed_level) {
    if (auto* ns = std::get_if<NonSummableState>(&policy_)) return nonsummable_step(*ns, k + 1);
    if (auto* pk = std::get_if<PolyakKnownState>(&policy_)) {
      if (pk->q_star <= surrogate_value) return std::nullopt;
      return polyak_step(*pk, surrogate_value, g_norm_sq);
    }
    if (auto* sp = std::get_if<SurrogatePolyakState>(&policy_)) {
      if (sp->q_star <= surrogate_value) return std::nullopt;
      return polyak_step(*sp, surrogate_value, g_norm_sq);
    }
    if (auto* lvl = std::get_if<SubgradientLevelState>(&policy_))
      return subgradient_level_step(*lvl, surrogate_value, last_displacement_, g_norm_sq);
    if (auto* slr = std::get_if<SlrContractionState>(&policy_)) {
      if (k == 0) {
        slr->previous_step_norm_product = config_.initial_stepsize * std::sqrt(g_norm_sq);
        return config_.initial_stepsize;
      }
      return slr_contraction_step(*slr, std::sqrt(g_norm_sq), k);
    }
    auto& state = std::get<SlblrState>(policy_);
    if (!state.level) return config_.initial_stepsize;  // held until the first firing
    const auto rearm = [&] {
      // Degenerate single-step refresh. The scale doubles while refreshes
      // keep hitting a too-low level (possible under the eager ball
      // detector) and resets once a genuine window firing takes over.
      state.level = detector_.force_refresh(k, config_.initial_stepsize * rearm_scale_,
                                            surrogate_value, g_norm_sq);
      rearm_scale_ *= 2.0;
      *refreshed = true;
      *refreshed_level = *state.level;
    };
    if (*state.level <= surrogate_value) {
      rearm();
      last_rearm_value_ = surrogate_value;
    }
    double step = slblr_step(state, surrogate_value, g_norm_sq);
    if (step < std::max(config_.stepsize_floor, config_.policy.level_pinch) &&
        surrogate_value > last_rearm_value_ + 1e-6 * (1.0 + std::abs(surrogate_value))) {
      // The dual value caught the level while still making progress between
      // refreshes: treat the level as overtaken so the process repeats. Once
      // refreshes stop paying, the run is left to settle onto the floor at a
      // converged point.
      rearm();
      last_rearm_value_ = surrogate_value;
      step = slblr_step(state, surrogate_value, g_norm_sq);
    }
    return step;
  }

  void push_record(RunTrace* trace, int k, const Vector& lambda, double stepsize, Vector subgradient,
                   double surrogate_value, std::vector<int> solved, std::optional<double> exact_dual,
                   bool fired) {
    IterateRecord record;
    record.k = k;
    record.multipliers = lambda;
    record.stepsize = stepsize;
    record.subgradient = std::move(subgradient);
    record.surrogate_value = surrogate_value;
    record.solved = std::move(solved);
    record.exact_dual = exact_dual;
    record.level_in_force = current_level_;
    record.detector_fired = fired;
    record.elapsed_seconds = seconds_since(start_);
    trace->records.push_back(std::move(record));
    if (config_.keep_assembled_snapshots)
      trace->assembled_snapshots.push_back(composite_.assemble(problem_));
  }

  void note_exact(RunTrace* trace, double value, const Vector& lambda) {
    if (!trace->best_exact_dual || value > *trace->best_exact_dual) {
      trace->best_exact_dual = value;
      best_multipliers_ = lambda;
    }
  }

  const SeparableProblem& problem_;
  const EngineConfig& config_;
  double gamma_;
  PolicyState policy_;
  ConvergenceDetector detector_;
  RoundRobinScheduler scheduler_;
  CompositeSolution composite_;
  Clock::time_point start_;
  long long solves_ = 0;
  double last_displacement_ = 0.0;
  double stepsize_in_force_ = 0.0;
  double rearm_scale_ = 1.0;
  double last_rearm_value_ = -std::numeric_limits<double>::infinity();
  Vector best_multipliers_;
  std::optional<double> current_level_;
};

RunTrace EngineRun::run() {
  config_.validate();
  RunTrace trace;
  Vector lambda = initial_multipliers(problem_, config_);
  stepsize_in_force_ = config_.initial_stepsize;

  const Index sub_count = problem_.subproblem_count();
  composite_ = solve_relaxed_exact(problem_, lambda);
  solves_ += sub_count;

  std::vector<int> all_indices(static_cast<std::size_t>(sub_count));
  for (Index i = 0; i < sub_count; ++i) all_indices[static_cast<std::size_t>(i)] = static_cast<int>(i);

  std::optional<double> exact_at_final;  // exact dual value at the final multipliers

  for (int k = 0;; ++k) {
    std::vector<int> solved;
    bool exact = false;
    bool halving_requested = false;
    bool strict_improvement = true;

    if (k == 0) {
      solved = all_indices;
      exact = true;
    } else if (config_.mode == UpdateMode::FullPass) {
      composite_ = solve_relaxed_exact(problem_, lambda);
      solves_ += sub_count;
      solved = all_indices;
      exact = true;
      composite_.tick(solved);
    } else if (config_.mode == UpdateMode::Interleaved) {
      strict_improvement = false;
      advance_interleaved(lambda, &solved, &exact, &halving_requested, &strict_improvement);
    }
    // Incremental mode advances below, once the stepsize is known; until
    // then this iteration's surrogate data comes from the incoming composite.

    double surrogate_value = evaluate(composite_, lambda);
    Vector subgradient = constraint_violation(problem_, composite_);
    double g_norm_sq = subgradient.squaredNorm();

    std::optional<double> exact_dual;
    if (exact) {
      exact_dual = surrogate_value;
      note_exact(&trace, surrogate_value, lambda);
    } else if (config_.exact_eval_cadence > 0 && k % config_.exact_eval_cadence == 0) {
      exact_dual = dual_function_oracle(problem_, lambda);
      solves_ += sub_count;
      note_exact(&trace, *exact_dual, lambda);
    }

    const auto finish = [&](TerminationReason reason, double recorded_stepsize, bool fired) {
      push_record(&trace, k, lambda, recorded_stepsize, std::move(subgradient), surrogate_value,
                  std::move(solved), exact_dual, fired);
      trace.termination = reason;
      exact_at_final = exact_dual;  // the record's multipliers are final
    };

    if (g_norm_sq == 0.0) {
      finish(TerminationReason::ZeroSubgradient, 0.0, false);
      break;
    }
    if (k >= config_.max_iterations) {
      finish(TerminationReason::MaxIterations, 0.0, false);
      break;
    }

    bool refreshed = false;
    double refreshed_level = 0.0;
    std::optional<double> maybe_step =
        policy_stepsize(k, surrogate_value, g_norm_sq, &refreshed, &refreshed_level);
    if (refreshed) {
      current_level_ = refreshed_level;
      trace.level_events.push_back(LevelEvent{detector_.level_count(), k, refreshed_level});
    }
    if (!maybe_step) {
      finish(TerminationReason::LevelNotAboveValue, 0.0, refreshed);
      break;
    }
    double stepsize = *maybe_step;
    if (halving_requested) stepsize *= 0.5;
    if (stepsize < config_.stepsize_floor) {
      finish(TerminationReason::StepsizeFloor, stepsize, refreshed);
      break;
    }

    Vector next;
    if (config_.mode == UpdateMode::Incremental && k > 0) {
      // Solve each subproblem at the running partial multipliers, folding
      // its coupling contribution in immediately; project once at the end.
      Vector psi = lambda;
      const Vector target = problem_.coupling_rhs() / static_cast<double>(sub_count);
      for (Index i = 0; i < sub_count; ++i) {
        const Vector priced = problem_.priced_objective(psi);
        const auto& shape = problem_.subproblem(i);
        composite_.set_part(
            problem_, i,
            solve_subproblem(problem_, i, priced.segment(shape.offset, shape.count)).solution);
        ++solves_;
        solved.push_back(static_cast<int>(i));
        const Vector contribution =
            problem_.coupling().middleCols(shape.offset, shape.count) * composite_.part(i);
        psi = incremental_update(psi, contribution, stepsize, target);
      }
      for (Index r = 0; r < psi.size(); ++r)
        if (problem_.sense(r) == RowSense::LessEqual) psi[r] = std::max(0.0, psi[r]);
      next = psi;
      composite_.tick(solved);
      // The record reflects the post-pass composite at this iterate's lambda.
      surrogate_value = evaluate(composite_, lambda);
      subgradient = constraint_violation(problem_, composite_);
      g_norm_sq = subgradient.squaredNorm();
    } else {
      next = update_multipliers(lambda, stepsize, subgradient, problem_.senses());
    }

    // A full pass that failed the strict condition left an exact relaxed
    // solution; when projection also swallows the whole step, the state can
    // never change again and the condition is unattainable for good.
    if (!strict_improvement && exact && (next - lambda).squaredNorm() == 0.0) {
      finish(TerminationReason::SurrogateConditionUnattainable, stepsize, refreshed);
      break;
    }

    const Vector effective = (next - lambda) / stepsize;
    const DetectorOutcome outcome =
        detector_.on_iteration(k, lambda, effective, stepsize, surrogate_value, g_norm_sq);

    push_record(&trace, k, lambda, stepsize, std::move(subgradient), surrogate_value,
                std::move(solved), exact_dual, outcome.fired || refreshed);

    if (outcome.fired) {
      current_level_ = outcome.level;
      rearm_scale_ = 1.0;
      trace.level_events.push_back(LevelEvent{detector_.level_count(), k, outcome.level});
      if (auto* state = std::get_if<SlblrState>(&policy_)) state->level = outcome.level;
    }

    last_displacement_ = (next - lambda).norm();
    stepsize_in_force_ = stepsize;
    lambda = std::move(next);
  }

  trace.final_multipliers = lambda;
  if (!exact_at_final) {
    const double q = dual_function_oracle(problem_, lambda);
    solves_ += sub_count;
    exact_at_final = q;
    note_exact(&trace, q, lambda);
  }
  trace.certified_final_dual = exact_at_final;
  // The certification pass re-solves the relaxed problem at the multipliers
  // behind the reported bound, so the composite handed to repair matches it.
  if (best_multipliers_.size() == lambda.size()) {
    composite_ = solve_relaxed_exact(problem_, best_multipliers_);
    solves_ += sub_count;
  }
  trace.final_composite = composite_;
  trace.total_subproblem_solves = solves_;
  trace.total_seconds = seconds_since(start_);
  return trace;
}

}  // namespace

RunTrace run_engine(const SeparableProblem& problem, const EngineConfig& config) {
  EngineRun run(problem, config);
  return run.run();
}

}  // namespace slblr
