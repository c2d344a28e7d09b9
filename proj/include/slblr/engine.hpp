#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slblr/detector.hpp"
#include "slblr/problem.hpp"
#include "slblr/stepsize.hpp"
#include "slblr/types.hpp"

namespace slblr {

enum class UpdateMode { Interleaved, FullPass, Incremental };

/// What happens when no single subproblem solve satisfies the surrogate
/// condition: keep solving within the iteration (default) or accept the
/// candidate with a halved stepsize.
enum class SurrogateFallback { ContinuePass, AcceptHalved };

enum class TerminationReason {
  MaxIterations,
  StepsizeFloor,
  ZeroSubgradient,
  SurrogateConditionUnattainable,
  LevelNotAboveValue,
};

std::string to_string(TerminationReason reason);

struct ConstantInit {
  double value = 101.0;
};
struct ExplicitInit {
  Vector multipliers;
};
struct UniformRandomInit {
  double lo = 90.0;
  double hi = 110.0;
};
using MultiplierInit = std::variant<ConstantInit, ExplicitInit, UniformRandomInit>;

enum class PolicyKind { NonSummable, PolyakKnown, SurrogatePolyak, SubgradientLevel, SlrContraction, Slblr };

struct PolicySpec {
  PolicyKind kind = PolicyKind::Slblr;
  /// Polyak fraction; 0 means "default to 1 / subproblem count" at run start.
  double gamma = 0.0;
  double zeta = 1.0 / 1.5;
  double q_star = 0.0;  // polyak variants
  /// A level whose stepsize falls below this is treated as overtaken and
  /// refreshed (kept separate from the engine stepsize floor so comparison
  /// runs can disable floor termination without freezing the level rule).
  double level_pinch = 1e-10;
  double level_delta0 = 100.0;
  double level_path_budget = 60.0;  // R
  double level_beta = 0.5;
  double level_tau = 0.5;
  double slr_big_m = 40.0;
  double slr_rate = 0.05;
};

struct EngineConfig {
  MultiplierInit init = ConstantInit{};
  double initial_stepsize = 0.5;
  int max_iterations = 1000;
  double stepsize_floor = 1e-10;
  UpdateMode mode = UpdateMode::Interleaved;
  SurrogateFallback fallback = SurrogateFallback::ContinuePass;
  PolicySpec policy;
  DetectorConfig detector;  // variant Off disables the detector entirely
  /// Measure the exact dual value every this many iterations (0 = off).
  /// Measurement is side-effect free and does not touch the composite.
  int exact_eval_cadence = 0;
  std::uint64_t seed = 0;
  /// Keep a per-record copy of the assembled solution (tests only).
  bool keep_assembled_snapshots = false;

  void validate() const;
};

struct IterateRecord {
  int k = 0;
  Vector multipliers;
  double stepsize = 0.0;  // 0 on terminal records written without an update
  Vector subgradient;     // raw surrogate subgradient
  double surrogate_value = 0.0;
  std::vector<int> solved;  // subproblem indices solved this iteration
  std::optional<double> exact_dual;
  std::optional<double> level_in_force;
  bool detector_fired = false;
  double elapsed_seconds = 0.0;
};

struct LevelEvent {
  int index = 0;      // j
  int iteration = 0;  // k at which the level was inferred
  double level = 0.0;
};

struct RunTrace {
  std::vector<IterateRecord> records;
  std::vector<LevelEvent> level_events;
  std::optional<double> best_exact_dual;       // best certified dual value seen
  std::optional<double> certified_final_dual;  // exact q at the final multipliers
  TerminationReason termination = TerminationReason::MaxIterations;
  Vector final_multipliers;
  CompositeSolution final_composite;
  long long total_subproblem_solves = 0;
  double total_seconds = 0.0;
  std::vector<Vector> assembled_snapshots;  // only with keep_assembled_snapshots
};

/// Strict surrogate optimality condition L(candidate) < L(previous) at the
/// given multipliers.
bool surrogate_condition_holds(const SeparableProblem& problem, const CompositeSolution& previous,
                               const CompositeSolution& candidate, const Vector& multipliers);

/// lambda + s g, with components of less-equal rows projected onto [0, inf).
Vector update_multipliers(const Vector& multipliers, double stepsize, const Vector& subgradient,
                          const std::vector<RowSense>& senses);

/// One partial update of the incremental scheme: psi + s (contribution - target).
Vector incremental_update(const Vector& psi, const Vector& contribution, double stepsize,
                          const Vector& target);

/// Round-robin over subproblem indices.
class RoundRobinScheduler {
 public:
  explicit RoundRobinScheduler(Index count) : count_(count) {}
  Index next() {
    const Index i = cursor_;
    cursor_ = (cursor_ + 1) % count_;
    return i;
  }

 private:
  Index count_ = 1;
  Index cursor_ = 0;
};

/// Runs the coordination loop until max iterations, the stepsize floor, a
/// zero surrogate subgradient, or an unattainable surrogate condition. The
/// trace is deterministic given the seed and always ends with a certified
/// exact dual value at the final multipliers.
RunTrace run_engine(const SeparableProblem& problem, const EngineConfig& config);

}  // namespace slblr
