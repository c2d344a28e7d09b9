#pragma once

#include <optional>
#include <vector>

#include "slblr/types.hpp"

namespace slblr {

enum class DetectorVariant { Off, Linear, Ball };

/// Which inversion of the stepsize formula produces the level. Inversion is
/// the algebraically consistent form; AsPrinted multiplies by gamma instead
/// of dividing and exists for comparison runs only.
enum class LevelForm { Inversion, AsPrinted };

/// One completed multiplier update as the detector sees it. The effective
/// subgradient is the realized displacement (lambda' - lambda) / s, so the
/// halfspace algebra below is exact even when projection clipped components;
/// the raw norm is kept because the level inversion needs it.
struct WindowStep {
  Vector multipliers;
  Vector effective_subgradient;
  double stepsize = 0.0;
  double surrogate_value = 0.0;
  double raw_subgradient_norm_sq = 0.0;
};

/// Iterate history since the last level update.
class DetectorWindow {
 public:
  void restart(int next_iteration) {
    steps_.clear();
    start_ = next_iteration;
  }
  void append(WindowStep step) { steps_.push_back(std::move(step)); }
  void drop_front() {
    steps_.erase(steps_.begin());
    ++start_;
  }

  int start_iteration() const { return start_; }
  Index length() const { return static_cast<Index>(steps_.size()); }
  bool empty() const { return steps_.empty(); }
  const WindowStep& step(Index i) const { return steps_[static_cast<std::size_t>(i)]; }
  const std::vector<WindowStep>& steps() const { return steps_; }

 private:
  std::vector<WindowStep> steps_;
  int start_ = 0;
};

/// Row normal . lambda >= offset.
struct Halfspace {
  Vector normal;
  double offset = 0.0;
};

struct HalfspaceSystem {
  Index dimension = 0;
  std::vector<Halfspace> rows;
};

/// One halfspace 2 (lambda - lambda^k) . g >= s |g|^2 per window step; the
/// set of lambda no update moved away from. Tautological rows (g = 0) are
/// dropped.
HalfspaceSystem build_halfspaces(const DetectorWindow& window);

struct FeasibilityOutcome {
  bool feasible = false;
  Vector witness;       // valid when feasible
  double margin = 0.0;  // least violation when infeasible
  long iterations = 0;
};

struct LpOptions {
  double tolerance_scale = 1e-9;  // eps = scale * (1 + max |offset|)
  long iteration_cap_factor = 50;  // cap = factor * (dimension + rows)
};

/// Phase-1 test of the halfspace system; empty systems are feasible with
/// witness 0. The witness satisfies every row within the tolerance.
FeasibilityOutcome lp_feasible(const HalfspaceSystem& system, const LpOptions& options = {});

/// Level inferred from a window that certified divergence: the largest
/// stepsize-formula inversion s |g|^2 / gamma + L across the window.
double compute_level(const DetectorWindow& window, double gamma,
                     LevelForm form = LevelForm::Inversion);

struct Ball {
  Vector center;
  double radius = 0.0;
};

struct BallSystem {
  Index dimension = 0;
  std::vector<Ball> balls;
  Index excluded_steps = 0;  // window steps with 1 - 2 nu s outside (0, 1)
};

/// Apollonius balls of |lambda - lambda^{k+1}| <= c |lambda - lambda^k| with
/// c = sqrt(1 - 2 nu s). Steps with 1 - 2 nu s <= 0 (or c = 1 at nu = 0) are
/// excluded and counted; all excluded is an error.
BallSystem build_ball_system(const DetectorWindow& window, double nu);

struct BallOptions {
  int descent_iterations = 2000;
  double epsilon = 1e-7;
};

/// Approximate intersection test: subgradient descent on
/// max_k (|lambda - o_k| - r_k) from the centroid of centers. A reported
/// witness is exact; "infeasible" may be conservative.
FeasibilityOutcome ball_feasible(const BallSystem& system, const BallOptions& options = {});

struct DetectorOutcome {
  bool fired = false;
  double level = 0.0;
};

struct DetectorConfig {
  DetectorVariant variant = DetectorVariant::Linear;
  double gamma = 0.5;
  double nu = 2.0;
  LevelForm level_form = LevelForm::Inversion;
  LpOptions lp;
  BallOptions ball;
  /// Optional sliding cap on the checked window (0 = unlimited).
  /// Infeasibility over a trailing subwindow certifies just as well, but a
  /// cap below the multiplier dimension can leave the linear system feasible
  /// forever; it exists to bound feasibility work on very long quiet runs.
  Index max_window = 0;
  /// Re-check once the window has grown by one part in this many since the
  /// last feasible check (per-iteration for windows up to the divisor,
  /// amortized beyond). 0 checks every iteration regardless of length.
  Index check_growth_divisor = 0;
};

/// Watches the iterate stream and fires when the multiplier-convergence
/// system over the current window becomes infeasible; each firing yields a
/// fresh level and restarts the window at the next iterate.
class ConvergenceDetector {
 public:
  explicit ConvergenceDetector(DetectorConfig config) : config_(std::move(config)) {}

  DetectorOutcome on_iteration(int k, const Vector& multipliers, const Vector& effective_subgradient,
                               double stepsize, double surrogate_value,
                               double raw_subgradient_norm_sq);

  /// Degenerate single-step refresh for an overtaken or pinched level:
  /// inverts the stepsize formula on the current iterate at the given
  /// stepsize scale.
  double force_refresh(int k, double stepsize_scale, double surrogate_value,
                       double raw_subgradient_norm_sq);

  const DetectorWindow& window() const { return window_; }
  int level_count() const { return level_count_; }
  const DetectorConfig& config() const { return config_; }

 private:
  DetectorConfig config_;
  DetectorWindow window_;
  int level_count_ = 0;
  Index next_check_length_ = 1;
  // A point satisfying every row proves feasibility until a new row cuts it;
  // checks then cost O(dimension) per iteration and full solves run only
  // near genuine firings.
  std::optional<Vector> linear_witness_;
  std::optional<Vector> ball_witness_;
  Vector stale_linear_point_;
};

}  // namespace slblr
