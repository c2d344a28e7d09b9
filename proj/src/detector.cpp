#include "slblr/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slblr/simplex.hpp"

namespace slblr {

HalfspaceSystem build_halfspaces(const DetectorWindow& window) {
  if (window.empty()) throw ValidationError("halfspace system needs a nonempty window");
  HalfspaceSystem system;
  system.dimension = window.step(0).multipliers.size();
  for (const auto& step : window.steps()) {
    const Vector& g = step.effective_subgradient;
    if (g.squaredNorm() == 0.0) continue;  // tautology, dropped
    Halfspace row;
    row.normal = 2.0 * g;
    row.offset = 2.0 * step.multipliers.dot(g) + step.stepsize * g.squaredNorm();
    system.rows.push_back(std::move(row));
  }
  return system;
}

FeasibilityOutcome lp_feasible(const HalfspaceSystem& system, const LpOptions& options) {
  FeasibilityOutcome outcome;
  if (system.rows.empty()) {
    outcome.feasible = true;
    outcome.witness = Vector::Zero(system.dimension);
    return outcome;
  }

  // Rows are rescaled to unit normals; feasibility is unchanged and the
  // tableau stays well conditioned when step norms differ by orders of
  // magnitude across the window. Zero-normal rows are tautologies or plain
  // contradictions.
  const Index rows = static_cast<Index>(system.rows.size());
  Matrix normals(rows, system.dimension);
  Vector offsets(rows);
  Index kept = 0;
  for (Index k = 0; k < rows; ++k) {
    const auto& row = system.rows[static_cast<std::size_t>(k)];
    const double scale = row.normal.norm();
    if (scale == 0.0) {
      if (row.offset > 0.0) {
        outcome.margin = row.offset;
        return outcome;
      }
      continue;
    }
    normals.row(kept) = row.normal / scale;
    offsets[kept] = row.offset / scale;
    ++kept;
  }
  if (kept == 0) {
    outcome.feasible = true;
    outcome.witness = Vector::Zero(system.dimension);
    return outcome;
  }
  normals.conservativeResize(kept, Eigen::NoChange);
  offsets.conservativeResize(kept);

  const long cap = options.iteration_cap_factor * (system.dimension + rows);
  const PhaseOneResult phase1 = phase_one_least_violation(normals, offsets, cap);
  outcome.iterations = phase1.iterations;

  const double eps = options.tolerance_scale * (1.0 + offsets.cwiseAbs().maxCoeff());
  if (phase1.optimum <= eps) {
    outcome.feasible = true;
    outcome.witness = phase1.point;
  } else {
    outcome.margin = phase1.optimum;
  }
  return outcome;
}

double compute_level(const DetectorWindow& window, double gamma, LevelForm form) {
  if (window.empty()) throw ValidationError("level needs a nonempty window");
  if (gamma <= 0.0) throw ValidationError("gamma must be positive");
  double level = -std::numeric_limits<double>::infinity();
  for (const auto& step : window.steps()) {
    const double product = step.stepsize * step.raw_subgradient_norm_sq;
    const double candidate = form == LevelForm::Inversion
                                 ? product / gamma + step.surrogate_value
                                 : gamma * product + step.surrogate_value;
    level = std::max(level, candidate);
  }
  return level;
}

namespace {

BallSystem collect_ball_rows(const DetectorWindow& window, double nu) {
  BallSystem system;
  system.dimension = window.step(0).multipliers.size();
  for (const auto& step : window.steps()) {
    const double c_sq = 1.0 - 2.0 * nu * step.stepsize;
    if (c_sq <= 0.0 || c_sq >= 1.0) {
      ++system.excluded_steps;
      continue;
    }
    const Vector& from = step.multipliers;
    const Vector to = from + step.stepsize * step.effective_subgradient;
    // |x - to| <= c |x - from| is the ball centered at (to - c^2 from)/(1 - c^2)
    // with radius c |to - from| / (1 - c^2).
    Ball ball;
    ball.center = (to - c_sq * from) / (1.0 - c_sq);
    ball.radius = std::sqrt(c_sq) * (to - from).norm() / (1.0 - c_sq);
    system.balls.push_back(std::move(ball));
  }
  return system;
}

}  // namespace

BallSystem build_ball_system(const DetectorWindow& window, double nu) {
  if (window.empty()) throw ValidationError("ball system needs a nonempty window");
  BallSystem system = collect_ball_rows(window, nu);
  if (system.balls.empty())
    throw ValidationError("nu too large for stepsizes: every window step excluded");
  return system;
}

FeasibilityOutcome ball_feasible(const BallSystem& system, const BallOptions& options) {
  if (system.balls.empty()) throw ValidationError("ball feasibility needs a nonempty system");

  const auto worst = [&](const Vector& x, Index* which) {
    double value = -std::numeric_limits<double>::infinity();
    for (Index k = 0; k < static_cast<Index>(system.balls.size()); ++k) {
      const auto& ball = system.balls[static_cast<std::size_t>(k)];
      const double v = (x - ball.center).norm() - ball.radius;
      if (v > value) {
        value = v;
        *which = k;
      }
    }
    return value;
  };

  Vector x = Vector::Zero(system.dimension);
  for (const auto& ball : system.balls) x += ball.center;
  x /= static_cast<double>(system.balls.size());

  double max_radius = 0.0;
  for (const auto& ball : system.balls) max_radius = std::max(max_radius, ball.radius);
  const double step_scale = std::max(max_radius, 1e-12);

  Index active = 0;
  Vector best_x = x;
  double best_value = worst(x, &active);
  FeasibilityOutcome outcome;
  for (int t = 1; t <= options.descent_iterations && best_value > options.epsilon; ++t) {
    const double value = worst(x, &active);
    if (value < best_value) {
      best_value = value;
      best_x = x;
    }
    const auto& ball = system.balls[static_cast<std::size_t>(active)];
    const Vector offset = x - ball.center;
    const double norm = offset.norm();
    if (norm == 0.0) break;  // at a center; the active ball has radius <= 0
    x -= (step_scale / std::sqrt(static_cast<double>(t))) * (offset / norm);
    outcome.iterations = t;
  }

  if (best_value <= options.epsilon) {
    outcome.feasible = true;
    outcome.witness = best_x;
  } else {
    outcome.margin = best_value;
  }
  return outcome;
}

namespace {

/// Subgradient descent on the largest normalized halfspace violation from a
/// failed witness; cheap recovery that usually avoids a full LP re-solve.
std::optional<Vector> descend_to_halfspace_witness(const HalfspaceSystem& system,
                                                   const Vector& start, int iterations) {
  Vector x = start;
  const auto worst = [&](const Vector& point, Index* which) {
    double value = -std::numeric_limits<double>::infinity();
    for (Index r = 0; r < static_cast<Index>(system.rows.size()); ++r) {
      const auto& row = system.rows[static_cast<std::size_t>(r)];
      const double norm = row.normal.norm();
      if (norm == 0.0) continue;
      const double v = (row.offset - row.normal.dot(point)) / norm;
      if (v > value) {
        value = v;
        *which = r;
      }
    }
    return value;
  };
  Index active = -1;
  double value = worst(x, &active);
  if (value <= 0.0) return x;
  const double scale = std::max(value, 1e-12);
  for (int t = 1; t <= iterations; ++t) {
    const auto& row = system.rows[static_cast<std::size_t>(active)];
    x += (2.0 * scale / std::sqrt(static_cast<double>(t))) * row.normal / row.normal.norm();
    value = worst(x, &active);
    if (value <= 0.0) return x;
  }
  return std::nullopt;
}

bool witness_satisfies_halfspace(const Vector& witness, const WindowStep& step) {
  const Vector& g = step.effective_subgradient;
  const double norm_sq = g.squaredNorm();
  if (norm_sq == 0.0) return true;
  return 2.0 * (witness - step.multipliers).dot(g) >= step.stepsize * norm_sq;
}

bool witness_inside_ball(const Vector& witness, const WindowStep& step, double nu) {
  const double c_sq = 1.0 - 2.0 * nu * step.stepsize;
  if (c_sq <= 0.0 || c_sq >= 1.0) return true;  // excluded step, no ball row
  const Vector to = step.multipliers + step.stepsize * step.effective_subgradient;
  return (witness - to).squaredNorm() <= c_sq * (witness - step.multipliers).squaredNorm();
}

}  // namespace

DetectorOutcome ConvergenceDetector::on_iteration(int k, const Vector& multipliers,
                                                  const Vector& effective_subgradient,
                                                  double stepsize, double surrogate_value,
                                                  double raw_subgradient_norm_sq) {
  DetectorOutcome outcome;
  if (config_.variant == DetectorVariant::Off) return outcome;

  WindowStep step{multipliers, effective_subgradient, stepsize, surrogate_value,
                  raw_subgradient_norm_sq};
  // Dropping rows never invalidates a witness; a new row can. The cut
  // witness still serves as a descent start for the next full check.
  if (linear_witness_ && !witness_satisfies_halfspace(*linear_witness_, step)) {
    stale_linear_point_ = std::move(*linear_witness_);
    linear_witness_.reset();
  }
  if (ball_witness_ && !witness_inside_ball(*ball_witness_, step, config_.nu))
    ball_witness_.reset();
  window_.append(std::move(step));
  if (config_.max_window > 0)
    while (window_.length() > config_.max_window) window_.drop_front();
  if (window_.length() < next_check_length_) return outcome;

  const auto linear_infeasible = [&] {
    if (linear_witness_) return false;
    const HalfspaceSystem system = build_halfspaces(window_);
    if (stale_linear_point_.size() == system.dimension) {
      if (auto recovered = descend_to_halfspace_witness(system, stale_linear_point_, 200)) {
        linear_witness_ = std::move(*recovered);
        return false;
      }
    }
    const FeasibilityOutcome lp = lp_feasible(system, config_.lp);
    if (lp.feasible) linear_witness_ = lp.witness;
    return !lp.feasible;
  };

  bool infeasible = false;
  if (config_.variant == DetectorVariant::Linear) {
    infeasible = linear_infeasible();
  } else {
    // The ball rows strengthen the base conditions step by step; steps whose
    // strengthening is undefined (1 - 2 nu s outside (0, 1)) still obey the
    // plain halfspace form, so the sound linear certificate runs alongside.
    if (!ball_witness_) {
      const BallSystem system = collect_ball_rows(window_, config_.nu);
      if (!system.balls.empty()) {
        const FeasibilityOutcome feas = ball_feasible(system, config_.ball);
        if (feas.feasible) ball_witness_ = feas.witness;
        infeasible = !feas.feasible;
      }
    }
    if (!infeasible) infeasible = linear_infeasible();
  }

  if (infeasible) {
    outcome.fired = true;
    outcome.level = compute_level(window_, config_.gamma, config_.level_form);
    ++level_count_;
    window_.restart(k + 1);
    next_check_length_ = 1;
    linear_witness_.reset();
    ball_witness_.reset();
  } else if (config_.check_growth_divisor > 0) {
    next_check_length_ =
        window_.length() + std::max<Index>(1, window_.length() / config_.check_growth_divisor);
  }
  return outcome;
}

double ConvergenceDetector::force_refresh(int k, double stepsize_scale, double surrogate_value,
                                          double raw_subgradient_norm_sq) {
  const double product = stepsize_scale * raw_subgradient_norm_sq;
  const double level = config_.level_form == LevelForm::Inversion
                           ? product / config_.gamma + surrogate_value
                           : config_.gamma * product + surrogate_value;
  ++level_count_;
  // The refresh happens while iterate k is still in flight, so the new
  // window begins with this iterate's step.
  window_.restart(k);
  return level;
}

}  // namespace slblr
