#include "slblr/stepsize.hpp"

#include <algorithm>
#include <cmath>

namespace slblr {

namespace {

double polyak_form(double target, double value, double gamma, double g_norm_sq) {
  if (g_norm_sq <= 0.0) throw PolicyError("zero subgradient");
  if (target <= value) throw PolicyError("level not above current value");
  return gamma * (target - value) / g_norm_sq;
}

}  // namespace

double nonsummable_step(const NonSummableState& state, int k) {
  if (k < 1) throw PolicyError("nonsummable stepsize needs k >= 1");
  return state.initial_stepsize / static_cast<double>(k);
}

double polyak_step(const PolyakKnownState& state, double value, double g_norm_sq) {
  return polyak_form(state.q_star, value, state.gamma, g_norm_sq);
}

double polyak_step(const SurrogatePolyakState& state, double value, double g_norm_sq) {
  return polyak_form(state.q_star, value, state.gamma, g_norm_sq);
}

double subgradient_level_step(SubgradientLevelState& state, double q_k, double path_increment,
                              double g_norm_sq) {
  if (g_norm_sq <= 0.0) throw PolicyError("zero subgradient");
  state.path_length += path_increment;

  // Sufficient ascent against the level in force: keep delta, restart the
  // travelled distance.
  if (std::isfinite(state.q_record) &&
      q_k >= state.q_record + state.delta + state.tau * state.delta)
    state.path_length = 0.0;

  state.q_record = std::max(state.q_record, q_k);

  if (state.path_length > state.path_budget) {
    state.delta *= state.beta;
    state.path_length = 0.0;
  }

  const double level = state.q_record + state.delta;
  return state.gamma * (level - q_k) / g_norm_sq;
}

double slr_contraction_alpha(const SlrContractionState& state, int k) {
  if (k < 1) throw PolicyError("contraction stepsize needs k >= 1");
  const double kd = static_cast<double>(k);
  return 1.0 - 1.0 / (state.big_m * std::pow(kd, 1.0 - std::pow(kd, -state.rate)));
}

double slr_contraction_step(SlrContractionState& state, double g_norm, int k) {
  if (g_norm <= 0.0) throw PolicyError("zero subgradient");
  const double alpha = slr_contraction_alpha(state, k);
  const double step = alpha * state.previous_step_norm_product / g_norm;
  state.previous_step_norm_product = alpha * state.previous_step_norm_product;
  return step;
}

double slblr_step(const SlblrState& state, double surrogate_value, double g_norm_sq) {
  if (!state.level) throw PolicyError("no level in force");
  return state.zeta * polyak_form(*state.level, surrogate_value, state.gamma, g_norm_sq);
}

}  // namespace slblr
