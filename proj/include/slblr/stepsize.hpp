#pragma once

#include <limits>
#include <optional>
#include <variant>

#include "slblr/types.hpp"

namespace slblr {

/// s^k = s0 / k, the classic diverging-sum schedule.
struct NonSummableState {
  double initial_stepsize = 0.5;
};

/// Polyak's rule with the optimal dual value supplied externally.
struct PolyakKnownState {
  double q_star = 0.0;
  double gamma = 1.0;  // in (0, 2)
};

/// Polyak's rule on surrogate values; gamma < 1 keeps the bound valid when
/// the relaxed problem is not solved to optimality.
struct SurrogatePolyakState {
  double q_star = 0.0;
  double gamma = 0.5;  // in (0, 1)
};

/// Path-based level rule: the level is the running record plus delta; delta
/// halves when the multipliers travel R without sufficient ascent.
struct SubgradientLevelState {
  double gamma = 1.0;
  double delta = 100.0;
  double beta = 0.5;
  double tau = 0.5;
  double path_budget = 60.0;  // R
  double q_record = -std::numeric_limits<double>::infinity();
  double path_length = 0.0;
};

/// Contraction-mapping rule: consecutive multiplier displacements shrink by
/// alpha_k = 1 - 1/(M * k^(1 - 1/k^r)).
struct SlrContractionState {
  double big_m = 40.0;  // M >= 1
  double rate = 0.05;   // r in [0, 1]
  double previous_step_norm_product = 0.0;  // s^{k-1} * |g^{k-1}|
};

/// Level-based rule: the Polyak form with the inferred level in place of the
/// optimal dual value, damped by zeta.
struct SlblrState {
  double gamma = 0.5;
  double zeta = 1.0 / 1.5;  // in (0, 1]
  std::optional<double> level;
};

using PolicyState = std::variant<NonSummableState, PolyakKnownState, SurrogatePolyakState,
                                 SubgradientLevelState, SlrContractionState, SlblrState>;

/// s0 / k for k >= 1.
double nonsummable_step(const NonSummableState& state, int k);

/// gamma * (q_star - value) / g_norm_sq. Throws PolicyError when the target
/// does not exceed the current value or the subgradient vanishes.
double polyak_step(const PolyakKnownState& state, double value, double g_norm_sq);
double polyak_step(const SurrogatePolyakState& state, double value, double g_norm_sq);

/// One step of the path-based level rule. path_increment is the multiplier
/// displacement caused by the previous update (0 on the first call). The
/// ascent test uses the level in force before the record update; the
/// stepsize uses the refreshed record, so the result is always positive.
double subgradient_level_step(SubgradientLevelState& state, double q_k, double path_increment,
                              double g_norm_sq);

/// alpha_k for the contraction rule; lies in [0, 1) for M >= 1, k >= 1.
double slr_contraction_alpha(const SlrContractionState& state, int k);

/// s^k = alpha_k * s^{k-1} |g^{k-1}| / |g^k|, via the stored product.
/// Updates the stored product so displacements contract exactly by alpha_k.
double slr_contraction_step(SlrContractionState& state, double g_norm, int k);

/// zeta * gamma * (level - surrogate_value) / g_norm_sq. Requires a level in
/// force strictly above the surrogate value; the engine refreshes the level
/// through the detector before calling otherwise.
double slblr_step(const SlblrState& state, double surrogate_value, double g_norm_sq);

}  // namespace slblr
