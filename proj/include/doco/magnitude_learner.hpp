#pragma once

#include <cstdint>
#include <optional>
#include <utility>

namespace doco {

/// Which flavor of the 1D FTRL magnitude learner a state drives.
///
///  - kDiscounted:   hint-clipped learner with per-round discounts.
///  - kUndiscounted: same update with the discount pinned at 1 (the clip
///                   ranges coincide there, so one code path serves both).
///  - kHintFree:     simplified variant without the Lipschitz hint; never
///                   clips, starts from a positive variance seed.
///  - kHinted:       subroutine form used by the vector learner; gradients
///                   arrive pre-clipped and the hint is supplied externally.
enum class MagnitudeVariant { kDiscounted, kUndiscounted, kHintFree, kHinted };

/// Sufficient statistics of the 1D magnitude learner on [0, inf).
struct MagnitudeState {
  double v = 0.0;    // discounted clipped-gradient variance
  double s = 0.0;    // discounted negated clipped-gradient sum
  double h = 0.0;    // discounted Lipschitz hint (unused by kHintFree)
  double eps = 1.0;  // confidence hyperparameter, > 0
  MagnitudeVariant variant = MagnitudeVariant::kDiscounted;
  bool saturated = false;  // latched when a prediction hit the exp clamp

  static MagnitudeState make(MagnitudeVariant variant, double eps = 1.0);
  /// kHintFree requires a strictly positive variance seed.
  static MagnitudeState make_hint_free(double eps = 1.0, double v0 = kDefaultHintFreeV0);

  static constexpr double kDefaultHintFreeV0 = 1e-6;
};

struct MagnitudePrediction {
  double x = 0.0;              // projected onto [0, inf)
  double x_unprojected = 0.0;  // raw FTRL output
  bool saturated = false;      // exp clamp engaged for this evaluation
};

/// Per-round audit record of one update.
struct MagnitudeUpdateRecord {
  double g = 0.0;              // raw gradient
  double g_clip = 0.0;         // after clipping to +-lambda_prev * h
  double g_tilde = 0.0;        // surrogate gradient actually accumulated
  double x_unprojected = 0.0;  // prediction the update was scored against
  double x = 0.0;
  double lambda_prev = 1.0;
};

/// FTRL prediction from the current statistics. With no hint information yet
/// (h = 0) the prediction is 0; the hint-free variant always evaluates
/// eps * erfi(s / (2 sqrt(v))). Saturation of the exp clamp is reported, not
/// thrown: a diverging state should surface as a run warning.
MagnitudePrediction magnitude_predict(const MagnitudeState& state);

/// One round: score the current prediction against gradient g, clip by the
/// hint window, zero the surrogate gradient when it would drag an already
/// negative unprojected iterate further out, then decay-and-accumulate.
/// `hint` is required for kHinted (the externally maintained Lipschitz
/// estimate) and rejected for every other variant. kUndiscounted requires
/// lambda_prev == 1.
std::pair<MagnitudeState, MagnitudeUpdateRecord> magnitude_update(
    const MagnitudeState& state, double g, double lambda_prev,
    std::optional<double> hint = std::nullopt);

/// Inputs for the adaptive regret envelope of the discounted magnitude
/// learner: realized discounted moments, the comparator, and the split of
/// iterate-magnitude history at a stability window of length tau.
struct MagnitudeBoundArgs {
  double variance = 0.0;        // V_T over the raw gradients
  double lipschitz = 0.0;       // G_T over the raw gradients
  double comparator = 0.0;      // u >= 0
  double eps = 1.0;             // confidence hyperparameter
  std::int64_t tau = 1;         // stability window length, in [1, T]
  double forgetting = 1.0;      // prod of lambda over the window
  double max_x_recent = 0.0;    // max prediction inside the window
  double max_x_old = 0.0;       // max prediction before the window
  double lipschitz_old = 0.0;   // G_{T-tau}
};

/// eps*sqrt(V + 2GS + 16G^2) + u(S + G) + max_recent*G + forgetting*max_old*G_old
/// with S = 8G(1+sqrt(log(2u/eps+1)))^2 + 2 sqrt(V+16G^2)(1+sqrt(log(2u/eps+1))).
/// Every admissible tau yields a valid envelope; the harness checks them all.
double magnitude_regret_bound(const MagnitudeBoundArgs& args);

}  // namespace doco
