#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "doco/magnitude_learner.hpp"

namespace doco {

/// Direction learner on the d-dimensional unit L2 ball: projected gradient
/// descent with step 2 / sqrt(V_t) over the discounted gradient variance of
/// whatever it is fed. Holds position until the first nonzero gradient.
struct BallLearnerState {
  std::vector<double> w;
  double variance = 0.0;

  explicit BallLearnerState(std::size_t dim) : w(dim, 0.0) {}
};

BallLearnerState ball_step(const BallLearnerState& state, std::span<const double> g,
                           double lambda_prev);

/// Adaptive learner on R^d via polar decomposition: a hinted magnitude
/// learner for |x| and a unit-ball learner for the direction, sharing one
/// discounted Lipschitz hint that rescales incoming gradients into the clip
/// range. The inductive bias x* shifts the coordinate frame and is never
/// forgotten; losses are evaluated by the caller in the unshifted frame, so
/// gradient values are unaffected by the shift.
struct VectorLearnerState {
  MagnitudeState magnitude;
  BallLearnerState ball;
  double h = 0.0;  // shared discounted Lipschitz hint
  std::vector<double> bias;

  static VectorLearnerState make(std::size_t dim, double eps = 1.0,
                                 std::vector<double> bias = {});
};

/// bias + w * y, where y is the projected magnitude prediction.
std::vector<double> vector_predict(const VectorLearnerState& state);

/// One round: refresh the shared hint with ||g||, rescale g into the old clip
/// range, and feed the scalar component <g_clip, w> (with the new hint) and
/// g_clip to the two sub-learners under the same discount.
VectorLearnerState vector_update(const VectorLearnerState& state, std::span<const double> g,
                                 double lambda_prev);

}  // namespace doco
