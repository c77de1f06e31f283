#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doco/conformal.hpp"
#include "doco/rng.hpp"

using doco::acp_predict;
using doco::acp_update;
using doco::ConformalState;
using doco::coverage_deviation_bound;
using doco::discounted_coverage_metric;
using doco::DiscountSchedule;
using doco::pinball_loss;
using doco::skewed_quadratic_loss;

TEST_CASE("pinball loss values and subgradients") {
  auto over = pinball_loss(2.0, 1.0, 0.1);
  CHECK(over.value == doctest::Approx(0.1));
  CHECK(over.gradient == doctest::Approx(0.1));

  auto at = pinball_loss(1.0, 1.0, 0.1);
  CHECK(at.value == 0.0);
  CHECK(at.gradient == doctest::Approx(-0.9));  // kink convention

  auto under = pinball_loss(0.0, 1.0, 0.1);
  CHECK(under.value == doctest::Approx(0.9));
  CHECK(under.gradient == doctest::Approx(-0.9));

  CHECK_THROWS_AS(pinball_loss(1.0, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(pinball_loss(1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("skewed quadratic loss") {
  auto at = skewed_quadratic_loss(1.0, 1.0, 0.1);
  CHECK(at.value == 0.0);
  CHECK(at.gradient == 0.0);

  auto over = skewed_quadratic_loss(3.0, 1.0, 0.1);
  CHECK(over.gradient == doctest::Approx(0.2));
  CHECK(over.value == doctest::Approx(0.2));

  // Under-coverage: convexity forces a nonpositive gradient below r*.
  auto under = skewed_quadratic_loss(0.0, 1.0, 0.1);
  CHECK(under.gradient == doctest::Approx(-0.9));
  CHECK(under.value == doctest::Approx(0.45));

  // gradient increasing on a grid (convexity), minimum at r*
  double prev = skewed_quadratic_loss(0.0, 1.0, 0.1).gradient;
  for (int i = 1; i <= 40; ++i) {
    const double r = 3.0 * i / 40.0;
    const double g = skewed_quadratic_loss(r, 1.0, 0.1).gradient;
    CHECK(g >= prev);
    prev = g;
  }
}

TEST_CASE("fresh conformal state predicts radius zero") {
  const auto st = ConformalState::make();
  CHECK(acp_predict(st).r == 0.0);
}

TEST_CASE("nonpositive coverage debt keeps the radius at zero") {
  ConformalState st = ConformalState::make();
  st.core.h = 1.0;  // g_max
  st.core.v = 0.5;
  st.core.s = 0.0;
  CHECK(acp_predict(st).r == 0.0);
  CHECK(acp_predict(st).r_unprojected < 0.0);
  st.core.s = -0.4;
  CHECK(acp_predict(st).r == 0.0);
}

TEST_CASE("prediction formula matches the magnitude learner") {
  ConformalState st = ConformalState::make();
  st.core.h = 1.0;
  const auto pred = acp_predict(st);
  CHECK(pred.r_unprojected == doctest::Approx(-0.25));
  CHECK(pred.r == 0.0);
}

TEST_CASE("first-round update clips to zero and learns the gradient scale") {
  ConformalState st = ConformalState::make();
  st = acp_update(st, -0.9, 0.999);
  CHECK(st.g_max() == doctest::Approx(0.9));
  CHECK(st.s_clip() == 0.0);
  CHECK(st.v_clip() == 0.0);
}

TEST_CASE("in-range update accumulates") {
  // s large enough that the radius is positive, so an over-coverage
  // subgradient is admissible.
  ConformalState st = ConformalState::make();
  st.core.h = 0.9;
  st.core.v = 1.0;
  st.core.s = 5.0;
  REQUIRE(acp_predict(st).r > 0.0);
  st = acp_update(st, 0.1, 1.0);
  CHECK(st.s_clip() == doctest::Approx(4.9));
  CHECK(st.v_clip() == doctest::Approx(1.01));
}

TEST_CASE("invalid subgradient at a pinned radius is rejected") {
  // r = 0 and a positive subgradient cannot come from an admitted loss.
  ConformalState st = ConformalState::make();
  st.core.h = 1.0;  // unprojected prediction is negative, r = 0
  CHECK_THROWS_AS(acp_update(st, 0.5, 1.0), std::logic_error);
}

TEST_CASE("pinball subgradients never trip the contract check") {
  doco::CounterRng rng(88);
  for (double lam : {1.0, 0.999, 0.9}) {
    ConformalState st = ConformalState::make();
    for (int t = 0; t < 2000; ++t) {
      const double r_star = std::abs(rng.next_normal(1.0, 0.5));
      const double r = acp_predict(st).r;
      const auto eval = pinball_loss(r, r_star, 0.1);
      CHECK_NOTHROW(st = acp_update(st, eval.gradient, lam));
      CHECK(st.g_max() <= 0.9 * (1.0 + 1e-12));  // |subgradient| <= max(alpha, 1-alpha)
    }
  }
}

TEST_CASE("coverage metric recurrence") {
  const auto half = DiscountSchedule::constant(0.5);
  const std::vector<double> g{-0.9, 0.1};
  CHECK(discounted_coverage_metric(g, half, 2) == doctest::Approx(0.35));
  CHECK(discounted_coverage_metric(std::vector<double>{0.0, 0.0, 0.0},
                                   DiscountSchedule::constant(0.9), 3) == 0.0);
}

TEST_CASE("undiscounted coverage metric recovers the miscoverage gap") {
  // With lambda = 1 and pinball subgradients, |S*_T| / T equals
  // |empirical miscoverage - alpha|.
  doco::CounterRng rng(19);
  const double alpha = 0.1;
  ConformalState st = ConformalState::make();
  const auto unit = DiscountSchedule::constant(1.0);
  std::vector<double> grads;
  int miss = 0;
  const int horizon = 1500;
  for (int t = 0; t < horizon; ++t) {
    const double r_star = std::abs(rng.next_normal(1.0, 0.3));
    const double r = acp_predict(st).r;
    miss += (r <= r_star) ? 1 : 0;
    const auto eval = pinball_loss(r, r_star, alpha);
    grads.push_back(eval.gradient);
    st = acp_update(st, eval.gradient, 1.0);
  }
  const double metric = discounted_coverage_metric(grads, unit, horizon);
  const double gap = miss - alpha * horizon;
  CHECK(metric == doctest::Approx(gap).epsilon(1e-9));
}

TEST_CASE("coverage deviation stays under the envelope across ceilings") {
  doco::CounterRng rng(2718);
  for (double ceiling : {1.0, 10.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      const double lam = 0.99 + 0.01 * rng.next_uniform();
      ConformalState st = ConformalState::make();
      const int horizon = 1000;
      double s_raw = 0.0;
      double realized_ceiling = 0.0;
      for (int t = 0; t < horizon; ++t) {
        const double r_star = ceiling * rng.next_uniform();
        realized_ceiling = std::max(realized_ceiling, r_star);
        const double r = acp_predict(st).r;
        const auto eval = pinball_loss(r, r_star, 0.1);
        s_raw = lam * s_raw - eval.gradient;
        st = acp_update(st, eval.gradient, lam);
      }
      const double bound =
          coverage_deviation_bound(st.v_clip(), st.g_max(), realized_ceiling, 1.0);
      CHECK(std::abs(s_raw) <= bound);
    }
  }
}

TEST_CASE("radius is never negative along random runs") {
  doco::CounterRng rng(7);
  ConformalState st = ConformalState::make();
  for (int t = 0; t < 3000; ++t) {
    const double r = acp_predict(st).r;
    CHECK(r >= 0.0);
    const double r_star = std::abs(rng.next_normal(2.0, 1.0));
    st = acp_update(st, pinball_loss(r, r_star, 0.1).gradient, 0.999);
  }
}
