#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <set>
#include <vector>

#include "doco/rng.hpp"
#include "doco/schedule.hpp"
#include "doco/streams.hpp"

using doco::DiscountSchedule;
using doco::PiecewiseLinearSpec;
using doco::PiecewiseSegment;
using doco::piecewise_linear_stream;
using doco::QuantileShiftSpec;
using doco::quantile_shift_stream;
using doco::RademacherSpec;
using doco::rademacher_stream;
using doco::StreamSpec;

TEST_CASE("counter rng is reproducible and keyed") {
  doco::CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
  doco::CounterRng u(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.next_uniform();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("rademacher stream hits the variance budget exactly") {
  doco::CounterRng seeds(100);
  for (int k = 0; k < 100; ++k) {
    const double lam = 0.8 + 0.2 * seeds.next_uniform();
    const auto schedule = DiscountSchedule::constant(lam);
    const std::int64_t horizon = 50 + static_cast<std::int64_t>(seeds.next_uniform() * 100);
    const double h_mass = doco::effective_horizon(schedule, horizon);
    const double budget = h_mass * (0.1 + 0.9 * seeds.next_uniform());

    StreamSpec spec;
    spec.kind = RademacherSpec{{3.0, 4.0}, budget, 1.0};
    spec.seed = seeds.next_u64();
    spec.horizon = horizon;
    const auto stream = rademacher_stream(spec, schedule);
    REQUIRE(stream.gradients.size() == static_cast<std::size_t>(horizon));

    doco::DiscountedMoments m;
    for (const auto& g : stream.gradients) {
      const double norm = std::sqrt(g[0] * g[0] + g[1] * g[1]);
      CHECK(norm == doctest::Approx(stream.scale).epsilon(1e-12));
      CHECK(norm <= 1.0 + 1e-12);
      m = doco::update_moments(m, norm, lam);
    }
    CHECK(m.variance == doctest::Approx(budget).epsilon(1e-12));
  }
}

TEST_CASE("rademacher with the full budget emits unit gradients") {
  const auto schedule = DiscountSchedule::constant(0.95);
  StreamSpec spec;
  spec.horizon = 80;
  spec.kind = RademacherSpec{{1.0}, doco::effective_horizon(schedule, 80), 1.0};
  const auto stream = rademacher_stream(spec, schedule);
  CHECK(stream.scale == doctest::Approx(1.0));
  for (const auto& g : stream.gradients) {
    CHECK(std::abs(g[0]) == doctest::Approx(1.0));
  }
}

TEST_CASE("rademacher budget validation") {
  const auto schedule = DiscountSchedule::constant(1.0);
  StreamSpec spec;
  spec.horizon = 10;
  spec.kind = RademacherSpec{{1.0}, 100.0, 1.0};  // > G^2 H_T = 10
  CHECK_THROWS_AS(rademacher_stream(spec, schedule), std::domain_error);
  spec.kind = RademacherSpec{{0.0}, 1.0, 1.0};
  CHECK_THROWS_AS(rademacher_stream(spec, schedule), std::domain_error);
}

TEST_CASE("quantile stream determinism and shape") {
  StreamSpec spec;
  spec.horizon = 2000;
  spec.seed = 7;
  spec.kind = QuantileShiftSpec{QuantileShiftSpec::Mode::kSudden, 500, {1.0, 2.0, 0.5, 3.0}, 0.2};
  const auto a = quantile_shift_stream(spec);
  const auto b = quantile_shift_stream(spec);
  CHECK(a.r_star == b.r_star);
  CHECK(a.ceiling == b.ceiling);
  for (double r : a.r_star) {
    CHECK(r >= 0.0);
    CHECK(r <= a.ceiling);
  }
}

TEST_CASE("noise-free sudden stream is piecewise constant with the right level count") {
  StreamSpec spec;
  spec.horizon = 1700;  // ceil(1700/500) = 4 segments
  spec.kind = QuantileShiftSpec{QuantileShiftSpec::Mode::kSudden, 500, {1.0, 2.0, 0.5, 3.0}, 0.0};
  const auto stream = quantile_shift_stream(spec);
  std::set<double> distinct(stream.r_star.begin(), stream.r_star.end());
  CHECK(distinct.size() == 4);
  CHECK(stream.r_star[0] == doctest::Approx(1.0));
  CHECK(stream.r_star[499] == doctest::Approx(1.0));
  CHECK(stream.r_star[500] == doctest::Approx(2.0));
  CHECK(stream.r_star[1500] == doctest::Approx(3.0));
}

TEST_CASE("gradual mode interpolates between levels") {
  StreamSpec spec;
  spec.horizon = 1000;
  spec.kind = QuantileShiftSpec{QuantileShiftSpec::Mode::kGradual, 500, {0.0, 1.0}, 0.0};
  const auto stream = quantile_shift_stream(spec);
  CHECK(stream.r_star[0] == doctest::Approx(0.0));
  CHECK(stream.r_star[250] == doctest::Approx(0.5));
  CHECK(stream.r_star[499] == doctest::Approx(1.0).epsilon(1e-2));
  // second segment descends back toward the first level (cyclic)
  CHECK(stream.r_star[750] == doctest::Approx(0.5));
}

TEST_CASE("piecewise stream: stationary segment has a zero-loss comparator") {
  StreamSpec spec;
  spec.horizon = 100;
  spec.kind = PiecewiseLinearSpec{{PiecewiseSegment{100, {0.0}, 1.0}}};
  const auto losses = piecewise_linear_stream(spec);
  REQUIRE(losses.size() == 100);
  for (const auto& loss : losses) {
    CHECK(loss.value(std::vector<double>{0.0}) == 0.0);
    CHECK(loss.gradient(std::vector<double>{0.0})[0] == 0.0);
    CHECK(loss.value(std::vector<double>{2.0}) == doctest::Approx(2.0));
    CHECK(loss.gradient(std::vector<double>{2.0})[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("piecewise stream: gradient norms respect segment bounds") {
  StreamSpec spec;
  spec.horizon = 250;
  spec.kind = PiecewiseLinearSpec{
      {PiecewiseSegment{100, {1.0, 0.0}, 0.5}, PiecewiseSegment{100, {-1.0, 0.0}, 2.0}}};
  const auto losses = piecewise_linear_stream(spec);
  doco::CounterRng rng(5);
  for (std::size_t t = 0; t < losses.size(); ++t) {
    std::vector<double> x{4.0 * rng.next_uniform() - 2.0, 4.0 * rng.next_uniform() - 2.0};
    const auto g = losses[t].gradient(x);
    const double norm = std::sqrt(g[0] * g[0] + g[1] * g[1]);
    const double bound = losses[t].scale;
    CHECK(norm <= bound * (1.0 + 1e-12));
  }
  // segments cycle past their combined duration
  CHECK(losses[0].optimum[0] == 1.0);
  CHECK(losses[100].optimum[0] == -1.0);
  CHECK(losses[200].optimum[0] == 1.0);
}

TEST_CASE("opposite optima weight differently across look-back windows") {
  // The normalized comparator loss over an exponentially weighted window
  // depends on the discount: a short memory sees mostly the recent segment.
  StreamSpec spec;
  spec.horizon = 200;
  spec.kind = PiecewiseLinearSpec{
      {PiecewiseSegment{100, {1.0}, 1.0}, PiecewiseSegment{100, {-1.0}, 1.0}}};
  const auto losses = piecewise_linear_stream(spec);
  const std::vector<double> u{-1.0};  // optimal for the second segment

  auto weighted_loss = [&](double lam) {
    double weighted = 0.0;
    double mass = 0.0;
    for (const auto& loss : losses) {
      weighted = lam * weighted + loss.value(u);
      mass = lam * mass + 1.0;
    }
    return weighted / mass;
  };
  const double long_memory = weighted_loss(1.0);
  const double short_memory = weighted_loss(0.9);
  CHECK(long_memory == doctest::Approx(1.0));  // half the rounds cost 2
  CHECK(short_memory < 0.01);                  // recent segment dominates
}
