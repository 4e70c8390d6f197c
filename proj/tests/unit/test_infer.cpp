#include <cmath>

#include "helpers.hpp"
#include "ribound/infer.hpp"
#include "ribound/random.hpp"

using namespace ribound;

namespace {

Dataset random_dataset(random::Stream& rng, std::size_t n, std::size_t nt, double shift) {
  std::vector<std::uint8_t> w(n, 0);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = i < nt;
    y[i] = rng.normal() + (w[i] ? shift : 0.0);
  }
  return make_dataset(w, y);
}

}  // namespace

TEST_CASE("bounded test on the illustration rejects the no-positive-effects null") {
  const Dataset d = fixtures::example16();
  const Design design = Design::from_dataset(d);
  const auto r = test_bounded(d, EffectSpec::constant(0.0), Statistic::diff_means(), design,
                              Direction::NonSuperiority, 0.05, ExactMode{});
  CHECK(fixtures::three_decimals(r.p.p) == 0.040);
  CHECK(r.rejected);
  CHECK_FALSE(r.at_boundary);
  const auto sharp = p_value(d, EffectSpec::constant(0.0), Statistic::diff_means(), design, ExactMode{}, Tail::Upper);
  CHECK(r.p.p == sharp.p.p);
  CHECK(r.p.count == sharp.p.count);
  CHECK(r.observed == sharp.observed);
}

TEST_CASE("a saturating bound is never rejected") {
  const Dataset d = fixtures::example16();
  const auto r = test_bounded(d, EffectSpec::constant(100.0), Statistic::diff_means(), Design::from_dataset(d),
                              Direction::NonSuperiority, 0.05, ExactMode{});
  CHECK(r.p.p == 1.0);
  CHECK_FALSE(r.rejected);
}

TEST_CASE("p equal to alpha is a flagged rejection") {
  const Dataset d = fixtures::example16();
  const double alpha = 522.0 / 12870.0;
  const auto r = test_bounded(d, EffectSpec::constant(0.0), Statistic::diff_means(), Design::from_dataset(d),
                              Direction::NonSuperiority, alpha, ExactMode{});
  CHECK(r.p.p == alpha);
  CHECK(r.rejected);
  CHECK(r.at_boundary);
}

TEST_CASE("contract errors") {
  const Dataset d = fixtures::example16();
  const Design design = Design::from_dataset(d);
  CHECK_ERRC(test_bounded(d, EffectSpec::constant(0.0), Statistic::welch_t(), design, Direction::NonSuperiority, 0.05,
                          ExactMode{}),
             Errc::NonEIStatistic);
  CHECK_ERRC(invert_ci(d, Statistic::welch_t(), design, Target::MaxEffect, 0.1, ExactMode{}), Errc::NonEIStatistic);
  CHECK_ERRC(test_simultaneous(d, Statistic::welch_t(), design, ExactMode{}), Errc::NonEIStatistic);
  CHECK_ERRC(test_bounded(d, EffectSpec::constant(0.0), Statistic::diff_means(), design, Direction::NonSuperiority,
                          1.0, ExactMode{}),
             Errc::InvalidArgument);
  CHECK_ERRC(parse_direction("two-sided"), Errc::InvalidArgument);
  CHECK(parse_direction("non-inferiority") == Direction::NonInferiority);
  CHECK(tail_for(Direction::NonInferiority) == Tail::Lower);
}

TEST_CASE("non-inferiority uses the lower tail") {
  const Dataset d = fixtures::example16();
  const Design design = Design::from_dataset(d);
  const auto r = test_bounded(d, EffectSpec::constant(0.0), Statistic::diff_means(), design,
                              Direction::NonInferiority, 0.05, ExactMode{});
  const auto low = p_value(d, EffectSpec::constant(0.0), Statistic::diff_means(), design, ExactMode{}, Tail::Lower);
  CHECK(r.p.p == low.p.p);
  CHECK_FALSE(r.rejected);
}

TEST_CASE("max-effect interval: audit grid, monotone trace, no gap") {
  const Dataset d = fixtures::example16();
  const Design design = Design::from_dataset(d);
  for (const auto& stat : {Statistic::diff_means(), Statistic::stephenson(6), Statistic::rank_sum()}) {
    const double alpha = 0.10;
    const CIResult ci = invert_ci(d, stat, design, Target::MaxEffect, alpha, ExactMode{});
    REQUIRE(std::isfinite(ci.bound));
    for (std::size_t k = 1; k < ci.grid.size(); ++k) CHECK(ci.grid[k].p >= ci.grid[k - 1].p);
    CHECK(ci.grid.size() == 101);
    const double p_at_bound =
        p_value(d, EffectSpec::constant(ci.bound), stat, design, ExactMode{}, Tail::Upper).p.p;
    CHECK(p_at_bound <= alpha);
    for (int k = -200; k <= 200; ++k) {
      const double tau0 = ci.bound + 0.02 * k;
      const double p = p_value(d, EffectSpec::constant(tau0), stat, design, ExactMode{}, Tail::Upper).p.p;
      if (p > alpha) CHECK(tau0 >= ci.bound);
      if (tau0 >= ci.bound + ci.tolerance) CHECK(p > alpha);
    }
  }
}

TEST_CASE("min-effect interval mirrors the max-effect interval on negated data") {
  random::Stream rng(43, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const Dataset d = random_dataset(rng, 10, 5, 0.5);
    const Design design = Design::from_dataset(d);
    for (const auto& stat : {Statistic::diff_means(), Statistic::rank_sum()}) {
      const CIResult lo = invert_ci(d, stat, design, Target::MinEffect, 0.2, ExactMode{});
      const CIResult hi = invert_ci(d.negated(), stat, design, Target::MaxEffect, 0.2, ExactMode{});
      CHECK(lo.bound == -hi.bound);
      REQUIRE(lo.grid.size() == hi.grid.size());
      for (std::size_t k = 0; k < lo.grid.size(); ++k) CHECK(lo.grid[k].p == hi.grid[k].p);
    }
  }
  const Dataset d = fixtures::example16();
  const CIResult up = invert_ci(d, Statistic::stephenson(4), Design::from_dataset(d), Target::MinEffect, 0.2,
                                ExactMode{});
  const double p = p_value(d, EffectSpec::constant(up.bound), Statistic::stephenson(4), Design::from_dataset(d),
                           ExactMode{}, Tail::Lower)
                       .p.p;
  CHECK(p <= 0.2);
}

TEST_CASE("outer limits from a declared outcome range") {
  const Dataset d = make_dataset(std::vector<std::uint8_t>{1, 0, 1, 0}, std::vector<double>{7.0, 2.0, 5.0, 3.0});
  CHECK(outer_limit(d, Target::MaxEffect, {0.0, 100.0}) == 98.0);
  CHECK(outer_limit(d, Target::MinEffect, {0.0, 100.0}) == -95.0);
  CHECK_ERRC(outer_limit(d, Target::MaxEffect, {0.0, 5.0}), Errc::InvalidArgument);
  GridConfig grid;
  grid.outcome_range = std::make_pair(0.0, 100.0);
  const CIResult ci = invert_ci(d, Statistic::diff_means(), Design::from_dataset(d), Target::MaxEffect, 0.2,
                                ExactMode{}, grid);
  CHECK(ci.outer == 98.0);
}

TEST_CASE("paired fixture interval has a trace") {
  std::vector<RawRow> rows;
  const double t[] = {62, 18, 55, 33, 71, 24, 47, 29};
  const double c[] = {41, 27, 49, 35, 38, 30, 44, 36};
  for (int k = 0; k < 8; ++k) {
    rows.push_back({"t" + std::to_string(k), 1, t[k], "b" + std::to_string(k)});
    rows.push_back({"c" + std::to_string(k), 0, c[k], "b" + std::to_string(k)});
  }
  const Dataset d = validate_dataset(rows);
  const Design design = Design::from_dataset(d);
  const CIResult ci = invert_ci(d, Statistic::stephenson(6), design, Target::MaxEffect, 0.10, ExactMode{});
  CHECK(std::isfinite(ci.bound));
  CHECK_FALSE(ci.grid.empty());
  CHECK_FALSE(ci.bisection.empty());
  CHECK(p_value(d, EffectSpec::constant(0.0), Statistic::stephenson(6), design, ExactMode{}, Tail::Upper).p.total ==
        256);
}

TEST_CASE("simultaneous test") {
  SUBCASE("mirror-symmetric data gives equal tails") {
    const Dataset d = make_dataset(std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0},
                                   std::vector<double>{1.5, -2.0, 0.5, -1.5, 2.0, -0.5});
    const auto r = test_simultaneous(d, Statistic::diff_means(), Design::from_dataset(d), ExactMode{});
    CHECK(r.p_up.p == r.p_down.p);
    CHECK(r.p_iu == r.p_up.p);
  }
  SUBCASE("treated all above control saturates the lower tail") {
    const Dataset d = make_dataset(std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0},
                                   std::vector<double>{5.0, 6.0, 7.0, 1.0, 2.0, 3.0});
    const auto r = test_simultaneous(d, Statistic::rank_sum(), Design::from_dataset(d), ExactMode{});
    CHECK(r.p_down.p == 1.0);
    CHECK(r.p_iu == 1.0);
    CHECK(r.p_up.p == doctest::Approx(1.0 / 20));
  }
}

TEST_CASE("monotonicity: consistent uptake is not flagged") {
  random::Stream rng(47, 0);
  std::vector<std::uint8_t> w(40);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    w[i] = i % 2;
    y[i] = rng.normal() + (w[i] ? 1.0 : 0.0);
  }
  const Dataset d = make_dataset(w, y);
  const auto r = test_monotonicity(d, Statistic::diff_means(), Design::from_dataset(d), InstrumentEffect::Increases,
                                   0.05, MonteCarloMode{1, 5000, false});
  CHECK(r.direction == Direction::NonInferiority);
  CHECK(r.p.p > 0.5);
  CHECK_FALSE(r.rejected);
}

TEST_CASE("monotonicity: a defier pocket is found by a tail threshold but not by the mean") {
  // n = 200, instrument raises uptake by 1 for 85% of units and lowers it by 3 for 15%.
  const std::size_t n = 200;
  int threshold_rejects = 0, mean_rejects = 0;
  const int datasets = 20;
  for (int rep = 0; rep < datasets; ++rep) {
    random::Stream rng(53, static_cast<std::uint64_t>(rep));
    std::vector<std::uint8_t> w(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = i % 2;
      const bool defier = rng.uniform() < 0.15;
      const double y0 = rng.normal();
      y[i] = w[i] ? y0 + (defier ? -3.0 : 1.0) : y0;
    }
    const Dataset d = make_dataset(w, y);
    const Design design = Design::from_dataset(d);
    const MonteCarloMode mc{static_cast<std::uint64_t>(rep), 2000, true};
    threshold_rejects += test_monotonicity(d, Statistic::threshold_proportion(-2.0), design,
                                           InstrumentEffect::Increases, 0.05, mc)
                             .rejected;
    mean_rejects +=
        test_monotonicity(d, Statistic::diff_means(), design, InstrumentEffect::Increases, 0.05, mc).rejected;
  }
  CHECK(threshold_rejects >= 16);
  CHECK(mean_rejects <= 2);
}
