#include <cmath>

#include "helpers.hpp"
#include "ribound/impute.hpp"
#include "ribound/random.hpp"

using namespace ribound;

TEST_CASE("no-effects null fills both columns with observed outcomes") {
  const Schedule s = impute_schedule(fixtures::example16(), EffectSpec::constant(0.0));
  CHECK(s.y0 == fixtures::kExample16Y);
  CHECK(s.y1 == fixtures::kExample16Y);
  CHECK(s.sharp_zero());
}

TEST_CASE("constant -1 shifts the missing column") {
  const Schedule s = impute_schedule(fixtures::example16(), EffectSpec::constant(-1.0));
  CHECK(s.y0[8] == doctest::Approx(3.98));  // unit 9, treated
  CHECK(s.y1[8] == 2.98);
  CHECK(s.y0[0] == -0.90);  // unit 1, control
  CHECK(s.y1[0] == doctest::Approx(-1.90));
}

TEST_CASE("per-unit non-superiority null") {
  const Schedule s = impute_schedule(fixtures::example16(), fixtures::example16_bound());
  CHECK(s.y1[1] == doctest::Approx(-1.82));  // unit 2, control, tau0 = -2
  CHECK(s.y0[11] == doctest::Approx(2.98));  // unit 12, treated, tau0 = -1
  CHECK(s.y0[1] == 0.18);
  CHECK(s.y1[11] == 1.98);
}

TEST_CASE("imputation checks the null length") {
  CHECK_ERRC(impute_schedule(fixtures::example16(), EffectSpec::per_unit({0.0, 1.0})), Errc::LengthMismatch);
  CHECK_ERRC(impute_variant(fixtures::example16(), EffectSpec::per_unit({0.0}), ImputationVariant::ControlBaseline),
             Errc::LengthMismatch);
}

TEST_CASE("round trip, tau recovery and monotonicity on random data") {
  random::Stream rng(3, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(15);
    std::vector<std::uint8_t> w(n);
    std::vector<double> y(n), tau(n), tau_hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = static_cast<std::uint8_t>(i % 2);
      y[i] = 10.0 * rng.normal();
      tau[i] = 5.0 * rng.normal();
      tau_hi[i] = tau[i] + rng.uniform();
    }
    const Dataset d = make_dataset(w, y);
    const Schedule s = impute_schedule(d, EffectSpec::per_unit(tau));
    CHECK(s.realized(w) == y);  // bit-exact
    for (std::size_t i = 0; i < n; ++i) CHECK(s.tau(i) == doctest::Approx(tau[i]).epsilon(1e-12));
    const Schedule hi = impute_schedule(d, EffectSpec::per_unit(tau_hi));
    const auto order = compare_schedules(s, hi);
    CHECK((order == ScheduleOrdering::LessOrEqual || order == ScheduleOrdering::Equal));
  }
}

TEST_CASE("baseline variants") {
  const Dataset d = fixtures::example16();
  for (auto v : {ImputationVariant::ControlBaseline, ImputationVariant::TreatedBaseline}) {
    const Schedule zero = impute_variant(d, EffectSpec::constant(0.0), v);
    const Schedule both = impute_schedule(d, EffectSpec::constant(0.0));
    CHECK(zero.y0 == both.y0);
    CHECK(zero.y1 == both.y1);
  }
  const Schedule c = impute_variant(d, fixtures::example16_bound(), ImputationVariant::ControlBaseline);
  CHECK(c.sharp_zero());
  CHECK(c.y0[11] == doctest::Approx(2.98));  // treated unit moved to its control value
  CHECK(c.y0[1] == 0.18);                    // control unit unchanged
  const Schedule t = impute_variant(d, fixtures::example16_bound(), ImputationVariant::TreatedBaseline);
  CHECK(t.sharp_zero());
  CHECK(t.y0[1] == doctest::Approx(-1.82));  // control unit moved to its treated value
  CHECK(t.y0[11] == 1.98);
  CHECK(parse_imputation("control-baseline") == ImputationVariant::ControlBaseline);
  CHECK(std::string(to_string(ImputationVariant::TreatedBaseline)) == "treated-baseline");
  CHECK_ERRC(parse_imputation("rosenbaum"), Errc::InvalidArgument);
}
